"""Distinct-word length distributions: tokenization, distillation and file I/O.

A distribution file is UTF-8 TSV::

    # source=Brown Corpus (English)
    # alphabet=en26
    # omega=26
    # N=40235
    # L=314158
    length	count
    1	26
    2	142
    ...

Comment lines are optional; ``N`` and ``L`` are cross-checked against the
rows when present.
"""
from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "AlphabetSpec", "TokenPolicy", "LengthDistribution", "DistributionFormatError",
    "ALPHABETS", "get_alphabet", "tokenize", "distill", "load_distribution",
    "save_distribution", "parse_distribution", "format_distribution",
    "distribution_to_dict", "distribution_from_dict", "bundled_path", "BUNDLED",
]


class DistributionFormatError(ValueError):
    """Raised when a distribution file violates the format or its invariants."""


@dataclass(frozen=True)
class AlphabetSpec:
    """Letter inventory of a language; ``omega`` is the structural degeneracy.

    ``letters`` may be empty for an omega-only alphabet, which is enough for
    fitting but cannot drive tokenization.
    """

    name: str
    omega: int
    letters: str = ""
    case_map: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if int(self.omega) != self.omega or self.omega < 1:
            raise ValueError(f"omega must be a positive integer, got {self.omega!r}")
        if self.letters:
            if len(set(self.letters)) != len(self.letters):
                raise ValueError(f"alphabet {self.name!r} has duplicate letters")
            if len(self.letters) != self.omega:
                raise ValueError(
                    f"alphabet {self.name!r}: omega={self.omega} but {len(self.letters)} letters")

    def fold(self, ch: str) -> str:
        return self.case_map.get(ch) or ch.lower()


ALPHABETS = {
    "en26": AlphabetSpec("en26", 26, "abcdefghijklmnopqrstuvwxyz"),
    # dotted/dotless i fold per Turkish rules, not Python's default lower()
    "tr29": AlphabetSpec("tr29", 29, "abcçdefgğhıijklmnoöprsştuüvyz",
                         case_map={"I": "ı", "İ": "i"}),
}


def get_alphabet(name: str | None = None, *, letters: str | None = None,
                 omega: int | None = None) -> AlphabetSpec:
    """Resolve a preset name, an explicit letter string, or a bare omega."""
    if name is not None:
        try:
            spec = ALPHABETS[name]
        except KeyError:
            raise KeyError(f"unknown alphabet {name!r} (known: {', '.join(sorted(ALPHABETS))})")
        if omega is not None and omega != spec.omega:
            raise ValueError(f"omega={omega} inconsistent with alphabet {name} (omega={spec.omega})")
        return spec
    if letters:
        folded = "".join(dict.fromkeys(ch.lower() for ch in letters))
        if len(folded) != len(letters):
            raise ValueError("letters contain duplicates after case folding")
        if omega is not None and omega != len(folded):
            raise ValueError(f"omega={omega} inconsistent with {len(folded)} letters")
        return AlphabetSpec(f"custom{len(folded)}", len(folded), folded)
    if omega is not None:
        return AlphabetSpec(f"omega{omega}", omega)
    raise ValueError("no alphabet given")


@dataclass(frozen=True)
class TokenPolicy:
    """How to treat symbols outside the alphabet.

    ``split`` breaks a token at every out-of-alphabet symbol, ``drop`` discards
    any whitespace-delimited token containing one.
    """

    case_fold: bool = True
    non_letter: str = "split"

    def __post_init__(self):
        if self.non_letter not in ("split", "drop"):
            raise ValueError(f"non_letter must be 'split' or 'drop', got {self.non_letter!r}")


def tokenize(text: str, alphabet: AlphabetSpec, policy: TokenPolicy = TokenPolicy()) -> list[str]:
    if not alphabet.letters:
        raise ValueError(f"alphabet {alphabet.name!r} has no letter set; cannot tokenize")
    letters = set(alphabet.letters)
    text = unicodedata.normalize("NFC", text)
    words: list[str] = []
    for chunk in text.split():
        if policy.case_fold:
            chunk = "".join(alphabet.fold(ch) for ch in chunk)
        if policy.non_letter == "drop":
            # trailing/leading punctuation is not part of the word
            core = chunk.strip(_PUNCT_STRIP)
            if core and all(ch in letters for ch in core):
                words.append(core)
            continue
        cur = []
        for ch in chunk:
            if ch in letters:
                cur.append(ch)
            elif cur:
                words.append("".join(cur))
                cur = []
        if cur:
            words.append("".join(cur))
    return words


_PUNCT_STRIP = ".,;:!?\"'()[]{}«»“”‘’…-–—"


@dataclass(frozen=True)
class LengthDistribution:
    """Number of distinct words at each observed length (in letters)."""

    states: tuple[tuple[int, int], ...]
    source_label: str = ""
    alphabet: AlphabetSpec | None = None
    N: int | None = None
    L: int | None = None

    def __post_init__(self):
        states = tuple((int(l), int(n)) for l, n in self.states)
        prev = 0
        for l, n in states:
            if l < 1:
                raise ValueError(f"length must be >= 1, got {l}")
            if l <= prev:
                raise ValueError(f"lengths must be strictly increasing ({prev} then {l})")
            if n < 0:
                raise ValueError(f"negative count {n} at length {l}")
            prev = l
        N = sum(n for _, n in states)
        L = sum(l * n for l, n in states)
        if self.N is not None and self.N != N:
            raise ValueError(f"stored N={self.N} but counts sum to {N}")
        if self.L is not None and self.L != L:
            raise ValueError(f"stored L={self.L} but lengths*counts sum to {L}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([l for l, _ in self.states], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([n for _, n in self.states], dtype=float)

    @property
    def omega(self) -> int | None:
        return self.alphabet.omega if self.alphabet is not None else None

    @property
    def max_length(self) -> int:
        return self.states[-1][0] if self.states else 0

    def as_dict(self) -> dict[int, int]:
        return dict(self.states)

    def __len__(self):
        return len(self.states)


def distill(words: Iterable[str], alphabet: AlphabetSpec | None = None,
            source_label: str = "") -> LengthDistribution:
    """Collapse a word sequence to the length histogram of its distinct words."""
    by_length: dict[int, int] = {}
    for w in set(words):
        if w:
            by_length[len(w)] = by_length.get(len(w), 0) + 1
    return LengthDistribution(tuple(sorted(by_length.items())), source_label, alphabet)


# -- file format ---------------------------------------------------------------

def format_distribution(d: LengthDistribution) -> str:
    lines = []
    if d.source_label:
        lines.append(f"# source={d.source_label}")
    if d.alphabet is not None:
        lines.append(f"# alphabet={d.alphabet.name}")
        lines.append(f"# omega={d.alphabet.omega}")
        if d.alphabet.letters and d.alphabet.name not in ALPHABETS:
            lines.append(f"# letters={d.alphabet.letters}")
    lines.append(f"# N={d.N}")
    lines.append(f"# L={d.L}")
    lines.append("length\tcount")
    lines.extend(f"{l}\t{n}" for l, n in d.states)
    return "\n".join(lines) + "\n"


def _int_field(text: str, what: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DistributionFormatError(f"malformed {what} {text!r} at file line {lineno}")


def parse_distribution(text: str, source: str = "<string>") -> LengthDistribution:
    meta: dict[str, str] = {}
    states: list[tuple[int, int]] = []
    header_seen = False
    row = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line.split("\t") != ["length", "count"]:
                raise DistributionFormatError(
                    f"{source}: expected header 'length<TAB>count' at file line {lineno}")
            header_seen = True
            continue
        row += 1
        fields = line.split("\t")
        if len(fields) != 2:
            raise DistributionFormatError(
                f"{source}: malformed row at line {row} (file line {lineno}): expected 2 fields")
        l = _int_field(fields[0], "length", lineno)
        n = _int_field(fields[1], "count", lineno)
        if l < 1:
            raise DistributionFormatError(
                f"{source}: invalid length {l} at line {row} (file line {lineno})")
        if states and l <= states[-1][0]:
            raise DistributionFormatError(
                f"{source}: non-increasing length at line {row} (file line {lineno})")
        if n < 0:
            raise DistributionFormatError(
                f"{source}: negative count at line {row} (file line {lineno})")
        states.append((l, n))
    if not header_seen:
        raise DistributionFormatError(f"{source}: missing header 'length<TAB>count'")

    alphabet = None
    omega = _int_field(meta["omega"], "omega", 0) if "omega" in meta else None
    name = meta.get("alphabet")
    try:
        if name in ALPHABETS:
            alphabet = get_alphabet(name, omega=omega)
        elif "letters" in meta:
            alphabet = AlphabetSpec(name or f"custom{len(meta['letters'])}",
                                    omega if omega is not None else len(meta["letters"]),
                                    meta["letters"])
        elif omega is not None:
            alphabet = AlphabetSpec(name or f"omega{omega}", omega)
    except ValueError as exc:
        raise DistributionFormatError(f"{source}: {exc}")

    N = _int_field(meta["N"], "N", 0) if "N" in meta else None
    L = _int_field(meta["L"], "L", 0) if "L" in meta else None
    total_n = sum(n for _, n in states)
    total_l = sum(l * n for l, n in states)
    if N is not None and N != total_n:
        raise DistributionFormatError(f"{source}: N mismatch: header says {N}, rows sum to {total_n}")
    if L is not None and L != total_l:
        raise DistributionFormatError(f"{source}: L mismatch: header says {L}, rows sum to {total_l}")
    return LengthDistribution(tuple(states), meta.get("source", ""), alphabet)


BUNDLED = ("brown", "metu")


def bundled_path(name: str) -> Path:
    """Path of a bundled length distribution (``brown`` or ``metu``)."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled dataset {name!r}")
    return Path(str(resources.files("menzerath") / "data" / f"{name}.tsv"))


def _resolve(path: str | Path) -> Path:
    p = Path(path)
    if not p.exists() and p.suffix == ".tsv" and p.stem in BUNDLED and p.parent.name in ("data", ""):
        return bundled_path(p.stem)
    return p


def load_distribution(path: str | Path) -> LengthDistribution:
    """Read a distribution file. ``data/brown.tsv`` and ``data/metu.tsv`` fall
    back to the bundled copies when no such file exists locally."""
    p = _resolve(path)
    return parse_distribution(p.read_text(encoding="utf-8"), str(path))


def save_distribution(d: LengthDistribution, path: str | Path) -> Path:
    p = Path(path)
    p.write_text(format_distribution(d), encoding="utf-8", newline="\n")
    return p


def distribution_to_dict(d: LengthDistribution) -> dict:
    return {
        "source_label": d.source_label,
        "alphabet": None if d.alphabet is None else {
            "name": d.alphabet.name, "omega": d.alphabet.omega, "letters": d.alphabet.letters},
        "N": d.N,
        "L": d.L,
        "states": [[l, n] for l, n in d.states],
    }


def distribution_from_dict(obj: dict) -> LengthDistribution:
    a = obj.get("alphabet")
    alphabet = None
    if a is not None:
        alphabet = ALPHABETS.get(a["name"]) or AlphabetSpec(a["name"], a["omega"], a.get("letters", ""))
    return LengthDistribution(tuple((l, n) for l, n in obj["states"]), obj.get("source_label", ""),
                              alphabet, obj.get("N"), obj.get("L"))


def distribution_to_json(d: LengthDistribution) -> str:
    return json.dumps(distribution_to_dict(d), indent=2, ensure_ascii=False) + "\n"


def states_from_counts(counts: Sequence[int], start: int = 1) -> tuple[tuple[int, int], ...]:
    return tuple((start + i, int(n)) for i, n in enumerate(counts))
