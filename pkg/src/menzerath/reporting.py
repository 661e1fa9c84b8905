"""Serialization of reports and plot-ready overlay data."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .corpus import LengthDistribution
from .fitting import MA, PARAM_NAMES, SMMA, FitReport
from .model import MaParams, SmmaParams, ma_eval, smma_eval
from .thermo import ComparisonTable, PairComparison, ThermoReport

__all__ = [
    "PlotSeries", "fit_report_to_dict", "fit_report_from_dict", "dump_fit_report", "load_fit_report",
    "thermo_to_dict", "thermo_from_dict", "dump_thermo", "load_thermo",
    "comparison_to_dict", "comparison_from_dict", "format_comparison_tsv", "parse_comparison_tsv",
    "render_comparison", "build_plot_series", "format_plot_data", "parse_plot_data", "emit_plot_data",
    "render_table1", "round_half_up", "to_json",
]


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path: str | Path, text: str) -> Path:
    p = Path(path)
    try:
        p.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc.strerror or exc}") from exc
    return p


def _read(path: str | Path) -> str:
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {p}: {exc.strerror or exc}") from exc


# -- fit reports ------------------------------------------------------------------

def fit_report_to_dict(rep: FitReport) -> dict:
    names = PARAM_NAMES[rep.model_kind]
    params = dict(zip(names, map(float, rep.params.as_array())))
    if rep.model_kind == SMMA:
        params["omega"] = rep.params.omega
    return {
        "model_kind": rep.model_kind,
        "params": params,
        "std_errors": dict(zip(names, rep.std_errors)),
        "predicted": [[l, y] for l, y in rep.predicted],
        "sse": rep.sse,
        "r": rep.r,
        "r_squared": rep.r_squared,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "normalizable": rep.normalizable,
    }


def fit_report_from_dict(obj: dict) -> FitReport:
    kind = obj["model_kind"]
    if kind not in (MA, SMMA):
        raise ValueError(f"unknown model_kind {kind!r}")
    names = PARAM_NAMES[kind]
    p = obj["params"]
    params = MaParams(*(p[k] for k in names)) if kind == MA else \
        SmmaParams(*(p[k] for k in names), omega=int(p["omega"]))
    return FitReport(
        model_kind=kind,
        params=params,
        std_errors=tuple(float(obj["std_errors"][k]) for k in names),
        predicted=tuple((int(l), float(y)) for l, y in obj["predicted"]),
        sse=float(obj["sse"]),
        r=float(obj["r"]),
        r_squared=float(obj["r_squared"]),
        iterations=int(obj["iterations"]),
        converged=bool(obj["converged"]),
        normalizable=bool(obj["normalizable"]),
    )


def dump_fit_report(rep: FitReport, path) -> Path:
    return _write(path, to_json(fit_report_to_dict(rep)))


def load_fit_report(path) -> FitReport:
    return fit_report_from_dict(json.loads(_read(path)))


# -- thermo reports and comparisons --------------------------------------------------

def thermo_to_dict(rep: ThermoReport) -> dict:
    return asdict(rep)


def thermo_from_dict(obj: dict) -> ThermoReport:
    kw = {f.name: obj[f.name] for f in fields(ThermoReport)}
    kw["l_max_used"] = int(kw["l_max_used"])
    return ThermoReport(**kw)


def dump_thermo(rep: ThermoReport, path) -> Path:
    return _write(path, to_json(thermo_to_dict(rep)))


def load_thermo(path) -> ThermoReport:
    return thermo_from_dict(json.loads(_read(path)))


def comparison_to_dict(table: ComparisonTable) -> dict:
    return {
        "reports": [{"label": label, **asdict(rep)} for label, rep in table.rows()],
        "pairs": [asdict(pair) for pair in table.pairs],
    }


def comparison_from_dict(obj: dict) -> ComparisonTable:
    labels = tuple(r["label"] for r in obj["reports"])
    reports = tuple(thermo_from_dict(r) for r in obj["reports"])
    pairs = tuple(PairComparison(**p) for p in obj["pairs"])
    return ComparisonTable(labels, reports, pairs)


_THERMO_FIELDS = [f.name for f in fields(ThermoReport)]
_PAIR_FIELDS = [f.name for f in fields(PairComparison)]


def format_comparison_tsv(table: ComparisonTable) -> str:
    lines = ["# reports", "\t".join(["label"] + _THERMO_FIELDS)]
    for label, rep in table.rows():
        lines.append("\t".join([label] + [_fmt(getattr(rep, k)) for k in _THERMO_FIELDS]))
    lines += ["# pairs", "\t".join(_PAIR_FIELDS)]
    for pair in table.pairs:
        lines.append("\t".join(_fmt(getattr(pair, k)) for k in _PAIR_FIELDS))
    return "\n".join(lines) + "\n"


def parse_comparison_tsv(text: str) -> ComparisonTable:
    section, header = None, None
    labels, reports, pairs = [], [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            section, header = line[1:].strip(), None
            continue
        cells = line.split("\t")
        if header is None:
            header = cells
            continue
        row = dict(zip(header, cells))
        if section == "reports":
            labels.append(row.pop("label"))
            row = {k: (v if k == "entropy_basis" else float(v)) for k, v in row.items()}
            reports.append(thermo_from_dict(row))
        elif section == "pairs":
            pairs.append(PairComparison(**{k: (v if k in ("first", "second") else float(v))
                                            for k, v in row.items()}))
        else:
            raise ValueError(f"row outside a section: {line!r}")
    return ComparisonTable(tuple(labels), tuple(reports), tuple(pairs))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_comparison(table: ComparisonTable) -> str:
    """Console rendering, 4 decimals."""
    width = max(12, *(len(l) for l in table.labels))
    cols = [("T", "temperature"), ("mu", "chemical_potential"), ("S", "entropy"),
            ("F", "free_energy"), ("mean_len", "mean_length")]
    out = [f"{'corpus':<{width}}" + "".join(f"{h:>16}" for h, _ in cols)]
    for label, rep in table.rows():
        out.append(f"{label:<{width}}" + "".join(f"{getattr(rep, k):>16.4f}" for _, k in cols))
    for p in table.pairs:
        out.append(f"{p.first} vs {p.second}: free energy relative difference "
                   f"{p.free_energy_rel_diff:.4f} ({100 * p.free_energy_rel_diff:.1f}%)")
    return "\n".join(out) + "\n"


# -- plot data ----------------------------------------------------------------------

@dataclass(frozen=True)
class PlotSeries:
    label: str
    kind: str
    points: tuple[tuple[float, float], ...]


PLOT_KINDS = ("observed", "ma_predicted", "smma_predicted")


def _params_of(x):
    return x.params if isinstance(x, FitReport) else x


def _check_fitted_on(d: LengthDistribution, rep):
    if isinstance(rep, FitReport) and tuple(l for l, _ in rep.predicted) != tuple(l for l, _ in d.states):
        raise ValueError(f"{rep.model_kind} report was not fitted on this distribution")


def build_plot_series(d: LengthDistribution, ma, smma, grid_step: float = 0.25,
                      label: str | None = None) -> list[PlotSeries]:
    if not d.states:
        raise ValueError("distribution has no states; nothing to plot")
    if not grid_step > 0:
        raise ValueError("grid step must be positive")
    _check_fitted_on(d, ma)
    _check_fitted_on(d, smma)
    label = d.source_label if label is None else label
    observed = {l: n for l, n in d.states}
    lo, hi = d.states[0][0], d.max_length
    grid = [lo + k * grid_step for k in range(int(math.floor((hi - lo) / grid_step + 1e-9)) + 1)]
    xs = sorted(set(observed) | {x for x in grid if x not in observed})
    arr = np.array(xs, dtype=float)
    ma_y = np.atleast_1d(ma_eval(_params_of(ma), arr))
    smma_y = np.atleast_1d(smma_eval(_params_of(smma), arr))
    return [
        PlotSeries(label, "observed", tuple((l, float(observed[l])) for l in xs if l in observed)),
        PlotSeries(label, "ma_predicted", tuple(zip(xs, map(float, ma_y)))),
        PlotSeries(label, "smma_predicted", tuple(zip(xs, map(float, smma_y)))),
    ]


def _fmt_l(x) -> str:
    return str(x) if isinstance(x, int) else repr(float(x))


def format_plot_data(series: list[PlotSeries], timestamp: bool = False) -> str:
    by_kind = {s.kind: s for s in series}
    observed = dict(by_kind["observed"].points)
    lines = []
    if series[0].label:
        lines.append(f"# source={series[0].label}")
    if timestamp:
        lines.append(f"# generated={datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    lines.append("l\tobserved\tma\tsmma")
    for (l, ma_y), (_, sm_y) in zip(by_kind["ma_predicted"].points, by_kind["smma_predicted"].points):
        obs = _fmt(observed[l]) if l in observed else ""
        lines.append(f"{_fmt_l(l)}\t{obs}\t{ma_y!r}\t{sm_y!r}")
    return "\n".join(lines) + "\n"


def parse_plot_data(text: str) -> list[PlotSeries]:
    label = ""
    obs, ma, sm = [], [], []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key == "source":
                label = value
            continue
        if not header_seen:
            if line.split("\t") != ["l", "observed", "ma", "smma"]:
                raise ValueError(f"bad plot header at line {lineno}")
            header_seen = True
            continue
        cells = line.split("\t")
        if len(cells) != 4:
            raise ValueError(f"malformed plot row at line {lineno}")
        l = float(cells[0]) if "." in cells[0] else int(cells[0])
        if cells[1]:
            obs.append((l, float(cells[1])))
        ma.append((l, float(cells[2])))
        sm.append((l, float(cells[3])))
    return [PlotSeries(label, "observed", tuple(obs)), PlotSeries(label, "ma_predicted", tuple(ma)),
            PlotSeries(label, "smma_predicted", tuple(sm))]


def emit_plot_data(d: LengthDistribution, ma, smma, dest, grid_step: float = 0.25,
                   timestamp: bool = False) -> Path:
    """Write observed and both model curves to ``dest`` as TSV.

    Rows at observed lengths carry the observed count; dense-grid rows leave
    it empty.
    """
    return _write(dest, format_plot_data(build_plot_series(d, ma, smma, grid_step), timestamp))


# -- observed vs predicted table --------------------------------------------------

def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def render_table1(d: LengthDistribution, ma, smma) -> str:
    """Observed vs. rounded MA/SMMA predictions per length.

    ``ma`` and ``smma`` are fit reports or bare parameter sets.
    """
    _check_fitted_on(d, ma)
    _check_fitted_on(d, smma)
    l = d.lengths
    ma_y = np.atleast_1d(ma_eval(_params_of(ma), l))
    sm_y = np.atleast_1d(smma_eval(_params_of(smma), l))
    rows = [("length", "observed", "MA", "SMMA")]
    for (li, n), a, s in zip(d.states, ma_y, sm_y):
        rows.append((str(li), f"{n:,}", f"{round_half_up(a):,}", f"{round_half_up(s):,}"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    out = []
    if d.source_label:
        out.append(d.source_label)
    for r in rows:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    return "\n".join(out) + "\n"
