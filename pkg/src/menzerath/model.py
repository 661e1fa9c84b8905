"""MA and SMMA length-distribution models.

MA:    n(l) = A * l**b * exp(-c*l)
SMMA:  n(l) = omega**l * exp(phi) * l**alpha * exp(-theta*l)

The two coincide under alpha = b, exp(phi) = A, theta = c + ln(omega).
Exponents are combined in log space and exponentiated last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "MaParams", "SmmaParams", "OccupationVector", "InfeasibleError",
    "ma_eval", "smma_eval", "log_ma", "log_smma", "ma_to_smma", "smma_to_ma",
    "degeneracy", "log_degeneracy", "log_disorder", "maximize_disorder_bruteforce",
    "boltzmann_occupations",
]


@dataclass(frozen=True)
class MaParams:
    A: float
    b: float
    c: float

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"MA amplitude A must be positive, got {self.A!r}")

    @property
    def normalizable(self) -> bool:
        return self.c > 0

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.b, self.c], dtype=float)


@dataclass(frozen=True)
class SmmaParams:
    phi: float
    alpha: float
    theta: float
    omega: int

    def __post_init__(self):
        if int(self.omega) != self.omega or self.omega < 1:
            raise ValueError(f"omega must be a positive integer, got {self.omega!r}")

    @property
    def normalizable(self) -> bool:
        """True iff the sum over all lengths l >= 1 converges."""
        return self.theta > math.log(self.omega)

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.alpha, self.theta], dtype=float)


def _check_lengths(l):
    arr = np.asarray(l, dtype=float)
    if np.any(arr < 1):
        raise ValueError("lengths must be >= 1")
    return arr


def log_ma(p: MaParams, l):
    l = _check_lengths(l)
    return math.log(p.A) + p.b * np.log(l) - p.c * l


def log_smma(p: SmmaParams, l):
    l = _check_lengths(l)
    return l * math.log(p.omega) + p.phi + p.alpha * np.log(l) - p.theta * l


def _exp(x):
    with np.errstate(over="ignore"):
        out = np.exp(x)
    return float(out) if np.ndim(out) == 0 else out


def ma_eval(p: MaParams, l):
    """A * l**b * exp(-c*l); ``l`` may be a scalar or an array."""
    l = _check_lengths(l)
    # A stays outside the exponential so flat models are exact
    return p.A * _exp(p.b * np.log(l) - p.c * l)


def smma_eval(p: SmmaParams, l):
    """Returns +inf where the log-value exceeds the float range."""
    return _exp(log_smma(p, l))


def ma_to_smma(p: MaParams, omega: int) -> SmmaParams:
    return SmmaParams(phi=math.log(p.A), alpha=p.b, theta=p.c + math.log(omega), omega=omega)


def smma_to_ma(p: SmmaParams) -> MaParams:
    return MaParams(A=math.exp(p.phi), b=p.alpha, c=p.theta - math.log(p.omega))


def log_degeneracy(l, omega: int, alpha: float):
    l = _check_lengths(l)
    return l * math.log(omega) + alpha * np.log(l)


def degeneracy(l, omega: int, alpha: float):
    """Weighted count of accessible states at length l: omega**l * l**alpha."""
    if isinstance(l, (int, np.integer)):
        if l < 1:
            raise ValueError("lengths must be >= 1")
        # exact integer power while it fits in a double
        power = omega ** int(l)
        if power < 2 ** 53:
            return float(power) * float(l) ** alpha
    return _exp(log_degeneracy(l, omega, alpha))


# -- microstate counting ---------------------------------------------------------

@dataclass(frozen=True)
class OccupationVector:
    """Occupations n_i of length states l_i for a small system."""

    states: tuple[tuple[int, int], ...]
    omega: int
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple((int(l), int(n)) for l, n in self.states))
        for l, n in self.states:
            if l < 1 or n < 0:
                raise ValueError(f"invalid state ({l}, {n})")

    @property
    def occupations(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.states)

    @property
    def N(self) -> int:
        return sum(n for _, n in self.states)

    @property
    def L(self) -> int:
        return sum(l * n for l, n in self.states)


def log_disorder(v: OccupationVector) -> float:
    """ln Omega = ln N! + sum_i [n_i ln g_i - ln n_i!], with exact log-factorials."""
    total = math.lgamma(v.N + 1)
    for l, n in v.states:
        if n:
            g = l * math.log(v.omega) + v.alpha * math.log(l)
            total += n * g - math.lgamma(n + 1)
    return total


class InfeasibleError(ValueError):
    pass


def maximize_disorder_bruteforce(lengths: Sequence[int], N: int, L: int,
                                 omega: int, alpha: float = 0.0) -> OccupationVector:
    """Most probable occupation of three length states by exhaustive search.

    With three states the constraints sum(n) = N and sum(l*n) = L leave one
    free integer, so every feasible vector is visited. Ties go to the
    lexicographically smallest vector.
    """
    if len(lengths) != 3:
        raise ValueError("brute force needs exactly 3 length states")
    l1, l2, l3 = (int(x) for x in lengths)
    if not 1 <= l1 < l2 < l3:
        raise ValueError("lengths must be strictly increasing and >= 1")
    best = None
    best_val = -math.inf
    for n1 in range(N + 1):
        rest = L - l1 * n1 - l2 * (N - n1)
        n3, rem = divmod(rest, l3 - l2)
        n2 = N - n1 - n3
        if rem or n3 < 0 or n2 < 0:
            continue
        v = OccupationVector(((l1, n1), (l2, n2), (l3, n3)), omega, alpha)
        val = log_disorder(v)
        # n1 ascends, so a strict improvement keeps the smallest tied vector
        if best is None or val > best_val + 1e-12 * (1.0 + abs(best_val)):
            best, best_val = v, val
    if best is None:
        raise InfeasibleError(f"no feasible occupation for N={N}, L={L}, lengths={tuple(lengths)}")
    return best


def boltzmann_occupations(lengths: Sequence[int], N: float, L: float,
                          omega: int, alpha: float = 0.0) -> tuple[np.ndarray, SmmaParams]:
    """Occupations of the SMMA form that satisfy both moment constraints.

    Solves sum n_i = N and sum l_i n_i = L for (phi, theta). The mean length
    is monotone in theta, so a bracketing root finder on theta suffices.
    """
    l = np.asarray(lengths, dtype=float)
    target = L / N
    if not l.min() < target < l.max():
        raise InfeasibleError(f"mean length {target} outside ({l.min()}, {l.max()})")
    g = log_degeneracy(l, omega, alpha)

    def mean_gap(theta):
        w = g - theta * l
        w = np.exp(w - w.max())
        return float(np.dot(l, w) / w.sum()) - target

    lo, hi = -1.0, 1.0
    while mean_gap(lo) < 0:
        lo *= 2
    while mean_gap(hi) > 0:
        hi *= 2
    theta = brentq(mean_gap, lo, hi, xtol=1e-14, rtol=1e-14)
    logw = g - theta * l
    m = logw.max()
    log_z = m + math.log(np.exp(logw - m).sum())
    phi = math.log(N) - log_z
    return N * np.exp(logw - log_z), SmmaParams(phi, alpha, theta, omega)
