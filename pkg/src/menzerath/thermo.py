"""Thermodynamic characterization of a fitted distinct-word organization.

Boltzmann's constant is fixed to 1, so temperature is 1/theta and the free
energy is -ln(Z)/theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .corpus import LengthDistribution
from .model import SmmaParams, log_degeneracy, smma_eval

__all__ = [
    "ThermoReport", "ComparisonTable", "PairComparison", "ThermoError", "DivergentSeriesError",
    "temperature", "chemical_potential", "partition_function", "entropy", "free_energy",
    "mean_length", "thermo_report", "compare", "ENTROPY_BASES",
]

ENTROPY_BASES = ("observed_counts", "predicted_counts")
AUTO = "auto"
_AUTO_REL_TOL = 1e-15
_AUTO_MAX_TERMS = 1_000_000


class ThermoError(ValueError):
    pass


class DivergentSeriesError(ThermoError):
    """Partition sum over unbounded lengths does not converge (theta <= ln omega)."""


def _require_positive_theta(p: SmmaParams):
    if not p.theta > 0:
        raise ThermoError(f"theta must be positive for a physical temperature, got {p.theta}")


def temperature(p: SmmaParams) -> float:
    _require_positive_theta(p)
    return 1.0 / p.theta


def chemical_potential(p: SmmaParams) -> float:
    _require_positive_theta(p)
    return p.phi / p.theta


def _log_terms(p: SmmaParams, l: np.ndarray) -> np.ndarray:
    return log_degeneracy(l, p.omega, p.alpha) - p.theta * l


def _auto_lmax(p: SmmaParams) -> int:
    if not p.normalizable:
        raise DivergentSeriesError(
            f"theta={p.theta:.6g} <= ln(omega)={math.log(p.omega):.6g}: partition sum diverges")
    # log term is concave in l, so past its peak the terms only shrink
    peak = p.alpha / (p.theta - math.log(p.omega)) if p.alpha > 0 else 1.0
    log_w = math.log(p.omega)
    running = -math.inf
    prev = -math.inf
    for l in range(1, _AUTO_MAX_TERMS + 1):
        t = l * log_w + p.alpha * math.log(l) - p.theta * l
        running = float(np.logaddexp(running, t))
        if l > peak and t < prev and t < running + math.log(_AUTO_REL_TOL):
            return l
        prev = t
    raise DivergentSeriesError(f"partition sum not converged after {_AUTO_MAX_TERMS} terms")


def partition_function(p: SmmaParams, l_max: int | str) -> tuple[float, float]:
    """Z = sum_{l=1..l_max} omega**l * l**alpha * exp(-theta*l), returned with ln Z.

    ``l_max="auto"`` extends the sum until the next term drops below 1e-15 Z.
    Z itself may overflow to inf; ln Z stays finite.
    """
    l_max = _auto_lmax(p) if l_max == AUTO else int(l_max)
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    l = np.arange(1, l_max + 1, dtype=float)
    log_z = float(logsumexp(_log_terms(p, l)))
    with np.errstate(over="ignore"):
        z = float(np.exp(log_z))
    return z, log_z


def free_energy(p: SmmaParams, l_max: int | str) -> float:
    _require_positive_theta(p)
    _, log_z = partition_function(p, l_max)
    return -log_z / p.theta


def entropy(d: LengthDistribution, p: SmmaParams, basis: str = "observed_counts") -> float:
    """S = N {(ln N - 1) + sum_i (n_i/N) [ln(omega**l_i l_i**alpha / n_i) + 1]}.

    ``basis`` picks the n_i: the observed counts of ``d`` or the model's
    predictions at the lengths of ``d``. Zero counts contribute nothing.
    """
    if basis not in ENTROPY_BASES:
        raise ValueError(f"unknown entropy basis {basis!r}")
    l = d.lengths
    n = d.counts if basis == "observed_counts" else np.asarray(smma_eval(p, l), dtype=float)
    keep = n > 0
    l, n = l[keep], n[keep]
    N = float(n.sum())
    if N <= 0:
        raise ThermoError("entropy undefined for an empty distribution (N = 0)")
    inner = log_degeneracy(l, p.omega, p.alpha) - np.log(n) + 1.0
    return N * ((math.log(N) - 1.0) + float(np.sum(n / N * inner)))


def mean_length(d: LengthDistribution) -> float:
    if d.N < 1:
        raise ThermoError("mean length undefined for an empty distribution")
    return d.L / d.N


@dataclass(frozen=True)
class ThermoReport:
    temperature: float
    chemical_potential: float
    log_partition: float
    partition: float
    entropy: float
    free_energy: float
    mean_length: float
    l_max_used: int
    entropy_basis: str


def thermo_report(d: LengthDistribution, p: SmmaParams, l_max: int | str | None = None,
                  basis: str = "observed_counts") -> ThermoReport:
    """Everything at once. ``l_max`` defaults to the longest observed length."""
    if l_max is None:
        l_max = d.max_length
    if l_max == AUTO:
        l_max = _auto_lmax(p)
    z, log_z = partition_function(p, l_max)
    return ThermoReport(
        temperature=temperature(p),
        chemical_potential=chemical_potential(p),
        log_partition=log_z,
        partition=z,
        entropy=entropy(d, p, basis),
        free_energy=-log_z / p.theta,
        mean_length=mean_length(d),
        l_max_used=int(l_max),
        entropy_basis=basis,
    )


# -- comparison -------------------------------------------------------------------

@dataclass(frozen=True)
class PairComparison:
    first: str
    second: str
    free_energy_rel_diff: float
    temperature_diff: float
    chemical_potential_diff: float
    entropy_rel_diff: float
    mean_length_diff: float


@dataclass(frozen=True)
class ComparisonTable:
    labels: tuple[str, ...]
    reports: tuple[ThermoReport, ...]
    pairs: tuple[PairComparison, ...]

    def rows(self):
        for label, rep in zip(self.labels, self.reports):
            yield label, rep


def _rel_diff(a: float, b: float) -> float:
    """|a - b| / max(|a|, |b|): 0.5 for (-2, -4)."""
    denom = max(abs(a), abs(b))
    return 0.0 if denom == 0 else abs(a - b) / denom


def compare(reports) -> ComparisonTable:
    """Side-by-side table plus one comparison per pair of reports.

    Plain differences are second - first; relative differences are
    symmetric, |a - b| / max(|a|, |b|).
    """
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("comparison needs at least two reports")
    pairs = []
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            (la, a), (lb, b) = reports[i], reports[j]
            pairs.append(PairComparison(
                first=la,
                second=lb,
                free_energy_rel_diff=_rel_diff(a.free_energy, b.free_energy),
                temperature_diff=b.temperature - a.temperature,
                chemical_potential_diff=b.chemical_potential - a.chemical_potential,
                entropy_rel_diff=_rel_diff(a.entropy, b.entropy),
                mean_length_diff=b.mean_length - a.mean_length,
            ))
    return ComparisonTable(tuple(l for l, _ in reports), tuple(r for _, r in reports), tuple(pairs))
