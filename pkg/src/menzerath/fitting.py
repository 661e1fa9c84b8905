"""Levenberg-Marquardt fitting of the MA and SMMA models to length distributions."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus import LengthDistribution
from .model import MaParams, SmmaParams, ma_to_smma

__all__ = [
    "FitConfig", "FitReport", "FitError", "SingularSystemError", "LMResult",
    "initial_guess_ma", "fit_ma", "fit_smma", "fit_model", "goodness", "jacobian",
    "finite_difference_jacobian", "model_values", "levenberg_marquardt", "report_for_params",
]

log = logging.getLogger(__name__)

MA, SMMA = "MA", "SMMA"
PARAM_NAMES = {MA: ("A", "b", "c"), SMMA: ("phi", "alpha", "theta")}


class FitError(ValueError):
    pass


class SingularSystemError(FitError):
    """The normal equations have no unique solution."""


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 1000
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 10.0
    tol_chisq_rel: float = 1e-10
    tol_param_rel: float = 1e-8
    jacobian_mode: str = "analytic"
    # extension points; the defaults reproduce the published fits
    damping_mode: str = "marquardt"
    weighting: str = "unweighted"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("initial_damping", "damping_up", "damping_down", "tol_chisq_rel", "tol_param_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.jacobian_mode not in ("analytic", "finite_difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")
        if self.damping_mode not in ("marquardt", "identity"):
            raise ValueError(f"unknown damping_mode {self.damping_mode!r}")
        if self.weighting not in ("unweighted", "poisson"):
            raise ValueError(f"unknown weighting {self.weighting!r}")


@dataclass(frozen=True)
class FitReport:
    model_kind: str
    params: MaParams | SmmaParams
    std_errors: tuple[float, float, float]
    predicted: tuple[tuple[int, float], ...]
    sse: float
    r: float
    r_squared: float
    iterations: int
    converged: bool
    normalizable: bool
    # accepted-step SSE trace; diagnostic only, not serialized
    history: tuple[float, ...] = field(default=(), compare=False, repr=False)

    @property
    def param_names(self) -> tuple[str, str, str]:
        return PARAM_NAMES[self.model_kind]

    @property
    def predicted_values(self) -> np.ndarray:
        return np.array([y for _, y in self.predicted])

    def summary(self, label: str = "") -> str:
        """One summary line: parameters with standard errors, R and R², 4 decimals."""
        parts = [f"{self.model_kind:<5}"]
        if label:
            parts.append(label)
        for name, value, err in zip(self.param_names, self.params.as_array(), self.std_errors):
            parts.append(f"{name}={value:.4f}±{err:.4f}")
        parts.append(f"R={self.r:.4f}")
        parts.append(f"R²={self.r_squared:.4f}")
        if not self.converged:
            parts.append("(not converged)")
        return "  ".join(parts)


# -- model values and derivatives -------------------------------------------

def model_values(kind: str, theta: np.ndarray, l: np.ndarray, omega: int | None = None) -> np.ndarray:
    """Vectorized model evaluation on a raw parameter array (no validation)."""
    p0, p1, p2 = theta
    logl = np.log(l)
    with np.errstate(over="ignore"):
        if kind == MA:
            return p0 * np.exp(p1 * logl - p2 * l)
        return np.exp(l * math.log(omega) + p0 + p1 * logl - p2 * l)


def jacobian(kind: str, params, lengths, omega: int | None = None) -> np.ndarray:
    """Analytic partials of the model with respect to its three free parameters.

    ``params`` is a MaParams/SmmaParams or a raw 3-array; rows follow ``lengths``.
    """
    if isinstance(params, SmmaParams):
        omega = params.omega
    theta = params.as_array() if hasattr(params, "as_array") else np.asarray(params, dtype=float)
    l = np.asarray(lengths, dtype=float)
    y = model_values(kind, theta, l, omega)
    J = np.empty((l.size, 3))
    if kind == MA:
        # d/dA must not divide by A
        J[:, 0] = np.exp(theta[1] * np.log(l) - theta[2] * l)
    else:
        J[:, 0] = y
    J[:, 1] = y * np.log(l)
    J[:, 2] = -y * l
    return J


def finite_difference_jacobian(kind: str, params, lengths, omega: int | None = None,
                               rel_step: float = 1e-6) -> np.ndarray:
    if isinstance(params, SmmaParams):
        omega = params.omega
    theta = params.as_array() if hasattr(params, "as_array") else np.asarray(params, dtype=float)
    l = np.asarray(lengths, dtype=float)
    J = np.empty((l.size, theta.size))
    for j in range(theta.size):
        h = rel_step * max(abs(theta[j]), 1.0)
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        J[:, j] = (model_values(kind, up, l, omega) - model_values(kind, down, l, omega)) / (2 * h)
    return J


# -- optimizer ----------------------------------------------------------------

@dataclass
class LMResult:
    x: np.ndarray
    sse: float
    iterations: int
    converged: bool
    history: list[float]
    jac: np.ndarray


def levenberg_marquardt(residuals: Callable[[np.ndarray], np.ndarray],
                        jac: Callable[[np.ndarray], np.ndarray],
                        x0: Sequence[float], cfg: FitConfig = FitConfig()) -> LMResult:
    """Minimize sum(residuals(x)**2).

    ``jac`` returns d(model)/dx, i.e. minus the Jacobian of the residuals, so
    the step solves (J'J + lam*D) dx = J'r. D is diag(J'J) for Marquardt
    damping or the identity.
    """
    x = np.array(x0, dtype=float)
    r = residuals(x)
    sse = float(r @ r)
    if not np.isfinite(sse):
        raise FitError("initial parameters give a non-finite residual")
    J = jac(x)
    lam = cfg.initial_damping
    history = [sse]
    converged = False
    it = 0
    while it < cfg.max_iterations:
        it += 1
        A = J.T @ J
        g = J.T @ r
        D = np.diag(np.diag(A)) if cfg.damping_mode == "marquardt" else np.eye(x.size)
        try:
            step = np.linalg.solve(A + lam * D, g)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"singular normal equations at iteration {it}") from exc
        if not np.all(np.isfinite(step)):
            raise SingularSystemError(f"non-finite step at iteration {it}")
        x_new = x + step
        r_new = residuals(x_new)
        sse_new = float(r_new @ r_new)
        small_step = np.max(np.abs(step) / (np.abs(x) + 1e-12)) < cfg.tol_param_rel
        if np.isfinite(sse_new) and sse_new < sse:
            rel = (sse - sse_new) / sse
            x, r, sse = x_new, r_new, sse_new
            J = jac(x)
            history.append(sse)
            lam /= cfg.damping_down
            if sse == 0.0 or rel < cfg.tol_chisq_rel or small_step:
                converged = True
                break
        else:
            lam *= cfg.damping_up
            if small_step:
                # no proposal can improve SSE beyond rounding
                converged = True
                break
    return LMResult(x, sse, it, converged, history, J)


# -- statistics -----------------------------------------------------------------

def goodness(observed, predicted) -> tuple[float, float, float]:
    """(sse, Pearson r, r**2) of observed against predicted values."""
    o = np.asarray(observed, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if o.shape != p.shape or o.ndim != 1:
        raise ValueError("observed and predicted must be 1-d and of equal length")
    if o.size < 2:
        raise ValueError("need at least two points")
    if np.all(o == o[0]):
        raise ValueError("observed values are constant; correlation undefined")
    if np.all(p == p[0]):
        raise ValueError("predicted values are constant; correlation undefined")
    sse = float(np.sum((o - p) ** 2))
    do, dp = o - o.mean(), p - p.mean()
    r = float(np.dot(do, dp) / math.sqrt(np.dot(do, do) * np.dot(dp, dp)))
    r = max(-1.0, min(1.0, r))
    return sse, r, r * r


def initial_guess_ma(d: LengthDistribution) -> MaParams:
    """Log-linear least squares: ln n = ln A + b ln l - c l over states with n >= 1."""
    l, n = d.lengths, d.counts
    keep = n >= 1
    l, n = l[keep], n[keep]
    if l.size < 3:
        raise FitError(f"need at least 3 states with nonzero counts, got {l.size}")
    X = np.column_stack([np.ones_like(l), np.log(l), -l])
    if np.linalg.matrix_rank(X) < 3:
        raise FitError("degenerate design matrix for the initial guess")
    coef, *_ = np.linalg.lstsq(X, np.log(n), rcond=None)
    return MaParams(math.exp(coef[0]), float(coef[1]), float(coef[2]))


def _weights(y: np.ndarray, cfg: FitConfig) -> np.ndarray:
    if cfg.weighting == "poisson":
        return 1.0 / np.sqrt(np.maximum(y, 1.0))
    return np.ones_like(y)


def fit_model(kind: str, lengths, counts, cfg: FitConfig = FitConfig(),
              init: Sequence[float] | None = None, omega: int | None = None) -> FitReport:
    """Fit on raw arrays. ``init`` is a raw parameter triple for ``kind``."""
    if kind not in (MA, SMMA):
        raise ValueError(f"unknown model kind {kind!r}")
    if kind == SMMA and omega is None:
        raise FitError("SMMA fit needs the structural degeneracy omega")
    l = np.asarray(lengths, dtype=float)
    y = np.asarray(counts, dtype=float)
    m = l.size
    if m < 4:
        raise FitError(f"need at least 4 states to fit 3 parameters with errors, got {m}")
    w = _weights(y, cfg)

    def residuals(theta):
        return w * (y - model_values(kind, theta, l, omega))

    if cfg.jacobian_mode == "analytic":
        def jac(theta):
            return w[:, None] * jacobian(kind, theta, l, omega)
    else:
        def jac(theta):
            return w[:, None] * finite_difference_jacobian(kind, theta, l, omega)

    res = levenberg_marquardt(residuals, jac, init, cfg)
    if not res.converged:
        log.warning("%s fit did not converge in %d iterations", kind, res.iterations)
    x = res.x
    if kind == MA:
        if not x[0] > 0:
            raise FitError(f"fit ended at non-positive amplitude A={x[0]}")
        params = MaParams(*map(float, x))
    else:
        params = SmmaParams(float(x[0]), float(x[1]), float(x[2]), int(omega))
    return _build_report(kind, params, l, y, res.sse, res.jac, res.iterations,
                         res.converged, tuple(res.history))


def _build_report(kind, params, l, y, sse, J, iterations, converged, history=()) -> FitReport:
    m = l.size
    pred = model_values(kind, params.as_array(), l, getattr(params, "omega", None))
    if sse is None:
        sse = float(np.sum((y - pred) ** 2))
    try:
        cov = np.linalg.inv(J.T @ J) * (sse / (m - 3))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("J'J is singular at the optimum") from exc
    se = tuple(float(math.sqrt(v)) if v >= 0 else math.nan for v in np.diag(cov))
    try:
        _, r, r2 = goodness(y, pred)
    except ValueError as exc:
        raise FitError(f"goodness of fit undefined: {exc}") from exc
    return FitReport(
        model_kind=kind,
        params=params,
        std_errors=se,
        predicted=tuple((int(li), float(pi)) for li, pi in zip(l, pred)),
        sse=float(sse),
        r=r,
        r_squared=r2,
        iterations=int(iterations),
        converged=bool(converged),
        normalizable=bool(params.normalizable),
        history=tuple(history),
    )


def fit_ma(d: LengthDistribution, cfg: FitConfig = FitConfig(),
           init: MaParams | None = None) -> FitReport:
    if init is None:
        init = initial_guess_ma(d)
    return fit_model(MA, d.lengths, d.counts, cfg, init.as_array())


def fit_smma(d: LengthDistribution, cfg: FitConfig = FitConfig(),
             init: SmmaParams | None = None, omega: int | None = None) -> FitReport:
    """Fit (phi, alpha, theta) with omega held fixed.

    ``omega`` defaults to the distribution's alphabet.
    """
    if omega is None:
        omega = init.omega if init is not None else d.omega
    if omega is None:
        raise FitError("SMMA fit needs omega: distribution has no alphabet metadata")
    if init is None:
        init = ma_to_smma(initial_guess_ma(d), omega)
    elif init.omega != omega:
        raise FitError(f"initial guess has omega={init.omega}, fit requested omega={omega}")
    return fit_model(SMMA, d.lengths, d.counts, cfg, init.as_array(), omega)


def report_for_params(d: LengthDistribution, params: MaParams | SmmaParams) -> FitReport:
    """Evaluate given parameters on ``d`` without optimizing (iterations=0)."""
    kind = MA if isinstance(params, MaParams) else SMMA
    l, y = d.lengths, d.counts
    J = jacobian(kind, params, l)
    return _build_report(kind, params, l, y, None, J, 0, False)
