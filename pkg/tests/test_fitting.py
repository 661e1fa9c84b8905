import math

import numpy as np
import pytest
from scipy.optimize import curve_fit

from conftest import OMEGA, TABLE1_PREDICTED, TABLE2
from menzerath.corpus import LengthDistribution
from menzerath.fitting import (FitConfig, FitError, SingularSystemError, finite_difference_jacobian, fit_ma,
                               fit_model, fit_smma, goodness, initial_guess_ma, jacobian, report_for_params)
from menzerath.model import MaParams, SmmaParams, ma_eval, ma_to_smma, smma_eval


def test_initial_guess_exact_on_noiseless_data():
    l = np.arange(1, 15)
    counts = np.rint(ma_eval(MaParams(2, 3, 0.5), l) * 1e6).astype(int)
    d = LengthDistribution(tuple(zip(l, counts)))
    g = initial_guess_ma(d)
    # integer rounding at 1e6 scale leaves ~1e-7 relative noise
    assert (g.A / 1e6, g.b, g.c) == pytest.approx((2, 3, 0.5), rel=1e-6)


def test_initial_guess_underdetermined():
    with pytest.raises(FitError):
        initial_guess_ma(LengthDistribution(((1, 5), (2, 9))))
    with pytest.raises(FitError):
        initial_guess_ma(LengthDistribution(((1, 0), (2, 9), (3, 0), (4, 7))))


def test_initial_guess_brown_frozen(brown):
    # frozen from the log-linear solve
    g = initial_guess_ma(brown)
    assert (g.A, g.b, g.c) == pytest.approx((25.258765258351758, 6.8762117946522325, 1.1186134411956274), rel=1e-9)
    rep = fit_ma(brown, init=g)
    t = TABLE2[("MA", "brown")]
    for name, value in zip("Abc", rep.params.as_array()):
        ref, se = t[name]
        assert abs(value - ref) <= se


@pytest.mark.parametrize("corpus", ["brown", "metu"])
def test_fit_ma_reproduces_published_row(corpora, corpus):
    rep = fit_ma(corpora[corpus])
    t = TABLE2[("MA", corpus)]
    assert rep.converged
    for name, value in zip("Abc", rep.params.as_array()):
        ref, se = t[name]
        assert abs(value - ref) <= se, name
    assert round(rep.r, 4) == t["R"]
    assert rep.r_squared == rep.r ** 2


@pytest.mark.parametrize("corpus", ["brown", "metu"])
def test_fit_smma_reproduces_published_row(corpora, corpus):
    rep = fit_smma(corpora[corpus])
    t = TABLE2[("SMMA", corpus)]
    assert rep.converged and rep.params.omega == OMEGA[corpus]
    for name, value in zip(("phi", "alpha", "theta"), rep.params.as_array()):
        ref, se = t[name]
        assert abs(value - ref) <= se, name
    assert round(rep.r, 4) == t["R"]
    assert round(rep.r_squared, 4) == t["R2"]


@pytest.mark.parametrize("corpus", ["brown", "metu"])
def test_matches_scipy_curve_fit(corpora, corpus):
    """Independent optimizer: same optimum and same Gauss-Newton standard errors."""
    tight = dict(ftol=1e-15, xtol=1e-15, gtol=1e-15)
    d = corpora[corpus]
    l, y = d.lengths, d.counts
    w = OMEGA[corpus]
    models = {
        "MA": (lambda x, A, b, c: A * x ** b * np.exp(-c * x), (1.0, 8.0, 1.0), fit_ma),
        "SMMA": (lambda x, f, a, t: np.exp(x * math.log(w) + f + a * np.log(x) - t * x),
                 (0.0, 8.0, 1.0 + math.log(w)), fit_smma),
    }
    for f, p0, fitter in models.values():
        p, cov = curve_fit(f, l, y, p0=p0, **tight)
        se = np.sqrt(np.diag(cov))
        rep = fitter(d)
        # the optimum is flat along the phi/alpha ridge; compare in standard-error units
        assert np.all(np.abs(rep.params.as_array() - p) <= 1e-3 * se)
        np.testing.assert_allclose(rep.std_errors, se, rtol=1e-4)
        assert rep.sse <= np.sum((y - f(l, *p)) ** 2) * (1 + 1e-12)


def test_noiseless_recovery_ma():
    truth = np.array([2.0, 3.0, 0.5])
    l = np.arange(1.0, 23.0)
    y = ma_eval(MaParams(*truth), l)
    rep = fit_model("MA", l, y, init=(1.0, 2.0, 0.3))
    assert rep.converged
    np.testing.assert_allclose(rep.params.as_array(), truth, rtol=1e-8)


def test_noiseless_recovery_smma():
    truth = SmmaParams(0.9, 8.2, 4.4, 26)
    l = np.arange(1.0, 23.0)
    y = smma_eval(truth, l)
    rep = fit_model("SMMA", l, y, init=(0.5, 7.5, 4.3), omega=26)
    assert rep.converged
    np.testing.assert_allclose(rep.params.as_array(), truth.as_array(), rtol=1e-8)


def test_history_non_increasing(corpora):
    for d in corpora.values():
        for rep in (fit_ma(d), fit_smma(d)):
            h = np.array(rep.history)
            assert len(h) >= 2
            assert np.all(np.diff(h) <= 0)
            assert h[-1] == pytest.approx(rep.sse, rel=1e-12)


def test_goodness_examples():
    o = [3.0, 1.0, 4.0, 1.5, 9.0]
    assert goodness(o, o) == (0.0, 1.0, 1.0)
    sse, r, r2 = goodness([1, 2, 3], [3, 2, 1])
    assert r == pytest.approx(-1, abs=1e-15) and sse == 8
    with pytest.raises(ValueError):
        goodness([2, 2, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        goodness([1], [1])


def test_goodness_published_columns(brown):
    _, r, _ = goodness(brown.counts, TABLE1_PREDICTED[("MA", "brown")])
    assert r == pytest.approx(0.9991, abs=5e-4)


def test_jacobian_structural_zeros():
    for kind, p in (("MA", MaParams(2.5, 8.2, 1.16)), ("SMMA", SmmaParams(0.9, 8.2, 4.4, 26))):
        J = jacobian(kind, p, [1, 2, 3])
        assert J[0, 1] == 0.0
    p = SmmaParams(0.9, 8.2, 4.4, 26)
    l = np.arange(1, 23)
    np.testing.assert_array_equal(jacobian("SMMA", p, l)[:, 0], smma_eval(p, l))


def _rel_close(a, b, rtol):
    scale = np.maximum(np.abs(a), 1e-12 * np.max(np.abs(a)))
    return np.all(np.abs(a - b) <= rtol * scale)


def test_jacobian_matches_finite_differences_at_published_params():
    l = np.arange(1, 23)
    for kind, p in (("MA", MaParams(2.5236, 8.2039, 1.1595)), ("SMMA", SmmaParams(0.9281, 8.2014, 4.4173, 26))):
        assert _rel_close(jacobian(kind, p, l), finite_difference_jacobian(kind, p, l), 1e-5)


def test_jacobian_random_points():
    rng = np.random.default_rng(7)
    l = np.arange(1, 26)
    for _ in range(100):
        A, b, c = rng.uniform(0.1, 10), rng.uniform(0, 10), rng.uniform(0.2, 2)
        omega = int(rng.integers(2, 41))
        assert _rel_close(jacobian("MA", MaParams(A, b, c), l), finite_difference_jacobian("MA", MaParams(A, b, c), l), 1e-5)
        p = ma_to_smma(MaParams(A, b, c), omega)
        assert _rel_close(jacobian("SMMA", p, l), finite_difference_jacobian("SMMA", p, l), 1e-5)


def test_models_agree_under_fitting(corpora):
    for name, d in corpora.items():
        ma, sm = fit_ma(d), fit_smma(d)
        np.testing.assert_allclose(sm.predicted_values, ma.predicted_values, rtol=5e-3)
        assert abs(ma.r - sm.r) < 1e-3
        se_c = math.hypot(ma.std_errors[2], sm.std_errors[2])
        assert abs((sm.params.theta - math.log(OMEGA[name])) - ma.params.c) <= 2 * se_c
        assert abs(sm.params.alpha - ma.params.b) <= 2 * math.hypot(ma.std_errors[1], sm.std_errors[1])


@pytest.mark.parametrize("k", [0.01, 3.0, 1000.0])
def test_scale_covariance(brown, k):
    base_ma = fit_model("MA", brown.lengths, brown.counts, init=(1.0, 8.0, 1.0))
    ma = fit_model("MA", brown.lengths, k * brown.counts, init=(k, 8.0, 1.0))
    assert ma.params.A == pytest.approx(k * base_ma.params.A, rel=1e-6)
    assert (ma.params.b, ma.params.c) == pytest.approx((base_ma.params.b, base_ma.params.c), rel=1e-6)

    base = fit_model("SMMA", brown.lengths, brown.counts, init=(0.0, 8.0, 4.4), omega=26)
    sm = fit_model("SMMA", brown.lengths, k * brown.counts, init=(math.log(k), 8.0, 4.4), omega=26)
    assert math.exp(sm.params.phi) == pytest.approx(k * math.exp(base.params.phi), rel=1e-6)
    assert (sm.params.alpha, sm.params.theta) == pytest.approx((base.params.alpha, base.params.theta), rel=1e-6)


def test_non_convergence_is_reported(brown):
    rep = fit_ma(brown, FitConfig(max_iterations=2))
    assert rep.converged is False
    assert rep.iterations == 2


def test_singular_system():
    l = np.ones(5)
    with pytest.raises(SingularSystemError):
        fit_model("MA", l, np.array([3.0, 3, 3, 3, 3]), init=(1.0, 1.0, 1.0))


def test_smma_needs_omega():
    d = LengthDistribution(((1, 3), (2, 8), (3, 9), (4, 5), (5, 2)))
    with pytest.raises(FitError, match="omega"):
        fit_smma(d)
    assert fit_smma(d, omega=5).params.omega == 5


def test_finite_difference_mode_matches_analytic(brown):
    a = fit_ma(brown)
    b = fit_ma(brown, FitConfig(jacobian_mode="finite_difference"))
    np.testing.assert_allclose(b.params.as_array(), a.params.as_array(), rtol=1e-6)


def test_identity_damping_and_poisson_weighting(brown):
    a = fit_ma(brown)
    b = fit_ma(brown, FitConfig(damping_mode="identity", max_iterations=5000))
    np.testing.assert_allclose(b.params.as_array(), a.params.as_array(), rtol=1e-5)
    w = fit_ma(brown, FitConfig(weighting="poisson"))
    assert w.converged and abs(w.params.b - a.params.b) > 1e-3


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(max_iterations=0)
    with pytest.raises(ValueError):
        FitConfig(tol_chisq_rel=0)
    with pytest.raises(ValueError):
        FitConfig(jacobian_mode="numeric")


def test_deterministic(brown):
    assert fit_smma(brown) == fit_smma(brown)


def test_report_for_published_params(brown):
    rep = report_for_params(brown, MaParams(2.5236, 8.2039, 1.1595))
    assert rep.iterations == 0
    assert [round(y) for _, y in rep.predicted][5] == 5814
    assert len(rep.predicted) == len(brown)
