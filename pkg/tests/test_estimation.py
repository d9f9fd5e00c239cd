import numpy as np
import pytest

from copula_gof.copulas import CLAYTON, COOK_JOHNSON, FRANK, GUMBEL, INDEPENDENCE, get_copula
from copula_gof.errors import DegenerateData, DomainError, TiesInData
from copula_gof.estimation import (
    Dataset,
    FitMode,
    empirical_copula,
    fit_joint_mle,
    fit_margins_only,
    fit_model,
    joint_loglik,
    joint_loglik_grad,
    pseudo_observations,
)
from copula_gof.harness import ModelSpec, synthetic_frank_normal
from copula_gof.margins import EXPONENTIAL, LOMAX, NORMAL

from conftest import central_diff


def sample(margin, mparams, copula, cparams, n, seed):
    return ModelSpec(margin, mparams, copula, cparams).sample(n, np.random.default_rng(seed))


def test_joint_gradient_matches_finite_differences():
    data = sample("lomax", [3.0, 1.0], "gumbel", [2.0], 100, 1)
    th = np.array([[2.5, 0.9], [3.2, 1.1]])
    lam = np.array([1.8])
    gt, gl = joint_loglik_grad(data, LOMAX, GUMBEL, th, lam)
    num_t = central_diff(lambda t: joint_loglik(data, LOMAX, GUMBEL, t.reshape(2, 2), lam), th.ravel())
    num_l = central_diff(lambda l: joint_loglik(data, LOMAX, GUMBEL, th, l), lam)
    np.testing.assert_allclose(gt.ravel(), num_t, rtol=1e-6)
    np.testing.assert_allclose(gl, num_l, rtol=1e-6)


def test_independence_decouples():
    data = sample("normal", [[0.0, 1.0], [2.0, 0.5]], "independence", [], 300, 2)
    joint = fit_joint_mle(data, NORMAL, INDEPENDENCE)
    sep = fit_margins_only(data, NORMAL, get_copula("independence", []))
    assert joint.lam.shape == (0,)
    np.testing.assert_allclose(joint.thetas, sep.thetas, rtol=1e-8)
    marg = sum(NORMAL.loglik(sep.thetas[j], data.values[:, j]) for j in range(2))
    assert joint.loglik == pytest.approx(marg, rel=1e-12)


@pytest.mark.parametrize(
    "margin,mp,copula,cp",
    [
        ("exponential", [1.0], "clayton", [2.0]),
        ("lomax", [3.0, 1.0], "gumbel", [2.0]),
        ("normal", [[1.025, 0.136], [1.021, 0.178]], "frank", [6.589]),
        ("normal", [[0.0, 1.0], [0.0, 1.0]], "cookjohnson", [1.5, 0.3]),
    ],
)
def test_mle_beats_truth_and_gradient_vanishes(margin, mp, copula, cp):
    for seed in range(3):
        data = sample(margin, mp, copula, cp, 200, seed)
        fit = fit_joint_mle(data, margin, copula)
        truth = ModelSpec(margin, mp, copula, cp).thetas()
        assert fit.loglik >= joint_loglik(data, fit.margin, fit.copula, truth, np.array(cp)) - 1e-6
        assert fit.mode is FitMode.FULL_JOINT_ML and fit.diagnostics["converged"]
        gt, gl = joint_loglik_grad(data, fit.margin, fit.copula, fit.thetas, fit.lam)
        gl = np.where(fit.copula.boundary_mask(fit.lam, gl), 0.0, gl)
        assert max(np.max(np.abs(gt)), np.max(np.abs(gl))) < 1e-6 * data.n


def test_cook_johnson_boundary_is_reported():
    # Clayton data put the second parameter on its lower boundary
    data = sample("normal", [[0.0, 1.0], [0.0, 1.0]], "clayton", [2.0], 300, 4)
    fit = fit_joint_mle(data, NORMAL, COOK_JOHNSON)
    assert fit.diagnostics["converged"]
    if fit.lam[1] < 1e-6 or fit.lam[1] > 1 - 1e-6:
        assert any("boundary" in w for w in fit.warnings)


def test_clayton_estimates_concentrate():
    hits = 0
    for seed in range(200):
        data = sample("exponential", [1.0], "clayton", [2.0], 200, 100 + seed)
        hits += abs(fit_joint_mle(data, EXPONENTIAL, CLAYTON).lam[0] - 2.0) < 0.6
    assert hits >= 190


def test_frank_estimate_on_bundled_dataset():
    fit = fit_joint_mle(synthetic_frank_normal(0), NORMAL, FRANK)
    assert abs(fit.lam[0] - 6.589) < 0.8


def test_frank_sampling_spread():
    # empirical sd of the estimate at n=655 is about 0.36 over 50 seeds
    lams = np.array([fit_joint_mle(synthetic_frank_normal(s), NORMAL, FRANK).lam[0] for s in range(1, 11)])
    assert abs(lams.mean() - 6.589) < 0.4
    assert np.all(np.abs(lams - 6.589) < 4 * 0.36)


def test_margins_only_mode():
    data = sample("exponential", [0.5], "clayton", [2.0], 400, 6)
    fit = fit_model(data, "exponential", get_copula("clayton", [2.0]))
    assert fit.mode is FitMode.MARGINS_ONLY_FIXED_COPULA and fit.p == 0
    np.testing.assert_allclose(fit.thetas[:, 0], 1 / data.values.mean(axis=0), rtol=1e-14)
    lomax_data = sample("lomax", [3.0, 1.0], "gumbel", [2.0], 5000, 7)
    fit = fit_margins_only(lomax_data, LOMAX, get_copula("gumbel", [2.0]))
    np.testing.assert_array_equal(fit.thetas[0], LOMAX.fit(lomax_data.values[:, 0])[0])


def test_pseudo_observations():
    data = Dataset(np.array([[np.log(2), 1.0], [0.3, 2.0], [2.0, 0.1]]))
    fit = fit_model(data, "exponential", get_copula("independence", []))
    fit.thetas[:] = 1.0
    u = pseudo_observations(data, fit)
    assert u[0, 0] == pytest.approx(0.5, abs=1e-15)
    for j in range(2):
        assert np.array_equal(np.argsort(u[:, j]), np.argsort(data.values[:, j]))
    probes = np.array([[0.5, 0.9], [0.9, 0.9], [0.1, 0.1], [1.0, 1.0]])
    brute = [np.mean([np.all(row <= p) for row in u]) for p in probes]
    np.testing.assert_array_equal(empirical_copula(u, probes), brute)


def test_pseudo_observations_roughly_uniform():
    data = sample("exponential", [1.0], "clayton", [2.0], 500, 8)
    fit = fit_joint_mle(data, EXPONENTIAL, CLAYTON)
    u = pseudo_observations(data, fit)
    assert np.all(np.abs(u.mean(axis=0) - 0.5) < 3 / np.sqrt(12 * data.n))


def test_data_validation():
    with pytest.raises(DomainError):
        Dataset(np.ones(5))
    with pytest.raises(DomainError):
        Dataset(np.array([[1.0, np.nan], [2.0, 3.0]]))
    with pytest.raises(DegenerateData):
        Dataset(np.array([[1.0, 1.0], [1.0, 2.0], [1.0, 3.0]])).check()
    tied = Dataset(np.array([[1.0, 1.0], [1.0, 2.0], [2.0, 3.0]]))
    with pytest.raises(TiesInData):
        tied.check()
    assert tied.jittered(0).tied_columns() == []
    assert tied.reordered([1, 0]).labels == ["x2", "x1"]
