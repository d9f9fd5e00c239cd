import warnings

import numpy as np
import pytest
from scipy import integrate

from copula_gof.copulas import CLAYTON, INDEPENDENCE
from copula_gof.errors import DomainError
from copula_gof.estimation import Dataset, fit_joint_mle, pseudo_observations
from copula_gof.margins import EXPONENTIAL
from copula_gof.power import (
    AlternativeDirection,
    asymptotic_power,
    direction_from_table,
    directional_test,
    h_norm,
    library_direction,
    project_g,
    sample_alternative,
    variation_distance,
)
from copula_gof.transform import GridSpec, ScoreContext, TestProcessGrid, compute_Wn


def clayton_ctx(delta=0.05):
    return ScoreContext(EXPONENTIAL, [[1.0], [1.0]], CLAYTON, [2.0], delta)


@pytest.fixture(scope="module")
def bump():
    return library_direction(clayton_ctx(), "bump12")


def test_variation_distance_and_power():
    assert variation_distance(0.0) == 0.0
    assert variation_distance(60.0) == pytest.approx(1.0)
    assert variation_distance(2.0) == pytest.approx(0.682689, abs=1e-6)
    assert asymptotic_power(2.0, 0.05) == pytest.approx(0.638760, abs=1e-6)
    assert asymptotic_power(0.0, 0.05) == pytest.approx(0.05)
    with pytest.raises(DomainError):
        variation_distance(-1.0)


def test_constant_direction_norm():
    ctx = ScoreContext(EXPONENTIAL, [[1.0], [1.0]], INDEPENDENCE, [], 0.25)
    d = AlternativeDirection(ctx, lambda s: np.full(s.shape[:-1], 3.0), nodes=200, check=False)
    assert h_norm(d) == pytest.approx(1.5, rel=1e-12)
    with pytest.raises(DomainError):
        AlternativeDirection(ctx, lambda s: np.full(s.shape[:-1], 3.0), nodes=200)


def test_norm_refinement(bump):
    coarse = AlternativeDirection(bump.ctx, bump.h, nodes=200, check=False)
    fine = AlternativeDirection(bump.ctx, bump.h, nodes=800, check=False)
    assert coarse.norm() == pytest.approx(fine.norm(), rel=1e-5)


def test_homogeneity_and_linearity(bump):
    double = library_direction(bump.ctx, "bump12", scale=2.0)
    assert double.norm() == pytest.approx(2 * bump.norm(), rel=1e-12)
    g1, g2 = project_g(bump), project_g(double)
    np.testing.assert_allclose(g2.cell_values, 2 * g1.cell_values, rtol=1e-10, atol=1e-12)
    s = np.random.default_rng(0).uniform(0.06, 0.97, (50, 2))
    np.testing.assert_allclose(g2(s), 2 * g1(s), rtol=1e-10, atol=1e-12)


def test_isometry_moderate_delta(bump):
    g = project_g(bump)
    assert g.norm() == pytest.approx(bump.norm(), rel=1e-3)
    # the box-only norm misses the strip (1-delta, 1-delta/2] where g need not vanish
    assert g.norm("box") < g.norm()


def _orthogonal_profile(a, lo, hi):
    """sin(3 pi x) on [lo, hi] with the span of {1, a} removed in L2(dx)."""
    L = hi - lo
    base = lambda x: np.sin(3 * np.pi * (x - lo) / L)
    fs = [lambda x: 1.0 + 0 * x, a]
    gram = np.array([[integrate.quad(lambda x: f(x) * g(x), lo, hi, limit=200)[0] for g in fs] for f in fs])
    rhs = np.array([integrate.quad(lambda x: base(x) * f(x), lo, hi, limit=200)[0] for f in fs])
    beta = np.linalg.solve(gram, rhs)

    def b(x):
        x = np.asarray(x)
        return np.where((x >= lo) & (x <= hi), base(x) - beta[0] - beta[1] * a(x), 0.0)

    return b


def test_invisible_direction_is_unchanged():
    delta = 0.05
    ctx = ScoreContext(EXPONENTIAL, [[1.0], [1.0]], INDEPENDENCE, [], delta)
    b = _orthogonal_profile(lambda x: np.log1p(-x) + 1.0, delta, 1 - delta)
    d = AlternativeDirection(ctx, lambda s: b(s[..., 0]) * b(s[..., 1]), nodes=400)
    g = project_g(d)
    s = np.random.default_rng(1).uniform(delta, 1 - delta, (200, 2))
    np.testing.assert_allclose(g(s), d(s), atol=1e-4 * np.abs(d(s)).max())


def test_directional_test_on_zero_process(bump):
    g = project_g(bump)
    W = TestProcessGrid(GridSpec.midpoints(100, 100), np.zeros((100, 100)), bump.ctx.delta, 100)
    for alpha in (0.01, 0.05, 0.3):
        res = directional_test(W, g, alpha)
        assert res.statistic == 0.0 and not res.reject


def test_directional_statistic_is_linear_in_W(bump):
    g = project_g(bump)
    rng = np.random.default_rng(2)
    grid = GridSpec.midpoints(100, 100)
    A, B = rng.standard_normal((2, 100, 100)).cumsum(1).cumsum(2) / 100
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sa = directional_test(TestProcessGrid(grid, A, 0.05, 0), g).statistic
        sb = directional_test(TestProcessGrid(grid, B, 0.05, 0), g).statistic
        sab = directional_test(TestProcessGrid(grid, A - 3 * B, 0.05, 0), g).statistic
    assert sab == pytest.approx(sa - 3 * sb, rel=1e-10, abs=1e-12)


def test_table_direction_and_errors():
    ctx = clayton_ctx()
    x = np.linspace(0.1, 0.9, 5)
    pts = np.array([(a, b) for a in x for b in x])
    d = direction_from_table(ctx, pts, np.ones(len(pts)), nodes=100, check=False)
    assert d(np.array([[0.3, 0.3]]))[0] == 1.0 and d(np.array([[0.01, 0.3]]))[0] == 0.0
    with pytest.raises(DomainError):
        direction_from_table(ctx, pts[:-1], np.ones(len(pts) - 1), nodes=100, check=False)
    with pytest.raises(DomainError):
        library_direction(ctx, "bump99")


def test_alternative_sampler_tilts_the_null(bump):
    # E_alt[h] = ||h||^2 / sqrt(n) / (1 + ||h||^2 / (4n)) under (1 + h / (2 sqrt n))^2
    rng = np.random.default_rng(3)
    n_eff = 25
    u = sample_alternative(bump, 40000, rng, n_eff=n_eff)
    nh2 = bump.norm() ** 2
    target = nh2 / np.sqrt(n_eff) / (1 + nh2 / (4 * n_eff))
    hu = bump(u)
    assert abs(hu.mean() - target) < 4 * hu.std() / np.sqrt(u.shape[0])


@pytest.mark.slow
def test_power_matches_asymptotics_monte_carlo():
    delta = 0.005
    ctx = ScoreContext(EXPONENTIAL, [[1.0], [1.0]], CLAYTON, [2.0], delta)
    unit = library_direction(ctx, "bump11")
    d = library_direction(ctx, "bump11", scale=2.0 / unit.norm())
    g = project_g(d)
    rng = np.random.default_rng(1)
    rej = 0
    for _ in range(500):
        data = Dataset(-np.log1p(-sample_alternative(d, 400, rng)))
        fit = fit_joint_mle(data, EXPONENTIAL, CLAYTON)
        W = compute_Wn(ScoreContext.from_fitted(fit, delta), pseudo_observations(data, fit))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rej += directional_test(W, g).reject
    assert abs(rej / 500 - asymptotic_power(2.0)) < 0.08
