"""One pass/fail test per acceptance criterion. Tolerances are pinned here."""
import json
import warnings

import numpy as np
import pytest
from scipy import integrate

from copula_gof.cli import main
from copula_gof.copulas import CLAYTON, COOK_JOHNSON, FRANK, GUMBEL
from copula_gof.estimation import FitMode, FittedModel
from copula_gof.harness import ExperimentConfig, gof_test, run_power_experiment, run_size_experiment, synthetic_frank_normal
from copula_gof.margins import EXPONENTIAL, LOMAX, NORMAL
from copula_gof.power import LIBRARY_FREQS, library_direction, project_g
from copula_gof.transform import DEFAULT_DELTA, GridSpec, ScoreContext, SignalDriver, compute_Wn, eta_integral, info_matrix
from copula_gof.wiener import ReferenceTable, path_statistics, simulate_paths

from conftest import TABLE_SEED, central_diff

EXP1 = {"margin": "exponential", "margin_params": [1.0]}


def clayton_exp_ctx(delta=DEFAULT_DELTA):
    return ScoreContext(EXPONENTIAL, [[1.0], [1.0]], CLAYTON, [2.0], delta)


# 1 -------------------------------------------------------------------------
def test_criterion1_critical_values(tmp_path):
    out = tmp_path / "table.json"
    assert main(["tabulate", "--grid", "100x100", "--paths", "10000", "--seed", str(TABLE_SEED), "--out", str(out)]) == 0
    table = ReferenceTable.load(out)
    kappa = table.critical_values("kappa")
    omega2 = table.critical_values("omega2")
    for a, ref in zip((0.10, 0.05, 0.01), (2.100, 2.362, 2.865)):
        assert abs(kappa[a] - ref) <= 0.06
    for a, ref in zip((0.10, 0.05, 0.01), (0.526, 0.708, 1.186)):
        assert abs(omega2[a] - ref) <= 0.04


# 2 -------------------------------------------------------------------------
def test_criterion2_size(table10k):
    cfg = ExperimentConfig(
        scenario="size_clayton2",
        generator={**EXP1, "copula": "clayton", "copula_params": [2.0]},
        null_copula="clayton",
        null_margin="exponential",
        fix_lambda=[2.0],
        n=200,
        replicates=200,
        seed=2024,
    )
    res = run_size_experiment(cfg, table10k)
    assert res.failures == 0
    rej = res.rejections()
    for stat in ("kappa", "omega2"):
        assert 0.02 <= rej[stat]["0.05"] / 200 <= 0.09


# 3 -------------------------------------------------------------------------
def test_criterion3_power(table10k):
    base = dict(
        generator={**EXP1, "copula": "gumbel", "copula_params": [2.0]},
        null_copula="clayton",
        null_margin="exponential",
        n=200,
        replicates=100,
        seed=77,
    )
    fixed = run_power_experiment(ExperimentConfig(scenario="clayton2_on_gumbel2", fix_lambda=[2.0], **base), table10k)
    param = run_power_experiment(ExperimentConfig(scenario="clayton_on_gumbel2", **base), table10k)
    assert fixed.failures == 0 and param.failures == 0
    assert fixed.rejections()["kappa"]["0.05"] >= 95
    assert param.rejections()["kappa"]["0.05"] >= 65


# 4 -------------------------------------------------------------------------
def test_criterion4_annihilation():
    ctx = clayton_exp_ctx()
    grid = GridSpec.midpoints(100, 100)
    for i in range(ctx.q):
        sup = [np.abs(compute_Wn(ctx, grid=grid, nodes=m, driver=SignalDriver(i)).values).max() for m in (400, 800)]
        assert sup[0] < 5e-3, (i, sup)
        assert sup[1] < sup[0], (i, sup)


# 5 -------------------------------------------------------------------------
def test_criterion5_isometry():
    ctx = clayton_exp_ctx()
    assert len(LIBRARY_FREQS) == 5
    for name in LIBRARY_FREQS:
        h = library_direction(ctx, name)
        g = project_g(h)
        assert abs(g.norm() / h.norm() - 1.0) < 1e-3, name


# 6 -------------------------------------------------------------------------
MARGIN_CASES = [(EXPONENTIAL, [1.3]), (LOMAX, [3.0, 1.0]), (NORMAL, [1.0, 0.5])]
COPULA_CASES = [(CLAYTON, [2.0]), (GUMBEL, [2.0]), (FRANK, [6.589]), (COOK_JOHNSON, [1.5, 0.3])]


def _close(ana, num):
    ana, num = np.asarray(ana), np.asarray(num)
    return np.all(np.abs(ana - num) <= 1e-6 * np.maximum(np.abs(num), 1e-2))


def test_criterion6_gradients():
    rng = np.random.default_rng(6)
    for fam, theta in MARGIN_CASES:
        theta = np.array(theta)
        u = rng.uniform(0.02, 0.98, 100)
        x = fam.quantile(theta, u)
        assert _close(fam.score(theta, x), central_diff(lambda t: fam.cdf(t, x), theta)), fam.name
        val, du = fam.score_at_quantile(theta, u)
        num = central_diff(lambda v: fam.score_at_quantile(theta, v)[0], u, h=1e-6)
        # central_diff stacks one column per point; the diagonal is the pointwise derivative
        num = np.einsum("iji->ij", num) if num.ndim == 3 else np.diagonal(num)
        assert _close(du, num), fam.name
    for fam, lam in COPULA_CASES:
        lam = np.array(lam)
        pts = rng.uniform(0.03, 0.97, (100, 2))
        gu, gl = fam.logpdf_grads(lam, pts)
        for k, s in enumerate(pts):
            assert _close(gu[k], central_diff(lambda v: fam.logpdf(lam, v[None])[0], s)), fam.name
            assert _close(gl[k], central_diff(lambda l: fam.logpdf(l, s[None])[0], lam)), fam.name


# 7 -------------------------------------------------------------------------
def test_criterion7_oracles():
    lam = np.array([2.0])
    fitted = FittedModel(EXPONENTIAL, np.ones((2, 1)), CLAYTON, lam, 0.0, FitMode.FULL_JOINT_ML)
    u = CLAYTON.sample(lam, 20, np.random.default_rng(3))
    f = lambda s: s[..., 0] * s[..., 1]
    lo, hi = 0.1, 0.9
    _, atoms, smooth = eta_integral(fitted, u, f, ([lo, lo], [hi, hi]), nodes=400, return_parts=True)
    naive = 0.0
    for a, b in u:
        if lo <= a <= hi and lo <= b <= hi:
            naive += a * b
    assert abs(atoms - naive / np.sqrt(20)) <= 1e-10
    dense, _ = integrate.dblquad(lambda y, x: x * y * CLAYTON.pdf(lam, np.array([x, y])), lo, hi, lo, hi, epsabs=1e-12, epsrel=1e-12)
    assert smooth == pytest.approx(np.sqrt(20) * dense, rel=1e-5)

    ctx = clayton_exp_ctx(0.05)
    coarse = info_matrix(ctx, 0.3, nodes=400).matrix
    fine = info_matrix(ctx, 0.3, nodes=1600).matrix
    assert np.max(np.abs(coarse - fine) / np.abs(fine)) < 1e-4


# 8 -------------------------------------------------------------------------
def test_criterion8_wiener_sheet(table10k, grid100):
    rng = np.random.default_rng(8)
    i, j = rng.integers(0, 100, 20), rng.integers(0, 100, 20)
    vals = np.concatenate([simulate_paths(grid100, 808, s, s + 500)[:, i, j] for s in range(0, 5000, 500)])
    target = grid100.axes[0][i] * grid100.axes[1][j]
    se = target * np.sqrt(2.0 / (vals.shape[0] - 1))
    assert np.all(np.abs(vals.var(axis=0, ddof=1) - target) < 4 * se)

    kappa, _ = path_statistics(grid100, TABLE_SEED, 2000, start=10000)
    frac = np.mean(kappa > table10k.critical_values("kappa")[0.05])
    assert 0.035 <= frac <= 0.065


# 9 -------------------------------------------------------------------------
def test_criterion9_data_workflow(table10k):
    report, _ = gof_test(synthetic_frank_normal(0), "normal", "frank", table10k)
    assert abs(report["fitted"]["copula_params"][0] - 6.589) <= 0.8
    kept = rejected = 0
    for seed in range(50):
        data = synthetic_frank_normal(seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            frank, _ = gof_test(data, "normal", "frank", table10k)
            clayton, _ = gof_test(data, "normal", "clayton", table10k)
        kept += frank["p_values"]["kappa"] > 0.05
        rejected += clayton["p_values"]["kappa"] <= 0.01
    assert kept >= 45
    assert rejected >= 45
