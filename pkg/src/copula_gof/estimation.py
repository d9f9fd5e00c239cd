"""Model fitting and pseudo-observations.

Two fitting modes are supported:

* ``FullJointML``: margins and copula parameter maximize the joint
  log-likelihood together.
* ``MarginsOnlyFixedCopula``: the copula is fully specified and each
  margin is fitted separately.

Pseudo-observations are ``U_ij = F_{theta_j}(X_ij)`` with fitted margins;
their empirical df is the semi-parametric copula estimator.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .copulas import CopulaFamily, FrozenCopula, get_copula
from .errors import (
    DegenerateData,
    DomainError,
    GofError,
    NonConvergence,
    SupportViolation,
    TiesInData,
)
from .margins import MarginFamily, get_margin

U_CLIP = 1e-14


class FitMode(str, enum.Enum):
    FULL_JOINT_ML = "FullJointML"
    MARGINS_ONLY_FIXED_COPULA = "MarginsOnlyFixedCopula"


@dataclass
class Dataset:
    values: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] < 2:
            raise DomainError("data must be an n x d matrix with d >= 2")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("data contain missing or non-finite values")
        if not self.labels:
            self.labels = [f"x{j + 1}" for j in range(self.d)]
        if len(self.labels) != self.d:
            raise DomainError("one label per column required")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def tied_columns(self) -> list[int]:
        return [j for j in range(self.d) if np.unique(self.values[:, j]).size < self.n]

    def check(self, allow_ties=False):
        for j in range(self.d):
            if np.ptp(self.values[:, j]) == 0:
                raise DegenerateData(f"column {self.labels[j]!r} is constant")
        tied = self.tied_columns()
        if tied and not allow_ties:
            names = ", ".join(self.labels[j] for j in tied)
            raise TiesInData(f"tied values in column(s) {names}; continuous margins are assumed")
        return tied

    def jittered(self, seed=0, scale=1e-10) -> "Dataset":
        rng = np.random.default_rng(seed)
        sd = np.std(self.values, axis=0)
        noise = rng.uniform(-0.5, 0.5, size=self.values.shape) * scale * np.where(sd > 0, sd, 1.0)
        return Dataset(self.values + noise, list(self.labels))

    def reordered(self, order) -> "Dataset":
        order = list(order)
        return Dataset(self.values[:, order], [self.labels[j] for j in order])


@dataclass
class FittedModel:
    margin: MarginFamily
    thetas: np.ndarray  # (d, m)
    copula: CopulaFamily  # FrozenCopula in the margins-only mode
    lam: np.ndarray  # (p,)
    loglik: float
    mode: FitMode
    diagnostics: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.thetas.shape[0]

    @property
    def m(self) -> int:
        return self.margin.param_dim

    @property
    def p(self) -> int:
        return self.copula.param_dim

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "margin_family": self.margin.name,
            "margin_params": self.thetas.tolist(),
            "copula_family": self.copula.name,
            "copula_params": self.lam.tolist(),
            "loglik": self.loglik,
            "diagnostics": self.diagnostics,
        }


def joint_loglik(data: Dataset, margin: MarginFamily, copula: CopulaFamily, thetas, lam) -> float:
    x = data.values
    ll = sum(np.sum(margin.logpdf(thetas[j], x[:, j])) for j in range(data.d))
    u = np.column_stack([margin.cdf(thetas[j], x[:, j]) for j in range(data.d)])
    u = np.clip(u, U_CLIP, 1.0 - U_CLIP)
    return float(ll + np.sum(copula.logpdf(lam, u)))


def joint_loglik_grad(data: Dataset, margin: MarginFamily, copula: CopulaFamily, thetas, lam):
    """Gradient in the natural parameters: ``(d, m)`` margin block and ``(p,)`` copula block."""
    x = data.values
    u = np.column_stack([margin.cdf(thetas[j], x[:, j]) for j in range(data.d)])
    u = np.clip(u, U_CLIP, 1.0 - U_CLIP)
    gu, gl = copula.logpdf_grads(lam, u)
    g_theta = np.empty_like(thetas)
    for j in range(data.d):
        g_theta[j] = np.sum(margin.logpdf_grad(thetas[j], x[:, j]), axis=0) + np.sum(
            gu[:, j, None] * margin.score(thetas[j], x[:, j]), axis=0
        )
    return g_theta, np.sum(gl, axis=0)


class _Packer:
    """Maps natural parameters to an unconstrained vector and back."""

    def __init__(self, margin, copula, d):
        self.margin, self.copula, self.d = margin, copula, d
        self.m, self.p = margin.param_dim, copula.param_dim

    def pack(self, thetas, lam):
        zt = np.concatenate([self.margin.to_free(t) for t in thetas])
        zl = self.copula.to_free(lam) if self.p else np.zeros(0)
        return np.concatenate([zt, zl])

    def unpack(self, z):
        dm = self.d * self.m
        thetas = np.array([self.margin.from_free(z[j * self.m:(j + 1) * self.m]) for j in range(self.d)])
        lam = self.copula.from_free(z[dm:]) if self.p else np.zeros(0)
        return thetas, lam

    def jacobian(self, z):
        dm = self.d * self.m
        jt = np.concatenate([self.margin.free_jacobian(z[j * self.m:(j + 1) * self.m]) for j in range(self.d)])
        jl = self.copula.free_jacobian(z[dm:]) if self.p else np.zeros(0)
        return np.concatenate([jt, jl])


def _margin_start(data, margin):
    return np.array([margin.fit(data.values[:, j])[0] for j in range(data.d)])


def _tau_start(data, margin, copula, thetas):
    from scipy.stats import kendalltau

    u = np.column_stack([margin.cdf(thetas[j], data.values[:, j]) for j in range(data.d)])
    taus = [
        kendalltau(u[:, a], u[:, b]).statistic for a in range(data.d) for b in range(a + 1, data.d)
    ]
    return copula.initial_from_tau(float(np.mean(taus)))


def fit_joint_mle(data: Dataset, margin, copula, init=None, maxiter=500, grad_tol=1e-6) -> FittedModel:
    """Maximize the full joint log-likelihood over margin and copula parameters.

    Starts from up to three deterministic points (margin MLEs with a
    Kendall's-tau copula start, a midpoint copula start, and a perturbed
    start) and keeps the best local optimum, polished by Newton steps.
    """
    margin = get_margin(margin)
    copula = get_copula(copula)
    if isinstance(copula, FrozenCopula):
        return fit_margins_only(data, margin, copula)
    if copula.param_dim == 0:
        # the likelihood separates, so the joint optimum is the margin-wise one
        fit = fit_margins_only(data, margin, get_copula(copula.name, []))
        fit.mode = FitMode.FULL_JOINT_ML
        return fit
    n, d = data.n, data.d
    q = d * margin.param_dim + copula.param_dim
    if n < q + 1:
        raise DomainError(f"need n >= {q + 1} observations for {q} parameters")
    data.check(allow_ties=True)
    for j in range(d):
        margin._check_support(data.values[:, j])
    packer = _Packer(margin, copula, d)

    def objective(z):
        try:
            thetas, lam = packer.unpack(z)
            with np.errstate(all="ignore"):
                ll = joint_loglik(data, margin, copula, thetas, lam)
                gt, gl = joint_loglik_grad(data, margin, copula, thetas, lam)
        except GofError:
            return np.inf, np.zeros_like(z)
        g = np.concatenate([gt.ravel(), gl]) * packer.jacobian(z)
        if not np.isfinite(ll) or not np.all(np.isfinite(g)):
            return np.inf, np.zeros_like(z)
        return -ll / n, -g / n

    if init is not None:
        starts = [packer.pack(np.asarray(init[0], float), np.asarray(init[1], float))]
    else:
        thetas0 = _margin_start(data, margin)
        lam_tau = _tau_start(data, margin, copula, thetas0)
        lam_mid = copula.initial_from_tau(0.5)
        z_tau = packer.pack(thetas0, lam_tau)
        starts = [z_tau, packer.pack(thetas0, lam_mid), z_tau + 0.1]

    best = None
    total_iter = 0
    for z0 in starts:
        res = optimize.minimize(
            objective, z0, jac=True, method="BFGS", options={"maxiter": maxiter, "gtol": 1e-9}
        )
        total_iter += int(res.nit)
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise NonConvergence("joint MLE: no start produced a finite likelihood")

    z = _newton_polish(objective, best.x)
    thetas, lam = packer.unpack(z)
    ll = joint_loglik(data, margin, copula, thetas, lam)
    gt, gl = joint_loglik_grad(data, margin, copula, thetas, lam)
    # KKT: a copula component pinned to a closed boundary may keep an outward gradient
    gl_free = np.where(copula.boundary_mask(lam, gl), 0.0, gl)
    gnorm = float(np.max(np.abs(np.concatenate([gt.ravel(), gl_free]))))
    converged = gnorm < grad_tol * n
    if not converged:
        raise NonConvergence(f"joint MLE gradient sup-norm {gnorm:.3g} exceeds {grad_tol} * n")
    warns = _margin_warnings(margin, thetas)
    msg = copula.boundary_warning(lam)
    if msg:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        warns.append(msg)
    diag = {
        "optimizer": "BFGS multi-start + Newton polish",
        "starts": len(starts),
        "iterations": total_iter,
        "grad_sup_norm": gnorm,
        "converged": converged,
    }
    return FittedModel(margin, thetas, copula, lam, ll, FitMode.FULL_JOINT_ML, diag, warns)


def _newton_polish(objective, z, steps=5):
    """A few damped Newton steps with a finite-difference Hessian of the analytic gradient."""
    f, g = objective(z)
    for _ in range(steps):
        k = z.size
        H = np.empty((k, k))
        h = 1e-5
        for i in range(k):
            e = np.zeros(k)
            e[i] = h
            H[:, i] = (objective(z + e)[1] - objective(z - e)[1]) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            np.linalg.cholesky(H)
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            f_new, g_new = objective(z + t * step)
            if f_new <= f + 1e-14 * abs(f):
                break
            t *= 0.5
        else:
            break
        z, f, g = z + t * step, f_new, g_new
        if np.max(np.abs(g)) < 1e-13:
            break
    return z


def fit_margins_only(data: Dataset, margin, frozen_copula) -> FittedModel:
    """Fit each margin separately; the copula stays fully specified."""
    margin = get_margin(margin)
    if not isinstance(frozen_copula, FrozenCopula):
        frozen_copula = get_copula(frozen_copula)
        if frozen_copula.param_dim:
            raise DomainError("fit_margins_only needs a fully specified copula")
    data.check(allow_ties=True)
    thetas, diags = [], []
    for j in range(data.d):
        theta, diag = margin.fit(data.values[:, j])
        thetas.append(theta)
        diags.append(diag)
    thetas = np.array(thetas)
    lam = np.zeros(0)
    ll = joint_loglik(data, margin, frozen_copula, thetas, lam)
    gnorm = max(d_.grad_norm for d_ in diags)
    diag = {
        "optimizer": "per-margin MLE",
        "iterations": int(sum(d_.iterations for d_ in diags)),
        "grad_sup_norm": gnorm,
        "converged": all(d_.converged for d_ in diags),
    }
    warns = _margin_warnings(margin, thetas)
    return FittedModel(margin, thetas, frozen_copula, lam, ll, FitMode.MARGINS_ONLY_FIXED_COPULA, diag, warns)


def _margin_warnings(margin, thetas) -> list[str]:
    out = []
    for theta in thetas:
        msg = margin.boundary_warning(theta)
        if msg:
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            out.append(msg)
    return out


def fit_model(data: Dataset, margin, copula) -> FittedModel:
    """Dispatch on whether the copula is a family or fully specified."""
    copula = get_copula(copula)
    if isinstance(copula, FrozenCopula) or copula.param_dim == 0:
        if not isinstance(copula, FrozenCopula):
            copula = FrozenCopula(copula, np.zeros(0))
        return fit_margins_only(data, margin, copula)
    return fit_joint_mle(data, margin, copula)


def pseudo_observations(data: Dataset, fitted: FittedModel) -> np.ndarray:
    """``U_ij = F_{theta_j}(X_ij)`` under the fitted margins."""
    tied = data.tied_columns()
    if tied:
        warnings.warn(
            "tied values in column(s) " + ", ".join(data.labels[j] for j in tied),
            RuntimeWarning,
            stacklevel=2,
        )
    x = data.values
    if x.shape[1] != fitted.d:
        raise DomainError("data dimension does not match the fitted model")
    return np.column_stack([fitted.margin.cdf(fitted.thetas[j], x[:, j]) for j in range(fitted.d)])


def empirical_copula(pseudo_obs, u) -> np.ndarray:
    """``(1/n) sum 1{U_i <= u}``, evaluated at the rows of ``u``."""
    pseudo_obs = np.asarray(pseudo_obs)
    u = np.atleast_2d(u)
    return np.mean(np.all(pseudo_obs[None, :, :] <= u[:, None, :], axis=-1), axis=1)


__all__ = [
    "Dataset",
    "FitMode",
    "FittedModel",
    "empirical_copula",
    "fit_joint_mle",
    "fit_margins_only",
    "fit_model",
    "joint_loglik",
    "joint_loglik_grad",
    "pseudo_observations",
]
