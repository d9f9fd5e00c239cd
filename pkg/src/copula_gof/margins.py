"""Parametric univariate margins: Exponential, Lomax and Normal.

Each family exposes the cdf, quantile, density, the parameter score
``dF_theta(x)/dtheta`` and the composite ``dF_theta(Q_theta(u))/dtheta``
together with its derivative in ``u``. The composite pieces feed the
margin components of the score vector used by the martingale transform.

Parameterizations: Exponential by rate; Lomax by (alpha, sigma) with
``F(x) = 1 - (1 + x/sigma)**(-alpha)``; Normal by (mu, sigma).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from .errors import DomainError, InvalidParameters, NonConvergence, SupportViolation

# u outside this open interval is refused by the quantile-composite functions
U_EPS = 1e-12
LOMAX_ALPHA_LIMIT = 1e4


@dataclass(frozen=True)
class FitDiagnostics:
    iterations: int
    converged: bool
    grad_norm: float
    loglik: float
    message: str = ""


class MarginFamily:
    """Base class; subclasses implement the closed forms on arrays."""

    name: str = ""
    param_names: tuple[str, ...] = ()
    positive: tuple[bool, ...] = ()
    lower_support: float = -np.inf

    @property
    def param_dim(self) -> int:
        return len(self.param_names)

    def boundary_warning(self, theta) -> str | None:
        return None

    def check_params(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.param_dim,):
            raise InvalidParameters(
                f"{self.name}: expected {self.param_dim} parameters, got {theta.size}"
            )
        if not np.all(np.isfinite(theta)) or not self._valid(theta):
            raise InvalidParameters(f"{self.name}: parameters {theta} outside the parameter space")
        return theta

    def _valid(self, theta: np.ndarray) -> bool:
        raise NotImplementedError

    # -- public surface -------------------------------------------------
    def cdf(self, theta, x):
        theta = self.check_params(theta)
        return self._cdf(theta, np.asarray(x, dtype=float))

    def quantile(self, theta, u):
        theta = self.check_params(theta)
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("quantile requires 0 < u < 1")
        return self._quantile(theta, u)

    def pdf(self, theta, x):
        theta = self.check_params(theta)
        return np.exp(self._logpdf(theta, np.asarray(x, dtype=float)))

    def logpdf(self, theta, x):
        theta = self.check_params(theta)
        return self._logpdf(theta, np.asarray(x, dtype=float))

    def score(self, theta, x):
        """``dF_theta(x)/dtheta``, shape ``x.shape + (m,)``."""
        theta = self.check_params(theta)
        return self._score(theta, np.asarray(x, dtype=float))

    def logpdf_grad(self, theta, x):
        """Gradient of ``log f_theta(x)`` in theta, shape ``x.shape + (m,)``."""
        theta = self.check_params(theta)
        x = np.asarray(x, dtype=float)
        self._check_support(x)
        return self._logpdf_grad(theta, x)

    def score_at_quantile(self, theta, u):
        """Return ``dF(Q(u))/dtheta`` and its derivative in ``u``.

        Both arrays have shape ``u.shape + (m,)``.
        """
        theta = self.check_params(theta)
        u = np.asarray(u, dtype=float)
        if np.any((u <= U_EPS) | (u >= 1.0 - U_EPS)):
            raise DomainError(f"score_at_quantile requires {U_EPS} < u < 1 - {U_EPS}")
        return self._score_at_quantile(theta, u)

    def sample(self, theta, size, rng):
        theta = self.check_params(theta)
        return self._quantile(theta, rng.uniform(size=size))

    def fit(self, x) -> tuple[np.ndarray, FitDiagnostics]:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size < self.param_dim + 1:
            raise DomainError(f"need at least {self.param_dim + 1} observations")
        self._check_support(x)
        return self._fit(x)

    def loglik(self, theta, x) -> float:
        return float(np.sum(self.logpdf(theta, x)))

    def loglik_grad(self, theta, x) -> np.ndarray:
        return np.sum(self.logpdf_grad(theta, x), axis=0)

    def _check_support(self, x):
        if not np.all(np.isfinite(x)):
            raise SupportViolation(f"{self.name}: non-finite data")
        if np.any(x < self.lower_support):
            raise SupportViolation(f"{self.name}: data outside the support")

    def to_free(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.where(self.positive, np.log(np.abs(theta)), theta)

    def from_free(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.where(self.positive, np.exp(z), z)

    def free_jacobian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.where(self.positive, np.exp(z), 1.0)

    def __repr__(self):
        return f"MarginFamily({self.name})"


class Exponential(MarginFamily):
    name = "exponential"
    param_names = ("rate",)
    positive = (True,)
    lower_support = 0.0

    def _valid(self, theta):
        return theta[0] > 0

    def _cdf(self, theta, x):
        return np.where(x > 0, -np.expm1(-theta[0] * np.maximum(x, 0.0)), 0.0)

    def _quantile(self, theta, u):
        return -np.log1p(-u) / theta[0]

    def _logpdf(self, theta, x):
        with np.errstate(divide="ignore"):
            return np.where(x >= 0, np.log(theta[0]) - theta[0] * x, -np.inf)

    def _score(self, theta, x):
        xp = np.maximum(x, 0.0)
        return (xp * np.exp(-theta[0] * xp))[..., None]

    def _logpdf_grad(self, theta, x):
        return (1.0 / theta[0] - x)[..., None]

    def _score_at_quantile(self, theta, u):
        b = theta[0]
        l1u = np.log1p(-u)
        value = -(1.0 - u) * l1u / b
        du = (l1u + 1.0) / b
        return value[..., None], du[..., None]

    def _fit(self, x):
        rate = 1.0 / np.mean(x)
        theta = np.array([rate])
        return theta, FitDiagnostics(0, True, 0.0, self.loglik(theta, x), "closed form")


class Lomax(MarginFamily):
    name = "lomax"
    param_names = ("alpha", "sigma")
    positive = (True, True)
    lower_support = 0.0

    def _valid(self, theta):
        return theta[0] > 0 and theta[1] > 0

    def _cdf(self, theta, x):
        a, s = theta
        xp = np.maximum(x, 0.0)
        return np.where(x > 0, -np.expm1(-a * np.log1p(xp / s)), 0.0)

    def _quantile(self, theta, u):
        a, s = theta
        return s * np.expm1(-np.log1p(-u) / a)

    def _logpdf(self, theta, x):
        a, s = theta
        xp = np.maximum(x, 0.0)
        val = np.log(a) - np.log(s) - (a + 1.0) * np.log1p(xp / s)
        return np.where(x >= 0, val, -np.inf)

    def _score(self, theta, x):
        a, s = theta
        xp = np.maximum(x, 0.0)
        lz = np.log1p(xp / s)
        d_alpha = np.exp(-a * lz) * lz
        d_sigma = -a * xp * np.exp(-(a + 1.0) * lz) / s**2
        return np.stack([d_alpha, d_sigma], axis=-1)

    def _logpdf_grad(self, theta, x):
        a, s = theta
        d_alpha = 1.0 / a - np.log1p(x / s)
        d_sigma = -1.0 / s + (a + 1.0) * x / (s * (s + x))
        return np.stack([d_alpha, d_sigma], axis=-1)

    def _score_at_quantile(self, theta, u):
        a, s = theta
        l1u = np.log1p(-u)
        w = 1.0 - u
        w_pow = np.exp(l1u / a)  # (1-u)**(1/alpha)
        v_alpha = -w * l1u / a
        v_sigma = -(a / s) * (w - w * w_pow)
        du_alpha = (l1u + 1.0) / a
        du_sigma = -(a / s) * (-1.0 + (1.0 + 1.0 / a) * w_pow)
        return np.stack([v_alpha, v_sigma], axis=-1), np.stack([du_alpha, du_sigma], axis=-1)

    def boundary_warning(self, theta):
        if theta[0] > LOMAX_ALPHA_LIMIT:
            return (f"lomax: alpha={theta[0]:.3g} is diverging (exponential limit); "
                    "the two margin scores are nearly collinear")
        return None

    def _profile(self, x, log_sigma):
        s = np.exp(log_sigma)
        t = np.sum(np.log1p(x / s))
        a = x.size / t
        return a, s

    def _fit(self, x):
        n = x.size
        # profile start: alpha is explicit given sigma
        grid = np.log(np.median(x)) + np.linspace(-4.0, 6.0, 61)
        prof = []
        for ls in grid:
            a, s = self._profile(x, ls)
            prof.append(np.sum(self._logpdf(np.array([a, s]), x)))
        a0, s0 = self._profile(x, grid[int(np.argmax(prof))])
        z0 = np.log([a0, s0])

        def objective(z):
            theta = np.exp(z)
            ll = np.sum(self._logpdf(theta, x))
            g = np.sum(self._logpdf_grad(theta, x), axis=0) * theta
            return -ll / n, -g / n

        res = optimize.minimize(
            objective, z0, jac=True, method="BFGS", options={"maxiter": 200, "gtol": 1e-8}
        )
        theta = np.exp(res.x)
        grad = np.sum(self._logpdf_grad(theta, x), axis=0)
        gnorm = float(np.max(np.abs(grad)))
        converged = bool(res.success) or gnorm < 1e-6 * n
        if not converged:
            raise NonConvergence(f"lomax MLE did not converge: {res.message}")
        diag = FitDiagnostics(int(res.nit), converged, gnorm, float(-res.fun * n), str(res.message))
        return theta, diag


class Normal(MarginFamily):
    name = "normal"
    param_names = ("mu", "sigma")
    positive = (False, True)

    def _valid(self, theta):
        return theta[1] > 0

    def _cdf(self, theta, x):
        return special.ndtr((x - theta[0]) / theta[1])

    def _quantile(self, theta, u):
        return theta[0] + theta[1] * special.ndtri(u)

    def _logpdf(self, theta, x):
        mu, s = theta
        z = (x - mu) / s
        return -0.5 * z * z - np.log(s) - 0.5 * np.log(2.0 * np.pi)

    def _score(self, theta, x):
        mu, s = theta
        z = (x - mu) / s
        phi = stats.norm.pdf(z)
        return np.stack([-phi / s, -z * phi / s], axis=-1)

    def _logpdf_grad(self, theta, x):
        mu, s = theta
        r = x - mu
        return np.stack([r / s**2, -1.0 / s + r * r / s**3], axis=-1)

    def _score_at_quantile(self, theta, u):
        s = theta[1]
        z = special.ndtri(u)
        phi = stats.norm.pdf(z)
        value = np.stack([-phi / s, -z * phi / s], axis=-1)
        du = np.stack([z / s, -(1.0 - z * z) / s], axis=-1)
        return value, du

    def _fit(self, x):
        mu = np.mean(x)
        sd = np.sqrt(np.mean((x - mu) ** 2))
        if sd <= 0:
            raise InvalidParameters("normal MLE: zero variance")
        theta = np.array([mu, sd])
        return theta, FitDiagnostics(0, True, 0.0, self.loglik(theta, x), "closed form")


EXPONENTIAL = Exponential()
LOMAX = Lomax()
NORMAL = Normal()

MARGINS = {fam.name: fam for fam in (EXPONENTIAL, LOMAX, NORMAL)}


def get_margin(name: str | MarginFamily) -> MarginFamily:
    if isinstance(name, MarginFamily):
        return name
    try:
        return MARGINS[name.lower()]
    except KeyError:
        raise InvalidParameters(f"unknown margin family {name!r}; choose from {sorted(MARGINS)}")


# thin functional wrappers
def margin_cdf(fam, theta, x):
    return get_margin(fam).cdf(theta, x)


def margin_quantile(fam, theta, u):
    return get_margin(fam).quantile(theta, u)


def margin_score(fam, theta, x):
    return get_margin(fam).score(theta, x)


def margin_score_at_quantile(fam, theta, u):
    return get_margin(fam).score_at_quantile(theta, u)


def margin_fit_mle(fam, data):
    return get_margin(fam).fit(data)
