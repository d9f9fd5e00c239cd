"""Parametric copula families.

Families: Independence, Clayton, Gumbel (any dimension), Frank and
Cook-Johnson (bivariate). Every family provides the cdf, log-density,
analytic gradients of the log-density in ``u`` and in the parameters,
the partial derivatives of the cdf in ``u`` and in the parameters,
a seeded sampler and Kendall's tau.

Points are arrays of shape ``(..., d)``; parameters are 1-d arrays of
length ``param_dim``.
"""
from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, InvalidParameters, NumericalSingularity

GUMBEL_LOWER = 1.0 + 1e-6
FRANK_ZERO = 1e-6


def _as_points(u, d_allowed=None) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0 or u.shape[-1] < 2:
        raise DomainError("copula points need a trailing dimension d >= 2")
    if d_allowed is not None and u.shape[-1] not in d_allowed:
        raise DomainError(f"dimension {u.shape[-1]} not supported (allowed: {d_allowed})")
    return u


def _require_interior(u):
    if np.any((u <= 0.0) | (u >= 1.0)) or np.any(~np.isfinite(u)):
        raise DomainError("density and gradients need points strictly inside (0,1)^d")


class CopulaFamily:
    name = ""
    param_names: tuple[str, ...] = ()
    dims: tuple[int, ...] | None = None  # None means any d >= 2

    @property
    def param_dim(self) -> int:
        return len(self.param_names)

    def check_params(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float).reshape(-1)
        if lam.shape != (self.param_dim,):
            raise InvalidParameters(
                f"{self.name}: expected {self.param_dim} parameters, got {lam.size}"
            )
        if not np.all(np.isfinite(lam)) or not self._valid(lam):
            raise InvalidParameters(f"{self.name}: parameters {lam} outside the parameter space")
        return lam

    def _valid(self, lam) -> bool:
        return True

    # -- evaluation ----------------------------------------------------
    def cdf(self, lam, u):
        lam = self.check_params(lam)
        u = _as_points(u, self.dims)
        uc = np.clip(u, 0.0, 1.0)
        out = np.zeros(uc.shape[:-1])
        zero = np.any(uc <= 0.0, axis=-1)
        inner = ~zero
        if np.any(inner):
            v = uc[inner]
            # exact margins: all-but-one coordinate at 1
            ones = v >= 1.0
            res = np.empty(v.shape[0])
            nfree = np.sum(~ones, axis=-1)
            trivial = nfree <= 1
            if np.any(trivial):
                res[trivial] = np.min(v[trivial], axis=-1)
            if np.any(~trivial):
                w = np.minimum(v[~trivial], 1.0)
                res[~trivial] = self._cdf(lam, w)
            out[inner] = res
        return out

    def logpdf(self, lam, u):
        lam = self.check_params(lam)
        u = _as_points(u, self.dims)
        _require_interior(u)
        return self._logpdf(lam, u)

    def pdf(self, lam, u):
        return np.exp(self.logpdf(lam, u))

    def logpdf_grads(self, lam, u):
        """Return ``(grad_u, grad_lambda)`` of ``log c_lambda(u)``."""
        lam = self.check_params(lam)
        u = _as_points(u, self.dims)
        _require_interior(u)
        gu, gl = self._logpdf_grads(lam, u)
        if not (np.all(np.isfinite(gu)) and np.all(np.isfinite(gl))):
            raise NumericalSingularity(f"{self.name}: non-finite log-density gradient")
        return gu, gl

    def partial_u(self, lam, u, j=None):
        """``dC/du_j``; all axes stacked on the last dimension when ``j`` is None."""
        lam = self.check_params(lam)
        u = _as_points(u, self.dims)
        _require_interior(u)
        out = self._partials(lam, u)
        return out if j is None else out[..., j]

    def dcdf_dlambda(self, lam, u):
        lam = self.check_params(lam)
        u = _as_points(u, self.dims)
        _require_interior(u)
        return self._dcdf_dlambda(lam, u)

    # -- sampling --------------------------------------------------------
    def sample(self, lam, n, rng=None, d=2):
        lam = self.check_params(lam)
        if self.dims is not None and d not in self.dims:
            raise DomainError(f"{self.name} supports d in {self.dims}")
        rng = np.random.default_rng(rng)
        return self._sample(lam, int(n), rng, d)

    def _sample(self, lam, n, rng, d):
        if d != 2:
            raise DomainError(f"{self.name}: only bivariate sampling available")
        u = rng.uniform(size=n)
        w = rng.uniform(size=n)
        v = self.conditional_inverse(lam, u, w)
        return np.column_stack([u, v])

    def conditional_inverse(self, lam, u, w, tol=1e-12):
        """Solve ``dC/du(u, v) = w`` for v by bisection."""
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        n_iter = int(np.ceil(np.log2(1.0 / tol))) + 1
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            val = self._partials(lam, np.stack([u, mid], axis=-1))[..., 0]
            below = val < w
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        v = 0.5 * (lo + hi)
        return np.clip(v, np.finfo(float).tiny, 1.0 - np.finfo(float).eps)

    # -- dependence measures ----------------------------------------------
    def kendall_tau(self, lam) -> float:
        lam = self.check_params(lam)
        return self._kendall_tau(lam)

    def spearman_rho(self, lam) -> float:
        lam = self.check_params(lam)
        return self._spearman_rho(lam)

    def _kendall_tau(self, lam):
        # tau = 1 - 4 * int int C_u C_v
        x, w = _gauss01(400)
        uu, vv = np.meshgrid(x, x, indexing="ij")
        p = self._partials(lam, np.stack([uu, vv], axis=-1))
        return float(1.0 - 4.0 * np.einsum("i,j,ij->", w, w, p[..., 0] * p[..., 1]))

    def _spearman_rho(self, lam):
        x, w = _gauss01(400)
        uu, vv = np.meshgrid(x, x, indexing="ij")
        c = self._cdf(lam, np.stack([uu, vv], axis=-1))
        return float(12.0 * np.einsum("i,j,ij->", w, w, c) - 3.0)

    # -- estimation helpers -----------------------------------------------
    def to_free(self, lam) -> np.ndarray:
        return np.asarray(lam, dtype=float).copy()

    def from_free(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float).copy()

    def free_jacobian(self, z) -> np.ndarray:
        """Diagonal of d lambda / d z."""
        return np.ones_like(np.asarray(z, dtype=float))

    def initial_from_tau(self, tau: float) -> np.ndarray:
        raise NotImplementedError

    def boundary_warning(self, lam) -> str | None:
        return None

    def boundary_mask(self, lam, grad) -> np.ndarray:
        """Components sitting on a closed boundary with the gradient pointing outward."""
        return np.zeros(self.param_dim, dtype=bool)

    def __repr__(self):
        return f"CopulaFamily({self.name})"


@lru_cache(maxsize=8)
def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


class Independence(CopulaFamily):
    name = "independence"

    def _cdf(self, lam, u):
        return np.prod(u, axis=-1)

    def _logpdf(self, lam, u):
        return np.zeros(u.shape[:-1])

    def _logpdf_grads(self, lam, u):
        return np.zeros(u.shape), np.zeros(u.shape[:-1] + (0,))

    def _partials(self, lam, u):
        d = u.shape[-1]
        out = np.empty(u.shape)
        for j in range(d):
            out[..., j] = np.prod(np.delete(u, j, axis=-1), axis=-1)
        return out

    def _dcdf_dlambda(self, lam, u):
        return np.zeros(u.shape[:-1] + (0,))

    def _sample(self, lam, n, rng, d):
        return rng.uniform(size=(n, d))

    def _kendall_tau(self, lam):
        return 0.0

    def _spearman_rho(self, lam):
        return 0.0


class Clayton(CopulaFamily):
    name = "clayton"
    param_names = ("lambda",)

    def _valid(self, lam):
        return lam[0] > 0

    def _S(self, a, u):
        d = u.shape[-1]
        return np.sum(u ** (-a), axis=-1) - d + 1.0

    def _cdf(self, lam, u):
        a = lam[0]
        with np.errstate(over="ignore"):  # S = inf gives the correct limit 0
            return self._S(a, u) ** (-1.0 / a)

    def _logpdf(self, lam, u):
        a = lam[0]
        d = u.shape[-1]
        S = self._S(a, u)
        const = sum(math.log1p(k * a) for k in range(1, d))
        return const - (a + 1.0) * np.sum(np.log(u), axis=-1) - (1.0 / a + d) * np.log(S)

    def _logpdf_grads(self, lam, u):
        a = lam[0]
        d = u.shape[-1]
        S = self._S(a, u)
        upow = u ** (-a)
        gu = -(a + 1.0) / u + (1.0 + d * a) * (upow / u) / S[..., None]
        logu = np.log(u)
        S_a = -np.sum(upow * logu, axis=-1)
        gl = (
            sum(k / (1.0 + k * a) for k in range(1, d))
            - np.sum(logu, axis=-1)
            + np.log(S) / a**2
            - (1.0 / a + d) * S_a / S
        )
        return gu, gl[..., None]

    def _partials(self, lam, u):
        a = lam[0]
        S = self._S(a, u)
        return (S ** (-1.0 / a - 1.0))[..., None] * u ** (-a - 1.0)

    def _dcdf_dlambda(self, lam, u):
        a = lam[0]
        S = self._S(a, u)
        C = S ** (-1.0 / a)
        S_a = -np.sum(u ** (-a) * np.log(u), axis=-1)
        return (C * (np.log(S) / a**2 - S_a / (a * S)))[..., None]

    def _sample(self, lam, n, rng, d):
        a = lam[0]
        v = rng.gamma(1.0 / a, size=(n, 1))
        e = rng.exponential(size=(n, d))
        return np.exp(-np.log1p(e / v) / a)

    def _kendall_tau(self, lam):
        return float(lam[0] / (lam[0] + 2.0))

    def to_free(self, lam):
        return np.log(lam)

    def from_free(self, z):
        return np.exp(z)

    def free_jacobian(self, z):
        return np.exp(z)

    def initial_from_tau(self, tau):
        tau = min(max(tau, 0.05), 0.95)
        return np.array([2.0 * tau / (1.0 - tau)])


def _stirling1_signed(n, k):
    # s(n,k) by recurrence s(n+1,k) = s(n,k-1) - n s(n,k)
    table = np.zeros((n + 1, n + 1))
    table[0, 0] = 1.0
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            table[i, j] = table[i - 1, j - 1] - (i - 1) * table[i - 1, j]
    return table[n, k]


def _stirling2(n, k):
    return float(special.stirling2(n, k, exact=True))


@lru_cache(maxsize=16)
def _gumbel_coef_tables(d):
    """Matrix M[k, j] = (-1)^(d-k) s(d,j) S(j,k) so that a_k(alpha) = sum_j M[k,j] alpha^j."""
    M = np.zeros((d + 1, d + 1))
    for k in range(1, d + 1):
        for j in range(k, d + 1):
            M[k, j] = (-1) ** (d - k) * _stirling1_signed(d, j) * _stirling2(j, k)
    return M


class Gumbel(CopulaFamily):
    """Gumbel copula via the generator psi(s) = exp(-s^(1/lambda)).

    The density uses the polynomial form of the d-th generator derivative,
    ``psi^(d)(s) = (-1)^d psi(s) s^(-d) P(s^alpha)`` with ``alpha = 1/lambda``.
    """

    name = "gumbel"
    param_names = ("lambda",)

    def _valid(self, lam):
        return lam[0] >= 1.0

    def _poly(self, d, alpha, x):
        M = _gumbel_coef_tables(d)
        powers = alpha ** np.arange(d + 1)
        dpowers = np.concatenate([[0.0], np.arange(1, d + 1) * alpha ** np.arange(d)])
        a = M @ powers  # a[k]
        da = M @ dpowers
        ks = np.arange(d + 1)
        xk = x[..., None] ** ks
        P = xk @ a
        dP_dx = (xk[..., :-1] @ (ks[1:] * a[1:]))
        dP_dalpha = xk @ da
        return P, dP_dx, dP_dalpha

    def _parts(self, lam, u):
        a = lam[0]
        t = -np.log(u)
        phi = t**a
        S = np.sum(phi, axis=-1)
        return a, t, phi, S

    def _cdf(self, lam, u):
        a, t, phi, S = self._parts(lam, u)
        return np.exp(-(S ** (1.0 / a)))

    def _logpdf(self, lam, u):
        a, t, phi, S = self._parts(lam, u)
        d = u.shape[-1]
        alpha = 1.0 / a
        x = S**alpha
        P, _, _ = self._poly(d, alpha, x)
        if np.any(P <= 0):
            raise NumericalSingularity("gumbel: non-positive density polynomial")
        return (
            -x
            - d * np.log(S)
            + np.log(P)
            + np.sum(np.log(a) + (a - 1.0) * np.log(t) + t, axis=-1)
        )

    def _logpdf_grads(self, lam, u):
        a, t, phi, S = self._parts(lam, u)
        d = u.shape[-1]
        alpha = 1.0 / a
        logS = np.log(S)
        x = S**alpha
        P, dPx, dPa = self._poly(d, alpha, x)
        # L(S, alpha) = -x - d log S + log P(x)
        dL_dS = (-alpha * x / S) - d / S + dPx * alpha * x / (S * P)
        dL_dalpha = -x * logS + (dPa + dPx * x * logS) / P
        phi_prime = -a * t ** (a - 1.0) / u
        gu = dL_dS[..., None] * phi_prime + (a - 1.0) / (u * (-t)) - 1.0 / u
        S_lam = np.sum(phi * np.log(t), axis=-1)
        gl = dL_dS * S_lam + dL_dalpha * (-1.0 / a**2) + np.sum(1.0 / a + np.log(t), axis=-1)
        return gu, gl[..., None]

    def _partials(self, lam, u):
        a, t, phi, S = self._parts(lam, u)
        alpha = 1.0 / a
        C = np.exp(-(S**alpha))
        phi_prime = -a * t ** (a - 1.0) / u
        return (C * (-alpha) * S ** (alpha - 1.0))[..., None] * phi_prime

    def _dcdf_dlambda(self, lam, u):
        a, t, phi, S = self._parts(lam, u)
        alpha = 1.0 / a
        x = S**alpha
        S_lam = np.sum(phi * np.log(t), axis=-1)
        dx = x * (-np.log(S) / a**2 + alpha * S_lam / S)
        return (-np.exp(-x) * dx)[..., None]

    def _sample(self, lam, n, rng, d):
        alpha = 1.0 / lam[0]
        e = rng.exponential(size=(n, d))
        if alpha >= 1.0:
            return np.exp(-e)
        th = rng.uniform(0.0, np.pi, size=(n, 1))
        w = rng.exponential(size=(n, 1))
        v = (np.sin(alpha * th) / np.sin(th) ** (1.0 / alpha)) * (
            np.sin((1.0 - alpha) * th) / w
        ) ** ((1.0 - alpha) / alpha)
        return np.exp(-((e / v) ** alpha))

    def _kendall_tau(self, lam):
        return float(1.0 - 1.0 / lam[0])

    def to_free(self, lam):
        return np.log(np.asarray(lam) - GUMBEL_LOWER)

    def from_free(self, z):
        return GUMBEL_LOWER + np.exp(z)

    def free_jacobian(self, z):
        return np.exp(z)

    def initial_from_tau(self, tau):
        tau = min(max(tau, 0.05), 0.95)
        return np.array([1.0 / (1.0 - tau)])


def _debye(k, x):
    if abs(x) < 1e-12:
        return 1.0
    val, _ = integrate.quad(lambda t: t**k / np.expm1(t) if t != 0 else (1.0 if k == 1 else 0.0), 0.0, x)
    return k * val / x**k


class Frank(CopulaFamily):
    name = "frank"
    param_names = ("lambda",)
    dims = (2,)

    def _terms(self, lam, u):
        a = lam[0]
        A = -np.expm1(-a)
        p = -np.expm1(-a * u[..., 0])
        q = -np.expm1(-a * u[..., 1])
        D = A - p * q
        return a, A, p, q, D

    def _cdf(self, lam, u):
        a = lam[0]
        if abs(a) < FRANK_ZERO:
            return u[..., 0] * u[..., 1]
        a, A, p, q, D = self._terms(lam, u)
        return -np.log1p(-p * q / A) / a

    def _logpdf(self, lam, u):
        a = lam[0]
        if abs(a) < FRANK_ZERO:
            return np.zeros(u.shape[:-1])
        a, A, p, q, D = self._terms(lam, u)
        return np.log(a * A) - a * (u[..., 0] + u[..., 1]) - 2.0 * np.log(np.abs(D))

    def _logpdf_grads(self, lam, u):
        a = lam[0]
        uu, vv = u[..., 0], u[..., 1]
        if abs(a) < FRANK_ZERO:
            gu = np.zeros(u.shape)
            gl = 0.5 * (1.0 - 2.0 * uu) * (1.0 - 2.0 * vv)
            return gu, gl[..., None]
        a, A, p, q, D = self._terms(lam, u)
        eu = np.exp(-a * uu)
        ev = np.exp(-a * vv)
        gu0 = -a + 2.0 * a * eu * q / D
        gu1 = -a + 2.0 * a * ev * p / D
        A_l = np.exp(-a)
        D_l = A_l - uu * eu * q - p * vv * ev
        gl = 1.0 / a + A_l / A - (uu + vv) - 2.0 * D_l / D
        return np.stack([gu0, gu1], axis=-1), gl[..., None]

    def _partials(self, lam, u):
        a = lam[0]
        uu, vv = u[..., 0], u[..., 1]
        if abs(a) < FRANK_ZERO:
            return np.stack([vv, uu], axis=-1)
        a, A, p, q, D = self._terms(lam, u)
        return np.stack([np.exp(-a * uu) * q / D, np.exp(-a * vv) * p / D], axis=-1)

    def _dcdf_dlambda(self, lam, u):
        a = lam[0]
        uu, vv = u[..., 0], u[..., 1]
        if abs(a) < FRANK_ZERO:
            return (0.5 * uu * vv * (1.0 - uu) * (1.0 - vv))[..., None]
        a, A, p, q, D = self._terms(lam, u)
        A_l = np.exp(-a)
        D_l = A_l - uu * np.exp(-a * uu) * q - p * vv * np.exp(-a * vv)
        logratio = np.log1p(-p * q / A)
        return (logratio / a**2 - (D_l / D - A_l / A) / a)[..., None]

    def _sample(self, lam, n, rng, d):
        if abs(lam[0]) < FRANK_ZERO:
            return rng.uniform(size=(n, 2))
        return super()._sample(lam, n, rng, d)

    def _kendall_tau(self, lam):
        a = lam[0]
        if abs(a) < FRANK_ZERO:
            return 0.0
        return float(1.0 - 4.0 / a * (1.0 - _debye(1, a)))

    def _spearman_rho(self, lam):
        a = lam[0]
        if abs(a) < FRANK_ZERO:
            return 0.0
        return float(1.0 - 12.0 / a * (_debye(1, a) - _debye(2, a)))

    def initial_from_tau(self, tau):
        tau = min(max(tau, -0.95), 0.95)
        if abs(tau) < 1e-4:
            return np.array([0.0])
        f = lambda a: self._kendall_tau(np.array([a])) - tau
        return np.array([optimize.brentq(f, -200.0 if tau < 0 else 1e-4, -1e-4 if tau < 0 else 200.0)])


# Cook-Johnson terms: cdf coefficient factor (on 1 and lambda2), alpha, beta, gamma
_CJ_TERMS = (
    (1.0, 1.0, 1.0, 1.0, -1.0),
    (0.0, 1.0, 2.0, 2.0, -3.0),
    (0.0, -1.0, 2.0, 1.0, -2.0),
    (0.0, -1.0, 1.0, 2.0, -2.0),
)


class CookJohnson(CopulaFamily):
    """Two-parameter extension of the bivariate Clayton copula.

    The cdf is a signed sum of four Clayton-type terms
    ``c_r * (alpha_r u^-a + beta_r v^-a + gamma_r)^(-1/a)``.
    """

    name = "cookjohnson"
    param_names = ("lambda1", "lambda2")
    dims = (2,)

    def _valid(self, lam):
        return lam[0] > 0 and 0.0 <= lam[1] <= 1.0

    def _arrays(self, lam, u):
        a, l2 = lam
        uu, vv = u[..., 0], u[..., 1]
        x = uu ** (-a)
        y = vv ** (-a)
        T = np.array(_CJ_TERMS)
        c = T[:, 0] + T[:, 1] * l2
        dc = T[:, 1]
        al, be, ga = T[:, 2], T[:, 3], T[:, 4]
        A = al * x[..., None] + be * y[..., None] + ga
        return a, l2, uu, vv, x, y, c, dc, al, be, A

    def _cdf(self, lam, u):
        # u**(-a) may overflow for tiny u; every term then tends to 0, the correct limit
        with np.errstate(over="ignore"):
            a, l2, uu, vv, x, y, c, dc, al, be, A = self._arrays(lam, u)
            return np.sum(c * A ** (-1.0 / a), axis=-1)

    def _density_sum(self, lam, u):
        a, l2, uu, vv, x, y, c, dc, al, be, A = self._arrays(lam, u)
        e = -1.0 / a - 2.0
        w = c * al * be
        B = np.sum(w * A**e, axis=-1)
        if np.any(B <= 0) or not np.all(np.isfinite(B)):
            raise NumericalSingularity("cook-johnson: density underflow")
        return B

    def _logpdf(self, lam, u):
        a = lam[0]
        B = self._density_sum(lam, u)
        return np.log1p(a) - (a + 1.0) * np.sum(np.log(u), axis=-1) + np.log(B)

    def _logpdf_grads(self, lam, u):
        a, l2, uu, vv, x, y, c, dc, al, be, A = self._arrays(lam, u)
        e = -1.0 / a - 2.0
        w = c * al * be
        Ae = A**e
        B = self._density_sum(lam, u)
        Ae1 = Ae / A
        Bu = np.sum(w * (1.0 + 2.0 * a) * al * Ae1, axis=-1) * uu ** (-a - 1.0)
        Bv = np.sum(w * (1.0 + 2.0 * a) * be * Ae1, axis=-1) * vv ** (-a - 1.0)
        gu = np.stack([-(a + 1.0) / uu + Bu / B, -(a + 1.0) / vv + Bv / B], axis=-1)
        lu, lv = np.log(uu), np.log(vv)
        A_a = al * (-lu * x)[..., None] + be * (-lv * y)[..., None]
        Ba = np.sum(w * Ae * (np.log(A) / a**2 + e * A_a / A), axis=-1)
        g_a = 1.0 / (1.0 + a) - (lu + lv) + Ba / B
        g_l2 = np.sum(dc * al * be * Ae, axis=-1) / B
        return gu, np.stack([g_a, g_l2], axis=-1)

    def _partials(self, lam, u):
        a, l2, uu, vv, x, y, c, dc, al, be, A = self._arrays(lam, u)
        Ap = A ** (-1.0 / a - 1.0)
        pu = np.sum(c * al * Ap, axis=-1) * uu ** (-a - 1.0)
        pv = np.sum(c * be * Ap, axis=-1) * vv ** (-a - 1.0)
        return np.stack([pu, pv], axis=-1)

    def _dcdf_dlambda(self, lam, u):
        a, l2, uu, vv, x, y, c, dc, al, be, A = self._arrays(lam, u)
        G = A ** (-1.0 / a)
        A_a = al * (-np.log(uu) * x)[..., None] + be * (-np.log(vv) * y)[..., None]
        d_a = np.sum(c * G * (np.log(A) / a**2 - A_a / (a * A)), axis=-1)
        d_l2 = np.sum(dc * G, axis=-1)
        return np.stack([d_a, d_l2], axis=-1)

    def to_free(self, lam):
        lam = np.asarray(lam, dtype=float)
        l2 = np.clip(lam[1], 1e-9, 1.0 - 1e-9)
        return np.array([np.log(lam[0]), special.logit(l2)])

    def from_free(self, z):
        return np.array([np.exp(z[0]), special.expit(z[1])])

    def free_jacobian(self, z):
        s = special.expit(z[1])
        return np.array([np.exp(z[0]), s * (1.0 - s)])

    def initial_from_tau(self, tau):
        tau = min(max(tau, 0.05), 0.95)
        return np.array([2.0 * tau / (1.0 - tau), 0.5])

    def boundary_mask(self, lam, grad):
        lo = lam[1] < 1e-6 and grad[1] < 0
        hi = lam[1] > 1.0 - 1e-6 and grad[1] > 0
        return np.array([False, lo or hi])

    def boundary_warning(self, lam):
        if lam[1] < 1e-6 or lam[1] > 1.0 - 1e-6:
            return (
                f"cookjohnson: lambda2={lam[1]:.3g} within 1e-6 of the boundary of [0,1]; "
                "transform assumptions need an interior parameter"
            )
        return None


class FrozenCopula(CopulaFamily):
    """A fully specified copula: the family with its parameter frozen (p = 0)."""

    def __init__(self, family: CopulaFamily, lam):
        self.family = family
        self.lam = family.check_params(lam)
        self.dims = family.dims
        lam_txt = ",".join(f"{v:g}" for v in self.lam)
        self.name = f"{family.name}({lam_txt})"

    param_names = ()

    def _cdf(self, lam, u):
        return self.family._cdf(self.lam, u)

    def _logpdf(self, lam, u):
        return self.family._logpdf(self.lam, u)

    def _logpdf_grads(self, lam, u):
        gu, _ = self.family._logpdf_grads(self.lam, u)
        return gu, np.zeros(u.shape[:-1] + (0,))

    def _partials(self, lam, u):
        return self.family._partials(self.lam, u)

    def _dcdf_dlambda(self, lam, u):
        return np.zeros(u.shape[:-1] + (0,))

    def _sample(self, lam, n, rng, d):
        return self.family._sample(self.lam, n, rng, d)

    def _kendall_tau(self, lam):
        return self.family._kendall_tau(self.lam)

    def _spearman_rho(self, lam):
        return self.family._spearman_rho(self.lam)

    def conditional_inverse(self, lam, u, w, tol=1e-12):
        return self.family.conditional_inverse(self.lam, u, w, tol)

    def initial_from_tau(self, tau):
        return np.zeros(0)

    def __repr__(self):
        return f"FrozenCopula({self.name})"


INDEPENDENCE = Independence()
CLAYTON = Clayton()
GUMBEL = Gumbel()
FRANK = Frank()
COOK_JOHNSON = CookJohnson()

COPULAS = {fam.name: fam for fam in (INDEPENDENCE, CLAYTON, GUMBEL, FRANK, COOK_JOHNSON)}
_ALIASES = {"cook-johnson": "cookjohnson", "cj": "cookjohnson", "indep": "independence"}


def get_copula(name, fixed_lambda=None) -> CopulaFamily:
    if isinstance(name, CopulaFamily):
        fam = name
    else:
        key = _ALIASES.get(name.lower(), name.lower())
        try:
            fam = COPULAS[key]
        except KeyError:
            raise InvalidParameters(f"unknown copula family {name!r}; choose from {sorted(COPULAS)}")
    if fixed_lambda is not None:
        return FrozenCopula(fam, fixed_lambda)
    return fam


def copula_cdf(fam, lam, u):
    return get_copula(fam).cdf(lam, u)


def copula_density(fam, lam, u):
    return get_copula(fam).pdf(lam, u)


def copula_logdensity_grads(fam, lam, u):
    return get_copula(fam).logpdf_grads(lam, u)


def copula_partial_u(fam, lam, u, j):
    return get_copula(fam).partial_u(lam, u, j)


def copula_sample(fam, lam, n, seed, d=2):
    return get_copula(fam).sample(lam, n, np.random.default_rng(seed), d=d)


def kendall_tau(fam, lam):
    return get_copula(fam).kendall_tau(lam)


def spearman_rho(fam, lam):
    return get_copula(fam).spearman_rho(lam)


def empirical_kendall_tau(u) -> float:
    from scipy.stats import kendalltau

    u = np.asarray(u)
    return float(kendalltau(u[:, 0], u[:, 1]).statistic)


def warn_if_boundary(fam: CopulaFamily, lam):
    msg = fam.boundary_warning(np.asarray(lam))
    if msg:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return msg
