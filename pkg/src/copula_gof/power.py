"""Contiguous alternatives: the drift direction g, norms and the directional test.

A direction ``h`` lives on ``[delta, 1-delta]^d`` and is orthogonal (under
the null copula) to every score component. The transformed process then
picks up the drift ``S(u) = (1-2 delta)^(-d/2) int_{A(u)} g sqrt(c)``, with
``g = h - k' I(s_d)^(-1) int_{S(s_d)} k h dC``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .errors import DomainError, QuadratureFailure
from .transform import (
    DEFAULT_QUAD_NODES,
    GridSpec,
    InfoMatrixMap,
    Partition,
    ScoreContext,
    TestProcessGrid,
    _midpoint_cells,
    _tensor_points,
    _tensor_weights,
)

ORTHOGONALITY_TOL = 1e-4


def _support_partition(ctx: ScoreContext, nodes: int) -> Partition:
    # a single corner at u = 1 maps to 1 - delta, so the support box is a union of cells
    grid = GridSpec(tuple(np.array([1.0]) for _ in range(ctx.d)))
    return Partition.build(grid, ctx.delta, nodes)


@dataclass
class AlternativeDirection:
    """Direction ``h`` of a contiguous alternative around the null ``ctx``."""

    ctx: ScoreContext
    h: Callable
    nodes: int = DEFAULT_QUAD_NODES
    check: bool = True
    name: str = "h"

    def __post_init__(self):
        self.partition = _support_partition(self.ctx, self.nodes)
        self.cells = _midpoint_cells(self.ctx, self.partition)
        self.h_cells = self(self._points())
        if self.check:
            norm = self.norm()
            if not np.isfinite(norm) or norm <= 0:
                raise DomainError("direction has zero or infinite norm")
            res = self.orthogonality_residual()
            if np.max(np.abs(res)) > ORTHOGONALITY_TOL * max(1.0, norm):
                raise DomainError(f"direction not orthogonal to the scores: residual {res}")

    def _points(self):
        return _tensor_points([self.partition.mids(j) for j in range(self.ctx.d)])

    def support_mask(self, s):
        s = np.asarray(s, dtype=float)
        delta = self.ctx.delta
        return np.all((s >= delta) & (s <= 1.0 - delta), axis=-1)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        mask = self.support_mask(s)
        out = np.zeros(s.shape[:-1])
        if np.any(mask):
            out[mask] = np.asarray(self.h(s[mask]), dtype=float)
        return out

    def _weights(self):
        k, c, vol = self.cells
        return c * vol

    def norm(self) -> float:
        val = float(np.sqrt(np.sum(self.h_cells**2 * self._weights())))
        if not np.isfinite(val):
            raise QuadratureFailure("non-finite norm")
        return val

    def orthogonality_residual(self) -> np.ndarray:
        k = self.cells[0]
        w = self._weights() * self.h_cells
        return np.tensordot(w, k, axes=(tuple(range(self.ctx.d)), tuple(range(self.ctx.d))))


@dataclass
class ProjectedDirection:
    """``g`` as a callable plus its values on the quadrature cells."""

    direction: AlternativeDirection
    levels: np.ndarray  # last-axis levels where I^(-1) int k h dC is known
    coef: np.ndarray  # (levels, q)
    cell_values: np.ndarray

    def correction(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, self.levels, self.coef[:, i]) for i in range(self.coef.shape[1])], axis=-1)

    def domain_mask(self, s):
        delta = self.direction.ctx.delta
        return np.all((s >= delta) & (s <= 1.0 - delta / 2.0), axis=-1)

    def __call__(self, s):
        """``g`` on the slab domain ``[delta, 1-delta/2]^d``, zero outside."""
        s = np.asarray(s, dtype=float)
        ctx = self.direction.ctx
        mask = self.domain_mask(s)
        out = np.zeros(s.shape[:-1])
        if np.any(mask):
            sm = s[mask]
            out[mask] = self.direction(sm) - np.sum(ctx.scores(sm) * self.correction(sm[:, -1]), axis=-1)
        return out

    def norm(self, domain: str = "slab") -> float:
        """L2(C) norm over the slab domain (isometric to ``h``) or the support box only."""
        w = self.direction._weights()
        if domain == "box":
            w = w * self.direction.support_mask(self.direction._points())
        elif domain != "slab":
            raise DomainError(f"unknown domain {domain!r}")
        return float(np.sqrt(np.sum(self.cell_values**2 * w)))


def project_g(direction: AlternativeDirection) -> ProjectedDirection:
    ctx = direction.ctx
    part = direction.partition
    k, c, vol = direction.cells
    d = ctx.d
    imap = InfoMatrixMap(ctx, part, direction.cells)
    w = (c * vol * direction.h_cells)[..., None] * k
    rows = w.sum(axis=tuple(range(d - 1))) if d > 1 else w
    suffix = np.concatenate([np.cumsum(rows[::-1], axis=0)[::-1], np.zeros((1, ctx.q))])
    inner = suffix[1:] + 0.5 * rows
    # above 1 - delta the slab misses the support of h, so the correction is exactly zero
    levels = part.mids(d - 1)
    live = np.flatnonzero(levels <= 1.0 - ctx.delta)
    coef = np.zeros_like(inner)
    coef[live] = imap.solve_all(live, inner[live])
    g_cells = direction.h_cells - np.einsum("...i,...i->...", k, coef[(None,) * (d - 1) + (slice(None),)])
    return ProjectedDirection(direction, part.mids(d - 1), coef, g_cells)


def h_norm(direction: AlternativeDirection) -> float:
    return direction.norm()


def variation_distance(norm_h: float) -> float:
    """Limiting distance in variation ``2 Phi(|h|/2) - 1``."""
    if norm_h < 0:
        raise DomainError("norm must be nonnegative")
    return float(2.0 * stats.norm.cdf(0.5 * norm_h) - 1.0)


def asymptotic_power(norm_h: float, alpha: float = 0.05) -> float:
    return float(1.0 - stats.norm.cdf(stats.norm.ppf(1.0 - alpha) - norm_h))


@dataclass(frozen=True)
class DirectionalTestResult:
    statistic: float
    threshold: float
    reject: bool
    asymptotic_power: float
    norm_h: float


def _stieltjes(W: TestProcessGrid, integrand: Callable, sub: int = 1) -> float:
    grid = W.grid
    if grid.d != W.values.ndim:
        raise DomainError("grid and values disagree")
    vals = W.values
    for ax in range(vals.ndim):
        pad = [(0, 0)] * vals.ndim
        pad[ax] = (1, 0)
        vals = np.pad(vals, pad)
    incr = vals
    for ax in range(vals.ndim):
        incr = np.diff(incr, axis=ax)
    lows = [np.concatenate([[0.0], a[:-1]]) for a in grid.axes]
    highs = list(grid.axes)
    # integrand averaged over sub^d points per grid cell
    offs = (np.arange(sub) + 0.5) / sub
    total = np.zeros(grid.shape)
    for combo in np.ndindex(*(sub,) * grid.d):
        axes = [lo + offs[i] * (hi - lo) for lo, hi, i in zip(lows, highs, combo)]
        total += integrand(_tensor_points(axes))
    return float(np.sum(total / sub**grid.d * incr))


def directional_test(W: TestProcessGrid, g: ProjectedDirection, alpha: float = 0.05, ctx: ScoreContext | None = None):
    """Asymptotically most powerful test against the alternatives in direction ``h``.

    ``ctx`` holds the fitted null (plug-in); defaults to the direction's own.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0,1)")
    ctx = ctx or g.direction.ctx
    delta = ctx.delta
    d = ctx.d
    scale = (1.0 - 2.0 * delta) ** (d / 2.0)

    def integrand(s):
        t = delta + (1.0 - 2.0 * delta) * s
        return g(t) * np.sqrt(ctx.density(t))

    stat = scale * _stieltjes(W, integrand)
    fine = scale * _stieltjes(W, integrand, sub=2)
    if abs(fine - stat) > 0.01 * max(abs(stat), 1e-12) and abs(stat) > 1e-12:
        warnings.warn("directional statistic changes by more than 1% under refinement; grid too coarse", RuntimeWarning, stacklevel=2)
    norm = g.direction.norm()
    threshold = norm * stats.norm.ppf(1.0 - alpha)
    return DirectionalTestResult(stat, float(threshold), bool(stat > threshold), asymptotic_power(norm, alpha), norm)


# ----------------------------------------------------------------------------
# built-in directions
# ----------------------------------------------------------------------------
def _bump(freqs, delta):
    freqs = np.asarray(freqs, dtype=float)

    def f(s):
        x = (np.asarray(s) - delta) / (1.0 - 2.0 * delta)
        return np.prod(np.sin(np.pi * freqs * x), axis=-1)

    return f


def orthogonalized(ctx: ScoreContext, base: Callable, nodes: int = DEFAULT_QUAD_NODES, scale: float = 1.0, name="h"):
    """Remove the span of the scores from ``base`` on the support box (discrete Gram-Schmidt)."""
    probe = AlternativeDirection(ctx, base, nodes, check=False)
    k = probe.cells[0]
    mask = probe.support_mask(probe._points())
    w = probe._weights() * mask
    axes = tuple(range(ctx.d))
    gram = np.tensordot(w[..., None] * k, k, axes=(axes, axes))
    rhs = np.tensordot(w * probe.h_cells, k, axes=(axes, axes))
    beta = np.linalg.solve(gram, rhs)

    def h(s):
        return scale * (base(s) - ctx.scores(s) @ beta)

    return AlternativeDirection(ctx, h, nodes, check=True, name=name)


LIBRARY_FREQS = {
    "bump11": (1, 1),
    "bump12": (1, 2),
    "bump21": (2, 1),
    "bump22": (2, 2),
    "bump13": (1, 3),
}


def library_direction(ctx: ScoreContext, name: str, nodes: int = DEFAULT_QUAD_NODES, scale: float = 1.0):
    if name not in LIBRARY_FREQS:
        raise DomainError(f"unknown direction {name!r}; choose from {sorted(LIBRARY_FREQS)}")
    freqs = LIBRARY_FREQS[name][: ctx.d] + (1,) * max(0, ctx.d - 2)
    return orthogonalized(ctx, _bump(freqs, ctx.delta), nodes, scale, name)


def direction_from_table(ctx: ScoreContext, points, values, nodes: int = DEFAULT_QUAD_NODES, check=True):
    """Direction given on a rectangular table (nearest-cell lookup)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    axes = [np.unique(points[:, j]) for j in range(points.shape[1])]
    table = np.full(tuple(a.size for a in axes), np.nan)
    idx = tuple(np.searchsorted(a, points[:, j]) for j, a in enumerate(axes))
    table[idx] = values
    if np.any(np.isnan(table)):
        raise DomainError("direction table is not a full rectangular grid")
    edges = [np.concatenate([[-np.inf], 0.5 * (a[1:] + a[:-1]), [np.inf]]) for a in axes]

    def h(s):
        s = np.asarray(s)
        ii = tuple(np.searchsorted(e, s[..., j]) - 1 for j, e in enumerate(edges))
        return table[ii]

    return AlternativeDirection(ctx, h, nodes, check=check, name="table")


# ----------------------------------------------------------------------------
# sampling from a contiguous alternative
# ----------------------------------------------------------------------------
def sample_alternative(direction: AlternativeDirection, n: int, rng: np.random.Generator, n_eff: int | None = None):
    """Copula sample with density ratio ``(1 + h/(2 sqrt(n)))^2`` (normalized) to the null.

    Rejection sampling from the null copula; ``n_eff`` sets the sqrt(n)
    scaling (defaults to ``n``).
    """
    ctx = direction.ctx
    root = np.sqrt(n_eff or n)
    hmax = float(np.max(np.abs(direction.h_cells)))
    bound = (1.0 + 1.1 * hmax / (2.0 * root)) ** 2
    out = []
    have = 0
    while have < n:
        m = max(2 * (n - have), 64)
        u = ctx.copula.sample(ctx.lam, m, rng, d=ctx.d)
        ratio = (1.0 + direction(u) / (2.0 * root)) ** 2
        if np.any(ratio > bound):
            raise DomainError("direction exceeds the rejection envelope")
        keep = rng.uniform(size=m) * bound < ratio
        out.append(u[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:n]
