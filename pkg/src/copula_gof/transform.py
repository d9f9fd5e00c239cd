"""Score vectors, partial information matrices and the martingale transform.

The transformed process evaluated at a grid node ``u`` is

    W_n(u) = (1-2d)^(-D/2) [ int_{A(u)} c^(-1/2) d eta_n
                             - int_{A(u)} k(s)' I(s_D)^(-1) J(s_D) sqrt(c(s)) ds ]

with ``A(u) = [d, d + (1-2d) u]`` (``d`` the trimming constant delta, ``D``
the dimension), ``J(t) = int_{S(t)} k d eta_n`` and
``S(t) = [d, 1-d/2]^(D-1) x [t, 1-d/2]``. The last coordinate plays a
special role, so permuting columns changes the result.

All smooth integrals use one tensor midpoint partition of
``[d, 1-d/2]^D`` whose edges contain every mapped grid corner, so the
``A(u)`` integrals for all grid nodes are cumulative sums, and the
information matrices for every last-axis level come from one suffix sum.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .copulas import CopulaFamily
from .errors import DomainError, EmptyGrid, QuadratureFailure, SingularInformation
from .estimation import FittedModel
from .margins import MarginFamily

DEFAULT_DELTA = 0.005
DEFAULT_QUAD_NODES = 400
MAX_CONDITION = 1e10
GRADED_BAND = 0.05


# ----------------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid of evaluation nodes in (0,1)^d."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if len(axes) < 1 or any(a.size == 0 for a in axes):
            raise EmptyGrid("grid needs at least one node per axis")
        for a in axes:
            if np.any(a < 0) or np.any(a > 1) or np.any(np.diff(a) <= 0):
                raise DomainError("grid axes must be increasing node lists inside [0,1]")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def midpoints(cls, *sizes: int) -> "GridSpec":
        """Nodes ``(2i-1)/(2N)``, i = 1..N, so the mesh is exactly 1/N."""
        return cls(tuple((2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n) for n in sizes))

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        try:
            sizes = [int(s) for s in text.lower().split("x")]
        except ValueError:
            raise DomainError(f"grid spec {text!r} is not of the form 100x100")
        if any(s < 1 for s in sizes):
            raise EmptyGrid("grid sizes must be positive")
        return cls.midpoints(*sizes)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    def cell_widths(self) -> list[np.ndarray]:
        """Riemann weights per axis: nodes own the interval between neighbouring midpoints."""
        out = []
        for a in self.axes:
            b = np.concatenate([[0.0], 0.5 * (a[1:] + a[:-1]), [1.0]])
            out.append(np.diff(b))
        return out

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def to_dict(self) -> dict:
        return {"axes": [a.tolist() for a in self.axes]}

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        return cls(tuple(np.asarray(a) for a in data["axes"]))

    def same_as(self, other: "GridSpec") -> bool:
        return self.shape == other.shape and all(
            np.allclose(a, b, rtol=0, atol=1e-12) for a, b in zip(self.axes, other.axes)
        )

    def label(self) -> str:
        return "x".join(str(s) for s in self.shape)


# ----------------------------------------------------------------------------
# scores
# ----------------------------------------------------------------------------
@dataclass
class ScoreContext:
    """Everything needed to evaluate the score vector ``k`` and the density."""

    margin: MarginFamily
    thetas: np.ndarray
    copula: CopulaFamily
    lam: np.ndarray
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        self.thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        self.lam = np.asarray(self.lam, dtype=float).reshape(-1)
        if not 0.0 < self.delta < 0.5:
            raise DomainError("delta must lie in (0, 1/2)")
        if self.delta < 1e-3:
            warnings.warn("delta below 1e-3 is numerically untested", RuntimeWarning, stacklevel=2)
        for t in self.thetas:
            self.margin.check_params(t)
        self.copula.check_params(self.lam)

    @classmethod
    def from_fitted(cls, fitted: FittedModel, delta=DEFAULT_DELTA) -> "ScoreContext":
        return cls(fitted.margin, fitted.thetas, fitted.copula, fitted.lam, delta)

    @property
    def d(self) -> int:
        return self.thetas.shape[0]

    @property
    def m(self) -> int:
        return self.margin.param_dim

    @property
    def p(self) -> int:
        return self.copula.param_dim

    @property
    def q(self) -> int:
        return 1 + self.d * self.m + self.p

    def density(self, s):
        return self.copula.pdf(self.lam, s)

    def scores_and_density(self, s):
        """Return ``k(s)`` with shape ``s.shape[:-1] + (q,)`` and ``c(s)``."""
        s = np.asarray(s, dtype=float)
        gu, gl = self.copula.logpdf_grads(self.lam, s)
        logc = self.copula.logpdf(self.lam, s)
        parts = [np.ones(s.shape[:-1] + (1,))]
        for j in range(self.d):
            val, du = self.margin.score_at_quantile(self.thetas[j], s[..., j])
            parts.append(val * gu[..., j, None] + du)
        parts.append(gl)
        return np.concatenate(parts, axis=-1), np.exp(logc)

    def scores(self, s):
        return self.scores_and_density(s)[0]

    def K_functions(self, u):
        """``(C, C^(j) dF(Q(u_j)), dC/dlambda)``; the score signals whose densities are k."""
        u = np.asarray(u, dtype=float)
        parts = [self.copula.cdf(self.lam, u)[..., None]]
        partials = self.copula.partial_u(self.lam, u)
        for j in range(self.d):
            val, _ = self.margin.score_at_quantile(self.thetas[j], u[..., j])
            parts.append(partials[..., j, None] * val)
        parts.append(self.copula.dcdf_dlambda(self.lam, u))
        return np.concatenate(parts, axis=-1)


def score_vector(ctx: ScoreContext, u):
    return ctx.scores(u)


def K_functions(ctx: ScoreContext, u):
    return ctx.K_functions(u)


# ----------------------------------------------------------------------------
# quadrature partition
# ----------------------------------------------------------------------------
def _axis_edges(breaks, h, lo_edge, hi_edge, grade=4):
    # cells near either end are `grade` times finer; score and density vary fastest there
    pieces = [np.array([breaks[0]])]
    for a, b in zip(breaks[:-1], breaks[1:]):
        step = h / grade if (a < lo_edge or b > hi_edge) else h
        k = max(1, int(round((b - a) / step)))
        pieces.append(np.linspace(a, b, k + 1)[1:])
    return np.concatenate(pieces)


@dataclass
class Partition:
    """Tensor partition of ``[delta, 1-delta/2]^d`` aligned with the mapped grid corners."""

    delta: float
    edges: list  # per-axis edge arrays
    corner_idx: list  # per-axis edge index of each mapped grid node
    box_cells: tuple  # number of cells per axis inside [delta, max mapped corner]

    @classmethod
    def build(cls, grid: GridSpec, delta: float, nodes: int = DEFAULT_QUAD_NODES) -> "Partition":
        if nodes < 2:
            raise QuadratureFailure("quadrature needs at least 2 nodes per axis")
        h = (1.0 - 2.0 * delta) / nodes
        edges, idx, box = [], [], []
        for a in grid.axes:
            T = delta + (1.0 - 2.0 * delta) * a
            breaks = np.unique(np.concatenate([[delta], T, [1.0 - delta, 1.0 - delta / 2.0]]))
            band = GRADED_BAND * (1.0 - 2.0 * delta)
            e = _axis_edges(breaks, h, delta + band, 1.0 - delta - band)
            ci = np.searchsorted(e, T - 1e-13)
            if not np.allclose(e[ci], T, atol=1e-12):
                raise QuadratureFailure("partition does not contain the mapped grid corners")
            edges.append(e)
            idx.append(ci)
            box.append(int(ci.max()))
        return cls(delta, edges, idx, tuple(box))

    @property
    def d(self):
        return len(self.edges)

    def mids(self, j):
        e = self.edges[j]
        return 0.5 * (e[1:] + e[:-1])

    def widths(self, j):
        return np.diff(self.edges[j])

    def shape(self):
        return tuple(e.size - 1 for e in self.edges)


def _tensor_points(axes):
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _tensor_weights(ws):
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out


def _box_cumsum(cell_values, corner_idx):
    """Integrals over ``[delta, T_k]`` for every grid node from per-cell integrals.

    ``cell_values`` has the cell axes first and optional trailing axes.
    """
    d = len(corner_idx)
    acc = cell_values
    for j in range(d):
        acc = np.cumsum(acc, axis=j)
        pad = [(0, 0)] * acc.ndim
        pad[j] = (1, 0)
        acc = np.pad(acc, pad)
    return acc[np.ix_(*corner_idx)]


# ----------------------------------------------------------------------------
# information matrices
# ----------------------------------------------------------------------------
def _midpoint_cells(ctx: ScoreContext, part: Partition, score_fn=None):
    pts = _tensor_points([part.mids(j) for j in range(part.d)])
    k, c = ctx.scores_and_density(pts)
    if score_fn is not None:
        k = score_fn(pts)
    vol = _tensor_weights([part.widths(j) for j in range(part.d)])
    return k, c, vol


def _check_and_factor(mat, t):
    mat = 0.5 * (mat + mat.T)
    try:
        ev = np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as exc:
        raise SingularInformation(f"eigen-decomposition failed at t={t}") from exc
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
        cond = np.inf if ev[0] <= 0 else ev[-1] / ev[0]
        raise SingularInformation(f"information matrix at t={t:.4g} has condition number {cond:.3g}")
    try:
        factor = linalg.cho_factor(mat, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularInformation(f"Cholesky failed at t={t}") from exc
    return mat, factor


@dataclass
class InfoMatrix:
    t: float
    matrix: np.ndarray
    factor: tuple

    def solve(self, rhs):
        return linalg.cho_solve(self.factor, rhs)


def info_matrix(ctx: ScoreContext, t: float, nodes: int = DEFAULT_QUAD_NODES, score_fn=None) -> InfoMatrix:
    """``I(t) = int_{S(t)} k k' dC`` by tensor Gauss-Legendre panels on ``S(t)``.

    Two-point panels, so ``nodes`` per axis as for the midpoint rule. Entries
    of ``I`` that nearly cancel need the extra order to converge in relative
    terms. ``score_fn`` replaces ``k`` (used to test the quadrature path).
    """
    delta = ctx.delta
    top = 1.0 - delta / 2.0
    if not delta <= t <= 1.0 - delta:
        raise DomainError(f"t={t} outside [delta, 1-delta]")
    x, wq = np.polynomial.legendre.leggauss(2)
    panels = max(1, nodes // 2)
    axes, ws = [], []
    for j in range(ctx.d):
        lo = t if j == ctx.d - 1 else delta
        e = np.linspace(lo, top, panels + 1)
        a, b = e[:-1, None], e[1:, None]
        axes.append((0.5 * (b - a) * x + 0.5 * (a + b)).ravel())
        ws.append((0.5 * (b - a) * wq).ravel())
    pts = _tensor_points(axes)
    k, c = ctx.scores_and_density(pts)
    if score_fn is not None:
        k = score_fn(pts)
    w = (_tensor_weights(ws) * c).reshape(-1)
    k = k.reshape(w.size, -1)
    mat = (k * w[:, None]).T @ k
    mat, factor = _check_and_factor(mat, t)
    return InfoMatrix(t, mat, factor)


class InfoMatrixMap:
    """All information matrices needed along the last axis, from one suffix sweep.

    Levels are the last-axis cell midpoints of the partition; the half cell
    above each midpoint is approximated by half the cell's midpoint mass.
    """

    def __init__(self, ctx: ScoreContext, part: Partition, cells=None):
        k, c, vol = cells if cells is not None else _midpoint_cells(ctx, part)
        d = part.d
        other = tuple(range(d - 1))
        w = c * vol
        rows = np.einsum("...i,...j,...->...ij", k, k, w)
        rows = rows.sum(axis=other) if other else rows  # (L_d, q, q)
        suffix = np.concatenate([np.cumsum(rows[::-1], axis=0)[::-1], np.zeros((1,) + rows.shape[1:])])
        self.levels = part.mids(d - 1)
        self.at_edges = suffix
        self.matrices = suffix[1:] + 0.5 * rows
        self._factors: dict[int, InfoMatrix] = {}

    def factor(self, r) -> InfoMatrix:
        if r not in self._factors:
            mat, fac = _check_and_factor(self.matrices[r], self.levels[r])
            self._factors[r] = InfoMatrix(float(self.levels[r]), mat, fac)
        return self._factors[r]

    def solve_all(self, rows, rhs):
        """Solve ``I(t_r) x = rhs[r]`` for each requested row."""
        out = np.empty((len(rows), rhs.shape[-1]))
        for i, r in enumerate(rows):
            out[i] = self.factor(r).solve(rhs[i])
        return out


# ----------------------------------------------------------------------------
# eta_n integrals
# ----------------------------------------------------------------------------
def _in_box(points, lo, hi):
    return np.all((points >= lo) & (points <= hi), axis=-1)


def eta_integral(
    fitted: FittedModel,
    pseudo_obs,
    f: Callable,
    region,
    nodes: int = DEFAULT_QUAD_NODES,
    return_parts: bool = False,
):
    """``int_region f d eta_n`` for a closed hyperrectangle ``region = (lo, hi)``.

    Equals ``sqrt(n) [ (1/n) sum f(U_i) 1{U_i in region} - int_region f c ]``;
    the atom sum is exact and the smooth part uses a tensor midpoint rule.
    """
    u = np.asarray(pseudo_obs, dtype=float)
    n = u.shape[0]
    lo, hi = (np.asarray(b, dtype=float) for b in region)
    if np.any(lo <= 0) or np.any(hi >= 1) or np.any(hi < lo):
        raise DomainError("region must be a rectangle inside (0,1)^d")
    inside = u[_in_box(u, lo, hi)]
    atoms = np.sum(f(inside), axis=0) / n if inside.size else 0.0 * np.sum(f(lo[None, :]), axis=0)
    axes, ws = [], []
    for j in range(lo.size):
        e = np.linspace(lo[j], hi[j], nodes + 1)
        axes.append(0.5 * (e[1:] + e[:-1]))
        ws.append(np.diff(e))
    pts = _tensor_points(axes)
    vals = f(pts)
    dens = fitted.copula.pdf(fitted.lam, pts)
    w = _tensor_weights(ws) * dens
    smooth = np.tensordot(w, vals, axes=(tuple(range(lo.size)), tuple(range(lo.size))))
    if not np.all(np.isfinite(smooth)):
        raise QuadratureFailure("non-finite quadrature value")
    total = np.sqrt(n) * (atoms - smooth)
    if return_parts:
        return total, np.sqrt(n) * atoms, np.sqrt(n) * smooth
    return total


def slab(ctx_or_delta, t, d):
    delta = ctx_or_delta.delta if hasattr(ctx_or_delta, "delta") else float(ctx_or_delta)
    lo = np.full(d, delta)
    lo[-1] = t
    hi = np.full(d, 1.0 - delta / 2.0)
    return lo, hi


def inner_score_integral(ctx: ScoreContext, fitted: FittedModel, pseudo_obs, t, nodes=DEFAULT_QUAD_NODES):
    """``J(t) = int_{S(t)} k d eta_n``, one entry per score component."""
    if not ctx.delta <= t <= 1.0 - ctx.delta:
        raise DomainError(f"t={t} outside [delta, 1-delta]")
    return eta_integral(fitted, pseudo_obs, ctx.scores, slab(ctx, t, ctx.d), nodes)


# ----------------------------------------------------------------------------
# drivers: the measure that plays the role of d eta_n
# ----------------------------------------------------------------------------
class EtaDriver:
    """``d eta_n = sqrt(n) (dC_hat - dC_lambda_hat)`` from pseudo-observations."""

    def __init__(self, pseudo_obs):
        self.u = np.asarray(pseudo_obs, dtype=float)
        self.n = self.u.shape[0]

    def box_integrals(self, ctx, part, grid, cells):
        """``int_{A(u)} c^(-1/2) d eta_n`` at every grid node."""
        k, c, vol = cells
        delta = ctx.delta
        sqn = np.sqrt(self.n)
        box = tuple(slice(0, b) for b in part.box_cells)
        smooth = _box_cumsum((np.sqrt(c) * vol)[box], part.corner_idx)
        T = [delta + (1.0 - 2.0 * delta) * a for a in grid.axes]
        Tmax = np.array([t[-1] for t in T])
        sel = np.all(self.u >= delta, axis=1) & np.all(self.u <= Tmax, axis=1)
        atoms_u = self.u[sel]
        counts = np.zeros(grid.shape)
        if atoms_u.size:
            w = 1.0 / np.sqrt(ctx.density(atoms_u))
            idx = tuple(np.searchsorted(T[j], atoms_u[:, j], side="left") for j in range(grid.d))
            np.add.at(counts, idx, w)
            for j in range(grid.d):
                counts = np.cumsum(counts, axis=j)
        return counts / sqn - sqn * smooth

    def slab_integrals(self, ctx, part, cells, rows):
        """``J(t_r)`` for the requested last-axis rows (levels at cell midpoints)."""
        k, c, vol = cells
        d = part.d
        sqn = np.sqrt(self.n)
        levels = part.mids(d - 1)[rows]
        w = (c * vol)[..., None] * k
        row_sums = w.sum(axis=tuple(range(d - 1))) if d > 1 else w
        suffix = np.concatenate([np.cumsum(row_sums[::-1], axis=0)[::-1], np.zeros((1, k.shape[-1]))])
        smooth = suffix[rows + 1] + 0.5 * row_sums[rows]
        delta = ctx.delta
        top = 1.0 - delta / 2.0
        sel = np.all((self.u >= delta) & (self.u <= top), axis=1)
        atoms_u = self.u[sel]
        atom_part = np.zeros((rows.size, k.shape[-1]))
        if atoms_u.size:
            order = np.argsort(atoms_u[:, -1], kind="stable")
            lasts = atoms_u[order, -1]
            ka = ctx.scores(atoms_u[order])
            tail = np.concatenate([np.cumsum(ka[::-1], axis=0)[::-1], np.zeros((1, ka.shape[-1]))])
            atom_part = tail[np.searchsorted(lasts, levels, side="left")]
        return atom_part / sqn - sqn * smooth


class SignalDriver:
    """Deterministic measure ``dK_i = k_i dC`` integrated by composite Gauss-Legendre.

    Independent of the midpoint rule used inside the transform; feeding it
    through the transform must give (numerically) zero.
    """

    def __init__(self, index: int, order: int = 4, chunk: int = 64):
        self.index = index
        self.order = order
        self.chunk = chunk

    def _panel_rule(self, edges):
        x, w = np.polynomial.legendre.leggauss(self.order)
        a, b = edges[:-1, None], edges[1:, None]
        pts = 0.5 * (b - a) * x + 0.5 * (a + b)
        wts = 0.5 * (b - a) * w
        return pts.ravel(), wts.ravel(), np.repeat(np.arange(edges.size - 1), self.order)

    def box_integrals(self, ctx, part, grid, cells):
        d = part.d
        rules = [self._panel_rule(part.edges[j][: part.box_cells[j] + 1]) for j in range(d)]
        cell_vals = np.zeros(part.box_cells)
        # integrate k_i sqrt(c) over each cell, chunked along the last axis
        x_last, w_last, c_last = rules[-1]
        for start in range(0, x_last.size, self.chunk * self.order):
            sl = slice(start, start + self.chunk * self.order)
            axes = [r[0] for r in rules[:-1]] + [x_last[sl]]
            pts = _tensor_points(axes)
            k, c = ctx.scores_and_density(pts)
            vals = k[..., self.index] * np.sqrt(c) * _tensor_weights([r[1] for r in rules[:-1]] + [w_last[sl]])
            for j in range(d - 1):
                vals = np.add.reduceat(vals, np.arange(0, rules[j][0].size, self.order), axis=j)
            np.add.at(cell_vals, (Ellipsis, c_last[sl]), vals) if d > 1 else np.add.at(cell_vals, c_last[sl], vals)
        return _box_cumsum(cell_vals, part.corner_idx)

    def slab_integrals(self, ctx, part, cells, rows):
        d = part.d
        q = ctx.q
        e_last = part.edges[-1]
        mids = part.mids(d - 1)
        # refine the last axis at the midpoints so every level is a panel edge
        fine = np.unique(np.concatenate([e_last, mids]))
        x_last, w_last, p_last = self._panel_rule(fine)
        rules = [self._panel_rule(part.edges[j]) for j in range(d - 1)]
        panel_sums = np.zeros((fine.size - 1, q))
        for start in range(0, x_last.size, self.chunk * self.order):
            sl = slice(start, start + self.chunk * self.order)
            axes = [r[0] for r in rules] + [x_last[sl]]
            pts = _tensor_points(axes)
            k, c = ctx.scores_and_density(pts)
            w = _tensor_weights([r[1] for r in rules] + [w_last[sl]]) * c * k[..., self.index]
            vals = w[..., None] * k
            vals = vals.sum(axis=tuple(range(d - 1))) if d > 1 else vals
            np.add.at(panel_sums, p_last[sl], vals)
        suffix = np.concatenate([np.cumsum(panel_sums[::-1], axis=0)[::-1], np.zeros((1, q))])
        lvl_idx = np.searchsorted(fine, mids[rows] - 1e-14)
        return suffix[lvl_idx]


# ----------------------------------------------------------------------------
# the test process
# ----------------------------------------------------------------------------
@dataclass
class TestProcessGrid:
    grid: GridSpec
    values: np.ndarray
    delta: float
    n: int
    provenance: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_csv(self, path_or_buf=None) -> str:
        pts = self.grid.points().reshape(-1, self.grid.d)
        vals = self.values.reshape(-1)
        buf = io.StringIO()
        header = ",".join([f"u{j + 1}" for j in range(self.grid.d)] + ["W"])
        buf.write(header + "\n")
        for row, v in zip(pts, vals):
            buf.write(",".join(f"{x:.10g}" for x in row) + f",{v:.12g}\n")
        text = buf.getvalue()
        if path_or_buf is not None:
            with open(path_or_buf, "w") as fh:
                fh.write(text)
        return text


def compute_Wn(
    ctx: ScoreContext,
    pseudo_obs=None,
    grid: GridSpec | None = None,
    nodes: int = DEFAULT_QUAD_NODES,
    driver=None,
    provenance: dict | None = None,
) -> TestProcessGrid:
    """Evaluate the transformed process on ``grid``.

    ``driver`` defaults to the empirical measure of ``pseudo_obs``; a
    :class:`SignalDriver` replaces it with a deterministic score signal.
    """
    grid = grid or GridSpec.midpoints(100, 100)
    if grid.d != ctx.d:
        raise DomainError(f"grid dimension {grid.d} != model dimension {ctx.d}")
    if driver is None:
        if pseudo_obs is None:
            raise DomainError("pseudo-observations or a driver are required")
        driver = EtaDriver(pseudo_obs)
    delta = ctx.delta
    d = ctx.d
    part = Partition.build(grid, delta, nodes)
    cells = _midpoint_cells(ctx, part)
    k, c, vol = cells
    imap = InfoMatrixMap(ctx, part, cells)

    rows = np.arange(part.box_cells[-1])
    J = driver.slab_integrals(ctx, part, cells, rows)
    B = imap.solve_all(rows, J)  # I^{-1} J per last-axis level, (R, q)

    box = tuple(slice(0, b) for b in part.box_cells)
    kb = k[box]
    drift_cells = np.einsum("...i,...i->...", kb, B[(None,) * (d - 1) + (slice(None),)]) * np.sqrt(c[box]) * vol[box]
    drift = _box_cumsum(drift_cells, part.corner_idx)
    first = driver.box_integrals(ctx, part, grid, cells)
    values = (first - drift) / (1.0 - 2.0 * delta) ** (d / 2.0)
    if not np.all(np.isfinite(values)):
        raise QuadratureFailure("non-finite values in the transformed process")
    prov = {"quad_nodes": nodes, "delta": delta, "copula": ctx.copula.name, "margin": ctx.margin.name}
    prov.update(provenance or {})
    n = getattr(driver, "n", 0)
    return TestProcessGrid(grid, values, delta, n, prov)


def test_statistics(W: TestProcessGrid) -> tuple[float, float]:
    """Kolmogorov-Smirnov type sup and Cramer-von Mises type integrated square."""
    return grid_statistics(W.values, W.grid)


test_statistics.__test__ = False


def grid_statistics(values, grid: GridSpec) -> tuple[float, float]:
    values = np.asarray(values)
    if values.size == 0:
        raise EmptyGrid("no grid values")
    if values.shape[-grid.d:] != grid.shape:
        raise DomainError("values do not match the grid shape")
    weights = _tensor_weights(grid.cell_widths())
    axes = tuple(range(values.ndim - grid.d, values.ndim))
    kappa = np.max(np.abs(values), axis=axes)
    omega2 = np.sum(values**2 * weights, axis=axes)
    if values.ndim == grid.d:
        return float(kappa), float(omega2)
    return kappa, omega2
