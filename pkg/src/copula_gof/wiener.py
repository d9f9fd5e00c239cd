"""Standard Wiener sheets on a grid and the reference law of kappa / omega^2."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatch
from .transform import GridSpec, grid_statistics

TABLE_VERSION = 1
LEVELS = (0.10, 0.05, 0.01)
STATISTICS = ("kappa", "omega2")


def path_rng(seed: int, index: int) -> np.random.Generator:
    # one independent stream per path, keyed by (seed, path index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _increment_sd(grid: GridSpec) -> np.ndarray:
    widths = [np.diff(np.concatenate([[0.0], a])) for a in grid.axes]
    vol = widths[0]
    for w in widths[1:]:
        vol = np.multiply.outer(vol, w)
    return np.sqrt(vol)


def _integrate(incr):
    out = incr
    for ax in range(1, incr.ndim):
        out = np.cumsum(out, axis=ax)
    return out


def simulate_wiener_sheet(grid: GridSpec, seed: int, index: int = 0) -> np.ndarray:
    """One Wiener sheet path at the grid nodes, ``Cov = prod_j min(u_j, v_j)``."""
    sd = _increment_sd(grid)
    incr = path_rng(seed, index).standard_normal(grid.shape) * sd
    return _integrate(incr[None])[0]


def simulate_paths(grid: GridSpec, seed: int, start: int, stop: int) -> np.ndarray:
    sd = _increment_sd(grid)
    incr = np.stack([path_rng(seed, i).standard_normal(grid.shape) for i in range(start, stop)])
    return _integrate(incr * sd)


def path_statistics(grid: GridSpec, seed: int, n_paths: int, start: int = 0, threads: int = 1, batch: int = 250):
    """kappa and omega^2 for paths ``start .. start+n_paths-1``, in path order."""
    bounds = [(s, min(s + batch, start + n_paths)) for s in range(start, start + n_paths, batch)]

    def work(b):
        return grid_statistics(simulate_paths(grid, seed, *b), grid)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    if not parts:
        return np.empty(0), np.empty(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


@dataclass
class ReferenceTable:
    grid: GridSpec
    n_paths: int
    seed: int
    kappa_samples: np.ndarray
    omega2_samples: np.ndarray
    version: int = TABLE_VERSION

    def __post_init__(self):
        self.kappa_samples = np.sort(np.asarray(self.kappa_samples, dtype=float))
        self.omega2_samples = np.sort(np.asarray(self.omega2_samples, dtype=float))

    def samples(self, stat: str) -> np.ndarray:
        if stat not in STATISTICS:
            raise DomainError(f"unknown statistic {stat!r}")
        return self.kappa_samples if stat == "kappa" else self.omega2_samples

    def critical_values(self, stat: str) -> dict[float, float]:
        s = self.samples(stat)
        return {a: float(np.quantile(s, 1.0 - a)) for a in LEVELS}

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "grid": self.grid.to_dict(),
            "n_paths": self.n_paths,
            "seed": self.seed,
            "kappa_samples": self.kappa_samples.tolist(),
            "omega2_samples": self.omega2_samples.tolist(),
            "critical_values": {s: {f"{a:.2f}": v for a, v in self.critical_values(s).items()} for s in STATISTICS},
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ReferenceTable":
        with open(path) as fh:
            data = json.load(fh)
        if data.get("version") != TABLE_VERSION:
            raise DomainError(f"unsupported reference table version {data.get('version')}")
        return cls(
            GridSpec.from_dict(data["grid"]),
            int(data["n_paths"]),
            int(data["seed"]),
            np.asarray(data["kappa_samples"]),
            np.asarray(data["omega2_samples"]),
        )


def build_reference(grid: GridSpec, n_paths: int, seed: int, threads: int = 1) -> ReferenceTable:
    if n_paths < 100:
        raise DomainError("a reference table needs at least 100 paths")
    kappa, omega2 = path_statistics(grid, seed, n_paths, threads=threads)
    return ReferenceTable(grid, n_paths, seed, kappa, omega2)


def reference_lookup(table: ReferenceTable, stat: str, observed: float, grid: GridSpec | None = None):
    """Monte Carlo p-value ``(1 + #{samples >= observed}) / (N + 1)`` and critical values."""
    if grid is not None and not grid.same_as(table.grid):
        raise GridMismatch(f"statistic on grid {grid.label()} but table built on {table.grid.label()}")
    s = table.samples(stat)
    exceed = s.size - np.searchsorted(s, observed, side="left")
    p = (1.0 + exceed) / (s.size + 1.0)
    return float(p), table.critical_values(stat)
