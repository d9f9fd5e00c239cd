"""Experiment pipeline: one goodness-of-fit test, size and power studies, PP-plot data.

Every replicate draws its randomness from ``SeedSequence([seed, index])`` so
results do not depend on the number of workers or their scheduling.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .copulas import FrozenCopula, get_copula
from .errors import GofError, GridMismatch
from .estimation import Dataset, fit_model, pseudo_observations
from .margins import get_margin
from .transform import DEFAULT_DELTA, DEFAULT_QUAD_NODES, GridSpec, ScoreContext, compute_Wn, test_statistics
from .wiener import ReferenceTable, reference_lookup

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


# ----------------------------------------------------------------------------
# configs
# ----------------------------------------------------------------------------
@dataclass
class ModelSpec:
    margin: str
    margin_params: list  # one parameter list shared by all columns, or one per column
    copula: str
    copula_params: list
    d: int = 2

    def thetas(self) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(self.margin_params, dtype=float))
        if arr.shape[0] == 1:
            arr = np.repeat(arr, self.d, axis=0)
        return arr

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        cop = get_copula(self.copula)
        u = cop.sample(np.asarray(self.copula_params, dtype=float), n, rng, d=self.d)
        mar = get_margin(self.margin)
        th = self.thetas()
        x = np.column_stack([mar.quantile(th[j], u[:, j]) for j in range(self.d)])
        return Dataset(x)


@dataclass
class ExperimentConfig:
    scenario: str
    generator: ModelSpec
    null_copula: str
    null_margin: str
    fix_lambda: list | None = None
    n: int = 200
    replicates: int = 200
    delta: float = DEFAULT_DELTA
    grid: str = "100x100"
    quad_nodes: int = DEFAULT_QUAD_NODES
    table: str | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.generator, dict):
            self.generator = ModelSpec(**self.generator)
        if self.replicates < 0 or self.n < 2:
            raise ValueError("replicates must be >= 0 and n >= 2")

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec.parse(self.grid)

    def null_family(self):
        return get_copula(self.null_copula, self.fix_lambda)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def load_configs(path) -> list[ExperimentConfig]:
    """Read ``[[experiment]]`` tables from a TOML file."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    items = data.get("experiment", [])
    if isinstance(items, dict):
        items = [items]
    defaults = {k: v for k, v in data.items() if k != "experiment"}
    return [ExperimentConfig.from_dict({**defaults, **item}) for item in items]


# ----------------------------------------------------------------------------
# single test
# ----------------------------------------------------------------------------
def _sha256_bytes(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def gof_test(
    data: Dataset,
    margin,
    copula,
    table: ReferenceTable | None,
    fix_lambda=None,
    delta: float = DEFAULT_DELTA,
    grid: GridSpec | None = None,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    allow_ties: bool = False,
):
    """Fit, transform and look up p-values. Returns ``(report dict, TestProcessGrid)``."""
    grid = grid or GridSpec.midpoints(100, 100)
    if table is not None and not grid.same_as(table.grid):
        raise GridMismatch(f"test grid {grid.label()} differs from the table grid {table.grid.label()}")
    caught = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        data.check(allow_ties=allow_ties)
        fam = get_copula(copula, fix_lambda)
        fitted = fit_model(data, margin, fam)
        u = pseudo_observations(data, fitted)
        ctx = ScoreContext.from_fitted(fitted, delta)
        W = compute_Wn(ctx, u, grid, quad_nodes)
    caught = [str(w.message) for w in wlist]
    kappa, omega2 = test_statistics(W)
    report = {
        "fitted": fitted.to_dict(),
        "column_order": list(data.labels),
        "delta": delta,
        "grid": grid.label(),
        "quad_nodes": quad_nodes,
        "atom_convention": "closed rectangles",
        "statistics": {"kappa": kappa, "omega2": omega2},
        "warnings": list(fitted.warnings) + caught,
        "version": __version__,
    }
    if table is not None:
        report["p_values"] = {}
        report["critical_values"] = {}
        for stat, val in (("kappa", kappa), ("omega2", omega2)):
            p, cv = reference_lookup(table, stat, val, grid)
            report["p_values"][stat] = p
            report["critical_values"][stat] = {f"{a:.2f}": v for a, v in cv.items()}
        report["table"] = {"n_paths": table.n_paths, "seed": table.seed, "p_value_rule": "(1+#>=)/(N+1)"}
    return report, W


# ----------------------------------------------------------------------------
# replicated experiments
# ----------------------------------------------------------------------------
def replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def run_replicate(cfg: ExperimentConfig, index: int, table: ReferenceTable | None) -> dict:
    rng = replicate_rng(cfg.seed, index)
    data = cfg.generator.sample(cfg.n, rng)
    rec = {"index": index}
    try:
        report, _ = gof_test(
            data, cfg.null_margin, cfg.null_copula, table, cfg.fix_lambda, cfg.delta, cfg.grid_spec, cfg.quad_nodes
        )
    except GofError as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    rec.update(report["statistics"])
    rec["lambda_hat"] = report["fitted"]["copula_params"]
    if table is not None:
        rec["p_kappa"] = report["p_values"]["kappa"]
        rec["p_omega2"] = report["p_values"]["omega2"]
    return rec


_WORKER_TABLE = {}


def _worker(args):
    cfg_dict, index, table_path = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    if table_path not in _WORKER_TABLE:
        _WORKER_TABLE[table_path] = ReferenceTable.load(table_path) if table_path else None
    return run_replicate(cfg, index, _WORKER_TABLE[table_path])


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    levels: tuple = (0.05, 0.01)

    @property
    def ok(self) -> list:
        return [r for r in self.records if "error" not in r]

    @property
    def failures(self) -> int:
        return len(self.records) - len(self.ok)

    def rejections(self) -> dict:
        out = {}
        for stat in ("kappa", "omega2"):
            ps = np.array([r[f"p_{stat}"] for r in self.ok if f"p_{stat}" in r])
            out[stat] = {f"{a:.2f}": int(np.sum(ps <= a)) for a in self.levels}
        return out

    def summary(self) -> dict:
        return {
            "scenario": self.config.scenario,
            "replicates": len(self.records),
            "failures": self.failures,
            "rejections": self.rejections(),
            "config": self.config.to_dict(),
            "version": __version__,
        }

    def to_csv(self, path):
        cols = ["index", "kappa", "omega2", "p_kappa", "p_omega2", "error"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.records:
                fh.write(",".join(_csv_cell(r.get(c, "")) for c in cols) + "\n")


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    s = str(v)
    return '"' + s.replace('"', "'") + '"' if ("," in s or " " in s) else s


def run_experiment(cfg: ExperimentConfig, table: ReferenceTable | None = None, levels=(0.05, 0.01)) -> ExperimentResult:
    if table is None and cfg.table:
        table = ReferenceTable.load(cfg.table)
    if table is not None and not cfg.grid_spec.same_as(table.grid):
        raise GridMismatch("experiment grid differs from the reference table grid")
    indices = range(cfg.replicates)
    if cfg.workers > 1 and cfg.replicates > 1 and cfg.table:
        with ProcessPoolExecutor(cfg.workers) as ex:
            records = list(ex.map(_worker, [(cfg.to_dict(), i, cfg.table) for i in indices]))
    else:
        records = [run_replicate(cfg, i, table) for i in indices]
    return ExperimentResult(cfg, records, levels)


def run_size_experiment(cfg: ExperimentConfig, table: ReferenceTable | None = None) -> ExperimentResult:
    return run_experiment(cfg, table, (0.05, 0.01))


def run_power_experiment(cfg: ExperimentConfig, table: ReferenceTable | None = None) -> ExperimentResult:
    if cfg.fix_lambda is None and get_copula(cfg.generator.copula) is get_copula(cfg.null_copula):
        warnings.warn("power experiment with the generator family inside the null", RuntimeWarning, stacklevel=2)
    return run_experiment(cfg, table, (0.05,))


# ----------------------------------------------------------------------------
# PP-plot data
# ----------------------------------------------------------------------------
def pp_plot_data(values, table: ReferenceTable, stat: str = "kappa") -> np.ndarray:
    """Rows ``(value, empirical cdf, reference cdf)``, one per replicate, sorted by value."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size < 30:
        raise ValueError("PP-plot data need at least 30 replicate statistics")
    ref = table.samples(stat)
    emp = np.arange(1, values.size + 1) / values.size
    theo = np.searchsorted(ref, values, side="right") / ref.size
    return np.column_stack([values, emp, theo])


def pp_max_deviation(pp: np.ndarray) -> float:
    return float(np.max(np.abs(pp[:, 1] - pp[:, 2])))


# ----------------------------------------------------------------------------
# synthetic two-column dataset: Frank dependence, normal margins
# ----------------------------------------------------------------------------
SYNTH_MARGINS = [[1.025, 0.136], [1.021, 0.178]]
SYNTH_FRANK = 6.589
SYNTH_N = 655


def synthetic_frank_normal(seed: int = 0, n: int = SYNTH_N) -> Dataset:
    spec = ModelSpec("normal", SYNTH_MARGINS, "frank", [SYNTH_FRANK])
    data = spec.sample(n, replicate_rng(seed, 0))
    return Dataset(data.values, ["Co", "Sc"])


def data_analysis(
    data: Dataset,
    table: ReferenceTable,
    families=("clayton", "frank", "gumbel", "cookjohnson"),
    margin="normal",
    delta=DEFAULT_DELTA,
    quad_nodes=DEFAULT_QUAD_NODES,
) -> dict:
    """Test several copula families with a common margin family on one dataset."""
    out = {}
    for fam in families:
        try:
            report, _ = gof_test(data, margin, fam, table, None, delta, table.grid, quad_nodes)
            out[fam] = report
        except GofError as exc:
            out[fam] = {"error": f"{type(exc).__name__}: {exc}"}
    return out


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, FrozenCopula):
        return o.name
    raise TypeError(f"not serializable: {type(o)}")
