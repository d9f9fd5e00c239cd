"""Command line interface.

    copula-gof tabulate --grid 100x100 --paths 10000 --seed 1 --out table.json
    copula-gof gof --data x.csv --margins normal --copula frank --table table.json --report out.json
    copula-gof simulate --config exp.toml --out results/
    copula-gof ppplot --stats stats.csv --table table.json --out pp.csv
    copula-gof synth --seed 0 --out synthetic.csv

Exit codes: 0 success (a rejected null is still a success), 1 data or model
error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import GofError
from .estimation import Dataset
from .harness import (
    _json_default,
    gof_test,
    load_configs,
    pp_plot_data,
    run_experiment,
    synthetic_frank_normal,
    write_json,
)
from .transform import DEFAULT_DELTA, DEFAULT_QUAD_NODES, GridSpec
from .wiener import ReferenceTable, build_reference


class DataError(GofError):
    pass


def read_csv(path) -> Dataset:
    """Header row of column names, then decimal floats; any bad cell is an error."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    values = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{i}: expected {len(header)} cells, got {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError:
            raise DataError(f"{path}:{i}: non-numeric cell in {row}")
    return Dataset(np.array(values), header)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in r])


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _column_order(data: Dataset, spec: str | None):
    if not spec:
        return data
    order = []
    for tok in spec.split(","):
        tok = tok.strip()
        if tok in data.labels:
            order.append(data.labels.index(tok))
        elif tok.isdigit() and int(tok) < data.d:
            order.append(int(tok))
        else:
            raise DataError(f"unknown column {tok!r} in --column-order")
    if sorted(order) != list(range(data.d)):
        raise DataError("--column-order must list every column exactly once")
    return data.reordered(order)


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------
def cmd_tabulate(args):
    grid = GridSpec.parse(args.grid)
    table = build_reference(grid, args.paths, args.seed, threads=args.threads)
    table.save(args.out)
    print(json.dumps(table.to_dict()["critical_values"], indent=2))
    return 0


def cmd_gof(args):
    data = read_csv(args.data)
    data = _column_order(data, args.column_order)
    if args.jitter:
        data = data.jittered(args.seed)
    table = ReferenceTable.load(args.table) if args.table else None
    grid = GridSpec.parse(args.grid) if args.grid else (table.grid if table else GridSpec.midpoints(100, 100))
    report, W = gof_test(
        data,
        args.margins,
        args.copula,
        table,
        args.fix_lambda,
        args.delta,
        grid,
        args.quad_nodes,
        allow_ties=args.jitter,
    )
    settings = {k: v for k, v in vars(args).items() if k not in ("func", "report", "wn_grid", "error_json")}
    report["input"] = {"path": os.path.basename(args.data), "sha256": _sha256(args.data), "n": data.n, "d": data.d}
    report["settings"] = settings
    key = json.dumps({"data": report["input"]["sha256"], "settings": settings, "version": __version__}, sort_keys=True)
    report["reproducibility_hash"] = hashlib.sha256(key.encode()).hexdigest()
    report["seed"] = args.seed
    if args.report:
        write_json(report, args.report)
    if args.wn_grid:
        W.to_csv(args.wn_grid)
    print(json.dumps({k: report[k] for k in ("statistics", "p_values") if k in report}, default=_json_default))
    return 0


def cmd_simulate(args):
    cfgs = load_configs(args.config)
    os.makedirs(args.out, exist_ok=True)
    summaries = []
    for cfg in cfgs:
        if args.threads:
            cfg.workers = args.threads
        res = run_experiment(cfg)
        res.to_csv(os.path.join(args.out, f"{cfg.scenario}.csv"))
        summaries.append(res.summary())
        print(json.dumps({"scenario": cfg.scenario, "rejections": res.rejections(), "failures": res.failures}))
    write_json(summaries, os.path.join(args.out, "summary.json"))
    return 0


def cmd_ppplot(args):
    table = ReferenceTable.load(args.table)
    with open(args.stats, newline="") as fh:
        reader = csv.DictReader(fh)
        vals = []
        for row in reader:
            cell = row.get(args.stat, "")
            if cell == "":
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(f"non-numeric {args.stat} value {cell!r}")
    pp = pp_plot_data(vals, table, args.stat)
    write_csv(args.out, [args.stat, "empirical_cdf", "reference_cdf"], pp.tolist())
    return 0


def cmd_synth(args):
    data = synthetic_frank_normal(args.seed, args.n)
    write_csv(args.out, data.labels, data.values.tolist())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="copula-gof", description="Distribution-free copula goodness-of-fit tests")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tabulate", help="simulate Wiener sheets and store critical values")
    t.add_argument("--grid", default="100x100")
    t.add_argument("--paths", type=int, default=10000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--threads", type=int, default=1)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_tabulate)

    g = sub.add_parser("gof", help="run the test on a CSV data file")
    g.add_argument("--data", required=True)
    g.add_argument("--margins", required=True)
    g.add_argument("--copula", required=True)
    g.add_argument("--fix-lambda", type=float, nargs="+", default=None)
    g.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    g.add_argument("--table", default=None)
    g.add_argument("--grid", default=None, help="W_n grid, e.g. 100x100 (defaults to the table grid)")
    g.add_argument("--quad-nodes", type=int, default=DEFAULT_QUAD_NODES)
    g.add_argument("--column-order", default=None)
    g.add_argument("--jitter", action="store_true", help="break ties with tiny uniform noise")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--report", default=None)
    g.add_argument("--wn-grid", default=None)
    g.add_argument("--error-json", default=None)
    g.set_defaults(func=cmd_gof)

    s = sub.add_parser("simulate", help="run size/power experiments from a TOML config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=0)
    s.add_argument("--error-json", default=None)
    s.set_defaults(func=cmd_simulate)

    pp = sub.add_parser("ppplot", help="PP-plot data of replicate statistics against a table")
    pp.add_argument("--stats", required=True)
    pp.add_argument("--table", required=True)
    pp.add_argument("--stat", default="kappa", choices=("kappa", "omega2"))
    pp.add_argument("--out", required=True)
    pp.add_argument("--error-json", default=None)
    pp.set_defaults(func=cmd_ppplot)

    sy = sub.add_parser("synth", help="write the synthetic Frank + normal dataset")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--n", type=int, default=655)
    sy.add_argument("--out", required=True)
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GofError, ValueError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(f"error: {exc}", file=sys.stderr)
        path = getattr(args, "error_json", None)
        if path:
            with open(path, "w") as fh:
                json.dump(err, fh)
        return 1


if __name__ == "__main__":
    sys.exit(main())
