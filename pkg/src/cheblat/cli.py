"""Command line front end.

Subcommands: gen, construct, verify, reconstruct, harness, table, figure.
Every command is a pure function of its inputs and seed; file outputs are
byte-identical across reruns (wall-clock timing goes to stdout only).
Exit codes: 0 success, 1 usage error, 2 construction or rank failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .chebtransform import DENSE_ENTRY_CAP, reconstruct_cg, transform_for
from .construct import STRATEGIES, MultiLatticeDiscretization, StrategyParams
from .errors import CapacityError
from .indexset import (
    IndexSet,
    make_dyadic_hyperbolic_cross,
    make_hyperbolic_cross,
    make_l1_ball,
    make_random_sparse,
    mirror_cardinality,
    read_index_set,
    write_index_set,
)
from .verify import failure_harness, verify_rank

CSV_SCHEMA = "cheblat-csv-v1"

# rows small enough to construct and rank-check within minutes
DESK_TABLE_ROWS = (
    ("l1", 2, 64),
    ("l1", 6, 4),
    ("hc", 2, 256),
)
EXTENDED_TABLE_ROWS = (
    ("l1", 2, 128),
    ("l1", 3, 16),
    ("l1", 7, 4),
    ("l1", 10, 2),
    ("hc", 2, 512),
    ("hc", 3, 256),
)

STRATEGY_ORDER = ("plain", "greedy", "iterative", "halving")


@dataclass
class ExperimentSpec:
    """One batch request: which family rows to run with which strategies."""

    family: str
    dims: list[int]
    degrees: list[int]
    strategies: list[str] = field(default_factory=lambda: list(STRATEGY_ORDER))
    r: float = 1.0
    trials: int = 10
    seed: int = 0
    out: str | None = None
    active: int = 2
    count: int = 256
    value_cap: int = 1024
    dense_cap: int = DENSE_ENTRY_CAP


def _build_family(family, dim, degree, seed=0, active=2, count=256, value_cap=1024):
    if family == "l1":
        return make_l1_ball(dim, degree)
    if family == "hc":
        return make_hyperbolic_cross(dim, degree)
    if family == "dhc":
        return make_dyadic_hyperbolic_cross(dim, degree)
    if family == "random":
        return make_random_sparse(dim, active, count, value_cap, seed)
    raise ValueError(f"unknown family {family!r}")


def _derived_seed(base, *key):
    return int(np.random.SeedSequence(base, spawn_key=key).generate_state(1, np.uint64)[0])


def _params_from_args(args, seed=None):
    return StrategyParams(
        c=getattr(args, "c", 2.0),
        r=args.r,
        L=getattr(args, "L", None),
        threshold=getattr(args, "threshold", "half"),
        rng_seed=args.seed if seed is None else seed,
    )


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"# {CSV_SCHEMA}"])
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    index_set = _build_family(
        args.family, args.dim, args.degree, args.seed, args.active, args.count, args.max_degree
    )
    write_index_set(index_set, args.out, args.format)
    print(f"wrote {args.out}: d {index_set.dim} card {len(index_set)}")
    return 0


def cmd_construct(args):
    index_set = read_index_set(args.set)
    params = _params_from_args(args)
    disc = STRATEGIES[args.strategy](index_set, params)
    if args.out:
        Path(args.out).write_text(json.dumps(disc.to_json()) + "\n")
    if args.nodes_out:
        rows = disc.node_set().points()
        lines = [" ".join(f"{v:.17g}" for v in row) for row in rows]
        Path(args.nodes_out).write_text("\n".join(lines) + "\n")
    print(
        f"{disc.strategy},{len(index_set)},{mirror_cardinality(index_set)},"
        f"{disc.node_count},{disc.report.total_rounds},{disc.success},"
        f"{disc.report.seconds:.3f}"
    )
    return 0 if disc.success else 2


def cmd_verify(args):
    index_set = read_index_set(args.set)
    disc = MultiLatticeDiscretization.from_json(json.loads(Path(args.disc).read_text()), index_set)
    result = verify_rank(index_set, disc, iterative=args.iterative)
    print(json.dumps(result.to_json()))
    return 0 if result.full_rank else 2


def _read_samples(path, disc):
    tr = transform_for(disc)
    values = np.zeros(tr.sample_count)
    offsets = np.cumsum([0] + [lat.size for lat in disc.lattices])
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for row in reader:
            if not row or row[0].startswith("#") or row[0] == "lattice":
                continue
            lat, j, value = int(row[0]), int(row[1]), float(row[2])
            values[offsets[lat] + j] = value
    return values


def cmd_reconstruct(args):
    obj = json.loads(Path(args.disc).read_text())
    index_set = read_index_set(args.set) if args.set else None
    disc = MultiLatticeDiscretization.from_json(obj, index_set)
    samples = _read_samples(args.samples, disc)
    coeffs = reconstruct_cg(samples, disc, tol=args.tol)
    rows = [
        [" ".join(str(int(v)) for v in freq), f"{c:.17g}"]
        for freq, c in zip(disc.index_set.freqs, coeffs)
    ]
    _write_csv(args.out, ["frequency", "coefficient"], rows)
    return 0

def cmd_harness(args):
    index_set = read_index_set(args.set)
    params = _params_from_args(args)
    result = failure_harness(
        index_set, args.strategy, params, trials=args.trials, check_rank=not args.no_rank_check
    )
    rows = [[
        args.strategy, len(index_set), result.trials, result.failures,
        f"{result.rate:.6f}", f"{result.ci_low:.6f}", f"{result.ci_high:.6f}",
        " ".join(str(t) for t in result.failed_trials),
    ]]
    _write_csv(args.out, ["strategy", "card", "trials", "failures", "rate", "ci_low", "ci_high", "failed"], rows)
    return 0


def _max_nodes(index_set, strategy, spec, row_key):
    counts = []
    for trial in range(spec.trials):
        seed = _derived_seed(spec.seed, *row_key, STRATEGY_ORDER.index(strategy), trial)
        disc = STRATEGIES[strategy](index_set, StrategyParams(r=spec.r, rng_seed=seed))
        counts.append(disc.node_count)
    return max(counts)


def cmd_table(args):
    rows_wanted = list(DESK_TABLE_ROWS) + (list(EXTENDED_TABLE_ROWS) if args.extended else [])
    spec = ExperimentSpec(
        family="table", dims=[], degrees=[], strategies=list(args.strategies),
        r=args.r, trials=args.trials, seed=args.seed, out=args.out,
    )
    out_rows = []

    def one_row(item):
        idx, (family, dim, degree) = item
        try:
            index_set = _build_family(family, dim, degree)
        except CapacityError as exc:
            print(f"skipping {family} d={dim} n={degree}: {exc}", file=sys.stderr)
            return None
        cells = [family, dim, degree, len(index_set), mirror_cardinality(index_set)]
        for strategy in spec.strategies:
            cells.append(_max_nodes(index_set, strategy, spec, (idx,)))
        return cells

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(one_row, enumerate(rows_wanted)))
    out_rows = [r for r in results if r is not None]
    out_rows.sort(key=lambda row: (row[0], row[1], row[2]))
    _write_csv(args.out, ["family", "d", "n", "card", "mirror_card"] + list(spec.strategies), out_rows)
    return 0


def cmd_figure(args):
    spec = ExperimentSpec(
        family=args.which, dims=[], degrees=[], strategies=[args.strategy],
        r=args.r, trials=args.trials, seed=args.seed, out=args.out,
    )
    if args.which == "dhc":
        tasks = [("dhc", 6, n) for n in args.degrees]
    elif args.which == "random":
        tasks = [("random", 25, c) for c in args.counts]
    else:
        raise ValueError(f"unknown figure {args.which!r}")

    def one_row(item):
        idx, (family, dim, value) = item
        if family == "dhc":
            index_set = _build_family("dhc", dim, value)
        else:
            index_set = make_random_sparse(dim, args.active, value, 1024, _derived_seed(spec.seed, idx, 99))
        mirror = mirror_cardinality(index_set)
        best = None
        for trial in range(spec.trials):
            seed = _derived_seed(spec.seed, idx, trial)
            disc = STRATEGIES[args.strategy](index_set, StrategyParams(r=spec.r, rng_seed=seed))
            if best is None or disc.node_count > best.node_count:
                best = disc
        cond = ""
        if args.cond and len(best.node_set()) * len(index_set) <= spec.dense_cap:
            cond = f"{verify_rank(index_set, best).condition_number:.6g}"
        return [
            family, dim, value, len(index_set),
            f"{best.node_count / len(index_set):.6g}",
            f"{best.node_count / mirror:.6g}",
            cond,
        ]

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        rows = list(pool.map(one_row, enumerate(tasks)))
    rows.sort(key=lambda row: (row[0], row[1], row[2]))
    _write_csv(args.out, ["family", "d", "n_or_card", "card", "oversampling", "nodes_over_mirror", "cond"], rows)
    return 0


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for batch commands")
    parser.add_argument("--format", choices=["text", "json"], default=None, help="file format override")


def build_parser():
    parser = argparse.ArgumentParser(prog="cheblat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an index set file")
    p.add_argument("--family", choices=["l1", "hc", "dhc", "random"], required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--degree", "-n", type=int, required=True,
                   help="degree bound (l1/hc), weight (dhc), or ignored for random")
    p.add_argument("--active", type=int, default=2, help="nonzeros per vector (random family)")
    p.add_argument("--count", type=int, default=256, help="vector count (random family)")
    p.add_argument("--max-degree", type=int, default=1024, help="value bound (random family)")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("construct", help="build a discretization for an index set")
    p.add_argument("--set", required=True)
    p.add_argument("--strategy", choices=list(STRATEGY_ORDER), required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--threshold", choices=["half", "theory"], default="half")
    p.add_argument("--out", default=None)
    p.add_argument("--nodes-out", default=None, help="optional CSV node dump")
    _add_common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="rank-check a stored discretization")
    p.add_argument("--disc", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--iterative", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconstruct", help="least-squares coefficients from samples")
    p.add_argument("--disc", required=True)
    p.add_argument("--set", default=None)
    p.add_argument("--samples", required=True, help="CSV rows lattice,j,value")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("harness", help="Monte-Carlo failure rate of a strategy")
    p.add_argument("--set", required=True)
    p.add_argument("--strategy", choices=list(STRATEGY_ORDER), required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--no-rank-check", action="store_true")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_harness)

    p = sub.add_parser("table", help="node-count table over the standard families")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--strategies", nargs="+", default=list(STRATEGY_ORDER))
    p.add_argument("--extended", action="store_true", help="include the slower rows")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("figure", help="oversampling and condition data rows")
    p.add_argument("--which", choices=["dhc", "random"], required=True)
    p.add_argument("--strategy", choices=list(STRATEGY_ORDER), default="halving")
    p.add_argument("--degrees", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6],
                   help="dhc weights (d=6)")
    p.add_argument("--counts", type=int, nargs="+", default=[64, 256, 1024],
                   help="random-set cardinalities (d=25)")
    p.add_argument("--active", type=int, default=2)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--cond", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_figure)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
