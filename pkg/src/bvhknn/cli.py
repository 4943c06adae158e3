"""Command-line driver emitting machine-readable JSON reports.

Subcommands: ``build-info`` (index structure stats), ``query`` (timed
search run with recall), ``sweep`` (series of runs along one axis), and
``oracle`` (brute-force ground truth).  Reports are deterministic for a
fixed seed except for the contents of the "timings" block.

Exit codes: 0 success, 2 input error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .datasets import FORMATS, DatasetFile, load_dataset, read_records, synthetic_points
from .experiments import SWEEP_AXES, Dataset, prepare_inputs, run_experiment, sweep
from .metrics import KIND_EUCLID2D, KIND_HAMMING3, MetricSpec
from .oracle import ground_truth
from .pipeline import ReductionConfig, build_index, scene_half_width

_3D_FORMATS = ("csv-xyz", "bin-f32x4")


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data", help="dataset file; omit to generate a seeded synthetic dataset")
    sub.add_argument("--format", choices=FORMATS, default="csv-xyz")
    sub.add_argument("--n", type=int, required=True, help="number of data points")
    sub.add_argument("--queries", type=int, help="number of query points")
    sub.add_argument("--query-file", help="read queries from a separate file (same format)")
    sub.add_argument("--metric", required=True,
                     help="lp:<p> | linf | cosine | angular | euclid2d | hamming3")
    sub.add_argument("--radius", type=float, help="search radius r")
    sub.add_argument("--k", type=int, default=10)
    sub.add_argument("--enhanced", type=_parse_bool, default=False, metavar="BOOL")
    sub.add_argument("--leaf-size", type=int, default=4)
    sub.add_argument("--repeats", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", help="write JSON here instead of stdout")


def _check_format(metric: MetricSpec, format: str) -> None:
    if metric.kind == KIND_EUCLID2D and format != "csv-2d":
        raise ValueError("metric euclid2d needs --format csv-2d")
    if metric.kind == KIND_HAMMING3 and format != "bits":
        raise ValueError("metric hamming3 needs --format bits")
    if metric.kind not in (KIND_EUCLID2D, KIND_HAMMING3) and format not in _3D_FORMATS:
        raise ValueError(f"metric {metric.canonical()} needs a 3D format ({', '.join(_3D_FORMATS)})")


def _load(args, metric: MetricSpec) -> Dataset:
    """Assemble the dataset from files or from the seeded generator."""
    if args.data is not None:
        _check_format(metric, args.format)
        if args.query_file is not None:
            data = read_records(args.data, args.format)
            if args.n > len(data):
                raise ValueError(f"insufficient records in {args.data}: need {args.n}, have {len(data)}")
            data = data[: args.n]
            queries = read_records(args.query_file, args.format)
            if args.queries is not None:
                if args.queries > len(queries):
                    raise ValueError(
                        f"insufficient records in {args.query_file}: need {args.queries}, have {len(queries)}"
                    )
                queries = queries[: args.queries]
            meta = {"source": args.data, "query_source": args.query_file, "format": args.format,
                    "seed": args.seed}
        else:
            if args.queries is None:
                raise ValueError("--data needs either --queries or --query-file")
            data, queries = load_dataset(DatasetFile(args.data, args.format, args.n, args.queries))
            meta = {"source": args.data, "format": args.format, "seed": args.seed}
        return Dataset(data, queries, meta)

    # synthetic: uniform in [0,1)^d, or random cube vertices for hamming3
    if args.queries is None:
        raise ValueError("synthetic datasets need --queries")
    if metric.kind == KIND_HAMMING3:
        kind, dim = "bits", 3
    elif metric.kind == KIND_EUCLID2D:
        kind, dim = "uniform", 2
    else:
        kind, dim = "uniform", 3
    records = synthetic_points(args.n + args.queries, args.seed, dim, kind)
    meta = {"source": "synthetic", "kind": kind, "format": None, "seed": args.seed}
    return Dataset(records[: args.n], records[args.n :], meta)


def _config(args) -> ReductionConfig:
    metric = MetricSpec.parse(args.metric)
    if args.radius is None:
        raise ValueError("--radius is required for this command")
    return ReductionConfig(metric, args.radius, args.k, args.enhanced, args.leaf_size)


def _emit(obj, out_path) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_build_info(args) -> dict:
    config = _config(args)
    dataset = _load(args, config.metric)
    data3, _, pcfg, dim, _ = prepare_inputs(dataset, config)
    t0 = time.perf_counter()
    bvh = build_index(data3, pcfg, dim)
    build_ms = (time.perf_counter() - t0) * 1e3
    return {
        "schema": "bvhknn.build-info/1",
        "config": {"metric": config.metric.canonical(), "radius": config.r,
                   "leaf_size": config.leaf_size, "enhanced": config.enhanced},
        "dataset": dataset.described(),
        "index": {
            "num_primitives": bvh.num_primitives,
            "num_nodes": bvh.num_nodes,
            "max_depth": bvh.max_depth(),
            "leaf_size": bvh.leaf_size,
            "box_half_width": scene_half_width(pcfg, dim),
        },
        "timings": {"build_ms": build_ms},
    }


def _cmd_query(args) -> dict:
    config = _config(args)
    dataset = _load(args, config.metric)
    return run_experiment(dataset, config, repeats=args.repeats)


def _cmd_sweep(args) -> list[dict]:
    config = _config(args)
    dataset = _load(args, config.metric)
    return sweep(dataset, config, args.axis, args.values, repeats=args.repeats)


def _cmd_oracle(args) -> dict:
    metric = MetricSpec.parse(args.metric)
    dataset = _load(args, metric)
    truth = ground_truth(dataset.data, dataset.queries, metric, args.k, radius=args.radius)
    out = {"schema": "bvhknn.ground-truth/1", "dataset": dataset.described()}
    out.update(truth.to_dict())
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvhknn",
                                     description="generalized k-NN search benchmark driver")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-info", help="build the index and report its structure")
    _add_common(p)
    p.set_defaults(fn=_cmd_build_info)

    p = subs.add_parser("query", help="run a timed search and report recall")
    _add_common(p)
    p.set_defaults(fn=_cmd_query)

    p = subs.add_parser("sweep", help="run a series of searches along one axis")
    _add_common(p)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", type=_parse_values, required=True,
                   help="comma-separated, strictly increasing")
    p.set_defaults(fn=_cmd_sweep)

    p = subs.add_parser("oracle", help="brute-force ground truth (radius optional)")
    _add_common(p)
    p.set_defaults(fn=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.fn(args)
        _emit(report, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal invariant violations
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
