"""Command-line interface.

Subcommands
-----------
simulate    write a synthetic two-type dataset (responses, truth, types, reliabilities)
cluster     split the tasks of a response file into two types
aggregate   estimate labels with one aggregator, optionally after clustering
detect      detection statistic and estimated number of task types
experiment  run an experiment config and write CSV + JSON results
bounds      theory calculators

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Response files are long-format CSV with columns ``worker_id, task_id, label``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import theory
from ._validation import DataError, NumericalError, check_responses, make_rng
from .experiments.config import load_spec
from .experiments.generators import derive_seed
from .experiments.datasets import load_dataset, load_responses, write_responses
from .experiments.harness import ExperimentError, run_experiment, write_results
from .model import TwoTypeModel, equal_split_types, sample_responses, sample_truth
from .pipeline import AGGREGATORS, PipelineConfig, aggregate, evaluate, run_pipeline
from .spectral import cluster_tasks, estimate_num_types, should_cluster, similarity_spectrum

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


def _emit(rows, header, out_path=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    text = buf.getvalue()
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _read_dense(path):
    raw, workers, tasks = load_responses(path)
    Y = check_responses(raw)  # raises "dense matrix required" on gaps
    return Y, workers, tasks


def _parse_range(text: str):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2 or not parts[0] <= parts[1]:
        raise argparse.ArgumentTypeError("expected 'lo,hi' with lo <= hi")
    return tuple(parts)


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",") if x.strip()])


# -- subcommands --------------------------------------------------------------

def cmd_simulate(args) -> int:
    rng = make_rng(derive_seed(args.seed, 0))
    r1 = rng.uniform(*args.easy, size=args.n)
    r2 = rng.uniform(*args.hard, size=args.n)
    if args.scramble:
        r2 *= np.where(rng.random(args.n) < 0.5, -1.0, 1.0)
    truth = sample_truth(args.d, args.prior, seed=derive_seed(args.seed, 1))
    model = TwoTypeModel(np.vstack([r1, r2]), equal_split_types(args.d), truth, seed=derive_seed(args.seed, 2))
    Y = sample_responses(model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_responses(out / "responses.csv", Y)
    _emit([(f"t{j}", int(truth[j])) for j in range(args.d)], ["task_id", "label"], out / "truth.csv")
    _emit([(f"t{j}", int(k)) for j, k in enumerate(model.types)], ["task_id", "type"], out / "types.csv")
    _emit([(f"w{i}", r1[i], r2[i]) for i in range(args.n)], ["worker_id", "r1", "r2"], out / "reliabilities.csv")
    return EXIT_OK


def cmd_cluster(args) -> int:
    Y, _, tasks = _read_dense(args.responses)
    k_hat, summary = cluster_tasks(Y, tie_seed=args.seed, method=args.eigensolver)
    _emit(zip(tasks, k_hat), ["task_id", "type"], args.out)
    print(f"detection_statistic={summary.detect_stat:.10g} lambda1={summary.lambda1:.10g} "
          f"lambda2={summary.lambda2:.10g} flags={','.join(summary.flags) or '-'}", file=sys.stderr)
    return EXIT_OK


def cmd_aggregate(args) -> int:
    if args.truth:
        bundle = load_dataset(args.responses, args.truth)
        Y, tasks, truth = check_responses(bundle.raw), bundle.task_ids, bundle.truth
    else:
        Y, _, tasks = _read_dense(args.responses)
        truth = None
    reliabilities = None
    if args.method == "NP-oracle":
        if not args.reliabilities:
            raise DataError("NP-oracle needs --reliabilities r1,r2,... (one value per worker)")
        reliabilities = _parse_vector(args.reliabilities)
    if args.two_stage:
        oracle = (reliabilities, reliabilities) if reliabilities is not None else None
        cfg = PipelineConfig(aggregator=args.method, detection=args.detection, A_prime=args.A_prime,
                             split_mode=args.split_mode, tie_seed=args.seed, split_seed=args.seed,
                             oracle_reliabilities=oracle)
        res = run_pipeline(Y, cfg)
        labels = res.labels
        types = res.types if res.types is not None else np.zeros(len(labels), dtype=int)
        _emit(zip(tasks, labels, types), ["task_id", "label", "type"], args.out)
    else:
        labels = aggregate(Y, args.method, args.seed, reliabilities).labels
        _emit(zip(tasks, labels), ["task_id", "label"], args.out)
    if truth is not None:
        print(f"error={np.mean(labels != truth):.10g}", file=sys.stderr)
    return EXIT_OK


def cmd_detect(args) -> int:
    Y, _, _ = _read_dense(args.responses)
    n, d = Y.shape
    _, summary = cluster_tasks(Y, tie_seed=args.seed)
    eigs = similarity_spectrum(Y)
    rows = [
        ("lambda1", summary.lambda1),
        ("lambda2", summary.lambda2),
        ("spread", summary.spread),
        ("detection_statistic", summary.detect_stat),
        ("should_cluster", should_cluster(summary, n, d, args.A_prime)),
        ("estimated_types", estimate_num_types(eigs, d, args.dominance_factor)),
    ]
    _emit(rows, ["quantity", "value"], args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = load_spec(args.config)
    if args.trials is not None:
        spec = type(spec)(**{**spec.__dict__, "trials": args.trials})
    rows = run_experiment(spec)
    sidecar = write_results(rows, spec, args.out)
    print(f"wrote {len(rows)} rows to {args.out} and {sidecar}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    kind = args.kind
    rows = []
    if kind in ("phi", "Phi", "mismatch", "exact", "wmv"):
        r = _parse_vector(args.r) if args.r else None
        if r is None:
            raise DataError(f"bounds {kind} needs --r")
        w = _parse_vector(args.w) if args.w else theory.ml_weights(r)
        if kind == "phi":
            rep = theory.phi(w, r)
            rows = [("phi", rep.phi_w), ("t_star", rep.t_star), ("Phi", rep.Phi), ("bound", rep.bound_value)]
        elif kind == "Phi":
            rows = [("Phi", theory.Phi(r))]
        elif kind == "exact":
            rows = [("exact_error", theory.exact_wmv_error(w, r))]
        else:
            if not args.r2:
                raise DataError(f"bounds {kind} needs --r2")
            r2 = _parse_vector(args.r2)
            if kind == "mismatch":
                rows = [("phi_mismatch", theory.phi_mismatch(r, r2))]
            else:
                rows = [("wmv_upper_bound", theory.wmv_upper_bound(w, r, r2))]
    elif kind in ("cluster", "workers"):
        if args.gamma is None or args.delta is None or args.d is None:
            raise DataError(f"bounds {kind} needs --gamma, --delta and --d")
        if kind == "cluster":
            if args.n is None:
                raise DataError("bounds cluster needs --n")
            rows = [("clustering_error_bound", theory.clustering_error_bound(args.gamma, args.delta, args.n, args.d, args.A))]
        else:
            req = theory.worker_requirement(args.gamma, args.delta, args.d, args.C)
            rows = [("worker_requirement", "inf" if math.isinf(req) else req)]
    _emit(rows, ["quantity", "value"], args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twotype", description="Two-type crowdsourcing: clustering, aggregation, experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write a synthetic dataset")
    s.add_argument("--n", type=int, default=50, help="workers")
    s.add_argument("--d", type=int, default=200, help="tasks (split evenly into two types)")
    s.add_argument("--easy", type=_parse_range, default=(0.5, 0.9), help="range of type-1 reliabilities 'lo,hi'")
    s.add_argument("--hard", type=_parse_range, default=(0.1, 0.5), help="range of type-2 reliabilities 'lo,hi'")
    s.add_argument("--scramble", action="store_true", help="give type-2 reliabilities random signs (type-2 labels are then identified only up to a global flip)")
    s.add_argument("--prior", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("cluster", help="split tasks into two types")
    c.add_argument("responses")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--eigensolver", choices=("auto", "power", "dense"), default="auto")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cluster)

    a = sub.add_parser("aggregate", help="estimate labels")
    a.add_argument("responses")
    a.add_argument("--method", choices=AGGREGATORS, default="TE")
    a.add_argument("--two-stage", action="store_true", help="cluster tasks first, aggregate per cluster")
    a.add_argument("--detection", choices=("always", "check"), default="always")
    a.add_argument("--A-prime", dest="A_prime", type=float, default=1.0)
    a.add_argument("--split-mode", choices=("reuse_all", "disjoint"), default="reuse_all")
    a.add_argument("--reliabilities", help="comma-separated worker reliabilities for NP-oracle")
    a.add_argument("--truth", help="truth CSV; prints the error rate to stderr")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out")
    a.set_defaults(func=cmd_aggregate)

    d = sub.add_parser("detect", help="detection statistic and number of types")
    d.add_argument("responses")
    d.add_argument("--A-prime", dest="A_prime", type=float, default=1.0)
    d.add_argument("--dominance-factor", type=float, default=10.0)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("experiment", help="run an experiment config")
    e.add_argument("config")
    e.add_argument("--out", required=True, help="results CSV path (a .json sidecar is written next to it)")
    e.add_argument("--trials", type=int, help="override the number of trials")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bounds", help="theory calculators")
    b.add_argument("kind", choices=("phi", "Phi", "mismatch", "wmv", "exact", "cluster", "workers"))
    b.add_argument("--r", help="comma-separated reliabilities")
    b.add_argument("--r2", help="second reliability vector (mismatch, wmv)")
    b.add_argument("--w", help="comma-separated weights (default: log-odds of --r)")
    b.add_argument("--gamma", type=float)
    b.add_argument("--delta", type=float)
    b.add_argument("--n", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--A", type=float, default=2.0**9)
    b.add_argument("--C", type=float, default=1.0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ExperimentError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
