"""Monte Carlo runner: generate or load data, run every aggregator with and without clustering, tabulate.

Results are one row per (configuration, trial, aggregator, clustered) and are
written to CSV in a fixed column order, with a JSON sidecar holding the spec
and per-configuration means. Everything is a function of the spec and its base
seed, so reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .._validation import DataError, NumericalError
from ..model import TwoTypeModel, sample_responses
from ..pipeline import AGGREGATORS, PipelineConfig, aggregate, evaluate, run_pipeline
from ..spectral import cluster_tasks, spectral_params_from_reliabilities
from . import generators
from .datasets import impute_dataset, load_dataset

__all__ = [
    "KINDS", "COLUMNS", "ExperimentSpec", "ExperimentError", "run_experiment",
    "rows_to_csv", "summarize", "write_results",
]

logger = logging.getLogger(__name__)

KINDS = ("PHASE_TRANSITION", "CLUSTER_TIGHTNESS", "PNEUMONIA", "JSRT", "REAL_DATASET")
COLUMNS = (
    "spec_id", "trial", "algo", "clustered", "err_overall", "err_type1", "err_type2",
    "cluster_err", "detect_stat", "omega", "gamma", "delta", "status",
)

_GENERATORS = {
    "PHASE_TRANSITION": generators.gen_phase_transition,
    "CLUSTER_TIGHTNESS": generators.gen_cluster_tightness,
    "PNEUMONIA": generators.gen_pneumonia,
    "JSRT": generators.gen_jsrt,
}


class ExperimentError(RuntimeError):
    """More than half of the trials of an experiment failed."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    trials : int
        Independent repetitions, at least 1.
    seed : int
        Base seed; trial ``t`` of configuration ``c`` draws from seeds derived
        from ``(seed, t, c)``.
    algorithms : tuple of str
        Aggregators to run, each with and without clustering.
    pipeline : dict
        Keyword arguments of :class:`~twotype.pipeline.PipelineConfig`
        (``split_mode``, ``n1``, ``detection``, ``A_prime``, ``eigensolver``).
    params : dict
        Kind-specific generator parameters.
    """

    kind: str
    trials: int = 1
    seed: int = 0
    name: str = "experiment"
    algorithms: tuple = ("TE",)
    pipeline: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        for a in self.algorithms:
            if a not in AGGREGATORS:
                raise ValueError(f"unknown algorithm {a!r}; choose from {AGGREGATORS}")
        allowed = {"split_mode", "n1", "detection", "A_prime", "eigensolver", "split_seed", "tie_seed"}
        extra = set(self.pipeline) - allowed
        if extra:
            raise ValueError(f"unknown pipeline keys: {sorted(extra)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        return d


def _nan_row(spec_id, trial, algo, clustered, status):
    row = dict.fromkeys(COLUMNS, float("nan"))
    row.update(spec_id=spec_id, trial=trial, algo=algo, clustered=clustered, status=status)
    return row


def _separability(R: np.ndarray, types: np.ndarray):
    if R.shape[0] != 2:
        return float("nan"), float("nan"), float("nan")
    d1 = int(np.sum(types == 1))
    d = types.shape[0]
    if d1 == 0 or d1 == d:
        return float("nan"), float("nan"), float("nan")
    p = spectral_params_from_reliabilities(R[0], R[1], d, d1=d1)
    return p.omega, p.gamma, p.delta


def _models_for_trial(spec: ExperimentSpec, trial: int):
    """``[(config_label, Y, truth, types, R)]`` for one trial."""
    if spec.kind == "REAL_DATASET":
        p = spec.params
        bundle = load_dataset(p["responses"], p["truth"])
        imp = impute_dataset(bundle, int(p.get("min_labels", 10)),
                             seed=generators.derive_seed(spec.seed, trial))
        R = np.vstack([imp.r1, imp.r2])
        return [(p.get("label", Path(p["responses"]).stem), imp.responses, imp.truth, imp.types, R)]
    out = []
    for label, model in _GENERATORS[spec.kind](spec.params, trial, spec.seed):
        out.append((label, sample_responses(model), model.truth, model.types, np.asarray(model.reliabilities)))
    return out


def _run_one(spec, label, trial, Y, truth, types, R):
    omega, gamma, delta = _separability(R, types)
    base = dict(spec_id=label, trial=trial, omega=omega, gamma=gamma, delta=delta, status="ok")
    rows = []
    if spec.kind == "CLUSTER_TIGHTNESS":
        k_hat, summary = cluster_tasks(Y, tie_seed=(spec.seed, trial, 7))
        m = evaluate(truth, truth, types, k_hat)  # label errors are 0 by construction
        row = _nan_row(label, trial, "cluster", True, "ok")
        row.update(base, algo="cluster", clustered=True, cluster_err=m["cluster_err"],
                   detect_stat=summary.detect_stat)
        return [row]
    # NP-oracle weights: the true vectors per cluster, their task-weighted mean when pooled
    counts = np.array([np.sum(types == k) for k in range(1, R.shape[0] + 1)], dtype=float)
    pooled = counts @ R / counts.sum()
    oracle = (R[0], R[1]) if R.shape[0] == 2 else (pooled, pooled)
    for algo in spec.algorithms:
        # unclustered
        try:
            res = aggregate(Y, algo, (spec.seed, trial), pooled)
            m = evaluate(res.labels, truth, types)
            row = _nan_row(label, trial, algo, False, "ok")
            row.update(base, algo=algo, clustered=False, **{k: m.get(k, float("nan")) for k in ("err_overall", "err_type1", "err_type2")})
        except (DataError, NumericalError, ValueError) as exc:
            row = _nan_row(label, trial, algo, False, f"failed: {exc}")
            row.update(omega=omega, gamma=gamma, delta=delta)
        rows.append(row)
        # clustered
        try:
            cfg = PipelineConfig(aggregator=algo, tie_seed=trial, oracle_reliabilities=oracle, **spec.pipeline)
            pr = run_pipeline(Y, cfg)
            m = evaluate(pr.labels, truth, types, pr.types)
            row = _nan_row(label, trial, algo, True, "ok")
            row.update(base, algo=algo, clustered=True,
                       **{k: m.get(k, float("nan")) for k in ("err_overall", "err_type1", "err_type2", "cluster_err")})
            row["detect_stat"] = pr.diagnostics.get("detect_stat", float("nan"))
            if not pr.clustered:
                row["status"] = "ok: " + pr.diagnostics.get("reason", "unclustered")
        except (DataError, NumericalError, ValueError) as exc:
            row = _nan_row(label, trial, algo, True, f"failed: {exc}")
            row.update(omega=omega, gamma=gamma, delta=delta)
        rows.append(row)
    return rows


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Run every configuration and trial of ``spec`` and return the result rows.

    A trial whose data generation fails yields a single failed row; an
    aggregator failure yields a failed row for that aggregator only.

    Raises
    ------
    ExperimentError
        When more than half of the rows are failures.
    """
    rows = []
    for trial in range(int(spec.trials)):
        try:
            models = _models_for_trial(spec, trial)
        except (DataError, NumericalError, ValueError) as exc:
            logger.warning("trial %d failed during data generation: %s", trial, exc)
            rows.append(_nan_row(spec.name, trial, "-", False, f"failed: {exc}"))
            continue
        for label, Y, truth, types, R in models:
            rows.extend(_run_one(spec, label, trial, Y, truth, types, R))
    n_failed = sum(r["status"].startswith("failed") for r in rows)
    if rows and n_failed > len(rows) / 2:
        raise ExperimentError(f"{n_failed} of {len(rows)} result rows failed")
    return rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".10g")
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(COLUMNS)
    for r in rows:
        out.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def summarize(rows) -> list[dict]:
    """Mean and standard error of each error column per (spec_id, algo, clustered)."""
    groups: dict = {}
    for r in rows:
        if r["status"].startswith("failed"):
            continue
        groups.setdefault((r["spec_id"], r["algo"], bool(r["clustered"])), []).append(r)
    out = []
    for (sid, algo, clustered), rs in groups.items():
        entry = {"spec_id": sid, "algo": algo, "clustered": clustered, "trials": len(rs)}
        for col in ("err_overall", "err_type1", "err_type2", "cluster_err", "detect_stat"):
            vals = np.array([r[col] for r in rs], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size:
                entry[col] = float(vals.mean())
                entry[col + "_se"] = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append(entry)
    return out


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_results(rows, spec: ExperimentSpec, csv_path) -> Path:
    """Write the CSV and a ``.json`` sidecar next to it; returns the sidecar path."""
    csv_path = Path(csv_path)
    csv_path.write_text(rows_to_csv(rows))
    sidecar = csv_path.with_suffix(".json")
    payload = {"spec": spec.to_dict(), "columns": list(COLUMNS), "summary": summarize(rows)}
    sidecar.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    return sidecar
