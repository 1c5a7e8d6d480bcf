"""Cluster tasks by difficulty, then aggregate each cluster on its own."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import aggregators
from ._validation import DataError, check_labels, check_responses, check_types, make_rng
from .spectral import cluster_tasks, should_cluster

__all__ = [
    "AGGREGATORS", "PipelineConfig", "PipelineResult", "run_pipeline", "aggregate", "evaluate",
    "best_permutation_error",
]

AGGREGATORS = ("MV", "NP-oracle", "ER", "TE")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings of the two-stage procedure.

    Parameters
    ----------
    aggregator : {"MV", "NP-oracle", "ER", "TE"}
    split_mode : {"reuse_all", "disjoint"}
        ``"disjoint"`` clusters with ``n1`` randomly chosen workers and aggregates
        with the others; ``"reuse_all"`` uses every worker for both steps.
    n1 : int, optional
        Size of the clustering group in disjoint mode, default ``n // 2``.
    detection : {"always", "check"}
        With ``"check"``, tasks are only clustered when the detection
        criterion with constant ``A_prime`` holds.
    oracle_reliabilities : (r1, r2), optional
        True per-type reliabilities; required by ``"NP-oracle"`` only.
    """

    aggregator: str = "TE"
    split_mode: str = "reuse_all"
    n1: int | None = None
    detection: str = "always"
    A_prime: float = 1.0
    split_seed: int = 0
    tie_seed: int = 0
    eigensolver: str = "auto"
    oracle_reliabilities: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}, got {self.aggregator!r}")
        if self.split_mode not in ("reuse_all", "disjoint"):
            raise ValueError(f"split_mode must be 'reuse_all' or 'disjoint', got {self.split_mode!r}")
        if self.detection not in ("always", "check"):
            raise ValueError(f"detection must be 'always' or 'check', got {self.detection!r}")
        if self.A_prime <= 0:
            raise ValueError("A_prime must be positive")
        if self.aggregator == "NP-oracle" and self.oracle_reliabilities is None:
            raise ValueError("NP-oracle needs oracle_reliabilities=(r1, r2)")

    def resolve_n1(self, n: int) -> int:
        n1 = n // 2 if self.n1 is None else self.n1
        if not 3 <= n1 <= n - 3:
            raise ValueError(f"disjoint split needs 3 <= n1 <= n - 3, got n1={n1}, n={n}")
        return n1


@dataclass
class PipelineResult:
    labels: np.ndarray
    types: np.ndarray | None
    clustered: bool
    diagnostics: dict


def aggregate(Y, name: str, tie_seed=0, reliabilities=None, eigensolver: str = "auto"):
    """Run one aggregator on a single pool of tasks."""
    if name == "MV":
        return aggregators.majority_vote(Y, tie_seed)
    if name == "NP-oracle":
        if reliabilities is None:
            raise ValueError("NP-oracle needs reliabilities")
        return aggregators.nitzan_paroush(Y, reliabilities, tie_seed)
    if name == "ER":
        return aggregators.er_labels(Y, tie_seed, method=eigensolver)
    if name == "TE":
        return aggregators.te_estimate(Y, tie_seed)
    raise ValueError(f"unknown aggregator {name!r}")


def _pooled_oracle(cfg: PipelineConfig, rows):
    if cfg.oracle_reliabilities is None:
        return None
    r1, r2 = (np.asarray(r, dtype=float)[rows] for r in cfg.oracle_reliabilities)
    return (r1 + r2) / 2.0


def run_pipeline(Y, cfg: PipelineConfig | None = None) -> PipelineResult:
    """Cluster tasks into two difficulty groups and aggregate each one separately.

    Clusters with no tasks are skipped. A cluster of fewer than two tasks
    falls back to majority vote when the aggregator is TE.
    """
    cfg = cfg or PipelineConfig()
    Y = check_responses(Y, min_workers=3)
    n, d = Y.shape
    diag: dict = {"fallbacks": []}
    if cfg.split_mode == "disjoint":
        n1 = cfg.resolve_n1(n)
        perm = make_rng(cfg.split_seed).permutation(n)
        N1, N2 = np.sort(perm[:n1]), np.sort(perm[n1:])
    else:
        N1 = N2 = np.arange(n)
    diag["cluster_workers"] = N1
    diag["aggregate_workers"] = N2

    if d < 2:
        res = aggregate(Y[N2], cfg.aggregator, cfg.tie_seed, _pooled_oracle(cfg, N2), cfg.eigensolver)
        diag["reason"] = "single task"
        return PipelineResult(res.labels, None, False, diag)

    k_hat, summary = cluster_tasks(Y[N1], tie_seed=(cfg.tie_seed, 7), method=cfg.eigensolver)
    diag["summary"] = summary
    diag["detect_stat"] = summary.detect_stat
    if cfg.detection == "check" and not should_cluster(summary, len(N1), d, cfg.A_prime):
        res = aggregate(Y[N2], cfg.aggregator, cfg.tie_seed, _pooled_oracle(cfg, N2), cfg.eigensolver)
        diag["reason"] = "unclustered"
        diag["pooled"] = res
        return PipelineResult(res.labels, None, False, diag)

    labels = np.zeros(d, dtype=np.int8)
    for k in (1, 2):
        J = np.flatnonzero(k_hat == k)
        if J.size == 0:
            diag["fallbacks"].append((k, "empty cluster"))
            continue
        name = cfg.aggregator
        if name == "TE" and J.size < 2:
            name = "MV"
            diag["fallbacks"].append((k, "TE on fewer than 2 tasks; majority vote used"))
        r_oracle = None
        if cfg.oracle_reliabilities is not None:
            r_oracle = np.asarray(cfg.oracle_reliabilities[k - 1], dtype=float)[N2]
        res = aggregate(Y[np.ix_(N2, J)], name, (cfg.tie_seed, k), r_oracle, cfg.eigensolver)
        labels[J] = res.labels
        diag[f"cluster{k}"] = res
    return PipelineResult(labels, k_hat, True, diag)


def evaluate(labels, truth, types, k_hat=None) -> dict:
    """Error rates of estimated labels (and optionally of a clustering).

    Returns ``err_overall``, ``err_type{k}`` for every true type ``k`` and, when
    ``k_hat`` is given and there are two true types, ``cluster_err``: the
    misclustering rate under the better of the two relabellings.
    """
    truth = check_labels(truth)
    d = truth.shape[0]
    labels = check_labels(labels, d=d)
    n_types = int(np.max(types)) if len(types) else 2
    types = check_types(types, d=d, n_types=max(n_types, 2))
    wrong = labels != truth
    out = {"err_overall": float(wrong.mean())}
    for k in range(1, max(n_types, 2) + 1):
        mask = types == k
        out[f"err_type{k}"] = float(wrong[mask].mean()) if mask.any() else float("nan")
    if k_hat is not None:
        k_hat = check_types(k_hat, d=d)
        if n_types <= 2:
            out["cluster_err"] = best_permutation_error(k_hat, types)
        else:
            out["cluster_err"] = float("nan")
    return out


def best_permutation_error(k_hat, types) -> float:
    """Misclustering rate under the better of the two relabellings of ``k_hat``."""
    if len(k_hat) != len(types):
        raise DataError("length mismatch")
    mis = float(np.mean(np.asarray(k_hat) != np.asarray(types)))
    return min(mis, 1.0 - mis)
