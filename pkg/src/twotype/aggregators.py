"""Label aggregation for a pool of tasks that share one reliability vector.

All functions take a dense worker-by-task matrix and return an
:class:`AggregationResult`. Ties are broken with a coin vector drawn from
``tie_seed`` once per call, so two aggregators given the same seed break a tie
on task ``j`` the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._validation import DataError, check_responses, make_rng
from .spectral import task_similarity, top_two_eigenpairs

__all__ = [
    "EPS_CLIP",
    "AggregationResult",
    "log_odds_weights",
    "weighted_vote",
    "majority_vote",
    "nitzan_paroush",
    "er_labels",
    "worker_covariance",
    "te_estimate",
]

EPS_CLIP = 1e-6


@dataclass
class AggregationResult:
    labels: np.ndarray
    reliabilities: np.ndarray | None = None
    weights: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def _tie_coins(d: int, tie_seed) -> np.ndarray:
    return np.where(make_rng(tie_seed).random(d) < 0.5, 1, -1).astype(np.int8)


def log_odds_weights(r_hat, eps_clip: float = EPS_CLIP):
    """Clip reliabilities into ``[-1 + eps, 1 - eps]`` and return ``(weights, clipped_r, n_clipped)``."""
    r = np.asarray(r_hat, dtype=float)
    lo, hi = -1.0 + eps_clip, 1.0 - eps_clip
    n_clipped = int(np.sum((r < lo) | (r > hi)))
    r = np.clip(r, lo, hi)
    return np.log((1.0 + r) / (1.0 - r)), r, n_clipped


def weighted_vote(Y, w, tie_seed=0):
    """``sign(sum_i w_i Y_ij)``; scores within rounding of zero count as ties.

    Returns the labels and the number of ties.
    """
    Y = check_responses(Y)
    w = np.asarray(w, dtype=float)
    score = w @ Y.astype(float)
    scale = np.abs(w).sum()
    tie = np.abs(score) <= 1e-12 * max(scale, 1e-300)
    labels = np.where(score > 0, 1, -1).astype(np.int8)
    coins = _tie_coins(Y.shape[1], tie_seed)
    labels[tie] = coins[tie]
    return labels, int(tie.sum())


def majority_vote(Y, tie_seed=0) -> AggregationResult:
    Y = check_responses(Y)
    labels, ties = weighted_vote(Y, np.ones(Y.shape[0]), tie_seed)
    return AggregationResult(labels, weights=np.ones(Y.shape[0]), diagnostics={"ties": ties})


def nitzan_paroush(Y, r_hat, tie_seed=0, eps_clip: float = EPS_CLIP) -> AggregationResult:
    """Weighted vote with log-odds weights ``log((1 + r) / (1 - r))``.

    Reliability estimates at or beyond +-1 (triangular estimates can overshoot)
    are clipped first; the count is reported as ``diagnostics["clipped"]``.
    """
    Y = check_responses(Y)
    r_hat = np.asarray(r_hat, dtype=float)
    if r_hat.shape != (Y.shape[0],) or not np.all(np.isfinite(r_hat)):
        raise DataError(f"r_hat must be a finite vector of length {Y.shape[0]}")
    w, r, n_clipped = log_odds_weights(r_hat, eps_clip)
    labels, ties = weighted_vote(Y, w, tie_seed)
    return AggregationResult(labels, reliabilities=r, weights=w,
                             diagnostics={"ties": ties, "clipped": n_clipped})


def er_labels(Y, tie_seed=0, method: str = "auto") -> AggregationResult:
    """Signs of the principal eigenvector of ``T``.

    The eigenvector's global sign is chosen to agree with majority vote on more
    tasks; zero entries get a seeded coin.
    """
    Y = check_responses(Y)
    d = Y.shape[1]
    if d == 1:
        return majority_vote(Y, tie_seed)
    _, v, _, info = top_two_eigenpairs(task_similarity(Y), method=method)
    mv = majority_vote(Y, tie_seed).labels
    if np.sum(np.sign(v) == mv) < np.sum(-np.sign(v) == mv):
        v = -v
    labels = np.where(v > 0, 1, -1).astype(np.int8)
    zero = v == 0
    labels[zero] = _tie_coins(d, tie_seed)[zero]
    return AggregationResult(labels, diagnostics={"ties": int(zero.sum()), "solver": info["solver"], "eigvec": v})


def worker_covariance(Y) -> np.ndarray:
    """``C_ab = mean_j Y_aj Y_bj``; the diagonal is meaningless and left at 1."""
    Y = check_responses(Y).astype(np.float64)
    return (Y @ Y.T) / Y.shape[1]


def _best_pairs(C: np.ndarray):
    """For every worker i the pair (a, b), a < b, both != i, maximising |C_ab|.

    Ties go to the lexicographically smallest pair.
    """
    n = C.shape[0]
    pairs = list(combinations(range(n), 2))
    mags = np.array([abs(C[a, b]) for a, b in pairs])
    order = np.argsort(-mags, kind="stable")
    best = np.empty((n, 2), dtype=np.int64)
    for i in range(n):
        for idx in order:
            a, b = pairs[idx]
            if a != i and b != i:
                best[i] = (a, b)
                break
    return best


def te_estimate(Y, tie_seed=0, eps_clip: float = EPS_CLIP, sign_rule: str = "mean") -> AggregationResult:
    """Triangular estimation of worker reliabilities followed by a log-odds vote.

    Magnitudes come from ``|r_i| = sqrt(|C_ai C_bi / C_ab|)`` with ``(a, b)`` the
    most correlated pair of other workers (zero when ``C_ab == 0``). The
    reference worker, the one with the largest ``|C_ai C_bi|``, is taken to be
    reliable (positive sign); every other sign is that of its covariance with
    the reference worker.

    Parameters
    ----------
    sign_rule : {"mean", "reference"}
        ``"reference"`` stops there. ``"mean"`` (default) then negates every
        estimate if their sum is negative, so that the crowd's average
        reliability comes out positive even when the reference worker is an
        adversary.
    """
    if sign_rule not in ("mean", "reference"):
        raise ValueError("sign_rule must be 'mean' or 'reference'")
    Y = check_responses(Y, min_workers=3)
    n = Y.shape[0]
    C = worker_covariance(Y)
    pairs = _best_pairs(C)
    idx = np.arange(n)
    Ca = C[pairs[:, 0], idx]
    Cb = C[pairs[:, 1], idx]
    Cab = C[pairs[:, 0], pairs[:, 1]]
    guarded = Cab == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.where(guarded, 0.0, np.sqrt(np.abs(Ca * Cb / np.where(guarded, 1.0, Cab))))
    ref = int(np.argmax(np.abs(Ca * Cb)))
    signs = np.where(C[:, ref] < 0, -1.0, 1.0)
    signs[ref] = 1.0
    r_hat = signs * mag
    flipped = sign_rule == "mean" and r_hat.sum() < 0
    if flipped:
        r_hat = -r_hat
    diagnostics = {"reference_worker": ref, "guarded": int(guarded.sum()), "pairs": pairs, "global_flip": bool(flipped)}
    if not np.any(r_hat):
        res = majority_vote(Y, tie_seed)
        res.reliabilities = np.zeros(n)
        res.diagnostics.update(diagnostics, fallback="majority_vote")
        return res
    res = nitzan_paroush(Y, r_hat, tie_seed, eps_clip)
    res.diagnostics.update(diagnostics)
    return res
