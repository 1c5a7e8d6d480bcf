"""Loading sparse crowd datasets from CSV and imputing them into dense two-type form.

Response files have the columns ``worker_id, task_id, label`` and truth files
``task_id, label``. Labels may be written in {-1, +1} or in {0, 1}; the latter
are mapped to {-1, +1} per file. Missing responses become 0 in the raw matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._validation import DataError, check_labels, make_rng

__all__ = ["DatasetBundle", "ImputedDataset", "load_responses", "load_dataset", "impute_dataset", "write_responses"]


@dataclass
class DatasetBundle:
    """A sparse response matrix with ground truth.

    Attributes
    ----------
    raw : ndarray of shape (n_workers, n_tasks), int8
        Responses in {-1, +1}, 0 where a worker did not label a task.
    truth : ndarray of shape (n_tasks,)
    worker_ids, task_ids : list of str
        Row and column identifiers, in first-appearance order.
    provenance : dict
        Source paths and a log of processing steps.
    """

    raw: np.ndarray
    truth: np.ndarray
    worker_ids: list
    task_ids: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n, d = self.raw.shape
        if len(self.worker_ids) != n or len(self.task_ids) != d:
            raise DataError("id lists do not match the response matrix")
        if self.truth.shape != (d,):
            raise DataError("truth length must equal the number of tasks")


@dataclass
class ImputedDataset:
    responses: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    types: np.ndarray
    truth: np.ndarray
    kept_workers: np.ndarray
    log: list = field(default_factory=list)


def _read_rows(path, n_cols: int):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and not _is_number(rows[0][-1]):
        rows = rows[1:]  # header
    for i, r in enumerate(rows):
        if len(r) != n_cols:
            raise DataError(f"{path}: row {i + 1} has {len(r)} fields, expected {n_cols}")
    return [[c.strip() for c in r] for r in rows]


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _map_labels(values, path) -> np.ndarray:
    try:
        v = np.array([int(float(x)) for x in values])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric label") from exc
    seen = set(np.unique(v).tolist())
    if seen <= {-1, 1}:
        return v.astype(np.int8)
    if seen <= {0, 1}:
        return np.where(v == 1, 1, -1).astype(np.int8)
    raise DataError(f"{path}: labels must be in {{-1, +1}} or {{0, 1}}, found {sorted(seen)}")


def load_responses(path):
    """Read a long-format response CSV into ``(raw, worker_ids, task_ids)``.

    Rows and columns follow first-appearance order; unanswered pairs are 0.
    """
    path = Path(path)
    rows = _read_rows(path, 3)
    if not rows:
        raise DataError(f"{path}: no responses")
    workers = list(dict.fromkeys(r[0] for r in rows))
    tasks = list(dict.fromkeys(r[1] for r in rows))
    w_index = {w: i for i, w in enumerate(workers)}
    t_index = {t: j for j, t in enumerate(tasks)}
    labels = _map_labels([r[2] for r in rows], path)
    seen = set()
    dups = []
    raw = np.zeros((len(workers), len(tasks)), dtype=np.int8)
    for (w, t, _), lab in zip(rows, labels):
        if (w, t) in seen:
            dups.append((w, t))
            continue
        seen.add((w, t))
        raw[w_index[w], t_index[t]] = lab
    if dups:
        shown = ", ".join(f"({w}, {t})" for w, t in dups[:10])
        raise DataError(f"duplicate (worker, task) pairs: {shown}" + (" ..." if len(dups) > 10 else ""))
    return raw, workers, tasks


def write_responses(path, Y, worker_ids=None, task_ids=None) -> None:
    """Write a response matrix in long format, skipping zeros."""
    Y = np.asarray(Y)
    n, d = Y.shape
    worker_ids = worker_ids or [f"w{i}" for i in range(n)]
    task_ids = task_ids or [f"t{j}" for j in range(d)]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["worker_id", "task_id", "label"])
        for i in range(n):
            for j in range(d):
                if Y[i, j]:
                    out.writerow([worker_ids[i], task_ids[j], int(Y[i, j])])


def load_dataset(responses_path, truth_path) -> DatasetBundle:
    """Read a response CSV and a truth CSV into a :class:`DatasetBundle`.

    Tasks are ordered as they first appear in the response file; every task in
    the truth file must appear there, and every answered task needs a truth
    label.

    Raises
    ------
    DataError
        On duplicate (worker, task) pairs, unknown tasks in the truth file,
        answered tasks without truth, or malformed rows.
    """
    responses_path, truth_path = Path(responses_path), Path(truth_path)
    raw, workers, tasks = load_responses(responses_path)
    t_index = {t: j for j, t in enumerate(tasks)}
    trows = _read_rows(truth_path, 2)
    unknown = [r[0] for r in trows if r[0] not in t_index]
    if unknown:
        raise DataError(f"truth file names unknown tasks: {', '.join(unknown[:10])}")
    tlabels = _map_labels([r[1] for r in trows], truth_path)
    truth = np.zeros(len(tasks), dtype=np.int8)
    for (t, _), lab in zip(trows, tlabels):
        truth[t_index[t]] = lab
    missing = [tasks[j] for j in np.flatnonzero(truth == 0)]
    if missing:
        raise DataError(f"tasks without a truth label: {', '.join(missing[:10])}")

    prov = {"responses": str(responses_path), "truth": str(truth_path),
            "log": [f"loaded {int((raw != 0).sum())} responses, {len(workers)} workers, {len(tasks)} tasks"]}
    return DatasetBundle(raw, truth, workers, tasks, prov)


def impute_dataset(bundle: DatasetBundle, min_labels: int = 10, seed=0) -> ImputedDataset:
    """Densify a sparse dataset with per-type empirical reliabilities.

    1. Drop workers with ``<= min_labels`` responses.
    2. Score each task by the fraction of its responses that are correct.
    3. Sort tasks by score (descending, ties by task index); the first
       ``ceil(d / 2)`` are type 1, the rest type 2.
    4. Per type and worker, ``r = 2 * (fraction correct) - 1`` over the tasks
       of that type the worker answered (0 if none).
    5. Fill every missing entry with a correct answer with probability
       ``(1 + r) / 2`` for the worker's reliability on that task's type.

    Observed entries are never changed.
    """
    raw = np.asarray(bundle.raw, dtype=np.int8)
    truth = check_labels(bundle.truth, d=raw.shape[1], name="truth")
    log = []
    answered = raw != 0
    keep = answered.sum(axis=1) > min_labels
    log.append(f"dropped {int((~keep).sum())} workers with <= {min_labels} responses")
    if keep.sum() < 1:
        raise DataError("no worker has more than min_labels responses")
    Y = raw[keep]
    answered = answered[keep]
    d = Y.shape[1]
    correct = (Y == truth[None, :]) & answered
    n_resp = answered.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(n_resp > 0, correct.sum(axis=0) / np.maximum(n_resp, 1), 0.0)
    order = np.lexsort((np.arange(d), -score))
    types = np.full(d, 2, dtype=np.int64)
    types[order[: (d + 1) // 2]] = 1

    R = np.zeros((2, Y.shape[0]))
    for k in (1, 2):
        mask = types == k
        cnt = answered[:, mask].sum(axis=1)
        if not np.any(cnt):
            raise DataError(f"degenerate split: no responses on type-{k} tasks")
        frac = np.where(cnt > 0, correct[:, mask].sum(axis=1) / np.maximum(cnt, 1), 0.5)
        R[k - 1] = 2.0 * frac - 1.0

    out = Y.copy()
    miss = ~answered
    if miss.any():
        p = (1.0 + R[types - 1].T) / 2.0  # (n, d) reliability of each worker on each task's type
        u = make_rng(seed).random(Y.shape)
        fill = np.where(u < p, truth[None, :], -truth[None, :]).astype(np.int8)
        out[miss] = fill[miss]
    log.append(f"imputed {int(miss.sum())} missing entries")
    return ImputedDataset(out, R[0], R[1], types, truth, np.flatnonzero(keep), log)
