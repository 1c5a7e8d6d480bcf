"""Typed Dawid-Skene model and a seeded response simulator.

Each task carries a hidden type; a worker's reliability ``r = 2 P(correct) - 1``
depends on the type of the task being labelled. Two types is the main case
(easy = 1, hard = 2) but the container allows more, which the JSRT-6 generator
needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import DataError, check_labels, check_reliability, check_types, make_rng

__all__ = [
    "TwoTypeModel",
    "Oracle",
    "sample_truth",
    "sample_responses",
    "simulate",
    "equal_split_types",
]


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TwoTypeModel:
    """Reliabilities per task type plus the hidden type and truth of every task.

    Parameters
    ----------
    reliabilities : array of shape (n_types, n_workers)
        Row ``k - 1`` is the reliability vector for type ``k``.
    types : array of shape (n_tasks,)
        Type of each task, values in ``1..n_types``.
    truth : array of shape (n_tasks,)
        True labels in {-1, +1}.
    seed : int
        Seed of the response stream.
    """

    reliabilities: np.ndarray
    types: np.ndarray
    truth: np.ndarray
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.reliabilities, dtype=float))
        if R.shape[1] < 1:
            raise DataError("model needs at least one worker")
        for row in R:
            check_reliability(row, interior=False)
        d = np.asarray(self.truth).shape[0]
        k = check_types(self.types, d=d, n_types=R.shape[0])
        y = check_labels(self.truth, d=d, name="truth")
        object.__setattr__(self, "reliabilities", _frozen(R, float))
        object.__setattr__(self, "types", _frozen(k, np.int64))
        object.__setattr__(self, "truth", _frozen(y, np.int8))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_vectors(cls, r1, r2, types, truth, seed=0, **meta):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        if r1.shape != r2.shape:
            raise DataError("r1 and r2 must have the same length")
        return cls(np.vstack([r1, r2]), types, truth, seed, meta)

    @property
    def n_workers(self) -> int:
        return self.reliabilities.shape[1]

    @property
    def n_tasks(self) -> int:
        return self.truth.shape[0]

    @property
    def n_types(self) -> int:
        return self.reliabilities.shape[0]

    @property
    def r1(self) -> np.ndarray:
        return self.reliabilities[0]

    @property
    def r2(self) -> np.ndarray:
        return self.reliabilities[1]

    def check_easy_hard(self):
        """Raise unless type 1 has the strictly larger reliability norm."""
        if self.n_types != 2:
            raise DataError("easy/hard validation needs exactly two types")
        if not np.linalg.norm(self.r1) > np.linalg.norm(self.r2):
            raise DataError("easy type must have the larger reliability norm (||r1|| > ||r2||)")
        return self

    def check_margin(self, margin: float):
        for row in self.reliabilities:
            check_reliability(row, interior=True, margin=margin)
        return self

    def task_reliabilities(self) -> np.ndarray:
        """(n_workers, n_tasks) matrix of the reliability that applies to each response."""
        return self.reliabilities[self.types - 1].T

    def oracle(self) -> "Oracle":
        return Oracle(truth=self.truth, types=self.types, reliabilities=self.reliabilities)


@dataclass(frozen=True)
class Oracle:
    """Ground truth kept apart from the responses handed to inference code."""

    truth: np.ndarray
    types: np.ndarray
    reliabilities: np.ndarray


def sample_truth(d: int, positive_prior: float = 0.5, seed=0) -> np.ndarray:
    """Draw ``d`` labels, each +1 independently with probability ``positive_prior``."""
    if d < 1:
        raise DataError("need at least one task")
    if not 0.0 <= positive_prior <= 1.0:
        raise DataError(f"positive_prior must lie in [0, 1], got {positive_prior}")
    u = make_rng(seed).random(d)
    return np.where(u < positive_prior, 1, -1).astype(np.int8)


def equal_split_types(d: int, n_types: int = 2) -> np.ndarray:
    """Contiguous, as-equal-as-possible blocks of task types (earlier types get the extra task)."""
    sizes = np.full(n_types, d // n_types)
    sizes[: d % n_types] += 1
    return np.repeat(np.arange(1, n_types + 1), sizes)


def sample_responses(model: TwoTypeModel) -> np.ndarray:
    """Sample the dense response matrix of ``model``.

    One uniform draw per entry, consumed in row-major (worker-major) order from
    the model's Philox stream; response ``(i, j)`` is correct when the draw is
    below ``(1 + r_{k_j, i}) / 2``.
    """
    rng = make_rng(model.seed)
    p_correct = (1.0 + model.task_reliabilities()) / 2.0
    u = rng.random((model.n_workers, model.n_tasks))
    correct = u < p_correct
    y = model.truth.astype(np.int8)
    return np.where(correct, y[None, :], -y[None, :]).astype(np.int8)


def simulate(model: TwoTypeModel) -> tuple[np.ndarray, Oracle]:
    """Responses and the oracle record, as separate objects."""
    return sample_responses(model), model.oracle()
