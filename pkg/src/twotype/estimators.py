"""scikit-learn style wrappers around the functional API.

Following scikit-learn's convention that rows are samples, every estimator
takes ``X`` of shape ``(n_tasks, n_workers)``, the transpose of the
worker-by-task matrices used elsewhere in the package. Entries must be -1 or
+1. Fitting is unsupervised; ``y`` is accepted and ignored.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from . import aggregators
from ._validation import DataError, check_responses
from .pipeline import PipelineConfig, run_pipeline
from .spectral import cluster_tasks, should_cluster

__all__ = [
    "TaskTypeClustering",
    "MajorityVote",
    "NitzanParoush",
    "EigenvectorRatio",
    "TriangularEstimation",
    "TwoStageAggregator",
]


def _check_X(X, min_workers: int = 1) -> np.ndarray:
    """Validate a task-by-worker matrix and return the worker-by-task view."""
    X = np.asarray(X)
    if X.ndim != 2:
        raise DataError(f"X must be 2-D (n_tasks, n_workers), got shape {X.shape}")
    return check_responses(X.T, min_workers=min_workers)


class TaskTypeClustering(ClusterMixin, BaseEstimator):
    """Split tasks into an easy and a hard type from the principal eigenvector of ``T``.

    Parameters
    ----------
    tie_seed : int, default=0
        Seed for tasks whose eigenvector magnitude equals the threshold exactly.
    eigensolver : {"auto", "power", "dense"}, default="auto"
    A_prime : float, default=1.0
        Constant of the detection criterion reported in ``should_cluster_``.

    Attributes
    ----------
    labels_ : ndarray of shape (n_tasks,)
        1 for the cluster with larger eigenvector entries (easy), 2 otherwise.
    summary_ : SpectralSummary
    detection_statistic_ : float
    should_cluster_ : bool
    """

    def __init__(self, tie_seed=0, eigensolver="auto", A_prime=1.0):
        self.tie_seed = tie_seed
        self.eigensolver = eigensolver
        self.A_prime = A_prime

    def fit(self, X, y=None):
        Y = _check_X(X)
        n, d = Y.shape
        if d < 2:
            raise DataError("clustering needs at least two tasks")
        self.labels_, self.summary_ = cluster_tasks(Y, tie_seed=self.tie_seed, method=self.eigensolver)
        self.detection_statistic_ = self.summary_.detect_stat
        self.should_cluster_ = should_cluster(self.summary_, n, d, self.A_prime)
        return self


class _VoteBase(ClassifierMixin, BaseEstimator):
    """Shared ``predict`` for aggregators that end in a weighted vote."""

    def _vote(self, X):
        check_is_fitted(self, "weights_")
        Y = _check_X(X)
        if Y.shape[0] != self.weights_.shape[0]:
            raise DataError(f"X has {Y.shape[0]} workers, estimator was fitted with {self.weights_.shape[0]}")
        labels, _ = aggregators.weighted_vote(Y, self.weights_, self.tie_seed)
        return labels

    def predict(self, X):
        """Weighted vote on ``X`` with the weights learned in ``fit``."""
        return self._vote(X)

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


class MajorityVote(_VoteBase):
    """Unweighted vote with seeded tie-breaking."""

    def __init__(self, tie_seed=0):
        self.tie_seed = tie_seed

    def fit(self, X, y=None):
        Y = _check_X(X)
        res = aggregators.majority_vote(Y, self.tie_seed)
        self.labels_ = res.labels
        self.weights_ = res.weights
        self.classes_ = np.array([-1, 1])
        return self


class NitzanParoush(_VoteBase):
    """Log-odds weighted vote with known reliabilities.

    Parameters
    ----------
    reliabilities : array-like of shape (n_workers,)
        ``r_i = 2 P(correct) - 1`` for every worker.
    eps_clip : float, default=1e-6
    tie_seed : int, default=0
    """

    def __init__(self, reliabilities=None, eps_clip=aggregators.EPS_CLIP, tie_seed=0):
        self.reliabilities = reliabilities
        self.eps_clip = eps_clip
        self.tie_seed = tie_seed

    def fit(self, X, y=None):
        if self.reliabilities is None:
            raise ValueError("NitzanParoush needs reliabilities")
        Y = _check_X(X)
        res = aggregators.nitzan_paroush(Y, self.reliabilities, self.tie_seed, self.eps_clip)
        self.labels_ = res.labels
        self.weights_ = res.weights
        self.classes_ = np.array([-1, 1])
        return self


class EigenvectorRatio(ClassifierMixin, BaseEstimator):
    """Labels from the signs of the principal eigenvector of ``T`` (transductive)."""

    def __init__(self, tie_seed=0, eigensolver="auto"):
        self.tie_seed = tie_seed
        self.eigensolver = eigensolver

    def fit(self, X, y=None):
        Y = _check_X(X)
        res = aggregators.er_labels(Y, self.tie_seed, self.eigensolver)
        self.labels_ = res.labels
        self.classes_ = np.array([-1, 1])
        return self

    def predict(self, X):
        """Refit on ``X``; the eigenvector method has no per-worker state to reuse."""
        return self.fit(X).labels_

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


class TriangularEstimation(_VoteBase):
    """Reliabilities from worker covariances, then a log-odds weighted vote.

    Parameters
    ----------
    eps_clip : float, default=1e-6
    sign_rule : {"mean", "reference"}, default="mean"
        See :func:`~twotype.aggregators.te_estimate`.
    tie_seed : int, default=0

    Attributes
    ----------
    reliabilities_ : ndarray of shape (n_workers,)
    weights_ : ndarray of shape (n_workers,)
    labels_ : ndarray of shape (n_tasks,)
    """

    def __init__(self, eps_clip=aggregators.EPS_CLIP, sign_rule="mean", tie_seed=0):
        self.eps_clip = eps_clip
        self.sign_rule = sign_rule
        self.tie_seed = tie_seed

    def fit(self, X, y=None):
        Y = _check_X(X, min_workers=3)
        res = aggregators.te_estimate(Y, self.tie_seed, self.eps_clip, self.sign_rule)
        self.labels_ = res.labels
        self.reliabilities_ = res.reliabilities
        self.weights_ = res.weights if res.weights is not None else np.ones(Y.shape[0])
        self.diagnostics_ = res.diagnostics
        self.classes_ = np.array([-1, 1])
        return self


class TwoStageAggregator(ClassifierMixin, BaseEstimator):
    """Cluster tasks by type, then aggregate each cluster separately.

    Parameters mirror :class:`~twotype.pipeline.PipelineConfig`. ``predict``
    reruns the whole procedure on the new matrix, since cluster membership of
    unseen tasks is itself estimated from their responses.

    Attributes
    ----------
    labels_ : ndarray of shape (n_tasks,)
    types_ : ndarray of shape (n_tasks,) or None
        Estimated task types, ``None`` when the detection check declined to cluster.
    clustered_ : bool
    diagnostics_ : dict
    """

    def __init__(self, aggregator="TE", split_mode="reuse_all", n1=None, detection="always",
                 A_prime=1.0, split_seed=0, tie_seed=0, eigensolver="auto"):
        self.aggregator = aggregator
        self.split_mode = split_mode
        self.n1 = n1
        self.detection = detection
        self.A_prime = A_prime
        self.split_seed = split_seed
        self.tie_seed = tie_seed
        self.eigensolver = eigensolver

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            aggregator=self.aggregator, split_mode=self.split_mode, n1=self.n1,
            detection=self.detection, A_prime=self.A_prime, split_seed=self.split_seed,
            tie_seed=self.tie_seed, eigensolver=self.eigensolver,
        )

    def fit(self, X, y=None):
        Y = _check_X(X, min_workers=3)
        res = run_pipeline(Y, self._config())
        self.labels_ = res.labels
        self.types_ = res.types
        self.clustered_ = res.clustered
        self.diagnostics_ = res.diagnostics
        self.classes_ = np.array([-1, 1])
        return self

    def predict(self, X):
        return self.fit(X).labels_

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
