"""Spectral analysis of the task-similarity matrix.

The similarity ``T = Y^T Y / n`` of a two-type crowd has a principal eigenvector
whose entry magnitudes take two values, one per task type. Thresholding the
magnitudes at their mean separates easy from hard tasks; the spread of the
magnitudes together with the top eigen-gap tells whether separating is worth it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._validation import DataError, NumericalError, check_reliability, check_responses, make_rng

__all__ = [
    "EigenConvergenceError",
    "SpectralSummary",
    "SpectralParams",
    "task_similarity",
    "power_iteration",
    "top_two_eigenpairs",
    "cluster_tasks",
    "detection_statistic",
    "should_cluster",
    "similarity_spectrum",
    "estimate_num_types",
    "spectral_params_from_reliabilities",
    "expected_similarity",
    "expected_eigenstructure",
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


# relative threshold below which an eigenvalue of T counts as zero
RANK_TOL = 1e-10


class EigenConvergenceError(NumericalError):
    """Power iteration ran out of iterations.

    Attributes
    ----------
    vector : ndarray
        Last iterate.
    value : float
        Rayleigh quotient of the last iterate.
    residual : float
        ``||T v - value v||``.
    """

    def __init__(self, msg, vector, value, residual, n_iter):
        super().__init__(msg)
        self.vector = vector
        self.value = value
        self.residual = residual
        self.n_iter = n_iter


@dataclass(frozen=True)
class SpectralSummary:
    """Top of the spectrum of ``T`` and the clustering threshold derived from it."""

    lambda1: float
    lambda2: float
    v: np.ndarray
    mu_hat: float
    detect_stat: float
    n_workers: int
    solver: str = "power"
    flags: tuple = ()

    @property
    def n_tasks(self) -> int:
        return self.v.shape[0]

    @property
    def spread(self) -> float:
        """Sum of squared deviations of ``|v_j|`` from their mean."""
        return float(np.sum((np.abs(self.v) - self.mu_hat) ** 2))


@dataclass(frozen=True)
class SpectralParams:
    """Separability parameters of a pair of reliability vectors.

    ``lambda1``/``lambda2`` are the top eigenvalues of the block reliability
    matrix ``R``. Three normalisations of the eigen-gap are kept:
    ``delta_main = 2 (l1 - l2) / (d n)``, ``delta_appendix = 2 (l1 - l2) / d`` and
    ``delta_plugin = (l1 - l2) / n`` (the gap of ``E[T]`` without its diagonal),
    which is what ``lambda1_hat - lambda2_hat`` estimates from data.
    """

    omega: float
    gamma: float
    e_gap_sq: float
    lambda1: float
    lambda2: float
    n_workers: int
    n_tasks: int
    e1: float
    e2: float
    orthogonal: bool = False

    @property
    def delta_main(self) -> float:
        return 2.0 * (self.lambda1 - self.lambda2) / (self.n_tasks * self.n_workers)

    @property
    def delta_appendix(self) -> float:
        return 2.0 * (self.lambda1 - self.lambda2) / self.n_tasks

    @property
    def delta_plugin(self) -> float:
        return (self.lambda1 - self.lambda2) / self.n_workers

    @property
    def delta(self) -> float:
        return self.delta_main

    def delta_variant(self, name: str) -> float:
        try:
            return getattr(self, f"delta_{name}")
        except AttributeError:
            raise ValueError(f"unknown delta variant {name!r}; use main, appendix or plugin") from None


def task_similarity(Y) -> np.ndarray:
    """Return ``Y^T Y / n`` for a dense {-1, +1} matrix."""
    Y = check_responses(Y)
    Yf = Y.astype(np.float64)
    # entries are exact integers before the division, so the result does not depend on BLAS order
    return (Yf.T @ Yf) / Y.shape[0]


def _check_symmetric(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DataError(f"expected a square matrix, got shape {T.shape}")
    if not np.allclose(T, T.T, rtol=0, atol=1e-9):
        raise DataError("matrix is not symmetric within 1e-9")
    return T


def _default_max_iter(d: int) -> int:
    return int(10 * d * math.log(max(d, 2))) + 1000


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def power_iteration(T, tol: float = DEFAULT_TOL, max_iter: int | None = None, v0=None, seed=0):
    """Dominant eigenpair of a symmetric PSD matrix.

    Stops once ``||T v - lam v|| <= tol * max(1, |lam|)``.

    Returns
    -------
    lam : float
    v : ndarray, unit norm
    residual : float
    n_iter : int
    """
    T = np.asarray(T, dtype=float)
    d = T.shape[0]
    if max_iter is None:
        max_iter = _default_max_iter(d)
    v = make_rng(seed).standard_normal(d) if v0 is None else np.array(v0, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DataError("start vector is zero")
    v /= nrm
    lam, residual = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = T @ v
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= tol * max(1.0, abs(lam)):
            return lam, v, residual, it
        wn = np.linalg.norm(w)
        if wn == 0.0:
            # v lies in the null space; T v = 0 is an exact eigenpair
            return 0.0, v, 0.0, it
        v = w / wn
    raise EigenConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        v, lam, residual, max_iter,
    )


def top_two_eigenpairs(T, tol: float = DEFAULT_TOL, max_iter: int | None = None, method: str = "power", seed=0):
    """Largest eigenpair and second eigenvalue of a symmetric PSD matrix.

    ``method="power"`` runs power iteration, deflates once (Hotelling) and runs
    it again. ``"dense"`` calls LAPACK for the two top eigenpairs. ``"auto"``
    tries power iteration and falls back to LAPACK when it does not converge
    (near-degenerate second eigenvalue).

    Returns
    -------
    lambda1 : float
    v1 : ndarray
        Unit vector, sign chosen so that its largest-magnitude entry is positive.
    lambda2 : float
    info : dict
        ``solver`` used, residuals and iteration counts.
    """
    T = _check_symmetric(T)
    d = T.shape[0]
    if d < 2:
        raise DataError("need at least a 2x2 matrix for two eigenpairs")
    if method not in ("power", "dense", "auto"):
        raise ValueError(f"unknown eigensolver {method!r}")
    if method in ("power", "auto"):
        try:
            lam1, v1, res1, it1 = power_iteration(T, tol, max_iter, seed=seed)
            T2 = T - lam1 * np.outer(v1, v1)
            start = make_rng(seed).standard_normal(d)
            start -= (start @ v1) * v1
            lam2, _, res2, it2 = power_iteration(T2, tol, max_iter, v0=start, seed=seed)
            info = {"solver": "power", "residual1": res1, "residual2": res2, "n_iter": it1 + it2}
            return lam1, _sign_normalize(v1), lam2, info
        except EigenConvergenceError as exc:
            if method == "power":
                raise
            logger.debug("power iteration failed (%s); falling back to LAPACK", exc)
    w, V = scipy.linalg.eigh(T, subset_by_index=[d - 2, d - 1])
    v1 = _sign_normalize(V[:, 1])
    res1 = float(np.linalg.norm(T @ v1 - w[1] * v1))
    info = {"solver": "dense", "residual1": res1, "residual2": None, "n_iter": 0}
    return float(w[1]), v1, float(w[0]), info


def detection_statistic(summary: SpectralSummary, n: int, d: int) -> float:
    """``n (lambda1 - lambda2) / log d * sum_j (|v_j| - mu)^2``; larger means more separable."""
    if d < 2:
        raise DataError("detection statistic needs d >= 2")
    return n * (summary.lambda1 - summary.lambda2) / math.log(d) * summary.spread


def should_cluster(summary: SpectralSummary, n: int, d: int, A_prime: float = 1.0) -> bool:
    """True when ``(lambda1 - lambda2) * spread >= A_prime * log(d) / n``."""
    if A_prime <= 0:
        raise ValueError("A_prime must be positive")
    return bool((summary.lambda1 - summary.lambda2) * summary.spread >= A_prime * math.log(d) / n)


def cluster_tasks(Y, tie_seed=0, *, tol: float = DEFAULT_TOL, max_iter: int | None = None, method: str = "auto"):
    """Split tasks into an easy (1) and a hard (2) group.

    Tasks whose principal-eigenvector magnitude exceeds the mean magnitude form
    group 1, the rest group 2; exact ties are settled by a seeded coin.

    Returns
    -------
    k_hat : ndarray of int, values in {1, 2}
    summary : SpectralSummary
    """
    Y = check_responses(Y)
    n, d = Y.shape
    if d < 2:
        raise DataError("clustering needs at least two tasks")
    T = task_similarity(Y)
    lam1, v, lam2, info = top_two_eigenpairs(T, tol=tol, max_iter=max_iter, method=method)
    mag = np.abs(v)
    mu = float(mag.mean())
    coins = make_rng(tie_seed).integers(1, 3, size=d)
    flags = []
    if mag.max() - mag.min() <= 1e-12:
        k_hat = coins.astype(np.int64)
        flags.append("no separation")
    else:
        k_hat = np.where(mag > mu, 1, np.where(mag < mu, 2, coins)).astype(np.int64)
        # canonical labelling: group 1 has the larger mean magnitude
        if np.all(k_hat == 1) or np.all(k_hat == 2):
            pass
        elif mag[k_hat == 1].mean() < mag[k_hat == 2].mean():
            k_hat = 3 - k_hat
    spread = float(np.sum((mag - mu) ** 2))
    stat = n * (lam1 - lam2) / math.log(d) * spread
    summary = SpectralSummary(
        lambda1=lam1, lambda2=lam2, v=v, mu_hat=mu, detect_stat=stat,
        n_workers=n, solver=info["solver"], flags=tuple(flags),
    )
    return k_hat, summary


def similarity_spectrum(Y) -> np.ndarray:
    """All eigenvalues of ``T``, sorted in descending order."""
    return np.linalg.eigvalsh(task_similarity(Y))[::-1]


def estimate_num_types(eigenvalues, d: int | None = None, dominance_factor: float = 10.0) -> int:
    """Count the dominant eigenvalues of a similarity spectrum.

    Leading eigenvalues are counted while each one exceeds ``dominance_factor``
    times the median of the eigenvalues after it. Eigenvalues at or below
    ``RANK_TOL * lambda_1`` are treated as zero and left out of the median.
    At least one type is reported.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size < 3:
        raise DataError("need at least three eigenvalues to estimate the number of types")
    if d is not None and lam.size > d:
        raise DataError(f"got {lam.size} eigenvalues for a {d}-task spectrum")
    if dominance_factor <= 1:
        raise ValueError("dominance_factor must exceed 1")
    if np.any(np.diff(lam) > 1e-12 * max(1.0, abs(lam[0]))):
        raise DataError("eigenvalues must be sorted in descending order")
    # T has rank at most n; when d > n the numerically zero tail would drag the
    # median to 0 and make every eigenvalue look dominant, so it is dropped.
    lam = lam[lam > RANK_TOL * max(lam[0], 0.0)]
    K = 0
    while K < lam.size - 1 and lam[K] > dominance_factor * np.median(lam[K + 1:]):
        K += 1
    return max(K, 1)


def _block_eigen(a, b, c, d1, d2):
    """Eigen-decomposition of the 2x2 reduction of a two-block constant matrix.

    The matrix with blocks ``a`` (d1 x d1), ``c`` (off-diagonal) and ``b`` (d2 x d2)
    acts on block-constant vectors like ``[[a d1, c s], [c s, b d2]]`` with
    ``s = sqrt(d1 d2)`` in the basis of normalised block indicators.
    """
    M = np.array([[a * d1, c * math.sqrt(d1 * d2)], [c * math.sqrt(d1 * d2), b * d2]])
    w, V = np.linalg.eigh(M)
    return w[::-1], V[:, ::-1]


def spectral_params_from_reliabilities(r1, r2, d: int, d1: int | None = None) -> SpectralParams:
    """Separability parameters implied by two reliability vectors.

    ``d1`` tasks are of type 1 (default ``d // 2``, the equal split).
    """
    r1 = check_reliability(r1, interior=False)
    r2 = check_reliability(r2, n=r1.shape[0], interior=False)
    n = r1.shape[0]
    if d1 is None:
        d1 = d // 2
    d2 = d - d1
    if d1 < 1 or d2 < 1:
        raise DataError("both types need at least one task")
    a = float(r1 @ r1)
    b = float(r2 @ r2)
    c = float(r1 @ r2)
    # treat round-off level inner products as exact orthogonality
    if abs(c) <= 1e-12 * math.sqrt(a * b):
        omega = gamma = math.inf
        e_gap_sq = 2.0 / d
        orthogonal = True
    else:
        omega = abs((a - b) / (2.0 * c))
        gamma = omega + math.sqrt(omega * omega + 1.0)
        e_gap_sq = (gamma - 1.0) ** 2 / (gamma * gamma + 1.0) * 2.0 / d
        orthogonal = False
    w, V = _block_eigen(a, b, c, d1, d2)
    x = np.abs(V[:, 0])
    e1, e2 = x[0] / math.sqrt(d1), x[1] / math.sqrt(d2)
    return SpectralParams(
        omega=omega, gamma=gamma, e_gap_sq=e_gap_sq,
        lambda1=float(w[0]), lambda2=float(w[1]), n_workers=n, n_tasks=d,
        e1=float(e1), e2=float(e2), orthogonal=orthogonal,
    )


def expected_similarity(reliabilities, types, truth, *, diagonal: str = "exact") -> np.ndarray:
    """Analytic expectation of ``T`` under the typed model.

    ``diagonal="exact"`` gives ``E[T]`` itself (unit diagonal). ``diagonal="signal"``
    keeps the low-rank part ``(R o y y^T) / n`` including its diagonal, which is
    the matrix the closed-form eigenvalues describe.
    """
    R = np.atleast_2d(np.asarray(reliabilities, dtype=float))
    k = np.asarray(types, dtype=int)
    y = np.asarray(truth, dtype=float)
    n = R.shape[1]
    G = R @ R.T / n
    E = G[np.ix_(k - 1, k - 1)] * np.outer(y, y)
    if diagonal == "exact":
        np.fill_diagonal(E, 1.0)
    elif diagonal != "signal":
        raise ValueError("diagonal must be 'exact' or 'signal'")
    return E


def expected_eigenstructure(r1, r2, d1: int, d2: int, *, diagonal: str = "exact"):
    """Closed-form top eigenvalues and eigenvector magnitudes of ``E[T]``.

    With ``diagonal="signal"`` and ``d1 == d2`` the eigenvalues reduce to
    ``d/4 (|r1|^2 + |r2|^2 +- sqrt((|r1|^2 - |r2|^2)^2 + 4 (r1.r2)^2)) / n``.
    With the exact unit diagonal, ``E[T]`` adds the block-constant diagonal
    ``1 - |r_k|^2 / n``, which leaves block-constant eigenvectors block-constant
    and contributes the extra eigenvalues ``1 - |r_k|^2 / n``.

    Returns
    -------
    dict with ``lambda1``, ``lambda2``, ``e1``, ``e2``.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    n = r1.shape[0]
    a, b, c = r1 @ r1 / n, r2 @ r2 / n, r1 @ r2 / n
    s = math.sqrt(d1 * d2)
    M = np.array([[a * d1, c * s], [c * s, b * d2]])
    extra = []
    if diagonal == "exact":
        M += np.diag([1.0 - a, 1.0 - b])
        if d1 > 1:
            extra.append(1.0 - a)
        if d2 > 1:
            extra.append(1.0 - b)
    elif diagonal != "signal":
        raise ValueError("diagonal must be 'exact' or 'signal'")
    else:
        if d1 > 1 or d2 > 1:
            extra.append(0.0)
    w, V = np.linalg.eigh(M)
    lam1 = float(w[1])
    lam2 = float(max([w[0]] + extra))
    x = np.abs(V[:, 1])
    return {"lambda1": lam1, "lambda2": lam2, "e1": float(x[0] / math.sqrt(d1)), "e2": float(x[1] / math.sqrt(d2))}
