"""Error exponents and bounds for weighted majority votes and spectral clustering.

``phi(w, r)`` is the Chernoff exponent of a weighted vote with weights ``w`` on
a crowd with reliabilities ``r``::

    phi(w, r) = -min_{t > 0} mean_i log(0.5 e^{t w_i} (1 - r_i) + 0.5 e^{-t w_i} (1 + r_i))

and ``Phi(r) = -mean_i log(1 - r_i^2) / 2`` is its maximum over ``w``, reached by
the log-odds weights at ``t = 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DataError, NumericalError, check_reliability

__all__ = [
    "ExponentReport",
    "golden_section",
    "ml_weights",
    "phi",
    "Phi",
    "phi_mismatch",
    "wmv_upper_bound",
    "clustering_error_bound",
    "worker_requirement",
    "exact_wmv_error",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
T_BRACKET = (1e-6, 1e3)


@dataclass(frozen=True)
class ExponentReport:
    phi_w: float
    t_star: float
    Phi: float
    bound_value: float


def golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 500):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; returns ``(x_min, f_min, n_iter)``.

    Stops when the bracket is narrower than ``tol * max(1, |x|)``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    e = a + INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    it = 0
    while b - a > tol * max(1.0, abs(c)) and it < max_iter:
        it += 1
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + INV_PHI * (b - a)
            fe = f(e)
    if fc <= fe:
        return c, fc, it
    return e, fe, it


def ml_weights(r) -> np.ndarray:
    """Log-odds weights ``log((1 + r) / (1 - r))``."""
    r = np.asarray(r, dtype=float)
    return np.log1p(r) - np.log1p(-r)


def _log_mgf(t: float, w: np.ndarray, log_wrong: np.ndarray, log_right: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(log_wrong + t * w, log_right - t * w)))


def phi(w, r, tol: float = 1e-10) -> ExponentReport:
    """Chernoff exponent of the weighted vote ``sign(sum_i w_i Y_i)``.

    The inner objective is convex in ``t``; golden-section search runs on
    ``log t`` over ``[1e-6, 1e3]``. When the objective does not decrease from
    ``t = 0`` (``sum_i w_i r_i <= 0``) the infimum sits at ``t -> 0`` and the
    exponent is 0.

    Raises
    ------
    NumericalError
        If the objective is still decreasing at the upper end of the bracket.
    """
    r = check_reliability(r, interior=True)
    w = np.asarray(w, dtype=float)
    if w.shape != r.shape:
        raise DataError("w and r must have the same length")
    if not np.all(np.isfinite(w)):
        raise DataError("weights must be finite")
    n = r.shape[0]
    log_wrong = np.log((1.0 - r) / 2.0)
    log_right = np.log((1.0 + r) / 2.0)
    Phi_r = Phi(r)
    slope0 = -float(np.dot(w, r)) / n
    if slope0 >= 0.0 or not np.any(w):
        return ExponentReport(0.0, 0.0, Phi_r, 1.0)

    def g(s):
        return _log_mgf(math.exp(s), w, log_wrong, log_right)

    lo, hi = math.log(T_BRACKET[0]), math.log(T_BRACKET[1])
    # derivative of the objective at the top of the bracket, in t
    t_hi = T_BRACKET[1]
    a = log_wrong + t_hi * w
    b = log_right - t_hi * w
    m = np.maximum(a, b)
    pa, pb = np.exp(a - m), np.exp(b - m)
    slope_hi = float(np.mean(w * (pa - pb) / (pa + pb)))
    if slope_hi < 0.0:
        raise NumericalError(
            f"phi objective still decreasing at t={t_hi:g} (slope {slope_hi:.3e}); minimum outside bracket"
        )
    s_star, g_min, _ = golden_section(g, lo, hi, tol=tol)
    t_star = math.exp(s_star)
    if g_min > 0.0:
        # minimum pinned at the lower edge of the bracket; the infimum over t > 0 is 0
        return ExponentReport(0.0, t_star, Phi_r, 1.0)
    value = -g_min
    return ExponentReport(value, t_star, Phi_r, math.exp(-n * value))


def Phi(r) -> float:
    """Optimal per-worker exponent ``-sum_i log(1 - r_i^2) / (2 n)``."""
    r = check_reliability(r, interior=True)
    return float(-np.mean(np.log1p(-r * r)) / 2.0)


def phi_mismatch(r1, r2, tol: float = 1e-10, direction: str = "max") -> float:
    """Exponent of a Nitzan-Paroush vote using the other type's reliabilities.

    ``direction="12"`` evaluates log-odds weights of ``r1`` on a ``r2`` crowd,
    ``"21"`` the reverse, and ``"max"`` (default) the larger of the two.
    """
    r1 = check_reliability(r1, interior=True)
    r2 = check_reliability(r2, n=r1.shape[0], interior=True)
    v12 = phi(ml_weights(r1), r2, tol).phi_w
    v21 = phi(ml_weights(r2), r1, tol).phi_w
    if direction == "12":
        return v12
    if direction == "21":
        return v21
    if direction != "max":
        raise ValueError("direction must be '12', '21' or 'max'")
    return max(v12, v21)


def wmv_upper_bound(w, r1, r2, n: int | None = None, tol: float = 1e-10) -> float:
    """``exp(-n min_k phi(w, r_k))``, an upper bound on the error of a universal weighted vote."""
    w = np.asarray(w, dtype=float)
    if n is None:
        n = w.shape[0]
    worst = min(phi(w, r1, tol).phi_w, phi(w, r2, tol).phi_w)
    return math.exp(-n * worst)


def _bound_ratio(gamma: float) -> float:
    if math.isinf(gamma):
        return 1.0
    return (gamma * gamma + 1.0) / (gamma - 1.0) ** 2


def clustering_error_bound(gamma: float, delta: float, n: int, d: int, A: float = 2.0**9) -> float:
    """``min(1, A (g^2 + 1) / (g - 1)^2 * log d / (n delta))``; 1 when ``gamma <= 1`` (inseparable)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if A <= 0:
        raise ValueError("A must be positive")
    if gamma <= 1.0 or delta <= 0.0:
        return 1.0
    return min(1.0, A * _bound_ratio(gamma) * math.log(d) / (n * delta))


def worker_requirement(gamma: float, delta: float, d: int, C: float = 1.0) -> float:
    """Workers needed for clustering, ``ceil(C (g^2 + 1) / (g - 1)^2 * log d / delta)``.

    Returns ``math.inf`` when ``gamma <= 1`` or ``delta <= 0``.
    """
    if gamma <= 1.0 or delta <= 0.0:
        return math.inf
    return math.ceil(C * _bound_ratio(gamma) * math.log(d) / delta)


def _half_sums(w: np.ndarray, r: np.ndarray):
    m = w.shape[0]
    bits = ((np.arange(2**m)[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    G = np.where(bits, -1.0, 1.0)  # bit set: worker wrong
    sums = G @ w
    logp = np.where(bits, np.log((1.0 - r) / 2.0), np.log((1.0 + r) / 2.0)).sum(axis=1)
    return sums, np.exp(logp)


def exact_wmv_error(w, r, max_workers: int = 20) -> float:
    """Exact error of ``sign(sum_i w_i G_i)`` by enumerating all ``2^n`` correctness patterns.

    ``G_i = +1`` with probability ``(1 + r_i) / 2``. A zero score counts as half an
    error, the expected cost of a fair tie-breaking coin.
    """
    r = check_reliability(r, interior=False)
    w = np.asarray(w, dtype=float)
    if w.shape != r.shape:
        raise DataError("w and r must have the same length")
    n = r.shape[0]
    if n > max_workers:
        raise DataError(f"exact enumeration limited to {max_workers} workers, got {n}")
    h = n // 2
    sa, pa = _half_sums(w[:h], r[:h])
    sb, pb = _half_sums(w[h:], r[h:])
    total = sa[:, None] + sb[None, :]
    prob = pa[:, None] * pb[None, :]
    eps = 1e-12 * max(np.abs(w).sum(), 1e-300)
    err = prob[total < -eps].sum() + 0.5 * prob[np.abs(total) <= eps].sum()
    return float(err)
