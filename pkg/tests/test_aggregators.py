import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twotype._validation import DataError
from twotype.aggregators import (
    EPS_CLIP, er_labels, log_odds_weights, majority_vote, nitzan_paroush, te_estimate,
    weighted_vote, worker_covariance,
)
from twotype.theory import exact_wmv_error

from conftest import two_type_data


def random_Y(n, d, seed):
    return np.where(np.random.default_rng(seed).random((n, d)) < 0.5, -1, 1).astype(np.int8)


# -- majority vote -------------------------------------------------------------

def test_mv_column():
    assert majority_vote(np.array([[1], [1], [-1]])).labels.tolist() == [1]


def test_mv_tie_is_seeded():
    Y = np.array([[1] * 50, [-1] * 50])
    a = majority_vote(Y, tie_seed=3).labels
    b = majority_vote(Y, tie_seed=3).labels
    c = majority_vote(Y, tie_seed=4).labels
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert set(np.unique(a)) == {-1, 1}
    assert majority_vote(Y, 3).diagnostics["ties"] == 50


def test_mv_error_matches_binomial_oracle():
    d = 10_000
    r = np.full(5, 0.6)
    Y, m = two_type_data(r, r, d=d, seed=2)
    err = np.mean(majority_vote(Y).labels != m.truth)
    p = 0.05792
    assert exact_wmv_error(np.ones(5), r) == pytest.approx(p, abs=1e-6)
    assert abs(err - p) <= 3 * math.sqrt(p * (1 - p) / d)


# -- Nitzan-Paroush ------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 30), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_np_uniform_equals_mv(n, d, r, seed):
    Y = random_Y(n, d, seed)
    assert np.array_equal(nitzan_paroush(Y, np.full(n, r), tie_seed=seed).labels,
                          majority_vote(Y, tie_seed=seed).labels)


def test_np_dominant_weight():
    res = nitzan_paroush(np.array([[1], [-1], [-1]]), [0.99, 0.1, 0.1])
    assert res.labels.tolist() == [1]
    assert res.weights[0] == pytest.approx(math.log(199), rel=1e-9)


def test_np_zero_reliabilities_all_ties():
    Y = random_Y(4, 20, 1)
    res = nitzan_paroush(Y, np.zeros(4), tie_seed=5)
    assert res.diagnostics["ties"] == 20
    assert np.array_equal(res.labels, majority_vote(np.vstack([Y[:1], -Y[:1]]), tie_seed=5).labels)


def test_np_clips_extremes():
    res = nitzan_paroush(np.array([[1], [1]]), [1.0, -1.0])
    assert res.diagnostics["clipped"] == 2
    assert np.all(np.abs(res.reliabilities) <= 1 - EPS_CLIP)
    assert np.all(np.isfinite(res.weights))
    assert np.abs(log_odds_weights([1.0])[0]).max() == pytest.approx(math.log((2 - EPS_CLIP) / EPS_CLIP))


def test_weighted_vote_global_negation():
    Y = random_Y(7, 41, 3)  # odd number of unit weights: no ties
    w = np.ones(7)
    a, _ = weighted_vote(Y, w)
    b, _ = weighted_vote(-Y, w)
    assert np.array_equal(a, -b)


def test_worker_permutation_invariance():
    Y, _ = two_type_data(np.linspace(0.2, 0.9, 9), np.linspace(0.2, 0.9, 9), d=60, seed=4)
    perm = np.random.default_rng(0).permutation(9)
    r = np.linspace(0.2, 0.9, 9)
    assert np.array_equal(nitzan_paroush(Y, r).labels, nitzan_paroush(Y[perm], r[perm]).labels)
    assert np.array_equal(majority_vote(Y).labels, majority_vote(Y[perm]).labels)
    assert np.array_equal(te_estimate(Y).labels, te_estimate(Y[perm]).labels)


# -- eigenvector ratio ---------------------------------------------------------

def test_er_single_perfect_worker():
    y = np.array([1, -1, -1, 1, 1])
    assert np.array_equal(er_labels(y[None, :]).labels, y)


def _er_vs_mv(lo, hi):
    strictly_better = not_worse = 0
    for s in range(50):
        r = np.random.default_rng(s).uniform(lo, hi, 30)
        Y, m = two_type_data(r, r, d=500, seed=1000 + s)
        e_er = np.mean(er_labels(Y).labels != m.truth)
        e_mv = np.mean(majority_vote(Y).labels != m.truth)
        strictly_better += e_er < e_mv
        not_worse += e_er <= e_mv
    return strictly_better, not_worse


@pytest.mark.xfail(strict=True, reason=(
    "with r ~ U(0.3, 0.9) and 30 workers both methods are almost always error-free "
    "(mean MV error 8e-5), so ER can be strictly better in only a handful of trials"))
def test_er_beats_mv_on_single_type():
    strictly_better, _ = _er_vs_mv(0.3, 0.9)
    assert strictly_better >= 40


def test_er_never_worse_than_mv_on_single_type():
    _, not_worse = _er_vs_mv(0.3, 0.9)
    assert not_worse >= 40


def test_er_beats_mv_on_noisy_single_type():
    strictly_better, _ = _er_vs_mv(0.05, 0.5)
    assert strictly_better >= 40


def test_er_sign_follows_majority():
    Y, m = two_type_data(np.full(9, 0.7), np.full(9, 0.7), d=80, seed=6)
    lab = er_labels(Y).labels
    assert np.mean(lab == majority_vote(Y).labels) > 0.5
    assert np.array_equal(er_labels(-Y).labels, -lab)


def test_er_hard_tasks_worse_than_clustered():
    from twotype.pipeline import PipelineConfig, run_pipeline
    gaps = []
    for s in range(10):
        g = np.random.default_rng(s)
        r1 = g.uniform(0.6, 0.9, 40)
        r2 = g.uniform(0.1, 0.4, 40) * g.choice([-1, 1], 40)
        r2[:4] = 0.8  # keep the hard type identifiable
        Y, m = two_type_data(r1, r2, d=200, seed=s)
        hard = m.types == 2
        e_er = np.mean(er_labels(Y).labels[hard] != m.truth[hard])
        e_cl = np.mean(run_pipeline(Y, PipelineConfig(aggregator="TE")).labels[hard] != m.truth[hard])
        gaps.append(e_er - e_cl)
    assert np.mean(gaps) > 0


# -- triangular estimation -----------------------------------------------------

def test_covariance_definition():
    Y = random_Y(4, 30, 2)
    C = worker_covariance(Y)
    assert C[0, 1] == pytest.approx(np.mean(Y[0] * Y[1]))
    assert np.allclose(C, C.T)


def test_te_noiseless():
    y = np.array([1, -1, 1, 1, -1, -1])
    Y = np.tile(y, (5, 1))
    res = te_estimate(Y)
    assert np.all(res.reliabilities == pytest.approx(1 - EPS_CLIP))
    assert np.array_equal(res.labels, y)


def test_te_population_identity(monkeypatch):
    # replace the sample covariance by the population one, C_ab = r_a r_b
    import twotype.aggregators as agg
    r = np.array([0.8, 0.6, 0.4])
    C = np.outer(r, r)
    monkeypatch.setattr(agg, "worker_covariance", lambda Y: C.copy())
    res = agg.te_estimate(random_Y(3, 10, 0))
    assert res.reliabilities[0] == pytest.approx(math.sqrt(0.48 * 0.32 / 0.24), abs=1e-12)
    assert np.allclose(np.abs(res.reliabilities), r, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 10_000))
def test_te_population_identity_random(n, seed):
    import twotype.aggregators as agg
    r = np.random.default_rng(seed).uniform(0.1, 0.95, n)
    r = r + np.arange(n) * 1e-3  # distinct magnitudes
    r = np.clip(r, 0.1, 0.99)
    C = np.outer(r, r)
    orig = agg.worker_covariance
    agg.worker_covariance = lambda Y: C.copy()
    try:
        res = agg.te_estimate(random_Y(n, 5, seed))
    finally:
        agg.worker_covariance = orig
    assert np.allclose(res.reliabilities, r, atol=1e-12)


def test_te_consistency():
    good = 0
    for s in range(50):
        r = np.random.default_rng(s).uniform(0.2, 0.9, 20)
        Y, _ = two_type_data(r, r, d=2000, seed=500 + s)
        res = te_estimate(Y)
        good += np.max(np.abs(res.reliabilities - r)) <= 0.1
    assert good >= 45


def test_te_recovers_negative_workers():
    r = np.array([0.9, 0.8, 0.7, 0.6, -0.5, -0.4, 0.3])
    Y, _ = two_type_data(r, r, d=5000, seed=3)
    res = te_estimate(Y)
    assert np.array_equal(np.sign(res.reliabilities), np.sign(r))


def test_te_guard_and_fallback():
    # three workers with zero pairwise covariance on every pair
    Y = np.array([[1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]])
    res = te_estimate(Y, tie_seed=2)
    assert res.diagnostics["guarded"] == 3
    assert res.diagnostics["fallback"] == "majority_vote"
    assert np.array_equal(res.labels, majority_vote(Y, 2).labels)


def test_te_needs_three_workers():
    with pytest.raises(DataError):
        te_estimate(random_Y(2, 5, 0))


def test_te_pair_ties_lexicographic():
    y = np.array([1, -1, 1, -1])
    Y = np.tile(y, (4, 1))
    pairs = te_estimate(Y).diagnostics["pairs"]
    assert pairs.tolist() == [[1, 2], [0, 2], [0, 1], [0, 1]]


def test_te_sign_rules():
    # the strongest worker is adversarial; the crowd average is positive
    r = np.array([-0.95, 0.6, 0.5, 0.55, 0.45, 0.5])
    Y, m = two_type_data(r, r, d=4000, seed=8)
    lit = te_estimate(Y, sign_rule="reference")
    assert lit.diagnostics["reference_worker"] == 0
    assert lit.reliabilities[0] > 0  # the literal rule trusts the reference worker
    assert np.mean(lit.labels != m.truth) > 0.9
    res = te_estimate(Y)
    assert res.diagnostics["global_flip"]
    assert np.array_equal(np.sign(res.reliabilities), np.sign(r))
    assert np.mean(res.labels != m.truth) < 0.1
    with pytest.raises(ValueError):
        te_estimate(Y, sign_rule="vote")
