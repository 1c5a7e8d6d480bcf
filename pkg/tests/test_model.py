import numpy as np
import pytest

from twotype._validation import DataError
from twotype.model import (
    TwoTypeModel, equal_split_types, sample_responses, sample_truth, simulate,
)


def test_sample_truth_degenerate_priors():
    assert sample_truth(4, 1.0).tolist() == [1, 1, 1, 1]
    assert sample_truth(4, 0.0).tolist() == [-1, -1, -1, -1]


def test_sample_truth_balanced_mean():
    y = sample_truth(100_000, 0.5, seed=3)
    assert abs(((y + 1) / 2).mean() - 0.5) <= 0.01


@pytest.mark.parametrize("prior", [-0.1, 1.5])
def test_sample_truth_rejects_bad_prior(prior):
    with pytest.raises(DataError):
        sample_truth(3, prior)


def test_sample_truth_rejects_zero_tasks():
    with pytest.raises(DataError):
        sample_truth(0)


def test_equal_split_types():
    assert equal_split_types(5).tolist() == [1, 1, 1, 2, 2]
    assert np.bincount(equal_split_types(200))[1:].tolist() == [100, 100]


def _model(r1, r2, d, y=None, seed=0):
    y = sample_truth(d, seed=seed) if y is None else y
    return TwoTypeModel(np.vstack([r1, r2]), equal_split_types(d), y, seed=seed)


def test_perfect_and_adversarial_workers():
    y = sample_truth(30, seed=1)
    Y = sample_responses(_model(np.ones(4), np.ones(4), 30, y))
    assert np.all(Y == y[None, :])
    Y = sample_responses(_model(-np.ones(4), -np.ones(4), 30, y))
    assert np.all(Y == -y[None, :])


def test_single_worker_bernoulli_mean():
    d = 100_000
    m = TwoTypeModel(np.array([[0.5]]), np.ones(d, dtype=int), np.ones(d, dtype=int), seed=4)
    Y = sample_responses(m)
    assert abs((Y == 1).mean() - 0.75) <= 0.01


def test_reproducible_and_seed_sensitive():
    r = np.full(5, 0.3)
    a = sample_responses(_model(r, r, 40, seed=2))
    b = sample_responses(_model(r, r, 40, seed=2))
    c = sample_responses(_model(r, r, 40, seed=3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_marginal_correctness_per_entry():
    # 10^4 resamples of a 3 x 4 model; every entry within 4 binomial sd of (1 + r) / 2
    r1 = np.array([0.8, 0.2, -0.4])
    r2 = np.array([0.1, 0.6, 0.0])
    y = np.array([1, -1, 1, -1])
    trials = 10_000
    hits = np.zeros((3, 4))
    R = np.vstack([r1, r2])
    types = np.array([1, 1, 2, 2])
    for s in range(trials):
        m = TwoTypeModel(R, types, y, seed=s)
        hits += sample_responses(m) == y[None, :]
    p = (1 + R[types - 1].T) / 2
    sd = np.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(hits / trials - p) <= 4 * sd + 1e-12)


def test_worker_errors_uncorrelated():
    d = 20_000
    r = np.array([0.4, 0.4])
    m = _model(r, r, d, seed=6)
    Y = sample_responses(m)
    err = (Y != m.truth[None, :]).astype(float)
    corr = np.corrcoef(err)[0, 1]
    assert abs(corr) < 4 / np.sqrt(d)


def test_model_is_immutable_and_validated():
    m = _model(np.full(3, 0.5), np.full(3, 0.1), 6)
    with pytest.raises(ValueError):
        m.reliabilities[0, 0] = 0.0
    with pytest.raises(DataError):
        TwoTypeModel(np.vstack([np.full(3, 0.5), np.full(3, 1.5)]), equal_split_types(6), sample_truth(6))
    with pytest.raises(DataError):
        TwoTypeModel(np.vstack([np.full(3, 0.5), np.full(3, 0.1)]), np.array([1, 2, 3, 1, 2, 1]), sample_truth(6))


def test_simulate_separates_oracle():
    m = _model(np.full(3, 0.5), np.full(3, 0.1), 6, seed=9)
    Y, oracle = simulate(m)
    assert np.array_equal(Y, sample_responses(m))
    assert np.array_equal(oracle.truth, m.truth)
    assert np.array_equal(oracle.types, m.types)
