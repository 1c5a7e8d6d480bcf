import numpy as np
import pytest

from twotype._validation import DataError
from twotype.aggregators import te_estimate
from twotype.pipeline import (
    AGGREGATORS, PipelineConfig, aggregate, best_permutation_error, evaluate, run_pipeline,
)

from conftest import two_type_data


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(aggregator="EM")
    with pytest.raises(ValueError):
        PipelineConfig(split_mode="half")
    with pytest.raises(ValueError):
        PipelineConfig(detection="maybe")
    with pytest.raises(ValueError):
        PipelineConfig(A_prime=0)
    with pytest.raises(ValueError):
        PipelineConfig(aggregator="NP-oracle")
    cfg = PipelineConfig(split_mode="disjoint", n1=2)
    with pytest.raises(ValueError):
        cfg.resolve_n1(10)
    assert PipelineConfig(split_mode="disjoint").resolve_n1(10) == 5
    with pytest.raises(ValueError):
        PipelineConfig(split_mode="disjoint", n1=8).resolve_n1(10)


def test_check_mode_short_circuits_single_type():
    r = np.full(30, 0.5)
    Y, _ = two_type_data(r, r, d=100, seed=2)
    # a large constant so that single-type data is declined (see test_spectral)
    res = run_pipeline(Y, PipelineConfig(aggregator="TE", detection="check", A_prime=1e4, tie_seed=3))
    assert not res.clustered
    assert res.diagnostics["reason"] == "unclustered"
    assert res.types is None
    assert np.array_equal(res.labels, aggregate(Y, "TE", 3).labels)


def _clustered_vs_pooled(negative_fraction, trials=40):
    clustered, pooled = [], []
    for s in range(trials):
        g = np.random.default_rng(s)
        r1 = g.uniform(0.5, 0.9, 50)
        r2 = g.uniform(0.1, 0.5, 50) * np.where(g.random(50) < negative_fraction, -1, 1)
        Y, m = two_type_data(r1, r2, d=200, seed=100 + s)
        clustered.append(np.mean(run_pipeline(Y, PipelineConfig("TE", tie_seed=s)).labels != m.truth))
        pooled.append(np.mean(aggregate(Y, "TE", s).labels != m.truth))
    return np.mean(clustered), np.mean(pooled)


@pytest.mark.xfail(strict=True, reason=(
    "with fair-coin signs the hard type's mean reliability is ~0 and its labels are only "
    "identified up to a global flip; about half the trials lose the whole hard cluster"))
def test_clustered_beats_unclustered_on_scrambled_hard_type():
    clustered, pooled = _clustered_vs_pooled(0.5)
    assert clustered < pooled


def test_clustered_beats_unclustered_on_identifiable_hard_type():
    clustered, pooled = _clustered_vs_pooled(0.2)
    assert clustered < pooled


@pytest.mark.parametrize("agg", [a for a in AGGREGATORS if a != "NP-oracle"])
@pytest.mark.parametrize("split", ["reuse_all", "disjoint"])
def test_perfect_workers_zero_error(agg, split):
    Y, m = two_type_data(np.ones(10), np.ones(10), d=30, seed=1)
    res = run_pipeline(Y, PipelineConfig(agg, split_mode=split))
    assert np.array_equal(res.labels, m.truth)


def test_perfect_workers_np_oracle():
    Y, m = two_type_data(np.ones(10), np.ones(10), d=30, seed=1)
    ones = np.full(10, 0.999)
    res = run_pipeline(Y, PipelineConfig("NP-oracle", oracle_reliabilities=(ones, ones)))
    assert np.array_equal(res.labels, m.truth)


def test_disjoint_split_uses_separate_workers(monkeypatch):
    import twotype.pipeline as pl
    seen = {}
    orig_cluster, orig_aggregate = pl.cluster_tasks, pl.aggregate

    def spy_cluster(Y, *a, **k):
        seen["cluster_rows"] = Y.shape[0]
        return orig_cluster(Y, *a, **k)

    def spy_aggregate(Y, *a, **k):
        seen.setdefault("aggregate_rows", []).append(Y.shape[0])
        return orig_aggregate(Y, *a, **k)

    monkeypatch.setattr(pl, "cluster_tasks", spy_cluster)
    monkeypatch.setattr(pl, "aggregate", spy_aggregate)
    Y, _ = two_type_data(np.full(20, 0.8), np.full(20, 0.2), d=50, seed=5)
    res = pl.run_pipeline(Y, PipelineConfig("TE", split_mode="disjoint", n1=8, split_seed=4))
    N1, N2 = res.diagnostics["cluster_workers"], res.diagnostics["aggregate_workers"]
    assert len(N1) == 8 and len(N2) == 12
    assert not set(N1) & set(N2)
    assert seen["cluster_rows"] == 8
    assert seen["aggregate_rows"] == [12, 12]


def test_task_order_equivariance():
    Y, _ = two_type_data(np.full(20, 0.8), np.full(20, 0.3), d=60, seed=7)
    perm = np.random.default_rng(1).permutation(60)
    a = run_pipeline(Y, PipelineConfig("MV"))
    b = run_pipeline(Y[:, perm], PipelineConfig("MV"))
    # MV has no cross-task coupling, so labels permute exactly (tie coins aside: n is even)
    ties = np.sum(Y, axis=0) == 0
    keep = ~ties[perm]
    assert np.array_equal(b.labels[keep], a.labels[perm][keep])
    assert np.array_equal(b.types, a.types[perm])


def test_perfect_clustering_matches_oracle_split():
    diffs = []
    for s in range(10):
        g = np.random.default_rng(s)
        r1 = g.uniform(0.7, 0.95, 40)
        r2 = g.uniform(0.0, 0.3, 40) * g.choice([-1, 1], 40)
        r2[:3] = 0.6
        Y, m = two_type_data(r1, r2, d=200, seed=50 + s)
        res = run_pipeline(Y, PipelineConfig("TE", tie_seed=s))
        if best_permutation_error(res.types, m.types) > 0:
            continue
        hard = m.types == 2
        oracle = te_estimate(Y[:, hard], (s, 2)).labels
        diffs.append(np.mean(res.labels[hard] != m.truth[hard]) - np.mean(oracle != m.truth[hard]))
    assert len(diffs) >= 5
    assert np.allclose(diffs, 0.0)


def test_tiny_and_empty_clusters(monkeypatch):
    import twotype.pipeline as pl
    Y, m = two_type_data(np.full(10, 0.8), np.full(10, 0.8), d=6, seed=2)
    summary = pl.cluster_tasks(Y)[1]
    monkeypatch.setattr(pl, "cluster_tasks", lambda *a, **k: (np.array([1, 1, 1, 1, 1, 2]), summary))
    res = pl.run_pipeline(Y, PipelineConfig("TE"))
    assert res.diagnostics["fallbacks"] == [(2, "TE on fewer than 2 tasks; majority vote used")]
    monkeypatch.setattr(pl, "cluster_tasks", lambda *a, **k: (np.ones(6, dtype=int), summary))
    res = pl.run_pipeline(Y, PipelineConfig("TE"))
    assert res.diagnostics["fallbacks"] == [(2, "empty cluster")]
    assert np.all(res.labels != 0)


def test_single_task():
    res = run_pipeline(np.array([[1], [1], [-1]]), PipelineConfig("MV"))
    assert res.diagnostics["reason"] == "single task"
    assert res.labels.tolist() == [1]


def test_evaluate_examples():
    y = np.array([1, -1, 1, -1])
    k = np.array([1, 1, 2, 2])
    out = evaluate(y, y, k, 3 - k)
    assert out == {"err_overall": 0.0, "err_type1": 0.0, "err_type2": 0.0, "cluster_err": 0.0}
    out = evaluate(np.array([1, 1, 1, 1]), y, k)
    assert out["err_overall"] == 0.5 and out["err_type1"] == 0.5
    with pytest.raises(DataError):
        evaluate(y[:3], y, k)


def test_random_clustering_error_near_half():
    g = np.random.default_rng(0)
    k = np.repeat([1, 2], 5000)
    e = best_permutation_error(g.integers(1, 3, 10_000), k)
    assert e <= 0.5
    assert abs(e - 0.5) <= 0.02


def test_aggregate_dispatch():
    Y, _ = two_type_data(np.full(5, 0.6), np.full(5, 0.6), d=20, seed=0)
    for name in ("MV", "ER", "TE"):
        assert aggregate(Y, name).labels.shape == (20,)
    assert aggregate(Y, "NP-oracle", reliabilities=np.full(5, 0.6)).labels.shape == (20,)
    with pytest.raises(ValueError):
        aggregate(Y, "NP-oracle")
    with pytest.raises(ValueError):
        aggregate(Y, "EM")
