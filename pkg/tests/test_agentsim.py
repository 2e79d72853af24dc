import json

import numpy as np
import pytest

from mnemosim.agentsim import (
    _INIT,
    _rng,
    SimConfig,
    individual_recall,
    init_agents,
    recall_probability,
    replicate,
    run_experiment,
    run_metrics,
    simulate_conversation,
)
from mnemosim.metrics import mnemonic_convergence, similarity_matrix


def test_init_extremes():
    assert (init_agents(SimConfig(p_encode=1.0)) > 0).all()
    assert not init_agents(SimConfig(p_encode=0.0)).any()


def test_init_strength_range():
    mem = init_agents(SimConfig(p_encode=0.8, seed=5))
    nz = mem[mem > 0]
    assert (nz > 0.4).all() and (nz <= 0.8).all()


def test_init_deterministic():
    np.testing.assert_array_equal(init_agents(SimConfig(seed=9)), init_agents(SimConfig(seed=9)))


def test_recall_extremes():
    cfg = SimConfig()
    rng = np.random.default_rng(0)
    assert individual_recall(np.ones(30), cfg, rng).all()
    assert not individual_recall(np.zeros(30), cfg, rng).any()


def test_recall_probability_monotone():
    s = np.linspace(0, 1, 101)
    p = recall_probability(s, SimConfig())
    assert p[0] == 0.0
    assert (np.diff(p[1:]) >= 0).all()


def test_conversation_empty_memories():
    cfg = SimConfig()
    z = np.zeros(30)
    rec, a, b = simulate_conversation(z, z, cfg, np.random.default_rng(0))
    assert not rec.mentioned.any()
    assert not a.any() and not b.any()


def test_conversation_without_capacity_limit_is_union():
    cfg = SimConfig(capacity=30)
    a, b = np.zeros(30), np.zeros(30)
    a[:10] = 1.0
    b[5:20] = 1.0
    rec, _, _ = simulate_conversation(a, b, cfg, np.random.default_rng(1))
    np.testing.assert_array_equal(rec.mentioned, (np.arange(30) < 20).astype(int))


def test_conversation_capacity_keeps_strongest():
    cfg = SimConfig(capacity=3)
    a = np.ones(30)
    b = np.zeros(30)
    b[[7, 3, 20]] = 1.0
    rec, _, _ = simulate_conversation(a, b, cfg, np.random.default_rng(0))
    assert np.flatnonzero(rec.mentioned).tolist() == [3, 7, 20]


def test_social_transmission():
    cfg = SimConfig(capacity=30)
    a = np.zeros(30)
    a[4] = 1.0
    rec, _, new_b = simulate_conversation(a, np.zeros(30), cfg, np.random.default_rng(0))
    assert rec.mentioned[4] == 1
    assert new_b[4] >= cfg.boost


def test_conversation_leaves_inputs_untouched():
    a = np.full(30, 0.5)
    before = a.copy()
    simulate_conversation(a, a, SimConfig(), np.random.default_rng(0))
    np.testing.assert_array_equal(a, before)


def test_null_dynamics_keep_strengths():
    cfg = SimConfig(boost=0.0, decay=1.0)
    a = np.random.default_rng(2).random(30)
    b = np.random.default_rng(3).random(30)
    _, na, nb = simulate_conversation(a, b, cfg, np.random.default_rng(0))
    np.testing.assert_array_equal(na, a)
    np.testing.assert_array_equal(nb, b)


def test_run_experiment_deterministic():
    cfg = SimConfig(seed=17)
    r1, r2 = run_experiment("weak-first", cfg, 3), run_experiment("weak-first", cfg, 3)
    np.testing.assert_array_equal(r1.pre, r2.pre)
    np.testing.assert_array_equal(r1.post, r2.post)
    for a, b in zip(r1.records, r2.records):
        assert a.pair == b.pair and a.round == b.round
        np.testing.assert_array_equal(a.mentioned, b.mentioned)


def test_conditions_share_pre_recall():
    cfg = SimConfig(seed=4)
    w, s = run_experiment("weak-first", cfg, 2), run_experiment("strong-first", cfg, 2)
    np.testing.assert_array_equal(w.pre, s.pre)


def test_records_follow_schedule():
    res = run_experiment("strong-first", SimConfig(seed=1))
    assert len(res.records) == 32
    for t in range(4):
        pairs = [r.pair for r in res.records if r.round == t]
        assert pairs == res.network.edges(t)


def test_conservation_no_spontaneous_items():
    cfg = SimConfig(p_encode=0.3, seed=8)
    for rep in range(5):
        res = run_experiment("weak-first", cfg, rep)
        mem0 = init_agents(cfg, 16, _rng(cfg, rep, _INIT))
        heard = mem0 > 0
        for rec in res.records:
            for node in rec.pair:
                heard[node] |= rec.mentioned.astype(bool)
        assert not (res.post.astype(bool) & ~heard).any()
        assert not (res.pre.astype(bool) & ~(mem0 > 0)).any()


def test_null_dynamics_convergence_unchanged_in_expectation():
    cfg = SimConfig(boost=0.0, decay=1.0)
    diffs = []
    for rep in range(200):
        res = run_experiment("weak-first", cfg, rep)
        diffs.append(mnemonic_convergence(similarity_matrix(res.post)) - mnemonic_convergence(similarity_matrix(res.pre)))
    diffs = np.array(diffs)
    # pre and post are exchangeable draws from the same memories
    assert abs(diffs.mean()) < 3 * diffs.std(ddof=1) / np.sqrt(len(diffs))


@pytest.mark.parametrize("boost", [0.1, 0.3, 0.6])
def test_boost_raises_convergence_on_average(boost):
    cfg = SimConfig(boost=boost)
    per_seed, _ = replicate(["weak-first"], 100, cfg)
    assert per_seed["convergence_increase"].mean() > 0


def test_weak_first_round_one_more_diverse_than_round_four():
    per_seed, _ = replicate(["weak-first"], 100, SimConfig())
    assert per_seed["diversity_r1"].mean() > per_seed["diversity_r4"].mean()


def test_replicate_single_rep_equals_run_metrics():
    cfg = SimConfig(seed=3)
    per_seed, summary = replicate(["weak-first"], 1, cfg)
    row = run_metrics(run_experiment("weak-first", cfg, 0))
    for k, v in row.items():
        assert per_seed.loc[0, k] == v
    assert summary.loc[0, "convergence_increase_mean"] == row["convergence_increase"]
    assert summary.loc[0, "n_reps"] == 1


def test_replicate_rows_pair_by_rep():
    per_seed, summary = replicate(["weak-first", "strong-first"], 4, SimConfig(seed=2))
    w = per_seed[per_seed.condition == "weak-first"]
    s = per_seed[per_seed.condition == "strong-first"]
    assert w.rep.tolist() == s.rep.tolist() == [0, 1, 2, 3]
    np.testing.assert_array_equal(w.pre_convergence.to_numpy(), s.pre_convergence.to_numpy())
    assert {"convergence_increase_mean", "within_increase_std", "overlap_r1_mean"} <= set(summary.columns)


def test_replicate_parallel_matches_serial():
    a, _ = replicate(["weak-first", "strong-first"], 6, SimConfig(seed=5), workers=1)
    b, _ = replicate(["weak-first", "strong-first"], 6, SimConfig(seed=5), workers=4)
    assert a.equals(b)


def test_replicate_rejects_zero_reps():
    with pytest.raises(ValueError):
        replicate(["weak-first"], 0)


@pytest.mark.parametrize(
    "kwargs", [{"p_encode": 1.5}, {"decay": 0.0}, {"capacity": 0}, {"boost": -0.1}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimConfig(**kwargs)


def test_config_from_dict_names_field():
    with pytest.raises(ValueError, match="capacity"):
        SimConfig.from_dict({"capacity": "lots"})
    with pytest.raises(ValueError, match="colour"):
        SimConfig.from_dict({"colour": 1})


def test_default_config_file_matches_defaults():
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "configs" / "default_sim.json"
    assert SimConfig.from_json(path) == SimConfig()
    assert json.loads(path.read_text())["decay"] == SimConfig().decay
