"""Agent-based replay of the study / pre-recall / four conversations / post-recall design.

Each agent holds a strength in [0, 1] per studied item. Recall is a coin
flip per item whose probability grows with strength; a conversation pools
both partners' recalls (up to a capacity), strengthens what was mentioned
and lets everything else fade.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .metrics import ConversationRecord
from .netcore import Condition, TemporalNetwork, build_experiment_network

# stream tags for per-phase RNGs
_INIT, _PRE, _CONVERSE = 0, 1, 2
_CONDITION_TAG = {Condition.WEAK_TIES_FIRST: 0, Condition.STRONG_TIES_FIRST: 1}


@dataclass(frozen=True)
class SimConfig:
    n_items: int = 30
    p_encode: float = 0.8
    p_recall_base: float = 0.1
    boost: float = 0.3
    decay: float = 0.75
    capacity: int = 15
    seed: int = 0

    def __post_init__(self):
        for name in ("p_encode", "p_recall_base", "boost"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} must lie in [0, 1]")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay={self.decay} must lie in (0, 1]")
        if self.capacity < 1:
            raise ValueError(f"capacity={self.capacity} must be >= 1")
        if self.n_items < 1:
            raise ValueError(f"n_items={self.n_items} must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> SimConfig:
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ValueError(f"unknown config field {key!r}")
            kind = int if known[key].type in ("int", int) else float
            try:
                kwargs[key] = kind(value)
            except (TypeError, ValueError):
                raise ValueError(f"config field {key!r}: cannot read {value!r} as {kind.__name__}") from None
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> SimConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def init_agents(config: SimConfig, n_agents: int = 16, rng: np.random.Generator | None = None) -> np.ndarray:
    """Study phase: one row of item strengths per agent.

    Each item is encoded with probability ``p_encode`` at strength
    ``p_encode * u``, u ~ U(0.5, 1]; unencoded items stay at 0.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    shape = (n_agents, config.n_items)
    encoded = rng.random(shape) < config.p_encode
    u = 1.0 - 0.5 * rng.random(shape)
    return np.where(encoded, config.p_encode * u, 0.0)


def recall_probability(strength: np.ndarray, config: SimConfig) -> np.ndarray:
    p = np.minimum(1.0, config.p_recall_base + strength * (1.0 - config.p_recall_base))
    return np.where(strength > 0, p, 0.0)


def individual_recall(mem: np.ndarray, config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    # works row-wise on a stack of memories too
    return (rng.random(np.shape(mem)) < recall_probability(np.asarray(mem), config)).astype(np.int8)


def simulate_conversation(
    a: np.ndarray, b: np.ndarray, config: SimConfig, rng: np.random.Generator, round_: int = 0, pair=(0, 1)
) -> tuple[ConversationRecord, np.ndarray, np.ndarray]:
    """One dyadic joint-recall conversation; inputs are left untouched."""
    nominated = individual_recall(a, config, rng).astype(bool) | individual_recall(b, config, rng).astype(bool)
    items = np.flatnonzero(nominated)
    if len(items) > config.capacity:
        combined = a[items] + b[items]
        # highest combined strength first, lower item index on ties
        keep = np.lexsort((items, -combined))[: config.capacity]
        items = np.sort(items[keep])
    mentioned = np.zeros(config.n_items, dtype=np.int8)
    mentioned[items] = 1
    new_a, new_b = (_update(m, mentioned.astype(bool), config) for m in (a, b))
    return ConversationRecord(round_, tuple(pair), mentioned), new_a, new_b


def _update(mem: np.ndarray, mentioned: np.ndarray, config: SimConfig) -> np.ndarray:
    out = np.asarray(mem, dtype=float).copy()
    out[mentioned] = np.minimum(1.0, out[mentioned] + config.boost)
    out[~mentioned] *= config.decay
    return out


ConversationModel = Callable[..., tuple[ConversationRecord, np.ndarray, np.ndarray]]


@dataclass
class SimResult:
    pre: np.ndarray
    post: np.ndarray
    records: list[ConversationRecord]
    condition: Condition
    seed: int
    rep: int = 0
    network: TemporalNetwork | None = field(default=None, repr=False)


def _rng(config: SimConfig, rep: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, rep, *tags])


def run_experiment(
    condition: Condition | str, config: SimConfig = SimConfig(), rep: int = 0,
    converse: ConversationModel = simulate_conversation,
) -> SimResult:
    """Run one 16-person community through all four phases.

    Study and pre-recall draws depend only on (seed, rep), so both conditions
    of a replication start from the same community; conversation and
    post-recall draws also depend on the condition.
    """
    condition = Condition.parse(condition)
    tn, _ = build_experiment_network(condition)
    mem = init_agents(config, tn.n, _rng(config, rep, _INIT))
    pre = individual_recall(mem, config, _rng(config, rep, _PRE))

    rng = _rng(config, rep, _CONVERSE, _CONDITION_TAG[condition])
    records = []
    for t in range(tn.r):
        for i, j in tn.edges(t):
            rec, mem_i, mem_j = converse(mem[i], mem[j], config, rng, round_=t, pair=(i, j))
            mem[i], mem[j] = mem_i, mem_j
            records.append(rec)
    post = individual_recall(mem, config, rng)
    return SimResult(pre, post, records, condition, config.seed, rep, tn)


def run_metrics(res: SimResult) -> dict:
    """Per-run row: convergence, clique-level increases and per-round indices."""
    from .metrics import (
        clique_level_similarity, indices_by_round, mnemonic_convergence, similarity_matrix,
    )
    from .netcore import experiment_partition

    partition = experiment_partition()
    s_pre, s_post = similarity_matrix(res.pre), similarity_matrix(res.post)
    row = {
        "condition": res.condition.value,
        "seed": res.seed,
        "rep": res.rep,
        "pre_convergence": mnemonic_convergence(s_pre),
        "post_convergence": mnemonic_convergence(s_post),
    }
    row["convergence_increase"] = row["post_convergence"] - row["pre_convergence"]
    cl_pre = clique_level_similarity(s_pre, partition, res.network)
    cl_post = clique_level_similarity(s_post, partition, res.network)
    for name in cl_pre:
        row[f"{name}_increase"] = cl_post[name] - cl_pre[name]
    for t, overlap, diversity in indices_by_round(res.records, partition):
        row[f"overlap_r{t + 1}"] = overlap
        row[f"diversity_r{t + 1}"] = diversity
    return row


def replicate(conditions, n_reps: int, config: SimConfig = SimConfig(), workers: int = 1):
    """Run ``n_reps`` paired replications per condition.

    Returns ``(per_seed, summary)`` data frames; rows of different conditions
    with the same ``rep`` share study and pre-recall draws.
    """
    import pandas as pd

    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    jobs = [(Condition.parse(c), rep) for c in conditions for rep in range(n_reps)]

    def one(job):
        return run_metrics(run_experiment(job[0], config, job[1]))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    per_seed = pd.DataFrame(rows)
    return per_seed, summarize(per_seed)


def summarize(per_seed):
    """Per-condition mean and SD of every metric column."""
    metrics = [c for c in per_seed.columns if c not in ("condition", "seed", "rep")]
    grouped = per_seed.groupby("condition", sort=False)
    summary = grouped[metrics].agg(["mean", "std"])
    summary.columns = [f"{m}_{stat}" for m, stat in summary.columns]
    summary.insert(0, "n_reps", grouped.size())
    return summary.reset_index()
