"""Mnemonic similarity, convergence, and clique-level overlap/diversity indices."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .netcore import CliquePartition, TemporalNetwork

N_ITEMS = 30


@dataclass(frozen=True)
class ConversationRecord:
    """Items that came up in one dyadic conversation of one round (0-based)."""

    round: int
    pair: tuple[int, int]
    mentioned: np.ndarray

    def __post_init__(self):
        if self.pair[0] == self.pair[1]:
            raise ValueError(f"conversation pair {self.pair} is a self-pair")
        bits = np.asarray(self.mentioned, dtype=np.int8).copy()
        bits.setflags(write=False)
        object.__setattr__(self, "mentioned", bits)


def as_recall(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("recall vectors must be binary")
    return arr.astype(bool)


def mnemonic_similarity(ri, rj) -> float:
    """Jaccard index of two recall vectors; 0.0 when both are empty."""
    a, b = as_recall(ri), as_recall(rj)
    if a.shape != b.shape:
        raise ValueError(f"recall lengths differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


def similarity_matrix(recalls) -> np.ndarray:
    R = as_recall(recalls).astype(float)
    inter = R @ R.T
    sizes = R.sum(axis=1)
    union = sizes[:, None] + sizes[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(union > 0, inter / union, 0.0)
    return sim


def mnemonic_convergence(sim) -> float:
    """Mean similarity over the n(n-1)/2 unordered pairs."""
    S = np.asarray(sim, dtype=float)
    n = S.shape[0]
    if n < 2:
        raise ValueError("convergence needs at least two participants")
    iu = np.triu_indices(n, 1)
    return float(S[iu].mean())


def convergence_increase(pre, post) -> float:
    pre, post = as_recall(pre), as_recall(post)
    if pre.shape != post.shape:
        raise ValueError(f"pre {pre.shape} and post {post.shape} recall shapes differ")
    return mnemonic_convergence(similarity_matrix(post)) - mnemonic_convergence(similarity_matrix(pre))


def interacting_pairs(tn: TemporalNetwork) -> np.ndarray:
    """Boolean n x n mask of pairs that talked in any round."""
    mask = np.zeros((tn.n, tn.n), dtype=bool)
    for a in tn.rounds:
        mask |= a != 0
    return mask | mask.T


def pair_categories(partition: CliquePartition, tn: TemporalNetwork | None = None) -> np.ndarray:
    """Category code per pair: 0 within, 1 neighboring, 2 distant.

    Neighbouring pairs that conversed directly get code 3 when ``tn`` is given;
    the diagonal is -1.
    """
    rel = partition.pair_relation()
    if tn is not None:
        rel = rel.copy()
        rel[(rel == 1) & interacting_pairs(tn)] = 3
    return rel


CATEGORIES = ("within", "neighboring", "distant")


def clique_level_similarity(
    sim, partition: CliquePartition, tn: TemporalNetwork | None = None
) -> dict[str, float | None]:
    """Mean similarity over unordered pairs by clique relation.

    An empty category is reported as None rather than zero.
    """
    S = np.asarray(sim, dtype=float)
    rel = pair_categories(partition, tn)
    iu = np.triu_indices(S.shape[0], 1)
    vals, codes = S[iu], rel[iu]
    out: dict[str, float | None] = {}
    for code, name in enumerate(CATEGORIES):
        sel = vals[codes == code]
        out[name] = float(sel.mean()) if sel.size else None
    return out


def _vectors(clique_records) -> np.ndarray:
    vecs = [as_recall(getattr(rec, "mentioned", rec)) for rec in clique_records]
    if len(vecs) != 4:
        raise ValueError(f"expected one record per clique member (4), got {len(vecs)}")
    return np.vstack(vecs)


def overlap_index(clique_records) -> int:
    """Items present in the conversations of all four clique members."""
    V = _vectors(clique_records)
    return int(np.count_nonzero(V.sum(axis=0) == len(V)))


def diversity_index(clique_records) -> int:
    """Items present in at least one but at most three members' conversations."""
    V = _vectors(clique_records)
    counts = V.sum(axis=0)
    return int(np.count_nonzero((counts >= 1) & (counts <= len(V) - 1)))


def member_round_vectors(records: Iterable[ConversationRecord]) -> dict[tuple[int, int], np.ndarray]:
    """Map (round, participant) to the items of that participant's conversation."""
    out: dict[tuple[int, int], np.ndarray] = {}
    for rec in records:
        for node in rec.pair:
            if (rec.round, node) in out:
                raise ValueError(f"participant {node} has two conversations in round {rec.round}")
            out[(rec.round, node)] = rec.mentioned
    return out


def indices_by_round(
    records: Sequence[ConversationRecord], partition: CliquePartition, rounds: Sequence[int] | None = None
) -> list[tuple[int, float, float]]:
    """(round, mean overlap, mean diversity) averaged over cliques."""
    lookup = member_round_vectors(records)
    if rounds is None:
        rounds = sorted({rec.round for rec in records})
    table = []
    for t in rounds:
        overlaps, diversities = [], []
        for c in range(partition.k):
            vecs = []
            for node in partition.members(c):
                if (t, node) not in lookup:
                    raise ValueError(f"no conversation for participant {node} in round {t}")
                vecs.append(lookup[(t, node)])
            overlaps.append(overlap_index(vecs))
            diversities.append(diversity_index(vecs))
        table.append((t, float(np.mean(overlaps)), float(np.mean(diversities))))
    return table


# -- I/O


def write_recall_csv(recalls, path: str | Path) -> None:
    np.savetxt(path, as_recall(recalls).astype(int), delimiter=",", fmt="%d")


def read_recall_csv(path: str | Path) -> np.ndarray:
    return as_recall(np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)).astype(np.int8)


def write_indices_csv(table, path: str | Path, condition: str = "") -> None:
    lines = ["round,overlap,diversity,condition"]
    lines += [f"{t},{o!r},{d!r},{condition}" for t, o, d in table]
    Path(path).write_text("\n".join(lines) + "\n")
