"""Mnemonic reachability over a temporal network.

The score from node i to node j combines a recency-weighted sum of the
direct conversation matrices with every time-respecting walk that spans a
window of consecutive rounds::

    C = sum_t (1 - lam)**(r - t) A_t
        + sum_{t < k} gamma**(k - 1) A_t A_{t+1} ... A_k

Rounds are 1-based in the exponents above. ``literal_gamma=True`` switches
the walk weight to ``gamma**(k * (k - t + 1))`` (a product of ``gamma**k``
per factor), kept only for comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .netcore import CliquePartition, TemporalNetwork


@dataclass(frozen=True)
class ModelParams:
    lam: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("lam", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class ReachabilityMatrix:
    C: np.ndarray
    params: ModelParams
    r: int

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def symmetrized(self) -> np.ndarray:
        return (self.C + self.C.T) / 2.0


def _walk_weight(params: ModelParams, t: int, k: int, literal_gamma: bool) -> float:
    if literal_gamma:
        return params.gamma ** (k * (k - t + 1))
    return params.gamma ** (k - 1)


def mnemonic_reachability(
    tn: TemporalNetwork, params: ModelParams = ModelParams(), literal_gamma: bool = False
) -> ReachabilityMatrix:
    rounds = tn.rounds
    r = len(rounds)
    n = rounds[0].shape[0]
    for t, a in enumerate(rounds):
        if a.shape != (n, n):
            raise ValueError(f"round {t} has shape {a.shape}, expected {(n, n)}")

    C = np.zeros((n, n))
    for t in range(1, r + 1):
        C += (1.0 - params.lam) ** (r - t) * rounds[t - 1]
    for t in range(1, r):
        walk = rounds[t - 1]
        for k in range(t + 1, r + 1):
            walk = walk @ rounds[k - 1]
            C += _walk_weight(params, t, k, literal_gamma) * walk
    return ReachabilityMatrix(C, params, r)


def reachability_bruteforce(
    tn: TemporalNetwork,
    params: ModelParams = ModelParams(),
    literal_gamma: bool = False,
    max_nodes: int = 16,
    max_rounds: int = 6,
) -> ReachabilityMatrix:
    """Same score by explicit enumeration of time-respecting walks.

    Each walk takes exactly one edge from every round of a consecutive window
    [t, k]. Only meant as a test oracle for small networks.
    """
    n, r = tn.n, tn.r
    if n > max_nodes or r > max_rounds:
        raise ValueError(f"network {n}x{r} exceeds brute-force bound {max_nodes}x{max_rounds}")

    nbrs = [[[(j, a[i, j]) for j in range(n) if a[i, j] != 0] for i in range(n)] for a in tn.rounds]
    C = [[0.0] * n for _ in range(n)]

    def extend(node: int, rnd: int, last: int, mult: float, weight: float, start: int):
        for nxt, w in nbrs[rnd - 1][node]:
            m = mult * w
            if rnd == last:
                C[start][nxt] += weight * m
            else:
                extend(nxt, rnd + 1, last, m, weight, start)

    for t in range(1, r + 1):
        direct = (1.0 - params.lam) ** (r - t)
        for i in range(n):
            for j, w in nbrs[t - 1][i]:
                C[i][j] += direct * w
    for t, k in itertools.combinations(range(1, r + 1), 2):
        weight = _walk_weight(params, t, k, literal_gamma)
        for i in range(n):
            extend(i, t, k, 1.0, weight, i)
    return ReachabilityMatrix(np.array(C), params, r)


def influence_trajectory(
    tn: TemporalNetwork, params: ModelParams, node: int
) -> list[tuple[float, float]]:
    """(out, in) influence of ``node`` after each round prefix.

    Out-influence is the row sum and in-influence the column sum of the
    prefix reachability matrix, both excluding the node's own diagonal entry.
    """
    if not 0 <= node < tn.n:
        raise IndexError(f"node {node} outside 0..{tn.n - 1}")
    traj = []
    for t in range(1, tn.r + 1):
        C = mnemonic_reachability(TemporalNetwork(tn.n, tn.rounds[:t]), params).C
        out = C[node].sum() - C[node, node]
        inn = C[:, node].sum() - C[node, node]
        traj.append((float(out), float(inn)))
    return traj


def aggregate_reachability(
    C: ReachabilityMatrix | np.ndarray, partition: CliquePartition, exclude_interacting: TemporalNetwork | None = None
) -> dict[str, float | None]:
    """Means of C over ordered off-diagonal pairs, overall and by cluster relation.

    With ``exclude_interacting`` the neighboring mean skips cross-cluster pairs
    that conversed directly in that network. A category with no pairs maps to
    None.
    """
    M = C.C if isinstance(C, ReachabilityMatrix) else np.asarray(C, dtype=float)
    if partition.n != M.shape[0]:
        raise ValueError("partition does not cover the matrix")
    rel = partition.pair_relation()
    out: dict[str, float | None] = {"overall": float(M[rel >= 0].mean())}
    if exclude_interacting is not None:
        talked = np.zeros(M.shape, dtype=bool)
        for a in exclude_interacting.rounds:
            talked |= a != 0
        rel = np.where((rel == 1) & (talked | talked.T), 3, rel)
    for code, name in enumerate(("within", "neighboring", "distant")):
        vals = M[rel == code]
        out[name] = float(vals.mean()) if vals.size else None
    return out


def write_reachability_csv(rm: ReachabilityMatrix, path: str | Path) -> None:
    p = rm.params
    header = f"n={rm.n},r={rm.r},lambda={p.lam!r},gamma={p.gamma!r}"
    np.savetxt(path, rm.C, delimiter=",", fmt="%.17g", header=header)


def read_reachability_csv(path: str | Path) -> ReachabilityMatrix:
    with open(path) as fh:
        first = fh.readline().lstrip("#").strip()
    meta = dict(item.split("=") for item in first.split(","))
    C = np.loadtxt(path, delimiter=",", ndmin=2)
    return ReachabilityMatrix(C, ModelParams(float(meta["lambda"]), float(meta["gamma"])), int(meta["r"]))
