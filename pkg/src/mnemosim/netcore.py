"""Temporal conversation networks and the 16-person two-condition experiment topology."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CLIQUE_SIZE = 4
N_CLIQUES = 4

# two members of each clique talk clockwise, two counter-clockwise
WEAK_TIE_PAIRS = ((0, 4), (1, 5), (6, 8), (7, 9), (10, 12), (11, 13), (14, 2), (15, 3))


class Condition(enum.Enum):
    WEAK_TIES_FIRST = "weak-first"
    STRONG_TIES_FIRST = "strong-first"

    @classmethod
    def parse(cls, value: str | Condition) -> Condition:
        if isinstance(value, Condition):
            return value
        aliases = {
            "weak-first": cls.WEAK_TIES_FIRST,
            "weak": cls.WEAK_TIES_FIRST,
            "weaktiesfirst": cls.WEAK_TIES_FIRST,
            "strong-first": cls.STRONG_TIES_FIRST,
            "strong": cls.STRONG_TIES_FIRST,
            "strongtiesfirst": cls.STRONG_TIES_FIRST,
        }
        key = value.strip().lower().replace("_", "-")
        if key not in aliases:
            raise ValueError(f"unknown condition {value!r}")
        return aliases[key]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TemporalNetwork:
    """Ordered sequence of symmetric 0/1 adjacency matrices over ``n`` nodes.

    Round matrices are stored as read-only float arrays so they can be fed
    straight into matrix products.
    """

    n: int
    rounds: tuple[np.ndarray, ...]

    def __post_init__(self):
        rounds = tuple(_frozen(a) for a in self.rounds)
        object.__setattr__(self, "rounds", rounds)
        if not rounds:
            raise ValueError("a temporal network needs at least one round")
        for t, a in enumerate(rounds):
            if a.shape != (self.n, self.n):
                raise ValueError(f"round {t} has shape {a.shape}, expected {(self.n, self.n)}")

    @property
    def r(self) -> int:
        return len(self.rounds)

    @classmethod
    def from_edges(cls, n: int, round_edges: Sequence[Iterable[tuple[int, int]]]) -> TemporalNetwork:
        mats = []
        for edges in round_edges:
            a = np.zeros((n, n))
            for i, j in edges:
                a[i, j] = a[j, i] = 1.0
            mats.append(a)
        return cls(n, tuple(mats))

    def edges(self, t: int) -> list[tuple[int, int]]:
        """Undirected edges (i < j) of round ``t`` (0-based)."""
        iu, ju = np.nonzero(np.triu(self.rounds[t], 1))
        return [(int(i), int(j)) for i, j in zip(iu, ju)]

    def partner(self, t: int, node: int) -> int | None:
        nbrs = np.flatnonzero(self.rounds[t][node])
        return int(nbrs[0]) if len(nbrs) == 1 else None


@dataclass(frozen=True)
class CliquePartition:
    """Node-to-cluster assignment plus a neighbouring relation between clusters."""

    assignment: np.ndarray
    cluster_adjacency: np.ndarray = field(default=None)

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=int).copy()
        assignment.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        k = int(assignment.max()) + 1 if assignment.size else 0
        if set(np.unique(assignment)) != set(range(k)):
            raise ValueError("cluster ids must be dense 0..k-1")
        adj = self.cluster_adjacency
        adj = np.zeros((k, k), dtype=bool) if adj is None else np.array(adj, dtype=bool)
        if adj.shape != (k, k):
            raise ValueError(f"cluster adjacency must be {k}x{k}")
        if adj.diagonal().any() or (adj != adj.T).any():
            raise ValueError("cluster adjacency must be irreflexive and symmetric")
        adj.setflags(write=False)
        object.__setattr__(self, "cluster_adjacency", adj)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def k(self) -> int:
        return self.cluster_adjacency.shape[0]

    def members(self, cluster: int) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.assignment == cluster)]

    def pair_relation(self) -> np.ndarray:
        """n x n codes: 0 same cluster, 1 neighbouring clusters, 2 distant clusters.

        The diagonal is -1.
        """
        ci = self.assignment[:, None]
        cj = self.assignment[None, :]
        rel = np.where(self.cluster_adjacency[ci, cj], 1, 2)
        rel[ci == cj] = 0
        np.fill_diagonal(rel, -1)
        return rel


def _clique_matchings(members: Sequence[int]) -> list[list[tuple[int, int]]]:
    # the three perfect matchings of a 4-set, in lexicographic order
    a, b, c, d = members
    return [[(a, b), (c, d)], [(a, c), (b, d)], [(a, d), (b, c)]]


def experiment_partition() -> CliquePartition:
    assignment = np.repeat(np.arange(N_CLIQUES), CLIQUE_SIZE)
    adj = np.zeros((N_CLIQUES, N_CLIQUES), dtype=bool)
    for c in range(N_CLIQUES):
        nxt = (c + 1) % N_CLIQUES
        adj[c, nxt] = adj[nxt, c] = True
    return CliquePartition(assignment, adj)


def build_experiment_network(condition: Condition | str) -> tuple[TemporalNetwork, CliquePartition]:
    """16 nodes in four ring-arranged cliques, four rounds of perfect matchings.

    Weak-ties-first runs the cross-clique matching in round 1, strong-ties-first
    runs it in round 4; rounds in between are the within-clique matchings.
    """
    condition = Condition.parse(condition)
    n = CLIQUE_SIZE * N_CLIQUES
    within = [[] for _ in range(3)]
    for c in range(N_CLIQUES):
        members = list(range(c * CLIQUE_SIZE, (c + 1) * CLIQUE_SIZE))
        for m, matching in enumerate(_clique_matchings(members)):
            within[m].extend(matching)
    weak = list(WEAK_TIE_PAIRS)
    if condition is Condition.WEAK_TIES_FIRST:
        schedule = [weak, *within]
    else:
        schedule = [*within, weak]
    return TemporalNetwork.from_edges(n, schedule), experiment_partition()


def static_union(tn: TemporalNetwork) -> np.ndarray:
    union = np.zeros((tn.n, tn.n))
    for a in tn.rounds:
        union = np.maximum(union, (a != 0).astype(float))
    return union


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    round: int | None
    detail: str


def validate(tn: TemporalNetwork | Sequence[np.ndarray], experiment: bool = False) -> list[Diagnostic]:
    """Collect structural problems; an empty list means the network is sound.

    Accepts a TemporalNetwork or a bare list of round matrices (the latter so
    that dimension mismatches can be reported rather than raised). With
    ``experiment=True`` each round must also be a matching and no pair may
    talk twice.
    """
    rounds = tn.rounds if isinstance(tn, TemporalNetwork) else [np.asarray(a, dtype=float) for a in tn]
    out: list[Diagnostic] = []
    if not len(rounds):
        return [Diagnostic("empty", None, "no rounds")]
    n = rounds[0].shape[0]
    for t, a in enumerate(rounds):
        if a.ndim != 2 or a.shape != (n, n):
            out.append(Diagnostic("dimension", t, f"shape {a.shape} != {(n, n)}"))
            continue
        if not np.isin(a, (0.0, 1.0)).all():
            out.append(Diagnostic("non-binary", t, "entries outside {0, 1}"))
        for i in np.flatnonzero(a.diagonal()):
            out.append(Diagnostic("self-loop", t, f"node {i} linked to itself"))
        for i, j in np.argwhere(np.triu(a != a.T, 1)):
            out.append(Diagnostic("asymmetric", t, f"A[{i}][{j}] != A[{j}][{i}]"))
    if not experiment or any(d.kind == "dimension" for d in out):
        return out

    seen: dict[tuple[int, int], int] = {}
    for t, a in enumerate(rounds):
        links = (a != 0) & ~np.eye(n, dtype=bool)
        deg = links.sum(axis=1)
        for i in np.flatnonzero(deg > 1):
            out.append(Diagnostic("not-matching", t, f"node {i} has {deg[i]} partners"))
        for i, j in np.argwhere(np.triu(links | links.T, 1)):
            pair = (int(i), int(j))
            if pair in seen:
                out.append(Diagnostic("repeated-partner", t, f"pair {pair} already met in round {seen[pair]}"))
            else:
                seen[pair] = t
    return out


# -- text format: header "n r", then "round src dst" per undirected edge, all 0-based


def write_network(tn: TemporalNetwork, path: str | Path) -> None:
    lines = [f"{tn.n} {tn.r}"]
    for t in range(tn.r):
        lines.extend(f"{t} {i} {j}" for i, j in tn.edges(t))
    Path(path).write_text("\n".join(lines) + "\n")


class NetworkFormatError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def read_network(path: str | Path) -> TemporalNetwork:
    header = None
    edges: list[list[tuple[int, int]]] = []
    n = r = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                nums = [int(p) for p in parts]
            except ValueError:
                raise NetworkFormatError(path, lineno, f"non-integer field in {line!r}") from None
            if header is None:
                if len(nums) != 2 or nums[0] < 1 or nums[1] < 1:
                    raise NetworkFormatError(path, lineno, "header must be 'n r' with n, r >= 1")
                header = n, r = nums
                edges = [[] for _ in range(r)]
                continue
            if len(nums) != 3:
                raise NetworkFormatError(path, lineno, "edge line must be 'round src dst'")
            t, i, j = nums
            if not 0 <= t < r:
                raise NetworkFormatError(path, lineno, f"round {t} outside 0..{r - 1}")
            if not (0 <= i < n and 0 <= j < n):
                raise NetworkFormatError(path, lineno, f"node outside 0..{n - 1}")
            edges[t].append((i, j))
    if header is None:
        raise NetworkFormatError(path, 0, "empty network file")
    return TemporalNetwork.from_edges(n, edges)


def partition_to_dict(partition: CliquePartition) -> dict:
    k = partition.k
    return {
        "assignment": [int(c) for c in partition.assignment],
        "adjacent": [[a, b] for a, b in itertools.combinations(range(k), 2) if partition.cluster_adjacency[a, b]],
    }


def partition_from_dict(data: dict) -> CliquePartition:
    assignment = np.asarray(data["assignment"], dtype=int)
    k = int(assignment.max()) + 1
    adj = np.zeros((k, k), dtype=bool)
    for a, b in data.get("adjacent", []):
        adj[a, b] = adj[b, a] = True
    return CliquePartition(assignment, adj)
