"""Static-graph tools for the real-network pipeline.

Edge betweenness ranking, quartile scheduling of ranked edges into a
four-round temporal network, recursive Fiedler bisection, and the classic
node centralities.
"""

from __future__ import annotations

import enum
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .netcore import CliquePartition, TemporalNetwork


@dataclass(frozen=True)
class StaticGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None
    labels: tuple | None = None

    def __post_init__(self):
        norm = []
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", tuple(norm))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]], labels=None) -> StaticGraph:
        """Collapse repeated contacts and drop self-loops."""
        edges = sorted({(min(u, v), max(u, v)) for u, v in pairs if u != v})
        return cls(n, tuple(edges), labels=labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1.0
        return A

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        for lst in nbrs:
            lst.sort()
        return nbrs


def read_edge_list(path: str | Path, min_contacts: int = 1) -> StaticGraph:
    """Parse ``src dst [timestamp ...]`` lines; ``%`` and ``#`` start comments.

    Node ids may be arbitrary integers or strings and are relabelled densely
    in sorted order. Repeated contacts collapse to a single edge; pairs seen
    fewer than ``min_contacts`` times are dropped (their nodes are kept).
    """
    if min_contacts < 1:
        raise ValueError("min_contacts must be >= 1")
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line[0] in "%#":
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'src dst [timestamp]'")
            pairs.append((parts[0], parts[1]))
    if not pairs:
        raise ValueError(f"{path}: no edges")

    def key(x: str):
        return (0, int(x), "") if x.lstrip("-").isdigit() else (1, 0, x)

    labels = sorted({x for p in pairs for x in p}, key=key)
    index = {lab: i for i, lab in enumerate(labels)}
    counts = Counter(
        (min(index[u], index[v]), max(index[u], index[v])) for u, v in pairs if u != v
    )
    kept = (e for e, c in counts.items() if c >= min_contacts)
    return StaticGraph.from_pairs(len(labels), kept, labels=tuple(labels))


def planted_partition_graph(sizes: Sequence[int], p_in: float, p_out: float, seed: int) -> tuple[StaticGraph, np.ndarray]:
    """Stochastic block model; returns the graph and the planted block of each node."""
    rng = np.random.default_rng(seed)
    blocks = np.repeat(np.arange(len(sizes)), sizes)
    n = len(blocks)
    prob = np.where(blocks[:, None] == blocks[None, :], p_in, p_out)
    draw = rng.random((n, n)) < prob
    iu, ju = np.nonzero(np.triu(draw, 1))
    return StaticGraph(n, tuple(zip(iu.tolist(), ju.tolist()))), blocks


# -- betweenness


def _brandes(g: StaticGraph) -> tuple[np.ndarray, dict[tuple[int, int], float]]:
    """Node and edge betweenness over unordered pairs (unweighted BFS)."""
    nbrs = g.neighbors()
    n = g.n
    node_bc = np.zeros(n)
    edge_bc = {e: 0.0 for e in g.edges}
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            stack.append(v)
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    q.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                c = sigma[v] / sigma[w] * (1.0 + delta[w])
                edge_bc[(min(v, w), max(v, w))] += c
                delta[v] += c
            if w != s:
                node_bc[w] += delta[w]
    # every unordered pair was counted from both ends
    return node_bc / 2.0, {e: b / 2.0 for e, b in edge_bc.items()}


@dataclass(frozen=True)
class EdgeRanking:
    """Edges with their betweenness, highest score first."""

    n: int
    edges: tuple[tuple[int, int], ...]
    scores: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.edges)


def _score_key(score: float) -> float:
    # float sums of equal fractions can differ in the last bits; tie on 1e-9
    return round(score, 9)


def edge_betweenness(g: StaticGraph) -> EdgeRanking:
    _, eb = _brandes(g)
    ordered = sorted(eb.items(), key=lambda kv: (-_score_key(kv[1]), kv[0]))
    return EdgeRanking(g.n, tuple(e for e, _ in ordered), tuple(s for _, s in ordered))


class EdgeOrder(enum.Enum):
    DESCENDING = "desc"
    ASCENDING = "asc"
    RANDOM = "random"


def quartile_blocks(m: int, n_blocks: int = 4) -> list[int]:
    base, extra = divmod(m, n_blocks)
    return [base + (1 if i < extra else 0) for i in range(n_blocks)]


def quartile_schedule(ranking: EdgeRanking, order: EdgeOrder | str, seed: int | None = None) -> TemporalNetwork:
    """Four rounds from consecutive blocks of the ranked edges.

    Descending keeps the ranking; ascending is descending with the first and
    last blocks exchanged; random shuffles the edges with ``seed`` first.
    """
    order = EdgeOrder(order)
    m = len(ranking)
    if m < 4:
        raise ValueError(f"need at least 4 edges to build 4 rounds, got {m}")
    edges = list(ranking.edges)
    if order is EdgeOrder.RANDOM:
        rng = np.random.default_rng(seed)
        edges = [edges[i] for i in rng.permutation(m)]
    sizes = quartile_blocks(m)
    bounds = np.cumsum([0, *sizes])
    blocks = [edges[bounds[i]:bounds[i + 1]] for i in range(4)]
    if order is EdgeOrder.ASCENDING:
        blocks[0], blocks[3] = blocks[3], blocks[0]
    return TemporalNetwork.from_edges(ranking.n, blocks)


# -- spectral clustering


def _components(nodes: list[int], nbrs: list[set[int]]) -> list[list[int]]:
    left = set(nodes)
    comps = []
    for s in nodes:
        if s not in left:
            continue
        comp = [s]
        left.discard(s)
        q = deque([s])
        while q:
            v = q.popleft()
            for w in nbrs[v]:
                if w in left:
                    left.discard(w)
                    comp.append(w)
                    q.append(w)
        comps.append(sorted(comp))
    return comps


def fiedler_vector(A: np.ndarray) -> np.ndarray:
    """Eigenvector of the second-smallest Laplacian eigenvalue."""
    return fiedler_space(A)[:, 0]


def fiedler_space(A: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Eigenvectors whose eigenvalue ties the second-smallest one.

    On symmetric structures (rings of cliques, equal planted blocks) the
    Fiedler eigenvalue is repeated and any single vector from the solver is
    an arbitrary rotation; returning the whole tied space lets the caller
    split without depending on that rotation.
    """
    L = np.diag(A.sum(axis=1)) - A
    vals, vecs = np.linalg.eigh(L)
    scale = max(1.0, abs(vals[-1]))
    tied = np.abs(vals[1:] - vals[1]) <= rtol * scale
    d = int(np.argmin(tied)) if not tied.all() else len(tied)
    return vecs[:, 1:1 + d]


def _two_means(X: np.ndarray, seed: int = 0, n_init: int = 16) -> np.ndarray:
    # deterministic 2-means on rows of X; returns a boolean side per row
    from scipy.cluster.vq import kmeans2

    rng = np.random.default_rng(seed)
    best, best_sse = None, np.inf
    for _ in range(n_init):
        centroids, labels = kmeans2(X, 2, minit="++", seed=rng)
        if len(set(labels.tolist())) < 2:
            continue
        sse = float(((X - centroids[labels]) ** 2).sum())
        if sse < best_sse - 1e-12:
            best, best_sse = labels, sse
    if best is None:
        raise RuntimeError("2-means collapsed to a single side")
    return best.astype(bool)


def _gap_split(idx: np.ndarray, vec: np.ndarray) -> tuple[list[int], list[int]]:
    # exact 1-D two-means: the threshold along the sorted Fiedler values that
    # minimises the within-side sum of squares
    order = np.lexsort((idx, vec))
    x = vec[order]
    m = len(x)
    size = np.arange(1, m)
    csum = np.cumsum(x)[:-1]
    total = x.sum()
    # between-group spread; maximising it minimises the within-group SSE
    spread = csum**2 / size + (total - csum) ** 2 / (m - size)
    p = int(np.argmax(np.round(spread, 12))) + 1
    return sorted(idx[order[:p]].tolist()), sorted(idx[order[p:]].tolist())


def _sign_split(idx: np.ndarray, vec: np.ndarray) -> tuple[list[int], list[int]]:
    tol = 1e-10 * max(1.0, np.abs(vec).max())
    pos = idx[vec > tol].tolist()
    neg = idx[vec < -tol].tolist()
    zero = idx[np.abs(vec) <= tol].tolist()
    # zeros join the smaller side
    if len(pos) <= len(neg):
        pos += zero
    else:
        neg += zero
    return sorted(pos), sorted(neg)


def _bisect(nodes: list[int], A: np.ndarray, nbrs: list[set[int]], split: str) -> tuple[list[int], list[int]]:
    comps = _components(nodes, nbrs)
    if len(comps) > 1:
        # a disconnected piece splits along its components, balancing sizes
        left: list[int] = []
        right: list[int] = []
        for comp in sorted(comps, key=lambda c: (-len(c), c[0])):
            (left if len(left) <= len(right) else right).extend(comp)
        return sorted(left), sorted(right)
    idx = np.array(nodes)
    space = fiedler_space(A[np.ix_(idx, idx)])
    if split == "gap":
        if space.shape[1] == 1:
            return _gap_split(idx, space[:, 0])
        side = _two_means(space)
        return sorted(idx[side].tolist()), sorted(idx[~side].tolist())
    a, b = _sign_split(idx, space[:, 0])
    if not a or not b:
        half = len(nodes) // 2
        return nodes[:half], nodes[half:]
    return a, b


def spectral_clusters(g: StaticGraph, k: int = 4, split: str = "gap") -> CliquePartition:
    """Recursive Fiedler bisection into ``k`` (a power of two) clusters.

    Each piece is cut along its Fiedler vector: ``split="gap"`` takes the
    threshold that best separates the values into two groups (1-D two-means,
    or 2-means over the whole eigenspace when the Fiedler eigenvalue is
    repeated), ``split="sign"`` cuts at zero with
    zero entries joining the smaller side. The sign cut is unreliable when the
    second Laplacian eigenvalue is (nearly) repeated, as it is for symmetric
    block structures. A disconnected piece is split along its components.

    Clusters are numbered by their smallest node id; two clusters are
    neighbouring when at least one edge of ``g`` joins them.
    """
    if split not in ("gap", "sign"):
        raise ValueError(f"unknown split rule {split!r}")
    if k < 1 or k & (k - 1):
        raise ValueError(f"k={k} must be a power of two")
    if k > g.n:
        raise ValueError(f"k={k} exceeds node count {g.n}")
    A = g.adjacency()
    nbrs = [set(x) for x in g.neighbors()]
    clusters = [list(range(g.n))]
    while len(clusters) < k:
        # bisect the largest piece (ties: smallest first node)
        big = min(range(len(clusters)), key=lambda i: (-len(clusters[i]), clusters[i][0]))
        clusters[big:big + 1] = _bisect(clusters[big], A, nbrs, split)

    clusters.sort(key=lambda c: c[0])
    assignment = np.empty(g.n, dtype=int)
    for cid, members in enumerate(clusters):
        assignment[members] = cid
    adj = np.zeros((k, k), dtype=bool)
    for u, v in g.edges:
        a, b = assignment[u], assignment[v]
        if a != b:
            adj[a, b] = adj[b, a] = True
    return CliquePartition(assignment, adj)


# -- centralities


def _bfs_distances(nbrs: list[list[int]], s: int) -> np.ndarray:
    dist = np.full(len(nbrs), -1)
    dist[s] = 0
    q = deque([s])
    while q:
        v = q.popleft()
        for w in nbrs[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def eigenvector_centrality(A: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Power iteration on A + I (same eigenvectors, no bipartite oscillation)."""
    n = A.shape[0]
    M = A + np.eye(n)
    x = np.ones(n) / np.sqrt(n)
    for _ in range(max_iter):
        y = M @ x
        y /= np.linalg.norm(y)
        if np.abs(y - x).max() < tol:
            return y
        x = y
    raise RuntimeError("eigenvector centrality did not converge")


def centralities(g: StaticGraph) -> dict[str, np.ndarray]:
    """Degree, closeness, betweenness (unnormalised, unordered pairs), eigenvector.

    Closeness is (n - 1) / sum of distances on a connected graph; when the
    graph is disconnected every node gets the harmonic variant
    sum(1 / d) / (n - 1) instead.
    """
    nbrs = g.neighbors()
    n = g.n
    degree = np.array([len(x) for x in nbrs], dtype=float)
    dists = [_bfs_distances(nbrs, s) for s in range(n)]
    connected = all((d >= 0).all() for d in dists)
    closeness = np.zeros(n)
    for s, d in enumerate(dists):
        if connected:
            total = d.sum()
            closeness[s] = (n - 1) / total if total > 0 else 0.0
        else:
            reach = d[d > 0]
            closeness[s] = (1.0 / reach).sum() / (n - 1) if n > 1 else 0.0
    betweenness, _ = _brandes(g)
    return {
        "degree": degree,
        "closeness": closeness,
        "betweenness": betweenness,
        "eigenvector": eigenvector_centrality(g.adjacency()),
    }
