"""Simple undirected graphs and the structural kernels used throughout.

Nodes are dense integer ids ``0..n-1``. Adjacency is kept as one ``set`` per
node so that edge deletion and neighbourhood intersection are cheap;
:meth:`Graph.neighbors` hands out the sorted view.
"""

from __future__ import annotations

import io
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

log = logging.getLogger(__name__)

#: Node count from which path length and betweenness switch to sampling.
EXACT_LIMIT = 20_000


class GraphError(ValueError):
    """Invalid graph operation (bad node id, missing edge, ...)."""


class ParseError(GraphError):
    """Malformed edge-list input."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def canonical(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise GraphError(f"self-loop {u}-{v} is not an edge")
    return (u, v) if u < v else (v, u)


@dataclass
class LoadSummary:
    nodes: int = 0
    edges: int = 0
    lines: int = 0
    duplicates: int = 0
    self_loops: int = 0

    def as_dict(self) -> dict:
        return dict(nodes=self.nodes, edges=self.edges, lines=self.lines,
                    duplicates=self.duplicates, self_loops=self.self_loops)


class Graph:
    """Simple undirected graph on dense integer ids."""

    __slots__ = ("_adj", "_m", "labels")

    def __init__(self, n: int = 0, edges: Iterable[tuple[int, int]] = (),
                 labels: Sequence[str] | None = None):
        if n < 0:
            raise GraphError("node count must be non-negative")
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._m = 0
        self.labels = list(labels) if labels is not None else None
        for u, v in edges:
            self.add_edge(u, v)

    # -- construction -------------------------------------------------
    def add_edge(self, u: int, v: int) -> bool:
        """Insert edge; returns False if it was already present."""
        self._check(u)
        self._check(v)
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        if v in self._adj[u]:
            return False
        self._adj[u].add(v)
        self._adj[v].add(u)
        self._m += 1
        return True

    def copy(self) -> Graph:
        g = Graph.__new__(Graph)
        g._adj = [set(a) for a in self._adj]
        g._m = self._m
        g.labels = self.labels
        return g

    # -- accessors ----------------------------------------------------
    @property
    def node_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return self._m

    def __len__(self) -> int:
        return len(self._adj)

    def _check(self, v: int) -> None:
        if not (0 <= v < len(self._adj)):
            raise GraphError(f"invalid node id {v!r}")

    def neighbors(self, v: int) -> list[int]:
        self._check(v)
        return sorted(self._adj[v])

    def adj(self, v: int) -> set[int]:
        """Raw neighbour set. Do not mutate."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < len(self._adj) and v in self._adj[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Canonical edges ``(u, v)``, ``u < v``, in lexicographic order."""
        for u, nbrs in enumerate(self._adj):
            for v in sorted(nbrs):
                if v > u:
                    yield (u, v)

    def edge_list(self) -> list[tuple[int, int]]:
        return list(self.edges())

    def common_neighbors(self, u: int, v: int) -> set[int]:
        a, b = self._adj[u], self._adj[v]
        return a & b if len(a) <= len(b) else b & a

    # -- mutation -------------------------------------------------------
    def delete_edge(self, u: int, v: int) -> set[int]:
        """Remove ``{u, v}`` and return the affected node set.

        The affected set is ``{u, v}`` plus their common neighbours, which is
        exactly the set of nodes whose (degree, triangle) signature changes.
        """
        self._check(u)
        self._check(v)
        if v not in self._adj[u]:
            raise GraphError(f"edge ({u}, {v}) not in graph")
        common = self.common_neighbors(u, v)
        self._adj[u].discard(v)
        self._adj[v].discard(u)
        self._m -= 1
        common.add(u)
        common.add(v)
        return common

    def audit(self) -> None:
        """Raise ``GraphError`` if any structural invariant is broken."""
        total = 0
        for v, nbrs in enumerate(self._adj):
            if v in nbrs:
                raise GraphError(f"self-loop at {v}")
            for w in nbrs:
                if not (0 <= w < len(self._adj)) or v not in self._adj[w]:
                    raise GraphError(f"asymmetric adjacency {v}->{w}")
            total += len(nbrs)
        if total != 2 * self._m:
            raise GraphError(f"edge count {self._m} != half degree sum {total / 2}")

    def to_csr(self) -> sp.csr_matrix:
        n = len(self._adj)
        rows, cols = [], []
        for u, v in self.edges():
            rows += (u, v)
            cols += (v, u)
        data = np.ones(len(rows), dtype=np.int8)
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


# ---------------------------------------------------------------------------
# I/O

def load_edge_list(stream: TextIO | str, *, extra_columns: bool = False,
                   labels: Sequence[str] | None = None, strict_labels: bool = False,
                   return_summary: bool = False):
    """Read a whitespace-separated edge list.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. Labels are
    arbitrary strings mapped to dense ids in first-seen order. Duplicate edges
    and self-loops are dropped and counted in the summary.

    ``extra_columns`` accepts lines with more than two tokens (weights,
    timestamps) and keeps the first two. ``labels`` pre-seeds the id map, e.g.
    with the original graph's labels so that an anonymized edge list (which
    may have lost isolated nodes) lines up with it; with ``strict_labels`` an
    unknown label is a parse error.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    ids: dict[str, int] = {}
    if labels is not None:
        for lab in labels:
            ids.setdefault(str(lab), len(ids))
    pairs: list[tuple[int, int]] = []
    summary = LoadSummary()
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        toks = s.split()
        if len(toks) != 2 and not (extra_columns and len(toks) > 2):
            raise ParseError(f"expected 2 tokens, got {len(toks)}", lineno)
        summary.lines += 1
        if strict_labels:
            for t in toks[:2]:
                if t not in ids:
                    raise ParseError(f"unknown node label {t!r}", lineno)
        a = ids.setdefault(toks[0], len(ids))
        b = ids.setdefault(toks[1], len(ids))
        pairs.append((a, b))
    if not pairs and labels is None:
        raise ParseError("empty edge list")
    g = Graph(len(ids), labels=list(ids))
    for a, b in pairs:
        if a == b:
            summary.self_loops += 1
        elif not g.add_edge(a, b):
            summary.duplicates += 1
    summary.nodes, summary.edges = g.node_count, g.edge_count
    if summary.duplicates or summary.self_loops:
        log.warning("dropped %d duplicate edges and %d self-loops",
                    summary.duplicates, summary.self_loops)
    return (g, summary) if return_summary else g


def read_edge_list(path, **kw):
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, **kw)


def write_edge_list(g: Graph, path_or_stream, *, use_labels: bool = True) -> None:
    labels = g.labels if (use_labels and g.labels is not None) else None
    own = isinstance(path_or_stream, (str, bytes)) or hasattr(path_or_stream, "__fspath__")
    fh = open(path_or_stream, "w", encoding="utf-8") if own else path_or_stream
    try:
        for u, v in g.edges():
            if labels is not None:
                fh.write(f"{labels[u]} {labels[v]}\n")
            else:
                fh.write(f"{u} {v}\n")
    finally:
        if own:
            fh.close()


# ---------------------------------------------------------------------------
# kernels

def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def triangle_counts(g: Graph) -> list[int]:
    """Per-node triangle count ``tri(v)`` (edges among the neighbours of v)."""
    n = g.node_count
    tri = [0] * n
    for u in range(n):
        au = g.adj(u)
        for v in au:
            if v > u:
                c = len(g.common_neighbors(u, v))
                tri[u] += c
                tri[v] += c
    # every triangle at u was seen via both of its edges at u
    return [t // 2 for t in tri]


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted node lists, largest first (ties by smallest id)."""
    n = g.node_count
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.adj(x):
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    stack.append(y)
        comp.sort()
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def lcc_fraction(g: Graph) -> float:
    if g.node_count == 0:
        raise GraphError("empty graph")
    return len(connected_components(g)[0]) / g.node_count


def bfs_distances(g: Graph, s: int) -> list[int]:
    """Hop distances from ``s``; -1 for unreachable nodes."""
    dist = [-1] * g.node_count
    dist[s] = 0
    q = deque([s])
    while q:
        x = q.popleft()
        dx = dist[x] + 1
        for y in g.adj(x):
            if dist[y] < 0:
                dist[y] = dx
                q.append(y)
    return dist


@dataclass
class PathLengthResult:
    value: float
    mode: str
    sources: int
    pairs: int
    seed: int | None = None

    def __float__(self) -> float:
        return self.value


def _sample_sources(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=min(count, n), replace=False))


def average_path_length(g: Graph, mode: str = "auto", *, sources: int = 1000,
                        seed: int = 0, chunk: int = 256) -> PathLengthResult:
    """Mean hop distance over ordered pairs ``v != w`` at finite distance.

    ``mode`` is ``"exact"`` (BFS from every node), ``"sampled"`` (BFS from a
    seeded random subset of ``sources`` nodes) or ``"auto"`` (exact below
    :data:`EXACT_LIMIT` nodes).
    """
    n = g.node_count
    if n == 0:
        raise GraphError("empty graph")
    if mode == "auto":
        mode = "exact" if n < EXACT_LIMIT else "sampled"
    if mode == "exact":
        src = np.arange(n)
        used_seed = None
    elif mode == "sampled":
        src = _sample_sources(n, sources, seed)
        used_seed = seed
    else:
        raise ValueError(f"unknown mode {mode!r}")
    a = g.to_csr()
    total = 0
    pairs = 0
    for i in range(0, len(src), chunk):
        d = csgraph.shortest_path(a, method="D", unweighted=True, directed=False,
                                  indices=src[i:i + chunk])
        finite = np.isfinite(d) & (d > 0)
        total += int(d[finite].sum())
        pairs += int(finite.sum())
    if pairs == 0:
        raise GraphError("no pair of distinct nodes at finite distance")
    return PathLengthResult(total / pairs, mode, len(src), pairs, used_seed)


def clustering(g: Graph, tri: Sequence[int] | None = None) -> list[float]:
    """Local clustering; nodes of degree < 2 get 0."""
    if tri is None:
        tri = triangle_counts(g)
    out = []
    for v in range(g.node_count):
        d = g.degree(v)
        out.append(0.0 if d < 2 else tri[v] / (d * (d - 1) / 2))
    return out


def average_clustering(g: Graph) -> float:
    if g.node_count == 0:
        raise GraphError("empty graph")
    return sum(clustering(g)) / g.node_count


@dataclass
class BetweennessResult:
    scores: list[float]
    mode: str
    pivots: int
    seed: int | None = None

    def __getitem__(self, v: int) -> float:
        return self.scores[v]

    def __len__(self) -> int:
        return len(self.scores)


def _brandes_source(adj: list[set[int]], s: int, cb: list[float]) -> None:
    n = len(adj)
    sigma = [0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s] = 1
    dist[s] = 0
    order = []
    q = deque([s])
    while q:
        v = q.popleft()
        order.append(v)
        dv = dist[v] + 1
        sv = sigma[v]
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv
                q.append(w)
            if dist[w] == dv:
                sigma[w] += sv
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
        if w != s:
            cb[w] += delta[w]


def betweenness(g: Graph, mode: str = "auto", *, pivots: int = 1000,
                seed: int = 0) -> BetweennessResult:
    """Brandes betweenness over unordered pairs, no normalisation.

    Sampled mode accumulates from ``pivots`` seeded sources and rescales by
    ``n / pivots`` to estimate the exact score.
    """
    n = g.node_count
    if n == 0:
        raise GraphError("empty graph")
    if mode == "auto":
        mode = "exact" if n < EXACT_LIMIT else "sampled"
    if mode == "exact":
        src: Iterable[int] = range(n)
        count, used_seed, scale = n, None, 0.5
    elif mode == "sampled":
        src = [int(x) for x in _sample_sources(n, pivots, seed)]
        count, used_seed = len(src), seed
        scale = 0.5 * n / count
    else:
        raise ValueError(f"unknown mode {mode!r}")
    cb = [0.0] * n
    adj = [g.adj(v) for v in range(n)]
    for s in src:
        _brandes_source(adj, s, cb)
    return BetweennessResult([c * scale for c in cb], mode, count, used_seed)


def modularity(g: Graph, partition: Sequence[int]) -> float:
    """Newman modularity of a node -> community assignment."""
    n = g.node_count
    if len(partition) != n:
        raise GraphError(f"partition covers {len(partition)} of {n} nodes")
    m = g.edge_count
    if m == 0:
        return 0.0
    intra: dict[int, int] = {}
    tot: dict[int, int] = {}
    for v in range(n):
        c = partition[v]
        if c is None:
            raise GraphError(f"node {v} has no community")
        tot[c] = tot.get(c, 0) + g.degree(v)
    for u, v in g.edges():
        if partition[u] == partition[v]:
            intra[partition[u]] = intra.get(partition[u], 0) + 1
    q = 0.0
    for c, d in tot.items():
        q += intra.get(c, 0) / m - (d / (2 * m)) ** 2
    return q


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    avg_clustering: float
    avg_path_length: float
    lcc_fraction: float
    modularity: float | None = None
    path_mode: str = "exact"
    extra: dict = field(default_factory=dict)


def graph_stats(g: Graph, *, path_mode: str = "auto", seed: int = 0,
                partition: Sequence[int] | None = None) -> GraphStats:
    apl = average_path_length(g, path_mode, seed=seed)
    q = modularity(g, partition) if partition is not None else None
    return GraphStats(g.node_count, g.edge_count, average_clustering(g),
                      apl.value, lcc_fraction(g), q, apl.mode)
