"""Seeded ER / BA / WS graph models.

All randomness goes through ``numpy.random.Generator`` on the PCG64 bit
generator, which is stable across platforms and numpy versions for the calls
used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError

MODELS = ("ER", "BA", "WS")


@dataclass(frozen=True)
class ModelSpec:
    model: str
    n: int
    m: int
    rewire_p: float = 0.05
    seed: int = 0

    def __post_init__(self):
        model = self.model.upper()
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise GraphError(f"unknown model {self.model!r}")
        if self.n < 2:
            raise GraphError("n must be >= 2")
        if self.m < 1:
            raise GraphError("m must be >= 1")
        if model == "WS":
            if 2 * self.m >= self.n:
                raise GraphError(f"WS needs 2m < n (got m={self.m}, n={self.n})")
            if not 0.0 <= self.rewire_p <= 1.0:
                raise GraphError("rewire_p must lie in [0, 1]")
        if model == "ER" and self.n * self.m > self.n * (self.n - 1) // 2:
            raise GraphError(f"ER with M={self.n * self.m} exceeds C(n,2)")
        if model == "BA" and self.m >= self.n:
            raise GraphError("BA needs m < n")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def erdos_renyi(n: int, edges: int, rng: np.random.Generator) -> Graph:
    """Uniform simple graph with exactly ``edges`` edges, G(n, M)."""
    total = n * (n - 1) // 2
    picks = np.sort(rng.choice(total, size=edges, replace=False))
    g = Graph(n)
    # unrank index -> (u, v) with rows of length n-1, n-2, ...
    row_start = np.cumsum(np.arange(n - 1, 0, -1)) - np.arange(n - 1, 0, -1)
    us = np.searchsorted(row_start, picks, side="right") - 1
    vs = picks - row_start[us] + us + 1
    for u, v in zip(us.tolist(), vs.tolist()):
        g.add_edge(u, v)
    return g


def barabasi_albert(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Preferential attachment starting from a complete graph on ``m`` nodes.

    Each arriving node links to ``m`` distinct existing nodes drawn with
    probability proportional to degree (uniformly while all degrees are 0).
    """
    g = Graph(n)
    repeated: list[int] = []
    for u in range(m):
        for v in range(u + 1, m):
            g.add_edge(u, v)
            repeated += (u, v)
    for new in range(m, n):
        targets: set[int] = set()
        if not repeated:
            targets.update(rng.choice(new, size=m, replace=False).tolist())
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            g.add_edge(new, t)
            repeated += (new, t)
    return g


def watts_strogatz(n: int, m: int, p: float, rng: np.random.Generator) -> Graph:
    """Ring lattice joining each node to ``2m`` neighbours, then rewiring.

    Lattice edge ``(u, u+j)`` is rewired with probability ``p`` to ``(u, w)``
    with ``w`` uniform among nodes that are neither ``u`` nor already adjacent.
    """
    g = Graph(n)
    for j in range(1, m + 1):
        for u in range(n):
            g.add_edge(u, (u + j) % n)
    if p <= 0:
        return g
    for j in range(1, m + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() >= p:
                continue
            if g.degree(u) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and not g.has_edge(u, w):
                    break
            g.delete_edge(u, v)
            g.add_edge(u, w)
    return g


def generate(spec: ModelSpec) -> Graph:
    rng = rng_for(spec.seed)
    if spec.model == "ER":
        return erdos_renyi(spec.n, spec.n * spec.m, rng)
    if spec.model == "BA":
        return barabasi_albert(spec.n, spec.m, rng)
    return watts_strogatz(spec.n, spec.m, spec.rewire_p, rng)


def ba_edge_count(n: int, m: int) -> int:
    return m * (n - m) + m * (m - 1) // 2


def ring_lattice_clustering(m: int) -> float:
    """Clustering of every node in a ring lattice with ``2m`` neighbours."""
    return 3 * (m - 1) / (2 * (2 * m - 1))
