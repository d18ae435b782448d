"""Independent brute-force references. Slow on purpose; none of this reuses
the package's kernels beyond the Graph container itself."""

from __future__ import annotations

import itertools
from collections import Counter, deque
from fractions import Fraction

import numpy as np

from fuzzanon.graph import Graph


def tri_bruteforce(g: Graph) -> list[int]:
    out = []
    for v in range(g.node_count):
        nb = sorted(g.adj(v))
        out.append(sum(1 for a, b in itertools.combinations(nb, 2) if g.has_edge(a, b)))
    return out


def sigs_bruteforce(g: Graph) -> list[tuple[int, int]]:
    tri = tri_bruteforce(g)
    return [(len(g.adj(v)), tri[v]) for v in range(g.node_count)]


def similar_ratio(sv, sw, phi: Fraction) -> bool:
    """Ratio form of the similarity test; a zero reference value admits only an exact match."""
    for a, b in zip(sv, sw):
        if a == 0:
            if b != 0:
                return False
        elif Fraction(abs(a - b), a) > phi:
            return False
    return True


def similar_count_naive(sigs, v, phi: Fraction) -> int:
    return sum(1 for w in range(len(sigs)) if similar_ratio(sigs[v], sigs[w], phi))


def flags_naive(sigs, phi: Fraction, k: int) -> list[bool]:
    # all pairs of distinct signatures, weighted by multiplicity
    mult = Counter(map(tuple, sigs))
    cnt = {s: sum(c for w, c in mult.items() if similar_ratio(s, w, phi)) for s in mult}
    return [cnt[tuple(s)] >= k for s in sigs]


def fraction_naive(g: Graph, phi: Fraction, k: int) -> Fraction:
    sigs = sigs_bruteforce(g)
    f = flags_naive(sigs, phi, k)
    return Fraction(sum(f), len(f))


def multiplicity_flags(sigs, k: int) -> list[bool]:
    c = Counter(map(tuple, sigs))
    return [c[tuple(s)] >= k for s in sigs]


def bfs(g: Graph, s: int) -> list[int]:
    dist = [-1] * g.node_count
    dist[s] = 0
    q = deque([s])
    while q:
        x = q.popleft()
        for y in g.adj(x):
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def all_shortest_paths(g: Graph, s: int, t: int) -> list[list[int]]:
    dist = bfs(g, s)
    if dist[t] < 0:
        return []
    paths = []

    def walk(path):
        x = path[-1]
        if x == s:
            paths.append(path[::-1])
            return
        for y in g.adj(x):
            if dist[y] == dist[x] - 1:
                walk(path + [y])

    walk([t])
    return paths


def betweenness_bruteforce(g: Graph) -> list[float]:
    """Unordered pairs, unnormalised: sum over s<t of frac. of s-t geodesics through v."""
    n = g.node_count
    cb = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        paths = all_shortest_paths(g, s, t)
        if not paths:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            cb[v] += sum(1 for p in paths if v in p) / len(paths)
    return cb


def path_length_pairwise(g: Graph) -> float:
    total = pairs = 0
    for s in range(g.node_count):
        d = bfs(g, s)
        for t in range(g.node_count):
            if t != s and d[t] > 0:
                total += d[t]
                pairs += 1
    return total / pairs


def modularity_direct(g: Graph, labels) -> float:
    """Q = 1/2m sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j)."""
    n, m = g.node_count, g.edge_count
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] != labels[j]:
                continue
            a = 1.0 if g.has_edge(i, j) else 0.0
            q += a - g.degree(i) * g.degree(j) / (2 * m)
    return q / (2 * m)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def nmi_direct(a, b) -> float:
    """Double loop over contingency cells with explicit probabilities."""
    n = len(a)
    ca, cb = Counter(a), Counter(b)
    cab = Counter(zip(a, b))
    ha = -sum(c / n * np.log(c / n) for c in ca.values())
    hb = -sum(c / n * np.log(c / n) for c in cb.values())
    if ha + hb == 0:
        return 1.0
    mi = sum(c / n * np.log((c / n) / ((ca[x] / n) * (cb[y] / n))) for (x, y), c in cab.items())
    return 2 * mi / (ha + hb)


def gain_bruteforce(g: Graph, e, phi: Fraction, k: int) -> Fraction:
    h = g.copy()
    h.delete_edge(*e)
    return fraction_naive(h, phi, k) - fraction_naive(g, phi, k)


def best_first_edge(g: Graph, phi: Fraction, k: int):
    """Best single deletion under (gain desc, unique endpoints desc, edge asc)."""
    sigs = sigs_bruteforce(g)
    anon = flags_naive(sigs, phi, k)
    best = None
    for u in range(g.node_count):
        for v in sorted(g.adj(u)):
            if v <= u:
                continue
            key = (-gain_bruteforce(g, (u, v), phi, k), -((not anon[u]) + (not anon[v])), (u, v))
            if best is None or key < best:
                best = key
    return best[2] if best else None
