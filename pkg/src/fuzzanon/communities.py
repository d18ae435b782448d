"""Seeded Leiden-style modularity maximisation.

Three phases repeat on successively aggregated graphs: fast local moving,
refinement of each community into well-connected sub-communities, and
aggregation on the refined partition (seeded by the unrefined one). The run
stops once local moving leaves every aggregate node in its own community.
"""

from __future__ import annotations

import math
import random
from collections import deque

from .graph import Graph

WeightedAdj = list[dict[int, float]]


def _move_nodes(nbrs: WeightedAdj, strength: list[float], part: list[int],
                rng: random.Random, m2: float, gamma: float) -> bool:
    n = len(nbrs)
    tot = [0.0] * n
    size = [0] * n
    for v in range(n):
        tot[part[v]] += strength[v]
        size[part[v]] += 1
    free = [c for c in range(n) if size[c] == 0]
    order = list(range(n))
    rng.shuffle(order)
    queue = deque(order)
    queued = [True] * n
    moved = False
    while queue:
        v = queue.popleft()
        queued[v] = False
        cv = part[v]
        kv = strength[v]
        wc: dict[int, float] = {}
        for u, w in nbrs[v].items():
            c = part[u]
            wc[c] = wc.get(c, 0.0) + w
        tot[cv] -= kv
        size[cv] -= 1
        scale = gamma * kv / m2
        best = cv
        best_gain = wc.get(cv, 0.0) - scale * tot[cv]
        for c, w in wc.items():
            gain = w - scale * tot[c]
            if gain > best_gain:
                best, best_gain = c, gain
        if best_gain < 0 and size[cv] > 0:
            best = free.pop() if free else cv
        if best != cv and size[cv] == 0:
            free.append(cv)
        tot[best] += kv
        size[best] += 1
        if best != cv:
            part[v] = best
            moved = True
            for u in nbrs[v]:
                if not queued[u] and part[u] != best:
                    queued[u] = True
                    queue.append(u)
    return moved


def _refine(nbrs: WeightedAdj, strength: list[float], part: list[int],
            rng: random.Random, m2: float, gamma: float, theta: float) -> list[int]:
    n = len(nbrs)
    refined = list(range(n))
    rtot = list(strength)
    rsize = [1] * n
    ctot: dict[int, float] = {}
    members: dict[int, list[int]] = {}
    for v in range(n):
        ctot[part[v]] = ctot.get(part[v], 0.0) + strength[v]
        members.setdefault(part[v], []).append(v)
    kin = [sum(w for u, w in nbrs[v].items() if part[u] == part[v]) for v in range(n)]
    rext = list(kin)
    for c in sorted(members):
        nodes = members[c]
        if len(nodes) == 1:
            continue
        cs = ctot[c]
        rng.shuffle(nodes)
        for v in nodes:
            if rsize[refined[v]] != 1:
                continue
            kv = strength[v]
            if kin[v] < gamma * kv * (cs - kv) / m2:
                continue
            wt: dict[int, float] = {}
            for u, w in nbrs[v].items():
                if part[u] == c:
                    t = refined[u]
                    wt[t] = wt.get(t, 0.0) + w
            own = refined[v]
            cands = [(own, 0.0)]
            for t, w in wt.items():
                if t == own:
                    continue
                if rext[t] < gamma * rtot[t] * (cs - rtot[t]) / m2:
                    continue
                gain = w - gamma * kv * rtot[t] / m2
                if gain >= 0:
                    cands.append((t, gain))
            if len(cands) == 1:
                continue
            top = max(g for _, g in cands)
            weights = [math.exp((g - top) / theta) for _, g in cands]
            r = rng.random() * sum(weights)
            acc = 0.0
            choice = cands[-1][0]
            for (t, _), wgt in zip(cands, weights):
                acc += wgt
                if r < acc:
                    choice = t
                    break
            if choice == own:
                continue
            w_to = wt[choice]
            refined[v] = choice
            rsize[own] -= 1
            rsize[choice] += 1
            rtot[choice] += kv
            rext[choice] += kin[v] - 2 * w_to
    return refined


def _dense(labels: list[int]) -> tuple[list[int], int]:
    remap: dict[int, int] = {}
    out = [remap.setdefault(x, len(remap)) for x in labels]
    return out, len(remap)


def _aggregate(nbrs: WeightedAdj, strength: list[float], groups: list[int], count: int):
    new_nbrs: WeightedAdj = [{} for _ in range(count)]
    new_strength = [0.0] * count
    for v, a in enumerate(groups):
        new_strength[a] += strength[v]
        row = new_nbrs[a]
        for u, w in nbrs[v].items():
            b = groups[u]
            if a != b:
                row[b] = row.get(b, 0.0) + w
    return new_nbrs, new_strength


def leiden(g: Graph, seed: int = 0, *, resolution: float = 1.0, theta: float = 0.01,
           max_levels: int = 100) -> list[int]:
    """Community label per node, dense in first-seen order.

    ``theta`` is the randomness of the refinement step, applied to gains in
    edge-weight units.
    """
    n = g.node_count
    if n == 0:
        return []
    m2 = 2.0 * g.edge_count
    if m2 == 0:
        return list(range(n))
    rng = random.Random(seed)
    nbrs: WeightedAdj = [{u: 1.0 for u in sorted(g.adj(v))} for v in range(n)]
    strength = [float(len(g.adj(v))) for v in range(n)]
    membership = list(range(n))
    part = list(range(n))
    for _ in range(max_levels):
        _move_nodes(nbrs, strength, part, rng, m2, resolution)
        part, ncomm = _dense(part)
        if ncomm == len(nbrs):
            break
        refined, nref = _dense(_refine(nbrs, strength, part, rng, m2, resolution, theta))
        if nref == len(nbrs):
            # refinement merged nothing; fall back to the unrefined communities
            refined, nref = part, ncomm
        nbrs, strength = _aggregate(nbrs, strength, refined, nref)
        seed_part = [0] * nref
        for v, a in enumerate(refined):
            seed_part[a] = part[v]
        membership = [refined[x] for x in membership]
        part = seed_part
    labels, _ = _dense([part[x] for x in membership])
    return labels
