"""Data-utility metrics comparing a graph with its anonymized version."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .communities import leiden
from .graph import (Graph, GraphError, average_clustering, average_path_length,
                    betweenness, lcc_fraction)
from .seeds import derive_seed

NMI_NORMALIZATION = "arithmetic"


@dataclass(frozen=True)
class Partition:
    """Community label per node, relabelled densely in first-seen order."""

    labels: tuple[int, ...]

    def __init__(self, labels: Sequence[int]):
        remap: dict = {}
        dense = tuple(remap.setdefault(x, len(remap)) for x in labels)
        object.__setattr__(self, "labels", dense)

    @property
    def community_count(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def __len__(self) -> int:
        return len(self.labels)

    def communities(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.community_count)]
        for v, c in enumerate(self.labels):
            out[c].append(v)
        return out


def detect_communities(g: Graph, seed: int = 0) -> Partition:
    if g.node_count == 0:
        raise GraphError("empty graph")
    return Partition(leiden(g, seed))


def _entropy(counts: np.ndarray, total: int) -> float:
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def nmi(p1: Partition | Sequence[int], p2: Partition | Sequence[int]) -> float:
    """Normalised mutual information ``2 I / (H1 + H2)`` with natural logs.

    Two single-community partitions compare as 1.0.
    """
    a = np.asarray(p1.labels if isinstance(p1, Partition) else Partition(p1).labels)
    b = np.asarray(p2.labels if isinstance(p2, Partition) else Partition(p2).labels)
    if a.shape != b.shape:
        raise GraphError(f"partitions cover {a.size} and {b.size} nodes")
    n = a.size
    if n == 0:
        raise GraphError("empty partitions")
    ka, kb = int(a.max()) + 1, int(b.max()) + 1
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    # one nonzero per row and column: identical up to relabeling, exactly 1
    if ka == kb and np.count_nonzero(table) == ka:
        return 1.0
    ra, rb = table.sum(axis=1), table.sum(axis=0)
    h1, h2 = _entropy(ra, n), _entropy(rb, n)
    i, j = np.nonzero(table)
    nij = table[i, j].astype(float)
    mi = float((nij / n * np.log(n * nij / (ra[i] * rb[j]))).sum())
    return min(1.0, max(0.0, 2 * mi / (h1 + h2)))


def nmi_stability(partitions: Sequence[Partition]) -> float:
    """Mean NMI over unordered pairs of partitions."""
    if len(partitions) < 2:
        raise ValueError("need at least two partitions")
    vals = [nmi(a, b) for a, b in itertools.combinations(partitions, 2)]
    return sum(vals) / len(vals)


def nmi_anon(parts_orig: Sequence[Partition], parts_anon: Sequence[Partition]) -> float:
    """Mean NMI over all (original, anonymized) partition pairs."""
    if not parts_orig or not parts_anon:
        raise ValueError("need at least one partition on each side")
    total = sum(nmi(a, b) for a in parts_orig for b in parts_anon)
    return total / (len(parts_orig) * len(parts_anon))


def nmi_utility(stability: float, anon: float) -> float:
    return max(0.0, stability - anon)


def top_nodes(scores: Sequence[float], top_n: int) -> list[int]:
    """Indices of the ``top_n`` largest scores; ties go to the smaller id."""
    order = sorted(range(len(scores)), key=lambda v: (-scores[v], v))
    return order[:top_n]


def top_central_overlap(g: Graph, g_anon: Graph, top_n: int = 100, *,
                        mode: str = "auto", pivots: int = 1000, seed: int = 0,
                        scores: tuple[Sequence[float], Sequence[float]] | None = None) -> float:
    """Fraction of the ``top_n`` betweenness-central nodes of ``g`` that drop out."""
    if g.node_count != g_anon.node_count:
        raise GraphError("graphs have different node counts")
    if top_n > g.node_count:
        raise GraphError(f"top_n={top_n} exceeds node count {g.node_count}")
    if top_n < 1:
        raise ValueError("top_n must be positive")
    if scores is None:
        scores = (betweenness(g, mode, pivots=pivots, seed=seed).scores,
                  betweenness(g_anon, mode, pivots=pivots, seed=seed).scores)
    a = set(top_nodes(scores[0], top_n))
    b = set(top_nodes(scores[1], top_n))
    return 1 - len(a & b) / top_n


@dataclass
class UtilityConfig:
    runs: int = 20
    top_n: int = 100
    seed: int = 0
    path_mode: str = "auto"
    sources: int = 1000
    pivots: int = 1000


@dataclass
class UtilityReport:
    frac_edges_deleted: float
    delta_clustering: float
    delta_path_length: float
    delta_lcc: float
    nmi_utility: float
    centrality_top_changed: float
    signed: dict = field(default_factory=dict)
    absolute_fallback: list = field(default_factory=list)
    nmi_stability: float = 0.0
    nmi_anon: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _relative(name: str, x: float, y: float, fallback: list) -> tuple[float, float]:
    if x == 0:
        fallback.append(name)
        return abs(y - x), y - x
    return abs(y - x) / abs(x), (y - x) / abs(x)


def utility_report(g: Graph, g_anon: Graph, config: UtilityConfig | None = None) -> UtilityReport:
    """All six utility metrics for ``g_anon`` relative to ``g``.

    Structural deltas are relative to the original value; when that value is
    0 the absolute difference is reported and the metric is listed in
    ``absolute_fallback``.
    """
    cfg = config or UtilityConfig()
    if g.node_count != g_anon.node_count:
        raise GraphError("graphs have different node counts")
    if g.edge_count == 0:
        raise GraphError("original graph has no edges")
    fallback: list[str] = []
    signed: dict[str, float] = {}

    m0, m1 = g.edge_count, g_anon.edge_count
    frac_deleted = (m0 - m1) / m0

    c0, c1 = average_clustering(g), average_clustering(g_anon)
    d_clust, signed["clustering"] = _relative("clustering", c0, c1, fallback)

    path_seed = derive_seed(cfg.seed, "path")
    p0 = average_path_length(g, cfg.path_mode, sources=cfg.sources, seed=path_seed)
    p1 = average_path_length(g_anon, cfg.path_mode, sources=cfg.sources, seed=path_seed)
    d_path, signed["path_length"] = _relative("path_length", p0.value, p1.value, fallback)

    l0, l1 = lcc_fraction(g), lcc_fraction(g_anon)
    d_lcc, signed["lcc"] = _relative("lcc", l0, l1, fallback)

    seeds = [derive_seed(cfg.seed, "leiden", i) for i in range(cfg.runs)]
    parts0 = [detect_communities(g, s) for s in seeds]
    parts1 = [detect_communities(g_anon, s) for s in seeds]
    stab = nmi_stability(parts0) if cfg.runs >= 2 else 1.0
    anon = nmi_anon(parts0, parts1)

    top_n = min(cfg.top_n, g.node_count)
    bseed = derive_seed(cfg.seed, "betweenness")
    b0 = betweenness(g, cfg.path_mode, pivots=cfg.pivots, seed=bseed)
    b1 = betweenness(g_anon, cfg.path_mode, pivots=cfg.pivots, seed=bseed)
    top_changed = top_central_overlap(g, g_anon, top_n, scores=(b0.scores, b1.scores))

    meta = {
        "seed": cfg.seed, "runs": cfg.runs, "top_n": top_n,
        "nmi_normalization": NMI_NORMALIZATION,
        "path_mode": p0.mode, "path_sources": p0.sources,
        "betweenness_mode": b0.mode, "betweenness_pivots": b0.pivots,
        "original": {"edges": m0, "clustering": c0, "path_length": p0.value, "lcc": l0},
        "anonymized": {"edges": m1, "clustering": c1, "path_length": p1.value, "lcc": l1},
    }
    return UtilityReport(frac_deleted, d_clust, d_path, d_lcc, nmi_utility(stab, anon),
                         top_changed, signed, fallback, stab, anon, meta)
