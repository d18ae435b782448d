"""Budgeted edge-deletion anonymization (ES, UA, GREEDY).

Every algorithm works on an :class:`AnonymizerState`, which owns a private
copy of the graph together with current signatures and a
:class:`~fuzzanon.anonymity.SignatureTable`. Deleting an edge only changes
the signatures of its endpoints and their common neighbours, so both real and
hypothetical deletions are applied incrementally.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .anonymity import (Signature, SignatureTable, as_phi, format_phi,
                        report_from_signatures, signatures)
from .graph import Graph, GraphError

FULLY_ANONYMOUS = "fully_anonymous"
BUDGET_EXHAUSTED = "budget_exhausted"
TIMEOUT = "timeout"

ALGORITHMS = ("es", "ua", "greedy")


class StateMismatch(AssertionError):
    """Incremental state disagrees with a from-scratch recomputation."""


class AnonymizationTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class BudgetPolicy:
    fraction: float = 0.05

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError("budget fraction must lie in (0, 1]")

    def budget(self, edge_count: int) -> int:
        return math.floor(Fraction(repr(self.fraction)) * edge_count)

    def recompute_gap(self, edge_count: int) -> int:
        return max(1, self.budget(edge_count) // 20)


@dataclass
class AnonymizationTrace:
    algo: str
    phi: Fraction
    k: int
    seed: int | None
    budget: int
    recompute_gap: int
    deleted: list[tuple[int, int]] = field(default_factory=list)
    # fractions[0] is before any deletion, fractions[i] after the i-th
    fractions: list[float] = field(default_factory=list)
    status: str = BUDGET_EXHAUSTED
    elapsed: float = 0.0

    @property
    def final_fraction(self) -> float:
        return self.fractions[-1]

    def to_dict(self) -> dict:
        return {"algo": self.algo, "phi": format_phi(self.phi), "k": self.k,
                "seed": self.seed, "budget": self.budget,
                "recompute_gap": self.recompute_gap,
                "deleted": [list(e) for e in self.deleted],
                "fractions": self.fractions, "status": self.status,
                "elapsed": self.elapsed}

    @classmethod
    def from_dict(cls, d: dict) -> AnonymizationTrace:
        return cls(d["algo"], as_phi(d["phi"]), int(d["k"]), d.get("seed"),
                   int(d["budget"]), int(d.get("recompute_gap", 1)),
                   [tuple(e) for e in d["deleted"]], list(d["fractions"]),
                   d["status"], float(d.get("elapsed", 0.0)))

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


class AnonymizerState:
    """Current signatures and anonymity of a graph under edge deletions."""

    def __init__(self, g: Graph, phi, k: int = 2):
        self.graph = g.copy()
        self.phi = as_phi(phi)
        self.k = k
        self.sigs: list[Signature] = signatures(self.graph)
        self.table = SignatureTable(self.phi, k, self.sigs)

    @property
    def n(self) -> int:
        return len(self.sigs)

    @property
    def anonymous_count(self) -> int:
        return self.table.anonymous

    def fraction(self) -> float:
        return self.table.anonymous / self.n if self.n else 1.0

    def fully_anonymous(self) -> bool:
        return self.table.anonymous == self.n

    def is_anonymous(self, v: int) -> bool:
        return self.table.cnt[self.sigs[v]] >= self.k

    def flags(self) -> list[bool]:
        cnt, k = self.table.cnt, self.k
        return [cnt[s] >= k for s in self.sigs]

    def unique_nodes(self) -> set[int]:
        cnt, k = self.table.cnt, self.k
        return {v for v, s in enumerate(self.sigs) if cnt[s] < k}

    def affected_nodes(self, u: int, v: int) -> set[int]:
        if not self.graph.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) not in graph")
        out = self.graph.common_neighbors(u, v)
        out.add(u)
        out.add(v)
        return out

    def _changes(self, u: int, v: int) -> list[tuple[int, Signature, Signature]]:
        if not self.graph.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) not in graph")
        sigs = self.sigs
        common = self.graph.common_neighbors(u, v)
        c = len(common)
        su, sv = sigs[u], sigs[v]
        out = [(u, su, Signature(su[0] - 1, su[1] - c)),
               (v, sv, Signature(sv[0] - 1, sv[1] - c))]
        for w in common:
            sw = sigs[w]
            out.append((w, sw, Signature(sw[0], sw[1] - 1)))
        return out

    def gain_count(self, u: int, v: int) -> int:
        """Change in the number of anonymous nodes if ``{u, v}`` were deleted."""
        table = self.table
        before = table.anonymous
        changes = self._changes(u, v)
        for _, old, new in changes:
            table.remove(old)
            table.add(new)
        after = table.anonymous
        for _, old, new in reversed(changes):
            table.remove(new)
            table.add(old)
        return after - before

    def edge_gain(self, u: int, v: int) -> tuple[float, int]:
        """``(gain in anonymous fraction, currently-unique endpoints)``."""
        d = self.gain_count(u, v)
        return d / self.n, (not self.is_anonymous(u)) + (not self.is_anonymous(v))

    def delete(self, u: int, v: int) -> set[int]:
        changes = self._changes(u, v)
        affected = self.graph.delete_edge(u, v)
        table, sigs = self.table, self.sigs
        for w, old, new in changes:
            table.remove(old)
            table.add(new)
            sigs[w] = new
        return affected

    def check(self) -> None:
        """Compare against a from-scratch recomputation; raise on mismatch."""
        self.graph.audit()
        fresh = signatures(self.graph)
        if fresh != self.sigs:
            bad = [v for v in range(self.n) if fresh[v] != self.sigs[v]]
            raise StateMismatch(f"stale signatures at nodes {bad[:10]}")
        ref = SignatureTable(self.phi, self.k, fresh)
        if ref.snapshot() != self.table.snapshot():
            raise StateMismatch("signature table differs from recomputation")
        report = report_from_signatures(fresh, self.phi, max(self.k, 2)) if self.k >= 2 else None
        if report is not None and report.anonymous_flags != self.flags():
            raise StateMismatch("anonymity flags differ from recomputation")


def _check_input(g: Graph) -> None:
    if g.node_count == 0 or g.edge_count == 0:
        raise GraphError("anonymization needs a graph with at least one edge")


class _Run:
    """Shared bookkeeping: trace, budget, audit and deadline handling."""

    def __init__(self, algo, g, phi, k, policy, seed, audit, deadline):
        _check_input(g)
        policy = policy or BudgetPolicy()
        self.state = AnonymizerState(g, phi, k)
        self.budget = policy.budget(g.edge_count)
        self.gap = policy.recompute_gap(g.edge_count)
        self.trace = AnonymizationTrace(algo, self.state.phi, k, seed, self.budget,
                                        self.gap, fractions=[self.state.fraction()])
        self.audit = audit
        self.deadline = deadline
        self.t0 = time.perf_counter()

    @property
    def remaining(self) -> int:
        return self.budget - len(self.trace.deleted)

    def done(self) -> bool:
        return self.state.fully_anonymous() or self.remaining <= 0

    def delete(self, e: tuple[int, int]) -> None:
        self.state.delete(*e)
        self.trace.deleted.append(e)
        self.trace.fractions.append(self.state.fraction())
        if self.audit and len(self.trace.deleted) % self.gap == 0:
            self.state.check()

    def tick(self) -> None:
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise AnonymizationTimeout

    def finish(self) -> AnonymizationTrace:
        self.trace.status = FULLY_ANONYMOUS if self.state.fully_anonymous() else BUDGET_EXHAUSTED
        self.trace.elapsed = time.perf_counter() - self.t0
        return self.trace

    def timed_out(self) -> AnonymizationTrace:
        t = self.finish()
        t.status = TIMEOUT
        return t


def anonymize_es(g: Graph, phi, k: int = 2, policy: BudgetPolicy | None = None,
                 seed: int = 0, *, audit: bool = False,
                 deadline: float | None = None) -> AnonymizationTrace:
    """Edge Sampling: delete uniformly random edges until anonymous or out of budget."""
    run = _Run("es", g, phi, k, policy, seed, audit, deadline)
    rng = np.random.default_rng(seed)
    edges = run.state.graph.edge_list()
    order = rng.permutation(len(edges))
    try:
        for i in order:
            if run.done():
                break
            run.tick()
            run.delete(edges[i])
    except AnonymizationTimeout:
        return run.timed_out()
    return run.finish()


def ua_weights(state: AnonymizerState, edges: Sequence[tuple[int, int]]) -> np.ndarray:
    """``1 + |unique nodes among the affected set|`` for each edge."""
    unique = state.unique_nodes()
    g = state.graph
    w = np.empty(len(edges))
    for i, (u, v) in enumerate(edges):
        c = (u in unique) + (v in unique)
        if unique:
            c += len(g.common_neighbors(u, v) & unique)
        w[i] = 1 + c
    return w


def anonymize_ua(g: Graph, phi, k: int = 2, policy: BudgetPolicy | None = None,
                 seed: int = 0, *, audit: bool = False,
                 deadline: float | None = None) -> AnonymizationTrace:
    """Unique Affected: weighted random deletion favouring edges that touch unique nodes.

    Weights are recomputed every recompute-gap deletions; in between, edges
    are drawn without replacement using the last weights.
    """
    run = _Run("ua", g, phi, k, policy, seed, audit, deadline)
    rng = np.random.default_rng(seed)
    try:
        while not run.done():
            run.tick()
            edges = run.state.graph.edge_list()
            w = ua_weights(run.state, edges)
            batch = min(run.gap, run.remaining, len(edges))
            picks = rng.choice(len(edges), size=batch, replace=False, p=w / w.sum())
            for i in picks:
                if run.done():
                    break
                run.delete(edges[i])
    except AnonymizationTimeout:
        return run.timed_out()
    return run.finish()


def greedy_ranking(state: AnonymizerState,
                   tick: Callable[[], None] | None = None) -> list[tuple[int, int, tuple[int, int]]]:
    """All current edges as ``(gain_count, unique_endpoints, edge)``, best first.

    Order: gain descending, unique endpoints descending, edge ascending.
    """
    scored = []
    cnt, sigs, k = state.table.cnt, state.sigs, state.k
    for i, (u, v) in enumerate(state.graph.edges()):
        if tick is not None and i % 256 == 0:
            tick()
        d = state.gain_count(u, v)
        ue = (cnt[sigs[u]] < k) + (cnt[sigs[v]] < k)
        scored.append((d, ue, (u, v)))
    scored.sort(key=lambda x: (-x[0], -x[1], x[2]))
    return scored


def anonymize_greedy(g: Graph, phi, k: int = 2, policy: BudgetPolicy | None = None,
                     *, audit: bool = False, deadline: float | None = None) -> AnonymizationTrace:
    """Greedy marginal-gain deletion in batches of the recompute gap.

    Each round scores every edge by the anonymity gain of deleting it. If some
    edge makes every node anonymous, only that edge is deleted. Otherwise the
    top ``min(R, remaining budget)`` edges of the ranking are deleted, even
    when the best gain is negative.
    """
    run = _Run("greedy", g, phi, k, policy, None, audit, deadline)
    n = run.state.n
    try:
        while not run.done():
            run.tick()
            ranking = greedy_ranking(run.state, run.tick)
            if not ranking:
                break
            best_gain, _, best = ranking[0]
            if run.state.anonymous_count + best_gain == n:
                run.delete(best)
                break
            for _, _, e in ranking[:min(run.gap, run.remaining)]:
                run.delete(e)
    except AnonymizationTimeout:
        return run.timed_out()
    return run.finish()


def anonymize(g: Graph, algo: str, phi, k: int = 2, policy: BudgetPolicy | None = None,
              seed: int = 0, **kw) -> AnonymizationTrace:
    algo = algo.lower()
    if algo == "es":
        return anonymize_es(g, phi, k, policy, seed, **kw)
    if algo == "ua":
        return anonymize_ua(g, phi, k, policy, seed, **kw)
    if algo == "greedy":
        return anonymize_greedy(g, phi, k, policy, **kw)
    raise ValueError(f"unknown algorithm {algo!r}")


def apply_trace(g: Graph, trace: AnonymizationTrace) -> Graph:
    """Fresh copy of ``g`` with the trace's deletions applied."""
    h = g.copy()
    for u, v in trace.deleted:
        h.delete_edge(u, v)
    return h


def replay_fractions(g: Graph, trace: AnonymizationTrace) -> list[float]:
    """Recompute per-step fractions from scratch by replaying ``trace``."""
    h = g.copy()
    out = [report_from_signatures(signatures(h), trace.phi, trace.k).fraction_anonymous]
    for u, v in trace.deleted:
        h.delete_edge(u, v)
        out.append(report_from_signatures(signatures(h), trace.phi, trace.k).fraction_anonymous)
    return out
