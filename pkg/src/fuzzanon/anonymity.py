"""(deg, tri) signatures and fuzzy phi-k-anonymity.

``w`` is phi-similar to ``v`` when ``|deg(v)-deg(w)| <= phi*deg(v)`` and
``|tri(v)-tri(w)| <= phi*tri(v)``. Tolerances are relative to ``v``, so the
relation is not symmetric. All comparisons are done by integer
cross-multiplication with ``phi`` held as a :class:`fractions.Fraction`; a
zero degree or triangle count therefore demands an exact match in that
coordinate.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .graph import Graph, GraphError, triangle_counts


class Signature(NamedTuple):
    deg: int
    tri: int


def as_phi(value) -> Fraction:
    """Parse ``phi`` from a Fraction, int, ``"5%"``, ``"1/20"`` or ``"0.05"``.

    Floats are converted through their shortest repr, so ``0.05`` becomes
    exactly 1/20.
    """
    if isinstance(value, Fraction):
        phi = value
    elif isinstance(value, int):
        phi = Fraction(value)
    elif isinstance(value, float):
        phi = Fraction(repr(value))
    elif isinstance(value, str):
        s = value.strip()
        phi = Fraction(s[:-1].strip()) / 100 if s.endswith("%") else Fraction(s)
    else:
        raise TypeError(f"cannot interpret {value!r} as phi")
    if phi < 0:
        raise ValueError(f"phi must be non-negative, got {phi}")
    return phi


def format_phi(phi: Fraction) -> str:
    return f"{phi.numerator}/{phi.denominator}"


def phi_threshold(s: Signature, phi) -> tuple[int, int]:
    """Largest admissible ``(Δdeg, Δtri)`` around ``s``: floor(phi*x) each."""
    phi = as_phi(phi)
    num, den = phi.numerator, phi.denominator
    return (s[0] * num // den, s[1] * num // den)


def is_phi_similar(sv: Signature, sw: Signature, phi) -> bool:
    """True iff ``sw`` falls inside the phi-window of ``sv``."""
    phi = as_phi(phi)
    num, den = phi.numerator, phi.denominator
    return (abs(sv[0] - sw[0]) * den <= num * sv[0]
            and abs(sv[1] - sw[1]) * den <= num * sv[1])


def reverse_degree_range(deg: int, phi: Fraction) -> tuple[int, int | None]:
    """Degrees ``d`` whose window contains ``deg``; ``None`` means unbounded."""
    num, den = phi.numerator, phi.denominator
    lo = -(-deg * den // (den + num))
    hi = deg * den // (den - num) if num < den else None
    return lo, hi


def signatures(g: Graph) -> list[Signature]:
    tri = triangle_counts(g)
    return [Signature(len(g.adj(v)), tri[v]) for v in range(g.node_count)]


def count_signature(g: Graph, v: int) -> tuple[int, int]:
    """COUNT measure: nodes and edges of the closed 1-neighbourhood of ``v``."""
    d = g.degree(v)
    nbrs = g.adj(v)
    tri = sum(len(nbrs & g.adj(w)) for w in nbrs) // 2
    return (d + 1, d + tri)


class SignatureIndex:
    """Static degree-sorted index over per-node signatures."""

    def __init__(self, sigs: Sequence[Signature]):
        self.sigs = [Signature(*s) for s in sigs]
        self.order = sorted(range(len(self.sigs)), key=lambda v: self.sigs[v][0])
        self.degs = [self.sigs[v][0] for v in self.order]

    def count(self, s: Signature, phi, cap: int | None = None) -> int:
        phi = as_phi(phi)
        num, den = phi.numerator, phi.denominator
        deg, tri = s
        dd = deg * num // den
        lo = bisect_left(self.degs, deg - dd)
        hi = bisect_right(self.degs, deg + dd)
        total = 0
        for i in range(lo, hi):
            t = self.sigs[self.order[i]][1]
            if abs(tri - t) * den <= num * tri:
                total += 1
                if cap is not None and total >= cap:
                    break
        return total


def phi_similar_count(sigs: Sequence[Signature], v: int, phi, cap: int | None = None,
                      index: SignatureIndex | None = None) -> int:
    """Size of the phi-similar set of node ``v`` (counting ``v`` itself).

    Counting stops once ``cap`` is reached. Pass a prebuilt ``index`` when
    querying many nodes of the same signature list.
    """
    if not 0 <= v < len(sigs):
        raise GraphError(f"invalid node id {v!r}")
    if index is None:
        index = SignatureIndex(sigs)
    return index.count(Signature(*sigs[v]), phi, cap)


class SignatureTable:
    """Dynamic multiset of signatures with exact phi-similar counts.

    For every distinct signature ``s`` present, ``cnt[s]`` is the number of
    nodes whose signature lies in the window of ``s``; a node is anonymous iff
    ``cnt[sig(node)] >= k``. ``anonymous`` tracks how many nodes that is.
    Adding or removing one signature touches only the signatures whose window
    contains it.
    """

    def __init__(self, phi, k: int, sigs: Iterable[Signature] = ()):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.phi = as_phi(phi)
        self.k = k
        self._num = self.phi.numerator
        self._den = self.phi.denominator
        self.mult: dict[tuple[int, int], int] = {}
        self.cnt: dict[tuple[int, int], int] = {}
        self.by_deg: dict[int, dict[int, int]] = {}
        self.degs: list[int] = []
        self.anonymous = 0
        self.size = 0
        self._bulk_load(sigs)

    def _bulk_load(self, sigs: Iterable[Signature]) -> None:
        mult = Counter(tuple(s) for s in sigs)
        for s, c in mult.items():
            self.mult[s] = c
            self.by_deg.setdefault(s[0], {})[s[1]] = c
        self.degs = sorted(self.by_deg)
        self.size = sum(mult.values())
        k = self.k
        for s, c in mult.items():
            n = self._forward(s)
            self.cnt[s] = n
            if n >= k:
                self.anonymous += c

    def _forward(self, s: tuple[int, int]) -> int:
        deg, tri = s
        num, den = self._num, self._den
        if num == 0:
            return self.mult.get(s, 0)
        dd = deg * num // den
        tl = num * tri
        degs = self.degs
        total = 0
        for i in range(bisect_left(degs, deg - dd), bisect_right(degs, deg + dd)):
            for t, c in self.by_deg[degs[i]].items():
                if abs(tri - t) * den <= tl:
                    total += c
        return total

    def _reverse(self, s: tuple[int, int]) -> list[tuple[int, int]]:
        """Present signatures whose window contains ``s``."""
        if self._num == 0:
            return [s] if s in self.mult else []
        deg, tri = s
        num, den = self._num, self._den
        lo, hi = reverse_degree_range(deg, self.phi)
        degs = self.degs
        i = bisect_left(degs, lo)
        j = bisect_right(degs, hi) if hi is not None else len(degs)
        out = []
        for x in range(i, j):
            d = degs[x]
            for t in self.by_deg[d]:
                if abs(t - tri) * den <= num * t:
                    out.append((d, t))
        return out

    def add(self, s: tuple[int, int]) -> None:
        k = self.k
        if s not in self.mult:
            self.mult[s] = 0
            row = self.by_deg.get(s[0])
            if row is None:
                row = self.by_deg[s[0]] = {}
                insort(self.degs, s[0])
            row[s[1]] = 0
            self.cnt[s] = self._forward(s)
        cnt, mult = self.cnt, self.mult
        for r in self._reverse(s):
            c = cnt[r] + 1
            cnt[r] = c
            if c == k:
                self.anonymous += mult[r]
        mult[s] += 1
        self.by_deg[s[0]][s[1]] += 1
        if cnt[s] >= k:
            self.anonymous += 1
        self.size += 1

    def remove(self, s: tuple[int, int]) -> None:
        k = self.k
        cnt, mult = self.cnt, self.mult
        m = mult[s] - 1
        mult[s] = m
        self.by_deg[s[0]][s[1]] = m
        if cnt[s] >= k:
            self.anonymous -= 1
        for r in self._reverse(s):
            c = cnt[r]
            if c == k:
                self.anonymous -= mult[r]
            cnt[r] = c - 1
        if m == 0:
            del mult[s]
            del cnt[s]
            row = self.by_deg[s[0]]
            del row[s[1]]
            if not row:
                del self.by_deg[s[0]]
                self.degs.pop(bisect_left(self.degs, s[0]))
        self.size -= 1

    def is_anonymous(self, s: tuple[int, int]) -> bool:
        return self.cnt[s] >= self.k

    def fraction(self) -> float:
        return self.anonymous / self.size if self.size else 1.0

    def snapshot(self) -> tuple[dict, dict, int]:
        return dict(self.mult), dict(self.cnt), self.anonymous


@dataclass
class AnonymityReport:
    phi: Fraction
    k: int
    anonymous_flags: list[bool]
    fraction_anonymous: float
    unique_nodes: set[int] = field(default_factory=set)

    @property
    def unique_count(self) -> int:
        return len(self.unique_nodes)

    @property
    def node_count(self) -> int:
        return len(self.anonymous_flags)

    def as_row(self) -> dict:
        return {"phi": format_phi(self.phi), "k": self.k,
                "fraction_anonymous": self.fraction_anonymous,
                "unique_count": self.unique_count}


def report_from_signatures(sigs: Sequence[Signature], phi, k: int) -> AnonymityReport:
    if k < 2:
        raise ValueError("k must be >= 2")
    phi = as_phi(phi)
    table = SignatureTable(phi, k, sigs)
    flags = [table.cnt[tuple(s)] >= k for s in sigs]
    unique = {v for v, f in enumerate(flags) if not f}
    frac = (len(flags) - len(unique)) / len(flags) if flags else 1.0
    return AnonymityReport(phi, k, flags, frac, unique)


def anonymity_report(g: Graph, phi, k: int = 2) -> AnonymityReport:
    """Per-node phi-k-anonymity flags and the anonymous fraction.

    ``unique_nodes`` holds the nodes that are not phi-k-anonymous; at ``k=2``
    these are the unique nodes in the usual sense.
    """
    return report_from_signatures(signatures(g), phi, k)


def uniqueness_reduction(report_zero: AnonymityReport, report_phi: AnonymityReport) -> float:
    """Share of the nodes unique at phi=0 that are anonymous at the larger phi."""
    if report_zero.node_count != report_phi.node_count:
        raise GraphError("reports cover different node counts")
    if report_zero.phi != 0:
        raise ValueError("first report must be computed at phi=0")
    if report_zero.k != report_phi.k:
        raise ValueError("reports use different k")
    unique = report_zero.unique_nodes
    if not unique:
        return 0.0
    flags = report_phi.anonymous_flags
    return sum(1 for v in unique if flags[v]) / len(unique)
