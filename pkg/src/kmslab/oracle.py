"""Brute-force reference computations.

Everything here is written directly from the definitions and shares no
traversal code with the main modules; only the data types are imported.
The enumerations are exponential and guarded by an :class:`OracleBudget`
that raises instead of truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .cover import CoverGraph, Hedge
from .errors import BudgetExceeded
from .presentations import EpPoint, Potential, Presentation

__all__ = [
    "OracleBudget",
    "readable_set",
    "member",
    "brute_preimages",
    "brute_cover",
    "brute_rho",
    "brute_cycles",
    "brute_membership_words",
]


@dataclass
class OracleBudget:
    """Limits for brute-force enumeration.

    ``max_length`` bounds word lengths, ``max_graph`` the number of graph
    vertices, ``max_count`` the number of enumerated objects.
    """

    max_length: int = 14
    max_graph: int = 64
    max_count: int = 5_000_000
    used: int = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.max_count:
            raise BudgetExceeded(f"budget exceeded: more than {self.max_count} enumeration steps")

    def length(self, n: int) -> None:
        if n > self.max_length:
            raise BudgetExceeded(f"budget exceeded: length {n} > {self.max_length}")

    def graph(self, n: int) -> None:
        if n > self.max_graph:
            raise BudgetExceeded(f"budget exceeded: graph with {n} vertices > {self.max_graph}")


def _edges_by_name(g: Presentation) -> list[tuple[str, str, str]]:
    return [(g.vertices[e.src], g.vertices[e.dst], g.alphabet[e.label]) for e in g.edges]


def readable_set(g: Presentation, x: EpPoint) -> frozenset[str]:
    """Names of vertices from which ``x`` is readable.

    Builds the product of the graph with the positions of ``x`` (the last
    position loops back to the start of the period) and repeatedly deletes
    nodes without successors; a surviving node has an infinite path.
    """
    word = list(x.preperiod) + list(x.period)
    n0, L = len(x.preperiod), len(word)
    edges = _edges_by_name(g)
    succ: dict[tuple[str, int], set[tuple[str, int]]] = {}
    for v in g.vertices:
        for p in range(L):
            nxt = p + 1 if p + 1 < L else n0
            succ[(v, p)] = {(d, nxt) for s, d, a in edges if s == v and a == word[p]}
    alive = set(succ)
    changed = True
    while changed:
        changed = False
        for node in list(alive):
            if not (succ[node] & alive):
                alive.discard(node)
                changed = True
    return frozenset(v for v in g.vertices if (v, 0) in alive)


def member(g: Presentation, x: EpPoint) -> bool:
    return bool(readable_set(g, x))


def _forward(g: Presentation, T: frozenset[str], a: str) -> frozenset[str]:
    return frozenset(d for s, d, b in _edges_by_name(g) if b == a and s in T)


def brute_membership_words(g: Presentation, n: int, budget: OracleBudget | None = None) -> set[tuple[str, ...]]:
    """All words of length ``n`` that label some path."""
    budget = budget or OracleBudget()
    budget.length(n)
    out = set()
    for w in product(g.alphabet, repeat=n):
        budget.tick()
        T = frozenset(g.vertices)
        for a in w:
            T = _forward(g, T, a)
            if not T:
                break
        if T:
            out.add(w)
    return out


def brute_preimages(
    g: Presentation, x: EpPoint, n: int, budget: OracleBudget | None = None, words: bool = False
) -> tuple[int, list[tuple[str, ...]]]:
    """``#sigma^{-n}(x)`` by enumerating readable words ``w`` with ``w x`` in X.

    ``w x`` is in X exactly when some path labeled ``w`` ends where ``x`` is
    readable. With ``words=False`` the count is accumulated over forward
    vertex sets (same enumeration, merged by set) and the word list is empty.
    """
    budget = budget or OracleBudget()
    budget.length(n)
    budget.graph(len(g.vertices))
    Rx = readable_set(g, x)
    start = frozenset(g.vertices)
    if words:
        found: list[tuple[str, ...]] = []

        def dfs(T: frozenset[str], w: tuple[str, ...]) -> None:
            budget.tick()
            if len(w) == n:
                if T & Rx:
                    found.append(w)
                return
            for a in g.alphabet:
                U = _forward(g, T, a)
                if U:
                    dfs(U, w + (a,))

        if Rx:
            dfs(start, ())
        return len(found), found
    layer = {start: 1}
    for _ in range(n):
        nxt: dict[frozenset[str], int] = {}
        for T, c in layer.items():
            for a in g.alphabet:
                budget.tick()
                U = _forward(g, T, a)
                if U:
                    nxt[U] = nxt.get(U, 0) + c
        layer = nxt
    return sum(c for T, c in layer.items() if T & Rx), []


def brute_cover(g: Presentation, ell: int = 8, budget: OracleBudget | None = None) -> CoverGraph:
    """Cover built from readable sets of all eventually periodic points.

    Collects ``R(x)`` for every ``x = u (v)`` with ``|u| + |v| <= ell``,
    closes the family under nonempty predecessor sets and adds the hedges
    ``pre_a(S') -a-> S'``. Only canonical hvertices can appear.
    """
    budget = budget or OracleBudget()
    budget.length(ell)
    budget.graph(len(g.vertices))
    edges = _edges_by_name(g)

    def pre(a: str, T: frozenset[str]) -> frozenset[str]:
        return frozenset(s for s, d, b in edges if b == a and d in T)

    family: set[frozenset[str]] = set()
    for total in range(1, ell + 1):
        for plen in range(1, total + 1):
            for u in product(g.alphabet, repeat=total - plen):
                for v in product(g.alphabet, repeat=plen):
                    budget.tick()
                    R = readable_set(g, EpPoint(u, v))
                    if R:
                        family.add(R)
    todo = list(family)
    while todo:
        S = todo.pop()
        for a in g.alphabet:
            T = pre(a, S)
            if T and T not in family:
                family.add(T)
                todo.append(T)
    vid = {v: i for i, v in enumerate(g.vertices)}
    sets = sorted((frozenset(vid[v] for v in S) for S in family), key=lambda S: (-len(S), sorted(S)))
    index = {S: i for i, S in enumerate(sets)}
    hedges = []
    for Sp in sets:
        named_Sp = frozenset(g.vertices[i] for i in Sp)
        for a in g.alphabet:
            S = pre(a, named_Sp)
            if S:
                hedges.append(Hedge(index[frozenset(vid[v] for v in S)], g.alphabet.index(a), index[Sp]))
    hedges.sort(key=lambda h: (h.src, h.label, h.dst))
    return CoverGraph(g, tuple(sets), tuple(hedges), tuple(True for _ in sets))


def _word_value(F: Potential, g: Presentation, word: tuple[str, ...]) -> float:
    single = all(len(a) == 1 for a in g.alphabet)
    for key, val in F.table.items():
        k = tuple(key) if not isinstance(key, str) else (tuple(c for c in key if not c.isspace()) if single else tuple(key.split()))
        if k == word:
            return float(val)
    if F.default is None:
        raise KeyError(word)
    return float(F.default)


def brute_rho(
    g_or_H,
    F: Potential,
    beta: float,
    n: int,
    budget: OracleBudget | None = None,
    sample: Sequence[EpPoint] | None = None,
    seed_length: int = 4,
) -> tuple[float, float]:
    """Bracket ``(lower, upper)`` for the spectral radius of ``L_{-beta F}``.

    With ``W_n(x)`` the sum over n-th preimages ``y`` of
    ``exp(-beta * (F(y) + F(sigma y) + ... ))``, the minimum of ``W_n`` over
    a set closed under taking preimages is supermultiplicative in ``n`` and
    the maximum submultiplicative, so ``(min W_n)^{1/n} <= rho <= (max W_n)^{1/n}``.

    On a presentation the points are a sample of eventually periodic points
    closed under prepending symbols, identified by the data ``W`` depends on
    (readable set and the first ``depth - 1`` symbols); the default sample
    starts from all points ``u (v)`` with ``|u| + |v| <= seed_length``. On a
    cover the states are the hvertices and paths are enumerated directly.
    """
    budget = budget or OracleBudget()
    budget.length(n)
    if isinstance(g_or_H, CoverGraph):
        return _brute_rho_cover(g_or_H, F, beta, n, budget)
    g = g_or_H
    budget.graph(len(g.vertices))
    if F.kind != "label":
        raise ValueError("cover potentials need the cover graph")
    k = F.depth
    edges = _edges_by_name(g)

    def pre(a: str, T: frozenset[str]) -> frozenset[str]:
        return frozenset(s for s, d, b in edges if b == a and d in T)

    if sample is None:
        sample = []
        for total in range(1, seed_length + 1):
            for plen in range(1, total + 1):
                for u in product(g.alphabet, repeat=total - plen):
                    for v in product(g.alphabet, repeat=plen):
                        sample.append(EpPoint(u, v))
    keys = set()
    for x in sample:
        R = readable_set(g, x)
        if R:
            keys.add((R, x.prefix(k - 1)))
    todo = list(keys)
    while todo:
        R, head = todo.pop()
        for a in g.alphabet:
            budget.tick()
            Ra = pre(a, R)
            if Ra:
                key = (Ra, ((a,) + head)[: k - 1])
                if key not in keys:
                    keys.add(key)
                    todo.append(key)
    memo: dict = {}

    def W(key, r: int) -> float:
        if r == 0:
            return 1.0
        if (key, r) in memo:
            return memo[(key, r)]
        R, head = key
        total = 0.0
        for a in g.alphabet:
            budget.tick()
            Ra = pre(a, R)
            if not Ra:
                continue
            word = ((a,) + head)[:k]
            total += math.exp(-beta * _word_value(F, g, word)) * W((Ra, ((a,) + head)[: k - 1]), r - 1)
        memo[(key, r)] = total
        return total

    vals = [W(key, n) for key in keys]
    return min(vals) ** (1.0 / n), max(vals) ** (1.0 / n)


def _brute_rho_cover(H: CoverGraph, F: Potential, beta: float, n: int, budget: OracleBudget) -> tuple[float, float]:
    g = H.base
    names = [g.set_name(S) for S in H.hvertices]

    def weight(h: Hedge) -> float:
        if F.kind == "cover":
            val = F.table.get(names[h.src], F.default)
            return float(val)
        return _word_value(F, g, (g.alphabet[h.label],))

    vals = []
    for S in range(len(H.hvertices)):
        # Every path of n hedges ending at S, enumerated backwards.
        total = 0.0
        stack = [(S, 0, 0.0)]
        while stack:
            state, depth, acc = stack.pop()
            budget.tick()
            if depth == n:
                total += math.exp(-beta * acc)
                continue
            for h in H.hedges:
                if h.dst == state:
                    stack.append((h.src, depth + 1, acc + weight(h)))
        vals.append(total)
    return min(vals) ** (1.0 / n), max(vals) ** (1.0 / n)


def brute_cycles(
    n_vertices: int, edges: Sequence[tuple[int, int, object]], budget: OracleBudget | None = None
) -> list[tuple[tuple[int, ...], object]]:
    """All simple cycles as ``(edge indices, mean weight)``.

    Each cycle is listed once, starting from its smallest vertex.
    """
    budget = budget or OracleBudget(max_graph=7)
    budget.graph(n_vertices)
    out = []

    def extend(start: int, v: int, used_v: set[int], path: list[int]) -> None:
        for k, (s, d, _) in enumerate(edges):
            if s != v:
                continue
            budget.tick()
            if d == start:
                cyc = path + [k]
                ws = [edges[e][2] for e in cyc]
                if all(isinstance(w, Fraction) for w in ws):
                    mean = sum(ws, Fraction(0)) / len(ws)
                else:
                    mean = math.fsum(float(w) for w in ws) / len(ws)
                out.append((tuple(cyc), mean))
            elif d > start and d not in used_v:
                used_v.add(d)
                extend(start, d, used_v, path + [k])
                used_v.discard(d)

    for start in range(n_vertices):
        extend(start, start, {start}, [])
    return out
