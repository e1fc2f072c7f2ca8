"""Predecessor-set cover of a presentation.

The cover ``H`` is a finite automaton whose vertices ("hvertices") are sets
of presentation vertices and whose edges ("hedges") are ``S -a-> S'`` with
``S = pre_a(S')``. Right-infinite paths in ``H`` form the extension space and
``psi`` drops the first hedge of a path. Every point ``x`` of the shift lifts
canonically to the path whose n-th state is ``R(sigma^n x)``, the set of
vertices from which the tail ``sigma^n x`` is readable.

On the cover the preimage count is locally constant: the number of hedges
entering ``S`` equals ``#{a : pre_a(S) nonempty}``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NotInShiftError, PresentationError
from .presentations import EpPoint, Presentation, is_essential, normalize_ep, readable_from

__all__ = [
    "Hedge",
    "CoverGraph",
    "CoverPoint",
    "build_cover",
    "canonical_lift",
    "fiber",
    "preimage_count_N",
    "cover_N",
    "degree_m",
    "lift_preimages",
    "base_preimage_count",
    "cover_preimage_count",
    "verify_extension",
    "ExtensionReport",
]

MONOID_BUDGET = 100_000


class Hedge(NamedTuple):
    src: int
    label: int
    dst: int


def hvertex_key(S: frozenset[int]) -> tuple:
    """Larger sets first, then lexicographic on sorted contents."""
    return (-len(S), tuple(sorted(S)))


@dataclass(frozen=True)
class CoverGraph:
    """Predecessor-set automaton over ``base``.

    ``hvertices[i]`` is a frozenset of base vertex ids; hedges refer to
    hvertex indices and base symbol ids. ``canonical[i]`` records whether
    ``hvertices[i]`` equals ``R(x)`` for some eventually periodic ``x``;
    ``canonical_exact`` is False when that search was cut off by its budget.
    """

    base: Presentation
    hvertices: tuple[frozenset[int], ...]
    hedges: tuple[Hedge, ...]
    canonical: tuple[bool, ...]
    canonical_exact: bool = True

    @property
    def size(self) -> int:
        return len(self.hvertices)

    @cached_property
    def index(self) -> dict[frozenset[int], int]:
        return {S: i for i, S in enumerate(self.hvertices)}

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(self.base.set_name(S) for S in self.hvertices)

    @cached_property
    def in_hedges(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in self.hvertices]
        for k, h in enumerate(self.hedges):
            out[h.dst].append(k)
        return tuple(tuple(x) for x in out)

    @cached_property
    def out_hedges(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in self.hvertices]
        for k, h in enumerate(self.hedges):
            out[h.src].append(k)
        return tuple(tuple(x) for x in out)

    @cached_property
    def N(self) -> tuple[int, ...]:
        """Preimage count per hvertex: number of symbols with nonempty predecessor set."""
        g = self.base
        return tuple(sum(1 for a in range(len(g.alphabet)) if g.pre(a, S)) for S in self.hvertices)

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.size, self.size))
        for h in self.hedges:
            A[h.src, h.dst] += 1
        return A

    def lookup(self, S) -> int:
        """Hvertex index from an index, a set of base vertex ids, or a name like ``"{A,B}"``."""
        if isinstance(S, (int, np.integer)):
            if not 0 <= S < self.size:
                raise PresentationError(f"no hvertex with index {S}")
            return int(S)
        if isinstance(S, str):
            if S in self.names:
                return self.names.index(S)
            inner = S.strip().strip("{}")
            S = frozenset(self.base.vertex_index[v.strip()] for v in inner.split(",") if v.strip())
        S = frozenset(S)
        if S not in self.index:
            raise PresentationError(f"{self.base.set_name(S)} is not an hvertex")
        return self.index[S]

    def hedge_pre(self, a: int, dst: int) -> int | None:
        """Source hvertex of the ``a``-hedge into ``dst``, if any."""
        S = self.base.pre(a, self.hvertices[dst])
        return self.index.get(S) if S else None

    def to_dict(self) -> dict:
        g = self.base
        return {
            "alphabet": list(g.alphabet),
            "vertices": list(self.names),
            "edges": [
                {"src": self.names[h.src], "dst": self.names[h.dst], "label": g.alphabet[h.label]}
                for h in self.hedges
            ],
            "canonical": {n: c for n, c in zip(self.names, self.canonical)},
            "N": {n: k for n, k in zip(self.names, self.N)},
        }


# ---------------------------------------------------------------------------
# Construction


def _pre_closure(g: Presentation, seeds: Iterable[frozenset[int]]) -> set[frozenset[int]]:
    seen = set(S for S in seeds if S)
    queue = deque(sorted(seen, key=hvertex_key))
    while queue:
        S = queue.popleft()
        for a in range(len(g.alphabet)):
            T = g.pre(a, S)
            if T and T not in seen:
                seen.add(T)
                queue.append(T)
    return seen


def _stable_sets_monoid(g: Presentation, budget: int) -> set[frozenset[int]] | None:
    """All sets ``lim_n t^n(V)`` for ``t`` in the monoid generated by the ``pre_a``.

    A map is stored by its values on singletons (the maps preserve unions).
    Returns None when the monoid is larger than ``budget``.
    """
    nv = len(g.vertices)
    gens = [tuple(g.pre(a, frozenset([v])) for v in range(nv)) for a in range(len(g.alphabet))]

    def apply(t, S):
        out: set[int] = set()
        for v in S:
            out |= t[v]
        return frozenset(out)

    def compose(t, s):  # t after s
        return tuple(apply(t, s[v]) for v in range(nv))

    seen = set(gens)
    queue = deque(gens)
    while queue:
        t = queue.popleft()
        for s in gens:
            ts = compose(t, s)
            if ts not in seen:
                if len(seen) >= budget:
                    return None
                seen.add(ts)
                queue.append(ts)
    stable = set()
    V = g.all_vertices
    for t in seen:
        S = V
        while True:
            T = apply(t, S)
            if T == S:
                break
            S = T
        if S:
            stable.add(S)
    return stable


def _stable_sets_search(g: Presentation, max_len: int) -> set[frozenset[int]]:
    stable = set()
    V = g.all_vertices
    for n in range(1, max_len + 1):
        for w in product(range(len(g.alphabet)), repeat=n):
            S = V
            while True:
                T = g.pre_word(w, S)
                if T == S:
                    break
                S = T
            if S:
                stable.add(S)
    return stable


def _essential_core(g: Presentation, family: set[frozenset[int]]) -> tuple[list[frozenset[int]], list[tuple]]:
    hedges = set()
    for Sp in family:
        for a in range(len(g.alphabet)):
            S = g.pre(a, Sp)
            if S:
                hedges.add((S, a, Sp))
    alive = set(family)
    while True:
        hedges = {h for h in hedges if h[0] in alive and h[2] in alive}
        keep = {h[0] for h in hedges} & {h[2] for h in hedges}
        if keep == alive:
            break
        alive = keep
    return sorted(alive, key=hvertex_key), sorted(hedges, key=lambda h: (hvertex_key(h[0]), h[1], hvertex_key(h[2])))


def build_cover(g: Presentation, monoid_budget: int = MONOID_BUDGET) -> CoverGraph:
    """Predecessor-set cover of an essential presentation.

    Hvertices are the nonempty sets reachable from the full vertex set under
    the maps ``pre_a``, pruned to the essential part. Each is flagged
    canonical when it is ``R(x)`` for an eventually periodic point ``x``.
    """
    if not is_essential(g):
        raise PresentationError("build_cover needs an essential presentation; call essentialize first")
    family = _pre_closure(g, [g.all_vertices])
    verts, raw = _essential_core(g, family)
    assert verts, "an essential presentation has a nonempty cover"
    index = {S: i for i, S in enumerate(verts)}
    hedges = tuple(Hedge(index[S], a, index[Sp]) for S, a, Sp in raw)

    stable = _stable_sets_monoid(g, monoid_budget)
    exact = stable is not None
    if stable is None:
        stable = _stable_sets_search(g, max_len=min(8, 2 * len(g.vertices)))
    canon = _pre_closure(g, stable)
    return CoverGraph(g, tuple(verts), hedges, tuple(S in canon for S in verts), exact)


# ---------------------------------------------------------------------------
# Points of the cover


@dataclass(frozen=True, order=True)
class CoverPoint:
    """Eventually periodic path in the cover.

    Stored as a normalized eventually periodic sequence of
    ``(hvertex index, label name)`` pairs: the n-th pair is the state at
    time n and the label of the hedge leaving it.
    """

    prefix: tuple[tuple[int, str], ...]
    cycle: tuple[tuple[int, str], ...]

    def __post_init__(self):
        pre, cyc = normalize_ep(tuple(self.prefix), tuple(self.cycle))
        object.__setattr__(self, "prefix", pre)
        object.__setattr__(self, "cycle", cyc)

    def _at(self, n: int) -> tuple[int, str]:
        k = len(self.prefix)
        return self.prefix[n] if n < k else self.cycle[(n - k) % len(self.cycle)]

    def state(self, n: int) -> int:
        return self._at(n)[0]

    def states(self, n: int) -> tuple[int, ...]:
        return tuple(self.state(i) for i in range(n))

    @property
    def labels(self) -> EpPoint:
        return EpPoint(tuple(p[1] for p in self.prefix), tuple(p[1] for p in self.cycle))

    def shift(self, n: int = 1) -> "CoverPoint":
        k = len(self.prefix)
        if n <= k:
            return CoverPoint(self.prefix[n:], self.cycle)
        r = (n - k) % len(self.cycle)
        return CoverPoint((), self.cycle[r:] + self.cycle[:r])

    def check_path(self, H: CoverGraph) -> bool:
        """Path condition ``state[n] = pre_{label[n]}(state[n+1])`` over preperiod plus two periods."""
        g = H.base
        for n in range(len(self.prefix) + 2 * len(self.cycle)):
            s, a = self._at(n)
            if g.pre(g.symbol_index[a], H.hvertices[self.state(n + 1)]) != H.hvertices[s]:
                return False
        return True

    def describe(self, H: CoverGraph) -> str:
        def part(seq):
            return " ".join(f"{H.names[s]}-{a}->" for s, a in seq)

        return f"{part(self.prefix)} ({part(self.cycle)})".strip()


def _require_in_shift(g: Presentation, x: EpPoint) -> frozenset[int]:
    R = readable_from(g, x)
    if not R:
        raise NotInShiftError(f"{x} is not a point of the shift")
    return R


def canonical_lift(g: Presentation, H: CoverGraph, x: EpPoint) -> CoverPoint:
    """Lift of ``x`` whose n-th state is ``R(sigma^n x)``."""
    _require_in_shift(g, x)
    n0, p = len(x.preperiod), len(x.period)

    def pair(n: int) -> tuple[int, str]:
        return H.lookup(readable_from(g, x.shift(n))), x.symbol(n)

    return CoverPoint(tuple(pair(n) for n in range(n0)), tuple(pair(n) for n in range(n0, n0 + p)))


def fiber(H: CoverGraph, x: EpPoint) -> set[CoverPoint]:
    """All eventually periodic cover paths labeled ``x``.

    Along the periodic part the state at the start of each period block is
    obtained from the next one by ``T = pre_v``; an eventually periodic
    solution is therefore periodic under ``T`` from the first block on, and
    distinct ``T``-periodic hvertices give distinct fiber points.
    """
    g = H.base
    if not readable_from(g, x):
        raise NotInShiftError(f"{x} is not a point of the shift")
    u, v = g.word(x.preperiod), g.word(x.period)

    def T(i: int) -> int | None:
        S = g.pre_word(v, H.hvertices[i])
        return H.index.get(S) if S else None

    points = set()
    for q0 in range(H.size):
        orbit = [q0]
        j = T(q0)
        while j is not None and j not in orbit:
            orbit.append(j)
            j = T(j)
        if j != q0:
            continue
        # orbit = q0, T q0, T^2 q0, ...; block states run Q_0, Q_1 = T^{q-1} q0, ...
        q = len(orbit)
        blocks = [orbit[(-m) % q] for m in range(q)]
        if not g.pre_word(u, H.hvertices[q0]):
            continue
        cycle = []
        for m in range(q):
            nxt = H.hvertices[blocks[(m + 1) % q]]
            for i in range(len(v)):
                S = g.pre_word(v[i:], nxt)
                cycle.append((H.index[S], x.period[i]))
        prefix = []
        for n in range(len(u)):
            S = g.pre_word(u[n:], H.hvertices[q0])
            prefix.append((H.index[S], x.preperiod[n]))
        points.add(CoverPoint(tuple(prefix), tuple(cycle)))
    return points


# ---------------------------------------------------------------------------
# Preimage counts


def preimage_count_N(g: Presentation, x: EpPoint) -> int:
    """``#sigma^{-1}(x)``: symbols ``a`` with ``a x`` in the shift."""
    R = _require_in_shift(g, x)
    return sum(1 for a in range(len(g.alphabet)) if g.pre(a, R))


def cover_N(H: CoverGraph, S) -> int:
    """``#psi^{-1}(c)`` for any cover point ``c`` starting at hvertex ``S``."""
    return H.N[H.lookup(S)]


def degree_m(H: CoverGraph, p: CoverPoint) -> int:
    """``#psi^{-1}(psi(p))``, the preimage count at the second state."""
    return H.N[p.state(1)]


def lift_preimages(H: CoverGraph, p: CoverPoint) -> list[CoverPoint]:
    """``psi^{-1}(p)``: prepend every hedge entering the first state."""
    g = H.base
    out = []
    for k in H.in_hedges[p.state(0)]:
        h = H.hedges[k]
        out.append(CoverPoint(((h.src, g.alphabet[h.label]),) + p.prefix, p.cycle))
    return out


def base_preimage_count(g: Presentation, x: EpPoint, k: int) -> int:
    """``#sigma^{-k}(x)``, counted over predecessor sets of ``R(x)``."""
    R = _require_in_shift(g, x)
    layer = {R: 1}
    for _ in range(k):
        nxt: dict[frozenset[int], int] = {}
        for S, c in layer.items():
            for a in range(len(g.alphabet)):
                T = g.pre(a, S)
                if T:
                    nxt[T] = nxt.get(T, 0) + c
        layer = nxt
    return sum(layer.values())


def cover_preimage_count(H: CoverGraph, state: int, k: int) -> int:
    """Number of cover paths of length ``k`` ending at hvertex ``state`` (exact integers)."""
    counts = [0] * H.size
    counts[state] = 1
    for _ in range(k):
        nxt = [0] * H.size
        for h in H.hedges:
            nxt[h.src] += counts[h.dst]
        counts = nxt
    return sum(counts)


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass
class Check:
    name: str
    subject: str
    passed: bool
    detail: str = ""


@dataclass
class ExtensionReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, subject: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, subject, bool(ok), detail))


def verify_extension(
    g: Presentation, H: CoverGraph, sample: Sequence[EpPoint], max_k: int = 8
) -> ExtensionReport:
    """Cross-check the cover against the base shift on sample points.

    Checks per point: the preimages of the canonical lift are exactly the
    canonical lifts of the preimages and their number is ``N(x)``; sums of
    every cylinder indicator of depth <= 2 over preimages agree on both
    sides; iterated preimage counts agree for ``k <= max_k``. Structural
    checks: every hvertex has in- and out-hedges, at most one hedge per
    (label, target), and the in-degree equals ``N``.
    """
    rep = ExtensionReport()
    for i in range(H.size):
        name = H.names[i]
        rep.add("out-degree", name, len(H.out_hedges[i]) >= 1)
        rep.add("in-degree", name, len(H.in_hedges[i]) >= 1)
        labels = [H.hedges[k].label for k in H.in_hedges[i]]
        rep.add("past-determinism", name, len(labels) == len(set(labels)))
        rep.add("in-degree equals N", name, len(labels) == H.N[i], f"{len(labels)} vs {H.N[i]}")

    words = [()] + [(a,) for a in g.alphabet] + [(a, b) for a in g.alphabet for b in g.alphabet]
    for x in sample:
        subject = str(x)
        R = readable_from(g, x)
        if not R:
            rep.add("membership", subject, False, "not a point of the shift")
            continue
        lift = canonical_lift(g, H, x)
        pre_lifts = lift_preimages(H, lift)
        base_pre = [x.prepend((a,)) for a in g.alphabet if readable_from(g, x.prepend((a,)))]
        rep.add(
            "preimage count",
            subject,
            len(pre_lifts) == len(base_pre) == preimage_count_N(g, x),
            f"cover {len(pre_lifts)}, base {len(base_pre)}",
        )
        lifted = {canonical_lift(g, H, y) for y in base_pre}
        rep.add("preimages of lifts are lifts", subject, set(pre_lifts) == lifted)
        ok = True
        for w in words:
            base_sum = sum(1 for y in base_pre if y.prefix(len(w)) == w)
            cover_sum = sum(1 for c in pre_lifts if c.labels.prefix(len(w)) == w)
            ok &= base_sum == cover_sum
        rep.add("cylinder sums over preimages", subject, ok)
        counts = [
            (cover_preimage_count(H, lift.state(0), k), base_preimage_count(g, x, k)) for k in range(1, max_k + 1)
        ]
        rep.add("iterated preimage counts", subject, all(a == b for a, b in counts), str(counts))
    return rep
