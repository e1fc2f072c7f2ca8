"""Preimage growth rates and extremal Birkhoff averages.

Rates are natural logarithms. ``h_m`` is the exponential growth of the
largest number of n-th preimages, realized on the cover as the log Perron
root of its adjacency matrix. ``g_min`` is the growth of the smallest such
count over cover states.

For a locally constant potential the extremal Birkhoff averages are the
minimum and maximum mean weights of cycles in the graph carrying the
potential; they are computed with Karp's algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .cover import CoverGraph
from .errors import DepthError
from .perron import condensation, irreducible_root, perron
from .presentations import Potential, Presentation

__all__ = [
    "GrowthRates",
    "MeanCycleResult",
    "growth_rates",
    "edge_weights",
    "log_m_weights",
    "mean_cycle",
    "extremal_birkhoff",
    "finite_horizon",
    "path_count_extremes",
]

Graph = Union[Presentation, CoverGraph]
Weight = Union[Fraction, float]


@dataclass(frozen=True)
class GrowthRates:
    """Growth rates in nats with certified ``(lower, upper)`` brackets.

    ``brackets[name] = (lower, upper)`` for ``h_m``, ``g_min`` and ``g_max``,
    all obtained at ``horizon``.
    """

    h_m: float
    g_min: float
    g_max: float
    brackets: dict[str, tuple[float, float]]
    horizon: int
    exact_zero: bool = False


def path_count_extremes(H: CoverGraph, n: int) -> list[tuple[int, int]]:
    """``(min, max)`` over hvertices of the number of length-k paths ending there, k = 1..n."""
    counts = [1] * H.size
    out = []
    for _ in range(n):
        nxt = [0] * H.size
        for h in H.hedges:
            nxt[h.dst] += counts[h.src]
        counts = nxt
        out.append((min(counts), max(counts)))
    return out


def _all_cycles_simple(A: np.ndarray) -> bool:
    """True when every nontrivial strongly connected class is a single cycle."""
    cond = condensation(A)
    for cl, nt in zip(cond.classes, cond.nontrivial):
        if nt and any(A[np.ix_(cl, cl)].sum(axis=1) != 1):
            return False
    return True


def growth_rates(H: CoverGraph, horizon: int = 12) -> GrowthRates:
    """``h_m = g_max`` and ``g_min`` of the cover, with brackets at ``horizon``.

    Counts of length-k paths ending at a state grow like the largest class
    radius reachable backwards from that state. The minimum over states is
    supermultiplicative in k and the maximum submultiplicative, which gives
    the Fekete-type brackets ``log(min_n)/n <= g_min`` and
    ``h_m <= log(max_n)/n``; the other sides come from Collatz-Wielandt
    bounds.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    A = H.adjacency
    sp = perron(A)
    exact_zero = _all_cycles_simple(A)
    if exact_zero:
        h_m, h_lo, h_hi = 0.0, 0.0, 0.0
    else:
        h_m, h_lo, h_hi = math.log(sp.rho), math.log(sp.lower), math.log(sp.upper)

    # Growth from state S follows M = A^T arcs, i.e. A arcs reversed.
    M = A.T
    cond = condensation(M)
    roots = []
    for cl, nt in zip(cond.classes, cond.nontrivial):
        roots.append(irreducible_root(M[np.ix_(cl, cl)]) if nt else None)
    lows = np.array([r.lower if r else 0.0 for r in roots])
    highs = np.array([r.upper if r else 0.0 for r in roots])
    vals = np.array([r.rho if r else 0.0 for r in roots])
    best = []
    for S in range(H.size):
        reach = cond.reach[cond.label[S]]
        best.append((vals[reach].max(), lows[reach].max(), highs[reach].max()))
    r_min = min(b[0] for b in best)
    lo_min = min(b[1] for b in best)
    hi_min = min(b[2] for b in best)
    if exact_zero:
        g_min = g_lo = g_hi = 0.0
    else:
        g_min = max(math.log(r_min), 0.0)
        g_lo, g_hi = max(math.log(lo_min), 0.0), max(math.log(hi_min), 0.0)

    ext = path_count_extremes(H, horizon)
    fekete_low = max(math.log(mn) / k for k, (mn, _) in enumerate(ext, 1))
    fekete_high = math.log(ext[-1][1]) / horizon
    g_lo = max(g_lo, fekete_low) if not exact_zero else 0.0
    h_hi = min(h_hi, fekete_high) if not exact_zero else 0.0
    brackets = {"h_m": (h_lo, h_hi), "g_max": (h_lo, h_hi), "g_min": (min(g_lo, g_min), max(g_hi, g_min))}
    return GrowthRates(h_m, g_min, h_m, brackets, horizon, exact_zero)


# ---------------------------------------------------------------------------
# Weighted graphs


def edge_weights(graph: Graph, F: Potential) -> tuple[int, list[tuple[int, int, Weight]]]:
    """``(n_vertices, [(src, dst, weight)])`` for a depth-1 potential.

    On a presentation a label potential weighs each edge by its label. On a
    cover a label potential weighs each hedge by its label and a cover
    potential by its source hvertex (the state the point starts in).
    """
    if isinstance(graph, CoverGraph):
        g = graph.base
        if F.kind == "cover":
            vals = F.resolve_cover(graph.names)
            return graph.size, [(h.src, h.dst, vals[h.src]) for h in graph.hedges]
        if F.depth != 1:
            raise DepthError("recode depth-k label potentials with higher_block first")
        vals = F.resolve(g)
        return graph.size, [(h.src, h.dst, vals[(h.label,)]) for h in graph.hedges]
    if F.kind != "label":
        raise DepthError("cover potentials need a cover graph")
    if F.depth != 1:
        raise DepthError("recode depth-k label potentials with higher_block first")
    vals = F.resolve(graph)
    return len(graph.vertices), [(e.src, e.dst, vals[(e.label,)]) for e in graph.edges]


def log_m_weights(H: CoverGraph) -> tuple[int, list[tuple[int, int, float]]]:
    """Hedges weighted by ``log N(target)``: the log-degree ``log m`` of a cover point."""
    return H.size, [(h.src, h.dst, math.log(H.N[h.dst])) for h in H.hedges]


@dataclass(frozen=True)
class MeanCycleResult:
    """Extremal mean cycle. ``cycle`` lists edge indices in traversal order."""

    value: float
    cycle: tuple[int, ...]
    vertices: tuple[int, ...]
    kind: str
    exact: Fraction | None = None


def _karp_component(
    comp: list[int], arcs: list[tuple[int, int, Weight, int]]
) -> tuple[Weight, list[int]] | None:
    """Minimum cycle mean inside one strongly connected component.

    Returns the mean and the edge list of a cycle attaining it, recovered
    from the back-pointers of the optimal length-n walk.
    """
    n = len(comp)
    pos = {v: i for i, v in enumerate(comp)}
    inside = [(pos[s], pos[d], w, k) for s, d, w, k in arcs if s in pos and d in pos]
    if not inside:
        return None
    INF = None
    D: list[list] = [[INF] * n for _ in range(n + 1)]
    back: list[list] = [[None] * n for _ in range(n + 1)]
    D[0][0] = 0
    for k in range(1, n + 1):
        prev, cur, bk = D[k - 1], D[k], back[k]
        for s, d, w, idx in inside:
            if prev[s] is None:
                continue
            val = prev[s] + w
            if cur[d] is None or val < cur[d] or (val == cur[d] and (s, idx) < bk[d][:2]):
                cur[d] = val
                bk[d] = (s, idx)
    best = None
    best_v = None
    for v in range(n):
        if D[n][v] is None:
            continue
        worst = None
        for k in range(n):
            if D[k][v] is None:
                continue
            m = (D[n][v] - D[k][v]) / (n - k)
            if worst is None or m > worst:
                worst = m
        if worst is not None and (best is None or worst < best):
            best, best_v = worst, v
    if best is None:
        return None
    # Walk back n steps from best_v; any cycle on this walk is optimal.
    walk_v = [best_v]
    walk_e = []
    v = best_v
    for k in range(n, 0, -1):
        s, idx = back[k][v]
        walk_e.append(idx)
        walk_v.append(s)
        v = s
    walk_v.reverse()
    walk_e.reverse()
    weight = {k: w for _, _, w, k in inside}
    found = None
    seen: dict[int, int] = {}
    for i, v in enumerate(walk_v):
        if v in seen:
            j = seen[v]
            cyc = walk_e[j:i]
            mean = sum(weight[e] for e in cyc) / len(cyc)
            if found is None or mean < found[0]:
                found = (mean, cyc)
        seen[v] = i
    assert found is not None
    return found


def _canonical_rotation(cycle: list[int], src_of) -> tuple[int, ...]:
    starts = [src_of(e) for e in cycle]
    i = min(range(len(cycle)), key=lambda j: (starts[j], cycle[j]))
    return tuple(cycle[i:] + cycle[:i])


def mean_cycle(n_vertices: int, edges: Sequence[tuple[int, int, Weight]], kind: str = "min") -> MeanCycleResult:
    """Minimum (``kind="min"``) or maximum mean cycle of a weighted digraph.

    Karp's algorithm per strongly connected component, with the maximum
    obtained from negated weights. Exact arithmetic is used when the weights
    are fractions.
    """
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    if not edges:
        raise ValueError("graph has no edges, hence no cycles")
    sign = 1 if kind == "min" else -1
    arcs = [(s, d, sign * w, k) for k, (s, d, w) in enumerate(edges)]
    A = np.zeros((n_vertices, n_vertices))
    for s, d, _, _ in arcs:
        A[s, d] = 1
    cond = condensation(A)
    best = None
    for cl, nt in zip(cond.classes, cond.nontrivial):
        if not nt:
            continue
        res = _karp_component(list(cl), arcs)
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    if best is None:
        raise ValueError("graph has no cycles")
    mean, cyc = best
    cyc_t = _canonical_rotation(list(cyc), lambda e: edges[e][0])
    exact = None
    if all(isinstance(edges[e][2], Fraction) for e in cyc_t):
        exact = sum((edges[e][2] for e in cyc_t), Fraction(0)) / len(cyc_t)
        value = float(exact)
    else:
        value = math.fsum(float(edges[e][2]) for e in cyc_t) / len(cyc_t)
    verts = tuple(edges[e][0] for e in cyc_t)
    return MeanCycleResult(value, cyc_t, verts, kind, exact)


def extremal_birkhoff(graph: Graph, F: Potential | None = None) -> tuple[MeanCycleResult, MeanCycleResult]:
    """``(A_F, B_F)``: minimum and maximum cycle means of ``F``.

    With ``F=None`` on a cover, uses the log-degree weights, giving
    ``(A_log_m, B_log_m)``.
    """
    if F is None:
        if not isinstance(graph, CoverGraph):
            raise DepthError("log m weights live on a cover graph")
        n, edges = log_m_weights(graph)
    else:
        n, edges = edge_weights(graph, F)
    return mean_cycle(n, edges, "min"), mean_cycle(n, edges, "max")


def finite_horizon(graph: Graph, F: Potential | None, k: int) -> tuple[Weight, Weight]:
    """``(A_k/k, B_k/k)``: extreme average weight over all paths of length ``k``.

    Exact dynamic program; on an essential graph every path extends to a
    point, so these are the extreme k-step Birkhoff averages.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if F is None:
        n, edges = log_m_weights(graph)
    else:
        n, edges = edge_weights(graph, F)
    zero = Fraction(0) if all(isinstance(w, Fraction) for _, _, w in edges) else 0.0
    lo = [zero] * n
    hi = [zero] * n
    for _ in range(k):
        nlo: list = [None] * n
        nhi: list = [None] * n
        for s, d, w in edges:
            a, b = w + lo[d], w + hi[d]
            if nlo[s] is None or a < nlo[s]:
                nlo[s] = a
            if nhi[s] is None or b > nhi[s]:
                nhi[s] = b
        lo = [x if x is not None else zero for x in nlo]
        hi = [x if x is not None else zero for x in nhi]
    return min(lo) / k, max(hi) / k
