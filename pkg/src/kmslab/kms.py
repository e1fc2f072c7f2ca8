"""Admissible inverse temperatures and the full analysis pipeline.

A state fixed by ``L_{-beta F}`` exists at every ``beta`` where the spectral
radius of the transfer matrix equals 1. Necessary conditions on ``beta``
come from the growth rates and the extremal Birkhoff averages; they are
collected as :class:`BetaConstraint` objects and intersected into a window.
Roots of ``log rho(beta) = 0`` are located by bisection, which is certified
when ``F`` has a strict sign: ``log rho`` is then strictly monotone and
Lipschitz with constant ``||F||_inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cover import CoverGraph, Hedge, build_cover
from .errors import NotBackwardClosedError, PreconditionError, PresentationError
from .growth import GrowthRates, MeanCycleResult, edge_weights, extremal_birkhoff, growth_rates
from .presentations import Potential, Presentation, essentialize, higher_block, recode_potential
from .ruelle import (
    MAX_EXPONENT,
    FixedStateReport,
    SpectralData,
    fixed_state,
    spectral_radius,
    transfer_matrix,
    verify_fixed_state,
)

__all__ = [
    "BetaConstraint",
    "Root",
    "RootSearch",
    "Witness",
    "KmsReport",
    "beta_window",
    "solve_beta",
    "restrict_subsystem",
    "measure_witness",
    "kms_report",
    "prepare",
    "Prepared",
    "BRACKET_SLACK",
]

BRACKET_SLACK = 1e-9
ROOT_TOL = 1e-8
INF = math.inf

Interval = tuple[float, float]


# ---------------------------------------------------------------------------
# Window arithmetic


def _half_line(coef: float, rhs: float, sense: str, positive: bool) -> Interval | None:
    """``{beta in half-line : coef*beta <sense> rhs}`` with sense ``"<="`` or ``">="``.

    The bound is relaxed outward by the bracket slack unless it is exactly 0.
    """
    lo, hi = (0.0, INF) if positive else (-INF, 0.0)
    if coef == 0:
        ok = (0.0 <= rhs) if sense == "<=" else (0.0 >= rhs)
        return (lo, hi) if ok else None
    bound = rhs / coef
    if bound != 0:
        bound += math.copysign(BRACKET_SLACK * max(1.0, abs(bound)), 1.0 if (sense == "<=") == (coef > 0) else -1.0)
    if (sense == "<=") == (coef > 0):
        hi = min(hi, bound)
    else:
        lo = max(lo, bound)
    if lo > hi or (positive and hi <= 0) or (not positive and lo >= 0):
        return None
    return (lo, hi)


def _intersect(a: Interval | None, b: Interval | None) -> Interval | None:
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    if lo > hi:
        return None
    if lo == hi == 0.0:
        return None
    return (lo, hi)


@dataclass(frozen=True)
class BetaConstraint:
    """A necessary condition on ``beta``, stored per sign of ``beta``.

    ``positive`` / ``negative`` are the closed intervals of admissible
    ``beta > 0`` / ``beta < 0`` (None when empty); 0 itself is never admissible.
    """

    kind: str
    inequality: str
    provenance: str
    positive: Interval | None
    negative: Interval | None

    def admits(self, beta: float) -> bool:
        iv = self.positive if beta > 0 else self.negative if beta < 0 else None
        return iv is not None and iv[0] <= beta <= iv[1]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inequality": self.inequality,
            "provenance": self.provenance,
            "positive": list(self.positive) if self.positive else None,
            "negative": list(self.negative) if self.negative else None,
        }


def beta_window(
    rates: GrowthRates, A_F: float, B_F: float, A_log_m: float
) -> tuple[list[BetaConstraint], list[Interval]]:
    """Constraints on ``beta`` and their intersection (at most two intervals).

    For ``beta > 0``: ``beta A_F <= h_m``, ``A_log_m <= beta B_F`` and
    ``g_min <= beta B_F``; for ``beta < 0`` the roles of ``A_F`` and ``B_F``
    swap. When ``h_m = 0`` a state can exist only if ``A_F <= 0 <= B_F``.
    The interval ``beta [A_F, B_F]`` must meet ``[g_min, g_max]``.
    """
    if A_F > B_F:
        raise PreconditionError("inconsistent inputs: A_F > B_F")
    if rates.g_min > rates.h_m + BRACKET_SLACK:
        raise PreconditionError("inconsistent inputs: g_min > h_m")
    h, gmin, gmax = rates.h_m, rates.g_min, rates.g_max
    cons = [
        BetaConstraint(
            "prop-bounds-upper",
            "beta*A_F <= h_m (beta>0); beta*B_F <= h_m (beta<0)",
            "averages of F against invariant measures are bounded by preimage growth",
            _half_line(A_F, h, "<=", True),
            _half_line(B_F, h, "<=", False),
        ),
        BetaConstraint(
            "prop-bounds-lower",
            "A_log_m <= beta*B_F (beta>0); A_log_m <= beta*A_F (beta<0)",
            "log-degree averages of a fixed state's measure are bounded by beta*F",
            _half_line(B_F, A_log_m, ">=", True),
            _half_line(A_F, A_log_m, ">=", False),
        ),
        BetaConstraint(
            "inf-growth-lower",
            "g_min <= beta*B_F (beta>0); g_min <= beta*A_F (beta<0)",
            "minimal preimage growth on the cover bounds beta*F from below",
            _half_line(B_F, gmin, ">=", True),
            _half_line(A_F, gmin, ">=", False),
        ),
        BetaConstraint(
            "ultbound-interval",
            "beta*[A_F,B_F] meets [g_min,g_max]",
            "some invariant measure has beta*integral(F) between minimal and maximal growth",
            _intersect(_half_line(A_F, gmax, "<=", True), _half_line(B_F, gmin, ">=", True)),
            _intersect(_half_line(B_F, gmax, "<=", False), _half_line(A_F, gmin, ">=", False)),
        ),
    ]
    if h == 0.0:
        ok = A_F <= 0 <= B_F
        full_pos, full_neg = ((0.0, INF), (-INF, 0.0)) if ok else (None, None)
        cons.append(
            BetaConstraint(
                "nonexist-window",
                "h_m = 0 requires A_F <= 0 <= B_F",
                "without preimage growth a fixed state forces F to average to 0",
                full_pos,
                full_neg,
            )
        )
    pos: Interval | None = (0.0, INF)
    neg: Interval | None = (-INF, 0.0)
    for c in cons:
        pos = _intersect(pos, c.positive)
        neg = _intersect(neg, c.negative)
    window = [iv for iv in (neg, pos) if iv is not None]
    return cons, window


def in_window(window: Sequence[Interval], beta: float) -> bool:
    return beta != 0 and any(lo <= beta <= hi for lo, hi in window)


# ---------------------------------------------------------------------------
# Root finding


@dataclass
class Root:
    beta: float
    rho: float
    residual: float  # |rho - 1|
    bracket: Interval
    certified: bool


@dataclass
class RootSearch:
    roots: list[Root]
    mode: str  # certified | best-effort | constant
    bracket: Interval
    certified: bool
    certificate: dict = field(default_factory=dict)
    complete: bool = False  # the bracket provably contains every root


def _sign_class(weights: Sequence[float]) -> int:
    if all(w > 0 for w in weights):
        return 1
    if all(w < 0 for w in weights):
        return -1
    if all(w == 0 for w in weights):
        return 0
    return 2


class _LogRho:
    """Memoized ``beta -> log rho(M(beta))`` with its Collatz-Wielandt bracket."""

    def __init__(self, H: CoverGraph, F: Potential):
        self.H, self.F = H, F
        self.cache: dict[float, SpectralData] = {}

    def data(self, beta: float) -> SpectralData:
        if beta not in self.cache:
            self.cache[beta] = spectral_radius(transfer_matrix(self.H, self.F, beta))
        return self.cache[beta]

    def __call__(self, beta: float) -> float:
        return self.data(beta).log_rho

    def sign(self, beta: float) -> int:
        """Certified sign of ``log rho`` (0 when the bracket straddles 0)."""
        lo, hi = self.data(beta).log_bracket
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        return 0


def _bisect(f: _LogRho, a: float, b: float, fa: float, tol: float, max_iter: int = 200) -> tuple[float, float, float]:
    """Bisection for a sign change of ``f`` on ``[a, b]`` with ``f(a)`` of sign ``fa``."""
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0:
            return m, m, m
        if (fm > 0) == (fa > 0):
            a = m
        else:
            b = m
        if b - a <= 1e-15 * max(1.0, abs(m)):
            break
    fa_, fb_ = f(a), f(b)
    root = a if abs(fa_) <= abs(fb_) else b
    return root, a, b


def _root(f: _LogRho, beta: float, lo: float, hi: float, tol: float, certified: bool) -> Root:
    rho = f.data(beta).rho
    return Root(beta, rho, abs(rho - 1.0), (lo, hi), certified and abs(rho - 1.0) <= tol)


def solve_beta(
    H: CoverGraph,
    F: Potential,
    bracket: Interval | None = None,
    tol: float = ROOT_TOL,
    h_m: float | None = None,
    grid: int = 512,
) -> RootSearch:
    """All ``beta`` in ``bracket`` with ``|rho(M(beta)) - 1| <= tol``.

    Certified mode (``F`` of one strict sign): ``log rho`` is strictly
    monotone, so one bisection finds the unique root or endpoint values
    prove there is none; around an endpoint with ``log rho(a) != 0`` no root
    lies within ``|log rho(a)| / ||F||_inf``. Default brackets are
    ``(0, (h_m + 1) / min F]`` (mirrored for negative ``F``), cut so that
    ``|beta F| <= 700``; every root lies there. Sign-indefinite ``F`` uses a
    grid plus local refinement and certifies nothing.
    """
    weights = [float(w) for _, _, w in edge_weights(H, F)[1]]
    sign = _sign_class(weights)
    fmax = max(abs(w) for w in weights)
    if h_m is None:
        h_m = growth_rates(H).h_m
    f = _LogRho(H, F)
    beta_cap = MAX_EXPONENT / fmax if fmax > 0 else INF

    if sign == 0:
        rho0 = f.data(0.0).rho
        roots = []
        cert = {"rho_constant": rho0}
        if abs(rho0 - 1) <= tol:
            b = 1.0 if bracket is None else 0.5 * (bracket[0] + bracket[1])
            roots = [Root(b, rho0, abs(rho0 - 1), (b, b), True)]
            cert["note"] = "rho does not depend on beta; every beta is a root"
        return RootSearch(roots, "constant", bracket or (-INF, INF), True, cert)

    if sign in (1, -1):
        fmin = min(abs(w) for w in weights)
        complete = False
        if bracket is None:
            far = (h_m + 1.0) / fmin
            complete = far <= beta_cap
            far = min(far, beta_cap)
            lo, hi = (0.0, far) if sign == 1 else (-far, 0.0)
        else:
            lo, hi = max(bracket[0], -beta_cap), min(bracket[1], beta_cap)
        if lo >= hi:
            raise PreconditionError("empty bracket after the overflow cut |beta F| <= 700")
        flo, fhi = f(lo), f(hi)
        slo, shi = f.sign(lo), f.sign(hi)
        if h_m == 0.0:
            # rho(M(0)) = 1 exactly when preimage growth is subexponential.
            if lo == 0.0:
                flo, slo = 0.0, 0
            if hi == 0.0:
                fhi, shi = 0.0, 0
        cert = {
            "bracket": [lo, hi],
            "rho_at_ends": [f.data(lo).rho, f.data(hi).rho],
            "log_rho_brackets": [list(f.data(lo).log_bracket), list(f.data(hi).log_bracket)],
            "lipschitz_constant": fmax,
            "root_free_radius": [abs(flo) / fmax, abs(fhi) / fmax],
        }
        if slo != 0 and shi != 0 and slo == shi:
            cert["reason"] = "log rho has the same certified sign at both ends and is monotone"
            return RootSearch([], "certified", (lo, hi), True, cert, complete)
        if abs(f.data(lo).rho - 1) <= tol and abs(f.data(hi).rho - 1) > tol and lo != 0:
            return RootSearch([_root(f, lo, lo, lo, tol, True)], "certified", (lo, hi), True, cert, complete)
        if (flo == 0 and lo == 0) or (fhi == 0 and hi == 0):
            # log rho(0) = 0 and strictly monotone: no root with beta != 0.
            cert["reason"] = "log rho vanishes only at beta = 0"
            return RootSearch([], "certified", (lo, hi), True, cert, complete)
        if (flo > 0) == (fhi > 0):
            if abs(f.data(hi).rho - 1) <= tol:
                return RootSearch([_root(f, hi, hi, hi, tol, True)], "certified", (lo, hi), True, cert, complete)
            cert["reason"] = "no sign change of log rho at the bracket ends"
            return RootSearch([], "certified", (lo, hi), slo != 0 and shi != 0, cert, complete)
        beta, a, b = _bisect(f, lo, hi, flo, tol)
        if beta == 0.0:
            return RootSearch([], "certified", (lo, hi), True, cert, complete)
        root = _root(f, beta, a, b, tol, True)
        return RootSearch([root], "certified", (lo, hi), True, cert, complete)

    # Sign-indefinite potential: grid scan and refinement.
    if bracket is None:
        far = min(50.0, beta_cap)
        lo, hi = -far, far
    else:
        lo, hi = max(bracket[0], -beta_cap), min(bracket[1], beta_cap)
    grid_pts = np.linspace(lo, hi, grid)
    vals = [f(float(b)) for b in grid_pts]
    roots = []
    for i in range(len(grid_pts) - 1):
        a, b = float(grid_pts[i]), float(grid_pts[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0 and a != 0:
            roots.append(_root(f, a, a, a, tol, False))
        elif (fa > 0) != (fb > 0) and fb != 0:
            beta, x, y = _bisect(f, a, b, fa, tol)
            if beta != 0:
                roots.append(_root(f, beta, x, y, tol, False))
    roots = [r for r in roots if r.residual <= tol]
    return RootSearch(roots, "best-effort", (lo, hi), False, {"grid": grid})


# ---------------------------------------------------------------------------
# Subsystems and witnesses


def restrict_subsystem(H: CoverGraph, subset: Iterable) -> CoverGraph:
    """Backward-closed restriction of the cover to ``subset``.

    Every hedge into the subset must start in the subset. All such hedges
    are kept, so preimage counts do not change.
    """
    keep = sorted({H.lookup(s) for s in subset})
    if not keep:
        raise NotBackwardClosedError("empty subset")
    kept = set(keep)
    for h in H.hedges:
        if h.dst in kept and h.src not in kept:
            raise NotBackwardClosedError(
                f"not backward-closed: hedge {H.names[h.src]} -> {H.names[h.dst]} enters the subset from outside"
            )
    pos = {s: i for i, s in enumerate(keep)}
    hedges = tuple(Hedge(pos[h.src], h.label, pos[h.dst]) for h in H.hedges if h.dst in kept)
    outs = {h.src for h in hedges}
    if outs != set(range(len(keep))):
        raise PresentationError("restricted cover is not essential (some state has no out-hedge)")
    return CoverGraph(
        H.base,
        tuple(H.hvertices[s] for s in keep),
        hedges,
        tuple(H.canonical[s] for s in keep),
        H.canonical_exact,
    )


@dataclass
class Witness:
    """``mu = s * (min-cycle measure) + (1 - s) * (max-cycle measure)``."""

    s: float
    min_cycle: MeanCycleResult
    max_cycle: MeanCycleResult
    integral: float
    beta_integral: float
    beta: float

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "min_cycle_edges": list(self.min_cycle.cycle),
            "max_cycle_edges": list(self.max_cycle.cycle),
            "min_mean": self.min_cycle.value,
            "max_mean": self.max_cycle.value,
            "integral_F": self.integral,
            "beta_integral_F": self.beta_integral,
        }


def measure_witness(
    graph,
    F: Potential,
    beta_star: float,
    h_m: float,
    cycles: tuple[MeanCycleResult, MeanCycleResult] | None = None,
    slack: float = 1e-6,
) -> Witness:
    """Cycle-supported invariant measure with ``beta* * integral(F) = h_m``.

    Requires ``beta* A_F <= h_m <= beta* B_F`` (reversed for ``beta* < 0``)
    up to ``slack``; raises :class:`PreconditionError` naming the failing
    side and its margin otherwise.
    """
    A, B = cycles if cycles is not None else extremal_birkhoff(graph, F)
    lo, hi = sorted((beta_star * A.value, beta_star * B.value))
    if h_m < lo - slack:
        raise PreconditionError(f"precondition violated: h_m is below beta*[A_F,B_F] by {lo - h_m:.3g}")
    if h_m > hi + slack:
        raise PreconditionError(f"precondition violated: h_m is above beta*[A_F,B_F] by {h_m - hi:.3g}")
    if A.value == B.value:
        s = 1.0
    else:
        s = (beta_star * B.value - h_m) / (beta_star * (B.value - A.value))
        s = min(1.0, max(0.0, s))
    integral = s * A.value + (1 - s) * B.value
    return Witness(s, A, B, integral, beta_star * integral, beta_star)


# ---------------------------------------------------------------------------
# Pipeline


@dataclass
class Prepared:
    """Presentation, potential and cover after essentialization and recoding."""

    g: Presentation
    F: Potential
    H: CoverGraph
    block: int


def prepare(g: Presentation, F: Potential) -> Prepared:
    """Essentialize ``g`` and recode depth-k label potentials to depth 1."""
    g = essentialize(g)
    k = F.depth if F.kind == "label" else 1
    if k > 1:
        hb, wm = higher_block(g, k)
        F = recode_potential(F, g, wm)
        g = hb
    return Prepared(g, F, build_cover(g), k)


@dataclass
class RootReport:
    root: Root
    state: np.ndarray
    state_method: str
    verification: FixedStateReport
    witness: Witness | None
    witness_error: str | None
    in_window: bool


@dataclass
class KmsReport:
    constraints: list[BetaConstraint]
    window: list[Interval]
    roots: list[RootReport]
    verdict: str
    search: RootSearch
    rates: GrowthRates
    A_F: MeanCycleResult
    B_F: MeanCycleResult
    A_log_m: MeanCycleResult
    names: tuple[str, ...]
    checks_ok: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "window": [list(iv) for iv in self.window],
            "constraints": [c.to_dict() for c in self.constraints],
            "roots": [
                {
                    "beta": r.root.beta,
                    "rho": r.root.rho,
                    "rho_residual": r.root.residual,
                    "certified": r.root.certified,
                    "in_window": r.in_window,
                    "eigenstate": dict(zip(self.names, map(float, r.state))),
                    "eigenstate_method": r.state_method,
                    "residual_L_l1": r.verification.residual_L,
                    "residual_I_l1": r.verification.residual_I,
                    "residual_kstep": r.verification.residual_kstep,
                    "witness": r.witness.to_dict() if r.witness else None,
                    "witness_error": r.witness_error,
                }
                for r in self.roots
            ],
            "search": {
                "mode": self.search.mode,
                "bracket": list(self.search.bracket),
                "certified": self.search.certified,
                "certificate": self.search.certificate,
            },
            "invariants": {
                "h_m": self.rates.h_m,
                "g_min": self.rates.g_min,
                "g_max": self.rates.g_max,
                "A_F": self.A_F.value,
                "B_F": self.B_F.value,
                "A_log_m": self.A_log_m.value,
            },
            "checks_ok": self.checks_ok,
            "notes": self.notes,
        }


def kms_report(
    g: Presentation,
    F: Potential,
    bracket: Interval | None = None,
    tol: float = ROOT_TOL,
    eigen_tol: float = 1e-8,
    horizon: int = 12,
) -> KmsReport:
    """Essentialize, recode, build the cover, bound, solve and verify.

    Verdict ``exists`` needs a root whose fixed state passes verification;
    ``not-exists`` needs an empty window or a certified search covering the
    whole window; anything else is ``undetermined``.
    """
    P = prepare(g, F)
    H, Fr = P.H, P.F
    rates = growth_rates(H, horizon)
    graph = P.g if Fr.kind == "label" else H
    A_F, B_F = extremal_birkhoff(graph, Fr)
    A_lm, _ = extremal_birkhoff(H)
    cons, window = beta_window(rates, A_F.value, B_F.value, A_lm.value)
    search = solve_beta(H, Fr, bracket, tol, h_m=rates.h_m)
    notes: list[str] = []
    roots: list[RootReport] = []
    checks_ok = True
    for r in search.roots:
        T = transfer_matrix(H, Fr, r.beta)
        st = fixed_state(T, r.rho)
        ver = verify_fixed_state(st.u, H, Fr, r.beta, tol=eigen_tol)
        inside = in_window(window, r.beta)
        if not inside:
            checks_ok = False
            notes.append(f"root {r.beta!r} lies outside the admissible window")
        try:
            wit, err = measure_witness(graph, Fr, r.beta, rates.h_m, (A_F, B_F)), None
        except PreconditionError as exc:
            wit, err = None, str(exc)
            checks_ok = False
        roots.append(RootReport(r, st.u, st.method, ver, wit, err, inside))

    good = [rr for rr in roots if rr.root.residual <= tol and rr.verification.passed]
    if good:
        verdict = "exists"
    elif not window:
        verdict = "not-exists"
        notes.append("admissible window is empty")
    elif search.certified and not search.roots and (search.complete or _covers(search.bracket, window)):
        verdict = "not-exists"
        notes.append("certified search found no root over the whole window")
    else:
        verdict = "undetermined"
    return KmsReport(cons, window, roots, verdict, search, rates, A_F, B_F, A_lm, H.names, checks_ok, notes)


def _covers(bracket: Interval, window: Sequence[Interval]) -> bool:
    lo, hi = bracket
    return all(lo <= a and b <= hi for a, b in window)
