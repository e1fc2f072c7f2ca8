"""Transfer operators on the cover.

On functions that depend only on the first state of a cover path, the
weighted preimage-sum operator

    (L g)(c) = sum over c' with psi(c') = c of exp(-beta F(c')) g(c')

acts as a nonnegative matrix ``M`` with ``M[S, pre_a(S)] += exp(-beta w)``,
where ``w`` is the potential of the preimage: ``f(a)`` for a label potential
and ``F(pre_a(S))`` for a cover potential. The section operator

    (I g)(c) = exp(beta F(c)) / m(c) * g(psi c)

is a right inverse of ``L``. A state ``u`` on hvertices with ``u M = u``
extends to a state on all cover-locally-constant functions that is fixed by
``L`` and by ``I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .cover import CoverGraph
from .errors import DepthError, PreconditionError
from .growth import edge_weights
from .perron import perron
from .presentations import Potential

__all__ = [
    "TransferMatrix",
    "SpectralData",
    "FixedState",
    "LCFunction",
    "FixedStateReport",
    "transfer_matrix",
    "spectral_radius",
    "fixed_state",
    "apply_transfer",
    "apply_section",
    "vertex_indicator",
    "cylinder_indicator",
    "state_value",
    "verify_fixed_state",
    "LOG_SCALE_THRESHOLD",
    "MAX_EXPONENT",
]

LOG_SCALE_THRESHOLD = 30.0
MAX_EXPONENT = 700.0
MAX_DEPTH = 8


@dataclass(frozen=True)
class TransferMatrix:
    """``exp(log_scale) * matrix`` represents the weighted transfer operator.

    ``log_scale`` is nonzero only when some ``|beta w|`` exceeds
    :data:`LOG_SCALE_THRESHOLD`; it is the largest exponent, so stored
    entries stay at most 1.
    """

    beta: float
    names: tuple[str, ...]
    matrix: np.ndarray
    log_scale: float = 0.0
    exponents: tuple[tuple[int, int, float], ...] = ()

    @property
    def dense(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.matrix


def _hedge_weights(H: CoverGraph, F: Potential) -> list[float]:
    _, edges = edge_weights(H, F)
    return [float(w) for _, _, w in edges]


def transfer_matrix(H: CoverGraph, F: Potential, beta: float) -> TransferMatrix:
    """Matrix of ``L_{-beta F}`` on functions of the first hvertex.

    Raises :class:`PreconditionError` when some ``|beta w| > 700``.
    """
    weights = _hedge_weights(H, F)
    expo = [-beta * w for w in weights]
    worst = max((abs(e) for e in expo), default=0.0)
    if worst > MAX_EXPONENT:
        raise PreconditionError(f"overflow: |beta*F| = {worst:.6g} exceeds {MAX_EXPONENT}")
    scale = max(expo) if worst > LOG_SCALE_THRESHOLD else 0.0
    M = np.zeros((H.size, H.size))
    for h, e in zip(H.hedges, expo):
        M[h.dst, h.src] += math.exp(e - scale)
    trip = tuple((h.dst, h.src, e) for h, e in zip(H.hedges, expo))
    return TransferMatrix(float(beta), H.names, M, scale, trip)


@dataclass
class SpectralData:
    """Spectral radius with Perron vectors, residuals and certificates.

    ``right`` satisfies ``M v = rho v`` (a function on hvertices), ``left``
    satisfies ``u M = rho u`` and sums to 1 (weights on hvertices).
    """

    rho: float
    log_rho: float
    right: np.ndarray
    left: np.ndarray
    residual_right: float
    residual_left: float
    cw_lower: float
    cw_upper: float
    converged: bool
    names: tuple[str, ...] = ()

    @property
    def log_bracket(self) -> tuple[float, float]:
        lo = math.log(self.cw_lower) if self.cw_lower > 0 else -math.inf
        hi = math.log(self.cw_upper) if self.cw_upper > 0 else -math.inf
        return lo, hi

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "log_rho": self.log_rho,
            "cw_lower": self.cw_lower,
            "cw_upper": self.cw_upper,
            "right_vec": dict(zip(self.names, map(float, self.right))),
            "left_vec": dict(zip(self.names, map(float, self.left))),
            "residual_right_inf": self.residual_right,
            "residual_left_l1": self.residual_left,
            "converged": self.converged,
        }


def spectral_radius(T: TransferMatrix | np.ndarray) -> SpectralData:
    """``rho(M)`` as the largest class Perron root, with vectors and certificates."""
    if isinstance(T, TransferMatrix):
        M, c, names = T.matrix, T.log_scale, T.names
    else:
        M, c, names = np.asarray(T, dtype=float), 0.0, ()
    sp = perron(M)
    v, u = sp.right, sp.left
    res_r = float(np.max(np.abs(M @ v - sp.rho * v)))
    res_l = float(np.sum(np.abs(u @ M - sp.rho * u)))
    f = math.exp(c)
    log_rho = (math.log(sp.rho) + c) if sp.rho > 0 else -math.inf
    return SpectralData(
        sp.rho * f, log_rho, v, u, res_r * f, res_l * f, sp.lower * f, sp.upper * f, sp.converged, names
    )


@dataclass
class FixedState:
    """Weights ``u >= 0`` with ``sum(u) = 1`` and ``u M`` close to ``rho u``."""

    u: np.ndarray
    rho: float
    residual: float
    converged: bool
    method: str


def fixed_state(T: TransferMatrix | np.ndarray, rho: float | None = None, tol: float = 1e-10) -> FixedState:
    """Left Perron state of ``M`` built from the resolvent.

    ``w = (t I - M^T)^{-1} 1`` is the summed series of ``t^{-k-1} (M^T)^k``
    applied to the uniform state; normalized, it converges to a fixed state
    as ``t`` decreases to ``rho``. When a round does not reach ``tol`` the
    class-wise Perron construction is used instead.
    """
    if isinstance(T, TransferMatrix):
        M, c = T.matrix, T.log_scale
    else:
        M, c = np.asarray(T, dtype=float), 0.0
    n = M.shape[0]
    if rho is None:
        rho_s = perron(M).rho
    else:
        rho_s = rho / math.exp(c)
    if rho_s <= 0:
        raise PreconditionError("fixed_state needs rho > 0")

    def resid(u):
        return float(np.sum(np.abs(u @ M - rho_s * u))) / rho_s

    best = None
    ones = np.full(n, 1.0 / n)
    for k in range(2, 15):
        t = rho_s * (1 + 10.0**-k)
        try:
            w = np.linalg.solve(t * np.eye(n) - M.T, ones)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(w)):
            break
        w = np.maximum(w, 0.0)
        if w.sum() <= 0:
            break
        w /= w.sum()
        r = resid(w)
        if best is None or r < best[1]:
            best = (w, r)
        if r <= tol:
            return FixedState(w, rho_s * math.exp(c), r * rho_s * math.exp(c), True, "resolvent")
    u = perron(M).left
    r = resid(u)
    if best is not None and best[1] < r:
        u, r = best
    return FixedState(u, rho_s * math.exp(c), r * rho_s * math.exp(c), r <= tol, "class-perron")


# ---------------------------------------------------------------------------
# Cover-locally-constant functions


@dataclass(frozen=True)
class LCFunction:
    """Function of the first ``depth`` hedges of a cover path.

    Keys are ``(s0,)`` for depth 0 and ``(s0, e0, ..., e_{d-1})`` otherwise,
    with ``e0`` leaving ``s0`` and consecutive hedges composable. Missing
    keys are zero.
    """

    depth: int
    values: Mapping[tuple[int, ...], float]

    def __call__(self, key: tuple[int, ...]) -> float:
        return self.values.get(key, 0.0)


def _keys(H: CoverGraph, depth: int) -> list[tuple[int, ...]]:
    keys = [(s,) for s in range(H.size)]
    for _ in range(depth):
        nxt = []
        for k in keys:
            last = H.hedges[k[-1]].dst if len(k) > 1 else k[0]
            nxt.extend(k + (e,) for e in H.out_hedges[last])
        keys = nxt
    return keys


def vertex_indicator(H: CoverGraph, S) -> LCFunction:
    return LCFunction(0, {(H.lookup(S),): 1.0})


def cylinder_indicator(H: CoverGraph, word) -> LCFunction:
    """Indicator of cover paths whose labels start with ``word``."""
    w = H.base.word(word)
    vals = {}
    for key in _keys(H, len(w)):
        if tuple(H.hedges[e].label for e in key[1:]) == w:
            vals[key] = 1.0
    return LCFunction(len(w), vals)


def _check_depth(depth: int) -> None:
    if depth > MAX_DEPTH:
        raise DepthError(f"function depth {depth} exceeds the supported maximum {MAX_DEPTH}")


def apply_transfer(H: CoverGraph, F: Potential, beta: float, g: LCFunction) -> LCFunction:
    """Exact image ``L_{-beta F} g``; depth drops by one (not below 0)."""
    _check_depth(g.depth)
    w = _hedge_weights(H, F)
    out: dict[tuple[int, ...], float] = {}
    for key in _keys(H, max(g.depth - 1, 0)):
        s0 = key[0]
        total = 0.0
        for e in H.in_hedges[s0]:
            src = H.hedges[e].src
            pre_key = (src,) if g.depth == 0 else (src, e) + key[1:]
            total += math.exp(-beta * w[e]) * g(pre_key)
        if total:
            out[key] = total
    return LCFunction(max(g.depth - 1, 0), out)


def apply_section(H: CoverGraph, F: Potential, beta: float, g: LCFunction) -> LCFunction:
    """Exact image ``I_{beta F} g``; depth grows by one."""
    _check_depth(g.depth + 1)
    w = _hedge_weights(H, F)
    out: dict[tuple[int, ...], float] = {}
    for key in _keys(H, g.depth + 1):
        e0 = key[1]
        dst = H.hedges[e0].dst
        tail = (dst,) + key[2:]
        val = g(tail)
        if val:
            out[key] = math.exp(beta * w[e0]) / H.N[dst] * val
    return LCFunction(g.depth + 1, out)


def state_value(H: CoverGraph, F: Potential, beta: float, u: np.ndarray, g: LCFunction) -> float:
    """Extension of the hvertex weights ``u`` to cover-locally-constant ``g``.

    A cylinder ``(s0, e0, .., e_{d-1})`` gets mass ``u(end) * prod exp(-beta w(e_j))``.
    """
    w = _hedge_weights(H, F)
    total = 0.0
    for key, val in g.values.items():
        if not val:
            continue
        if len(key) == 1:
            total += val * u[key[0]]
            continue
        mass = u[H.hedges[key[-1]].dst]
        for e in key[1:]:
            mass *= math.exp(-beta * w[e])
        total += val * mass
    return total


@dataclass
class FixedStateReport:
    residual_L: float
    residual_I: float
    residual_kstep: float
    normalization: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return max(self.residual_L, self.residual_I, self.residual_kstep, self.normalization) <= self.tol


def verify_fixed_state(
    u: np.ndarray, H: CoverGraph, F: Potential, beta: float, tol: float = 1e-8, max_depth: int = 2
) -> FixedStateReport:
    """Residuals of ``u`` as a state fixed by ``L_{-beta F}`` and ``I_{beta F}``.

    ``residual_L`` is ``||u M - u||_1``; ``residual_I`` sums
    ``|u(I g) - u(g)|`` over all indicator functions of depth
    ``<= max_depth``; ``residual_kstep`` is the worst ``|u M^k 1 - 1|`` for
    ``k <= 4``; ``normalization`` is ``|sum u - 1|``.
    """
    u = np.asarray(u, dtype=float)
    T = transfer_matrix(H, F, beta)
    M = T.dense
    res_L = float(np.sum(np.abs(u @ M - u)))
    res_I = 0.0
    res_L_fun = 0.0
    for d in range(max_depth + 1):
        for key in _keys(H, d):
            g = LCFunction(d, {key: 1.0})
            base = state_value(H, F, beta, u, g)
            res_I += abs(state_value(H, F, beta, u, apply_section(H, F, beta, g)) - base)
            res_L_fun += abs(state_value(H, F, beta, u, apply_transfer(H, F, beta, g)) - base)
    ks = []
    v = np.ones(H.size)
    for _ in range(4):
        v = M @ v
        ks.append(abs(float(u @ v) - 1.0))
    return FixedStateReport(
        res_L,
        res_I,
        max(ks),
        abs(float(u.sum()) - 1.0),
        tol,
        {"residual_L_on_cylinders": res_L_fun},
    )
