"""Perron roots of nonnegative matrices with Collatz-Wielandt certificates.

Reducible matrices are split into strongly connected classes; the spectral
radius is the largest class radius. Each class radius comes with a
certified bracket ``min(Bv/v) <= rho <= max(Bv/v)`` for a positive trial
vector ``v``.

Orientation: an entry ``M[i, j] > 0`` is an arc ``i -> j``. A class ``C`` is
*upstream* of ``D`` when ``D`` is reachable from ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

REL_TOL = 1e-12
MAX_ITER = 100_000
TIE_TOL = 1e-10


@dataclass(frozen=True)
class Condensation:
    """Strongly connected classes in topological order (arcs go forward)."""

    classes: tuple[tuple[int, ...], ...]
    label: np.ndarray
    reach: np.ndarray  # reach[c, d]: class d reachable from class c (reflexive)
    nontrivial: tuple[bool, ...]


def condensation(M: np.ndarray) -> Condensation:
    n = M.shape[0]
    support = M != 0
    n_comp, lab = connected_components(csr_matrix(support.astype(np.int8)), directed=True, connection="strong")
    arcs = np.zeros((n_comp, n_comp), dtype=bool)
    rows, cols = np.nonzero(support)
    arcs[lab[rows], lab[cols]] = True
    # Kahn's algorithm with smallest-member tie breaking keeps the order deterministic.
    first = [min(np.flatnonzero(lab == c)) for c in range(n_comp)]
    indeg = [int(arcs[:, c].sum() - arcs[c, c]) for c in range(n_comp)]
    order: list[int] = []
    ready = sorted((first[c], c) for c in range(n_comp) if indeg[c] == 0)
    while ready:
        _, c = ready.pop(0)
        order.append(c)
        for d in range(n_comp):
            if d != c and arcs[c, d]:
                indeg[d] -= 1
                if indeg[d] == 0:
                    ready.append((first[d], d))
                    ready.sort()
    rank = {c: i for i, c in enumerate(order)}
    new_label = np.array([rank[c] for c in lab], dtype=int) if n else np.zeros(0, dtype=int)
    classes = tuple(tuple(int(i) for i in np.flatnonzero(new_label == r)) for r in range(n_comp))
    arcs = arcs[np.ix_(order, order)]
    reach = np.eye(n_comp, dtype=bool)
    for c in reversed(range(n_comp)):
        for d in range(c + 1, n_comp):
            if arcs[c, d]:
                reach[c] |= reach[d]
    nontrivial = tuple(bool(len(cl) > 1 or support[cl[0], cl[0]]) for cl in classes)
    return Condensation(classes, new_label, reach, nontrivial)


@dataclass(frozen=True)
class ClassRoot:
    rho: float
    lower: float
    upper: float
    vector: np.ndarray
    converged: bool
    iterations: int


def _cw(B: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    r = (B @ v) / v
    return float(r.min()), float(r.max())


def irreducible_root(B: np.ndarray, tol: float = REL_TOL, max_iter: int = MAX_ITER) -> ClassRoot:
    """Perron root and positive eigenvector of an irreducible block ``B``.

    A dense eigensolve gives the starting vector; power iteration on
    ``B + I`` (aperiodic, same eigenvector) then tightens the
    Collatz-Wielandt bracket until its relative width is below ``tol``.
    """
    n = B.shape[0]
    if n == 1:
        r = float(B[0, 0])
        return ClassRoot(r, r, r, np.ones(1), True, 0)
    scale = float(B.max())
    if scale == 0.0:
        return ClassRoot(0.0, 0.0, 0.0, np.full(n, 1.0 / n), True, 0)
    Bs = B / scale
    w, V = np.linalg.eig(Bs)
    k = int(np.argmax(w.real))
    v = np.abs(V[:, k].real)
    if not np.all(v > 0) or not np.all(np.isfinite(v)):
        v = np.ones(n)
    v /= v.sum()
    lo, hi = _cw(Bs, v)
    shifted = Bs + np.eye(n)
    it = 0
    while hi - lo > tol * hi and it < max_iter:
        v = shifted @ v
        v /= v.sum()
        lo2, hi2 = _cw(Bs, v)
        lo, hi = max(lo, lo2), min(hi, hi2)
        it += 1
    rho = float(np.clip(w[k].real, lo, hi))
    return ClassRoot(rho * scale, lo * scale, hi * scale, v, hi - lo <= tol * hi, it)


@dataclass
class Spectrum:
    """Spectral radius of a nonnegative matrix with its Perron data."""

    rho: float
    lower: float
    upper: float
    right: np.ndarray
    left: np.ndarray
    class_roots: list[float] = field(default_factory=list)
    dominant: tuple[int, ...] = ()
    converged: bool = True


def _left_vector(M, cond, roots, rho, c) -> np.ndarray:
    n = M.shape[0]
    u = np.zeros(n)
    C = list(cond.classes[c])
    u[C] = irreducible_root(M[np.ix_(C, C)].T).vector if len(C) > 1 else 1.0
    for d in range(c + 1, len(cond.classes)):
        if not cond.reach[c, d]:
            continue
        D = list(cond.classes[d])
        rhs = u @ M[:, D]
        A = rho * np.eye(len(D)) - M[np.ix_(D, D)]
        u[D] = np.linalg.solve(A.T, rhs)
    u = np.maximum(u, 0.0)
    return u / u.sum()


def _right_vector(M, cond, roots, rho, c) -> np.ndarray:
    n = M.shape[0]
    v = np.zeros(n)
    C = list(cond.classes[c])
    v[C] = irreducible_root(M[np.ix_(C, C)]).vector if len(C) > 1 else 1.0
    for d in range(c - 1, -1, -1):
        if not cond.reach[d, c]:
            continue
        D = list(cond.classes[d])
        rhs = M[D, :] @ v
        A = rho * np.eye(len(D)) - M[np.ix_(D, D)]
        v[D] = np.linalg.solve(A, rhs)
    v = np.maximum(v, 0.0)
    return v / v.max()


def perron(M: np.ndarray, tol: float = REL_TOL, max_iter: int = MAX_ITER) -> Spectrum:
    """Spectral radius, certificates and Perron vectors of ``M >= 0``.

    The right vector ``v`` satisfies ``M v = rho v`` and the left vector
    ``u`` satisfies ``u M = rho u`` with ``sum(u) = 1``. When several
    classes attain ``rho`` the admissible ones contribute equal weight.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if np.any(M < 0) or not np.all(np.isfinite(M)):
        raise ValueError("matrix must be finite and nonnegative")
    cond = condensation(M)
    roots: list[ClassRoot] = []
    for cl, nt in zip(cond.classes, cond.nontrivial):
        if not nt:
            roots.append(ClassRoot(0.0, 0.0, 0.0, np.ones(1), True, 0))
        else:
            roots.append(irreducible_root(M[np.ix_(cl, cl)], tol, max_iter))
    rho = max(r.rho for r in roots)
    lower = max(r.lower for r in roots)
    upper = max(r.upper for r in roots)
    converged = all(r.converged for r in roots)
    if rho == 0.0:
        # Nilpotent: eigenvectors live on sinks (right) and sources (left).
        right = (~M.any(axis=0)).astype(float)
        left = (~M.any(axis=1)).astype(float)
        return Spectrum(0.0, 0.0, 0.0, right / right.max(), left / left.sum(), [0.0] * len(roots), (), True)

    top = [c for c, r in enumerate(roots) if r.rho >= rho * (1 - TIE_TOL)]
    # Left vectors need no maximal class downstream, right vectors none upstream.
    left_ok = [c for c in top if not any(d != c and cond.reach[c, d] for d in top)]
    right_ok = [c for c in top if not any(d != c and cond.reach[d, c] for d in top)]
    left = sum(_left_vector(M, cond, roots, rho, c) for c in left_ok)
    right = sum(_right_vector(M, cond, roots, rho, c) for c in right_ok)
    return Spectrum(
        rho,
        lower,
        upper,
        right / right.max(),
        left / left.sum(),
        [r.rho for r in roots],
        tuple(left_ok),
        converged,
    )
