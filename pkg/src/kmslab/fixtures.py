"""Small named presentations used by the tests, the CLI demos and the docs."""

from __future__ import annotations

import random

from .presentations import Presentation, Potential, essentialize

__all__ = [
    "full_shift",
    "even_shift",
    "golden_mean",
    "cyc0",
    "fork",
    "two_class",
    "named",
    "FIXTURE_NAMES",
    "random_presentation",
    "random_positive_potential",
]


def full_shift(n: int = 2) -> Presentation:
    """One vertex with ``n`` loops labeled ``0 .. n-1``."""
    return Presentation.from_names([("*", "*", str(a)) for a in range(n)])


def even_shift() -> Presentation:
    """Even shift: runs of 0 between consecutive 1s have even length."""
    return Presentation.from_names([("A", "A", "1"), ("A", "B", "0"), ("B", "A", "0")])


def golden_mean() -> Presentation:
    """Golden mean shift (no ``11``)."""
    return Presentation.from_names([("u", "u", "0"), ("u", "w", "1"), ("w", "u", "0")])


def cyc0() -> Presentation:
    """Points with at most one 1; zero preimage growth."""
    return Presentation.from_names([("P", "P", "0"), ("P", "Q", "1"), ("Q", "Q", "0")])


def fork() -> Presentation:
    """A non-deterministic (two ``a``-edges leave ``X``) strictly sofic presentation."""
    return Presentation.from_names(
        [("X", "X", "a"), ("X", "Y", "a"), ("Y", "X", "b"), ("Y", "Z", "b"), ("Z", "Z", "c"), ("Z", "X", "a")]
    )


def two_class() -> Presentation:
    """Reducible presentation: a golden mean block feeding into a full 2-shift block."""
    return Presentation.from_names(
        [
            ("p", "p", "0"),
            ("p", "q", "1"),
            ("q", "p", "0"),
            ("q", "r", "2"),
            ("r", "r", "0"),
            ("r", "r", "2"),
        ]
    )


_NAMED = {
    "full2": lambda: full_shift(2),
    "full3": lambda: full_shift(3),
    "even": even_shift,
    "gm": golden_mean,
    "cyc0": cyc0,
    "fork": fork,
    "twoclass": two_class,
}

FIXTURE_NAMES = tuple(_NAMED)


def named(name: str) -> Presentation:
    return _NAMED[name]()


def random_presentation(
    rng: random.Random,
    max_vertices: int = 5,
    symbols: tuple[int, int] = (2, 3),
    irreducible: bool = True,
    edge_prob: float = 0.35,
) -> Presentation:
    """Random essential presentation; strongly connected when ``irreducible``.

    Irreducibility is forced by threading a Hamiltonian cycle through the
    vertices before adding random extra edges.
    """
    n = rng.randint(1, max_vertices)
    k = rng.randint(*symbols)
    names = [f"v{i}" for i in range(n)]
    alphabet = [str(a) for a in range(k)]
    edges = set()
    if irreducible:
        order = list(range(n))
        rng.shuffle(order)
        for i in range(n):
            edges.add((names[order[i]], names[order[(i + 1) % n]], rng.choice(alphabet)))
    for s in range(n):
        for d in range(n):
            for a in alphabet:
                if rng.random() < edge_prob / k:
                    edges.add((names[s], names[d], a))
    if not edges:
        edges.add((names[0], names[0], alphabet[0]))
    g = Presentation.from_names(sorted(edges), alphabet, names)
    return essentialize(g) if not irreducible else g


def random_positive_potential(
    rng: random.Random, g: Presentation, depth: int = 1, sign: int = 1, low: float = 0.1, high: float = 3.0
) -> Potential:
    """Random label potential with values of one sign on all words of length ``depth``."""
    import itertools

    table = {}
    for w in itertools.product(g.alphabet, repeat=depth):
        table[w] = sign * round(rng.uniform(low, high), 3)
    return Potential("label", table, depth)
