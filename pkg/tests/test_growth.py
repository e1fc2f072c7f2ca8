import math
import random
from fractions import Fraction

import pytest

from kmslab.cover import build_cover
from kmslab.errors import DepthError
from kmslab.fixtures import cyc0, even_shift, full_shift, golden_mean
from kmslab.growth import (
    edge_weights,
    extremal_birkhoff,
    finite_horizon,
    growth_rates,
    log_m_weights,
    mean_cycle,
    path_count_extremes,
)
from kmslab.oracle import brute_cycles, brute_preimages
from kmslab.presentations import EpPoint, Potential, random_point

GOLDEN = (1 + math.sqrt(5)) / 2
GM_F = Potential("label", {"0": 1, "1": 3})


class TestGrowthRates:
    def test_full2(self):
        r = growth_rates(build_cover(full_shift(2)))
        assert r.h_m == pytest.approx(math.log(2), abs=1e-12)
        assert r.g_min == pytest.approx(math.log(2), abs=1e-12) and r.g_max == r.h_m

    def test_even(self):
        r = growth_rates(build_cover(even_shift()))
        assert r.h_m == pytest.approx(math.log(GOLDEN), abs=1e-10)

    def test_cyc0_exact_zero(self):
        r = growth_rates(build_cover(cyc0()))
        assert r.h_m == 0.0 and r.g_min == 0.0 and r.exact_zero
        g = cyc0()
        assert [brute_preimages(g, EpPoint.parse("(0)"), n)[0] for n in range(1, 13)] == list(range(2, 14))

    def test_horizon_guard(self):
        with pytest.raises(ValueError):
            growth_rates(build_cover(full_shift(2)), horizon=1)

    def test_brackets(self, H):
        r = growth_rates(H)
        for name in ("h_m", "g_min", "g_max"):
            lo, hi = r.brackets[name]
            assert lo <= getattr(r, name) + 1e-12 and getattr(r, name) <= hi + 1e-12
        assert 0 <= r.g_min <= r.h_m + 1e-12

    def test_cover_bracket_contains_base_counts(self, g, H, rng):
        # max_x #sigma^{-n}(x) is the largest column sum of A^n, an upper bound on rho^n.
        r = growth_rates(H)
        ext = path_count_extremes(H, 12)
        for n in (4, 8, 12):
            best = max(brute_preimages(g, random_point(g, rng), n)[0] for _ in range(10))
            assert best <= ext[n - 1][1]
        assert r.h_m <= math.log(ext[-1][1]) / 12 + 1e-12

    def test_gmin_equals_gmax_when_primitive(self):
        for g in (full_shift(2), even_shift(), golden_mean()):
            r = growth_rates(build_cover(g))
            assert r.g_min == pytest.approx(r.g_max, abs=1e-12)


class TestMeanCycles:
    def test_golden_mean(self):
        A, B = extremal_birkhoff(golden_mean(), GM_F)
        assert A.exact == 1 and B.exact == 2
        assert len(A.cycle) == 1 and len(B.cycle) == 2

    def test_constant(self, g):
        A, B = extremal_birkhoff(g, Potential.constant(Fraction(7, 3)))
        assert A.exact == B.exact == Fraction(7, 3)

    def test_even_log_m(self):
        H = build_cover(even_shift())
        A, B = extremal_birkhoff(H)
        assert A.value == pytest.approx(math.log(2) / 2, abs=1e-15)
        assert B.value == pytest.approx(math.log(2), abs=1e-15)
        means = sorted(m for _, m in brute_cycles(*log_m_weights(H)))
        assert means == pytest.approx([math.log(2) / 2, math.log(2), math.log(2)])

    def test_depth_mismatch(self):
        with pytest.raises(DepthError):
            extremal_birkhoff(golden_mean(), Potential("label", {"00": 1, "01": 1, "10": 1}, depth=2))

    def test_cycle_is_simple_and_attains_value(self):
        rng = random.Random(5)
        for _ in range(100):
            n = rng.randint(1, 6)
            edges = [(s, d, Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
                     for s in range(n) for d in range(n) if rng.random() < 0.4]
            edges.append((n - 1, 0, Fraction(1)))
            edges.extend((i, i + 1, Fraction(rng.randint(-5, 5))) for i in range(n - 1))
            for kind in ("min", "max"):
                r = mean_cycle(n, edges, kind)
                vs = [edges[e][0] for e in r.cycle]
                assert len(vs) == len(set(vs))
                assert all(edges[a][1] == edges[b][0] for a, b in zip(r.cycle, r.cycle[1:] + r.cycle[:1]))
                assert sum(edges[e][2] for e in r.cycle) / len(r.cycle) == r.exact

    def test_matches_brute(self, g, H):
        for graph, F in ((g, Potential("label", {a: i + 1 for i, a in enumerate(g.alphabet)})), (H, None)):
            n, edges = log_m_weights(graph) if F is None else edge_weights(graph, F)
            if n > 7:
                continue
            means = [m for _, m in brute_cycles(n, edges)]
            A, B = extremal_birkhoff(graph, F)
            assert float(min(means)) == pytest.approx(A.value, abs=1e-12)
            assert float(max(means)) == pytest.approx(B.value, abs=1e-12)


class TestFiniteHorizon:
    def test_golden_mean(self):
        g = golden_mean()
        assert finite_horizon(g, GM_F, 1) == (1, 3)
        assert finite_horizon(g, GM_F, 2) == (1, 2)

    def test_constant(self, g):
        for k in (1, 3, 7):
            assert finite_horizon(g, Potential.constant(2), k) == (2, 2)

    def test_sandwich(self, g):
        F = Potential("label", {a: (-1) ** i * (i + 1) for i, a in enumerate(g.alphabet)})
        A, B = extremal_birkhoff(g, F)
        prev = None
        for k in (1, 2, 4, 8, 16):
            a, b = finite_horizon(g, F, k)
            assert a <= A.exact <= B.exact <= b
            if prev is not None:
                assert a >= prev
            prev = a
