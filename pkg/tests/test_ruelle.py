import math
import random

import numpy as np
import pytest

from kmslab.cover import build_cover, degree_m, canonical_lift
from kmslab.errors import DepthError, PreconditionError
from kmslab.fixtures import even_shift, full_shift, random_presentation
from kmslab.presentations import EpPoint, Potential
from kmslab.ruelle import (
    LCFunction,
    _keys,
    apply_section,
    apply_transfer,
    cylinder_indicator,
    fixed_state,
    spectral_radius,
    state_value,
    transfer_matrix,
    vertex_indicator,
    verify_fixed_state,
)

GOLDEN = (1 + math.sqrt(5)) / 2
ONE = Potential.constant(1)
ZERO = Potential.constant(0)


def constant_fn(H, c=1.0, depth=0):
    return LCFunction(depth, {k: c for k in _keys(H, depth)})


def values_by_state(H, g):
    assert g.depth == 0
    return [g((s,)) for s in range(H.size)]


def random_fn(H, rng, depth):
    return LCFunction(depth, {k: rng.uniform(-1, 1) for k in _keys(H, depth)})


def label_potential(g, rng):
    return Potential("label", {a: rng.uniform(0.2, 2.0) for a in g.alphabet})


class TestTransferMatrix:
    def test_full2(self):
        H = build_cover(full_shift(2))
        for beta in (0.0, 0.5, math.log(2)):
            assert transfer_matrix(H, ONE, beta).dense == pytest.approx(np.array([[2 * math.exp(-beta)]]))

    def test_even(self):
        H = build_cover(even_shift())
        beta = 0.37
        M = transfer_matrix(H, ONE, beta).dense
        assert M == pytest.approx(math.exp(-beta) * np.array([[1, 1, 0], [0, 1, 1], [0, 1, 0]]))

    def test_zero_potential_row_sums(self, H):
        M = transfer_matrix(H, ZERO, 0.0).dense
        assert M.sum(axis=1).tolist() == list(H.N)
        assert (M >= 0).all()

    def test_constant_one_gives_weighted_preimage_sums(self, g, H, rng):
        F = label_potential(g, rng)
        beta = 0.7
        M = transfer_matrix(H, F, beta).dense
        for _ in range(5):
            from kmslab.presentations import random_point
            lift = canonical_lift(g, H, random_point(g, rng))
            s = lift.state(0)
            expect = sum(math.exp(-beta * float(F.table[g.alphabet[H.hedges[e].label]])) for e in H.in_hedges[s])
            assert M[s].sum() == pytest.approx(expect)

    def test_cover_potential(self):
        H = build_cover(even_shift())
        F = Potential("cover", {"{A,B}": 1, "{A}": 2, "{B}": 3})
        M = transfer_matrix(H, F, 1.0).dense
        e = math.exp
        assert M == pytest.approx(np.array([[e(-1), e(-2), 0], [0, e(-2), e(-3)], [0, e(-2), 0]]))

    def test_overflow_rejected(self):
        H = build_cover(full_shift(2))
        with pytest.raises(PreconditionError):
            transfer_matrix(H, ONE, 800.0)

    def test_log_scale(self):
        H = build_cover(full_shift(2))
        T = transfer_matrix(H, ONE, 200.0)
        assert T.log_scale != 0
        assert spectral_radius(T).log_rho == pytest.approx(math.log(2) - 200.0, rel=1e-12)

    def test_depth_mismatch(self):
        H = build_cover(full_shift(2))
        with pytest.raises(DepthError):
            transfer_matrix(H, Potential("label", {"00": 1, "01": 1, "10": 1, "11": 1}, depth=2), 0.1)


class TestSpectralRadius:
    def test_full2_root(self):
        H = build_cover(full_shift(2))
        assert spectral_radius(transfer_matrix(H, ONE, math.log(2))).rho == pytest.approx(1.0, abs=1e-14)

    def test_even(self):
        H = build_cover(even_shift())
        sd = spectral_radius(transfer_matrix(H, ONE, 0.0))
        assert sd.rho == pytest.approx(GOLDEN, abs=1e-12)
        assert sd.cw_lower <= sd.rho <= sd.cw_upper
        assert sd.left.sum() == pytest.approx(1.0)
        assert sd.residual_right < 1e-10 and sd.residual_left < 1e-10

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((3, 3))).rho == 0.0

    def test_monotone_and_log_convex(self, g, H, rng):
        F = label_potential(g, rng)
        ts = sorted(rng.uniform(-2, 3) for _ in range(12))
        rhos = [spectral_radius(transfer_matrix(H, F, t)).rho for t in ts]
        assert all(a >= b * (1 - 1e-12) for a, b in zip(rhos, rhos[1:]))
        for _ in range(20):
            a, b = rng.uniform(-2, 3), rng.uniform(-2, 3)
            mid = spectral_radius(transfer_matrix(H, F, (a + b) / 2)).rho
            ra = spectral_radius(transfer_matrix(H, F, a)).rho
            rb = spectral_radius(transfer_matrix(H, F, b)).rho
            assert mid <= math.sqrt(ra * rb) * (1 + 1e-9)

    def test_log_lipschitz(self, g, H, rng):
        F = label_potential(g, rng)
        norm = float(F.norm_inf)
        for _ in range(30):
            t, s = rng.uniform(0, 3), rng.uniform(0, 3)
            lt = spectral_radius(transfer_matrix(H, F, t)).log_rho
            ls = spectral_radius(transfer_matrix(H, F, s)).log_rho
            assert abs(lt - ls) <= abs(t - s) * norm + 1e-9


class TestFixedState:
    def test_full2(self):
        H = build_cover(full_shift(2))
        st = fixed_state(transfer_matrix(H, ONE, math.log(2)))
        assert st.u.tolist() == pytest.approx([1.0])

    def test_even_closed_form(self):
        H = build_cover(even_shift())
        st = fixed_state(transfer_matrix(H, ONE, math.log(GOLDEN)))
        assert st.u == pytest.approx([0.0, GOLDEN / (1 + GOLDEN), 1 / (1 + GOLDEN)], abs=1e-9)
        assert st.u == pytest.approx([0, 0.618034, 0.381966], abs=1e-6)

    def test_diagonal(self):
        st = fixed_state(np.diag([2.0, 1.0]))
        assert st.u.tolist() == pytest.approx([1.0, 0.0], abs=1e-8) and st.rho == pytest.approx(2.0)

    def test_needs_positive_rho(self):
        with pytest.raises(PreconditionError):
            fixed_state(np.zeros((2, 2)))

    def test_random_draws(self):
        rng = random.Random(3)
        for _ in range(100):
            g = random_presentation(rng, max_vertices=5)
            H = build_cover(g)
            F = label_potential(g, rng)
            beta = rng.uniform(-1, 2)
            T = transfer_matrix(H, F, beta)
            st = fixed_state(T)
            M = T.dense
            assert st.u.min() >= 0 and st.u.sum() == pytest.approx(1.0)
            assert np.abs(st.u @ M - st.rho * st.u).sum() <= 1e-8 * max(1.0, st.rho)


class TestOperators:
    def test_transfer_of_one_full2(self):
        H = build_cover(full_shift(2))
        beta = 0.3
        out = apply_transfer(H, ONE, beta, constant_fn(H))
        assert values_by_state(H, out) == pytest.approx([2 * math.exp(-beta)])

    def test_transfer_of_cylinder_full2(self):
        H = build_cover(full_shift(2))
        out = apply_transfer(H, ZERO, 1.7, cylinder_indicator(H, "1"))
        assert out.depth == 0 and values_by_state(H, out) == [1.0]

    def test_transfer_of_vertex_indicator_even(self):
        H = build_cover(even_shift())
        beta = 0.25
        out = apply_transfer(H, ONE, beta, vertex_indicator(H, "{A}"))
        assert values_by_state(H, out) == pytest.approx([math.exp(-beta)] * 3)

    def test_section_of_one_full2(self):
        H = build_cover(full_shift(2))
        out = apply_section(H, ONE, 0.9, constant_fn(H))
        assert out.depth == 1
        assert len(out.values) == 2
        assert list(out.values.values()) == pytest.approx([math.exp(0.9) / 2] * 2)

    def test_section_of_one_even(self):
        H = build_cover(even_shift())
        out = apply_section(H, ZERO, 0.0, constant_fn(H))
        for (s0, e0), v in out.values.items():
            assert v == pytest.approx(1 / H.N[H.hedges[e0].dst])
        # m evaluated along a lift agrees with the degree table.
        g = even_shift()
        lift = canonical_lift(g, H, EpPoint.parse("1(0)"))
        e0 = next(e for e in H.out_hedges[lift.state(0)] if H.hedges[e].dst == lift.state(1) and H.hedges[e].label == 1)
        assert out((lift.state(0), e0)) == pytest.approx(1 / degree_m(H, lift))

    def test_transfer_inverts_section(self, H, rng):
        F = Potential("label", {a: rng.uniform(-1, 1) for a in H.base.alphabet})
        beta = rng.uniform(-2, 2)
        for _ in range(20):
            g = random_fn(H, rng, rng.randint(0, 2))
            back = apply_transfer(H, F, beta, apply_section(H, F, beta, g))
            assert back.depth == g.depth
            for k in _keys(H, g.depth):
                assert back(k) == pytest.approx(g(k), abs=1e-12)

    def test_depth_overflow(self):
        H = build_cover(full_shift(2))
        with pytest.raises(DepthError):
            apply_section(H, ONE, 0.0, constant_fn(H, depth=8))


class TestVerifyFixedState:
    def test_full2(self):
        H = build_cover(full_shift(2))
        rep = verify_fixed_state(np.array([1.0]), H, ONE, math.log(2))
        assert rep.passed and max(rep.residual_L, rep.residual_I, rep.residual_kstep) <= 1e-15

    def test_even(self):
        H = build_cover(even_shift())
        u = np.array([0.0, GOLDEN / (1 + GOLDEN), 1 / (1 + GOLDEN)])
        rep = verify_fixed_state(u, H, ONE, math.log(GOLDEN))
        assert rep.passed
        assert max(rep.residual_L, rep.residual_I, rep.residual_kstep, rep.normalization) <= 1e-12

    def test_perturbed_detected(self):
        H = build_cover(even_shift())
        u = np.array([0.0, GOLDEN / (1 + GOLDEN), 1 / (1 + GOLDEN)]) + 0.1
        rep = verify_fixed_state(u, H, ONE, math.log(GOLDEN))
        assert not rep.passed
        assert max(rep.residual_L, rep.residual_I, rep.residual_kstep) >= 0.05

    def test_state_value_consistency(self, H, rng):
        # Refining a cylinder by one hedge multiplies the total mass by rho.
        g = H.base
        F = label_potential(g, rng)
        T = transfer_matrix(H, F, 0.5)
        st = fixed_state(T)
        for key in _keys(H, 1):
            whole = state_value(H, F, 0.5, st.u, LCFunction(1, {key: 1.0}))
            parts = sum(state_value(H, F, 0.5, st.u, LCFunction(2, {k: 1.0})) for k in _keys(H, 2) if k[:2] == key)
            assert parts == pytest.approx(whole * st.rho, rel=1e-8, abs=1e-9)
