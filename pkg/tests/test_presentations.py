import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmslab.errors import DepthError, EmptyShiftError, PresentationError
from kmslab.fixtures import FIXTURE_NAMES, even_shift, full_shift, golden_mean, named, random_presentation
from kmslab.oracle import brute_membership_words, member
from kmslab.presentations import (
    EpPoint,
    Potential,
    Presentation,
    admissible_words,
    decode_point,
    essentialize,
    higher_block,
    is_essential,
    norm_inf,
    normalize_ep,
    parse_potential,
    parse_presentation,
    random_point,
    readable_from,
    recode_point,
    recode_potential,
)

FULL2_DOC = {"alphabet": ["0", "1"], "vertices": ["*"], "edges": [
    {"src": "*", "dst": "*", "label": "0"}, {"src": "*", "dst": "*", "label": "1"}]}
EVEN_DOC = {"alphabet": ["0", "1"], "vertices": ["A", "B"], "edges": [
    {"src": "A", "dst": "A", "label": "1"}, {"src": "A", "dst": "B", "label": "0"},
    {"src": "B", "dst": "A", "label": "0"}]}


class TestParse:
    def test_full2(self):
        g = parse_presentation(FULL2_DOC)
        assert len(g.vertices) == 1 and len(g.edges) == 2

    def test_even_from_text(self):
        g = parse_presentation(json.dumps(EVEN_DOC))
        assert g.vertices == ("A", "B") and len(g.edges) == 3

    def test_even_language_matches_word_oracle(self):
        # Readable words of the even shift up to length 12: 1-blocks separated by even 0-runs.
        g = parse_presentation(EVEN_DOC)
        for n in range(1, 13):
            words = brute_membership_words(g, n)
            assert {tuple(g.word_names(w)) for w in admissible_words(g, n)} == words

    def test_dangling_reference(self):
        doc = json.loads(json.dumps(EVEN_DOC))
        doc["edges"].append({"src": "A", "dst": "Z", "label": "0"})
        with pytest.raises(PresentationError, match="dangling reference"):
            parse_presentation(doc)

    def test_undeclared_symbol(self):
        doc = json.loads(json.dumps(EVEN_DOC))
        doc["edges"].append({"src": "A", "dst": "B", "label": "2"})
        with pytest.raises(PresentationError, match="dangling reference"):
            parse_presentation(doc)

    def test_duplicate_edge(self):
        doc = json.loads(json.dumps(EVEN_DOC))
        doc["edges"].append({"src": "A", "dst": "B", "label": "0"})
        with pytest.raises(PresentationError, match="duplicate edge"):
            parse_presentation(doc)

    def test_empty_graph(self):
        with pytest.raises(PresentationError, match="empty graph"):
            parse_presentation({"alphabet": ["0"], "vertices": ["A"], "edges": []})

    def test_schema_violation(self):
        with pytest.raises(PresentationError, match="schema violation"):
            parse_presentation({"alphabet": ["0"], "edges": []})
        with pytest.raises(PresentationError, match="schema violation"):
            parse_presentation("{not json")

    def test_ids_are_lexicographic(self):
        g = Presentation.from_names([("b", "a", "y"), ("a", "b", "x")])
        assert g.vertices == ("a", "b") and g.alphabet == ("x", "y")


class TestEssentialize:
    def test_full2_unchanged(self):
        assert essentialize(full_shift(2)) == full_shift(2)

    def test_even_with_sink(self):
        g = Presentation.from_names(
            [("A", "A", "1"), ("A", "B", "0"), ("B", "A", "0"), ("B", "C", "1")], vertices=["A", "B", "C"]
        )
        assert essentialize(g) == even_shift()

    def test_source_chain_pruned(self):
        g = Presentation.from_names([("S", "A", "0"), ("A", "A", "1"), ("T", "S", "0")])
        e = essentialize(g)
        assert e.vertices == ("A",)

    def test_empty_shift(self):
        g = Presentation.from_names([("A", "B", "0")])
        with pytest.raises(EmptyShiftError):
            essentialize(g)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_idempotent(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 5)
        edges = {(f"v{rng.randrange(n)}", f"v{rng.randrange(n)}", str(rng.randrange(2))) for _ in range(rng.randint(1, 8))}
        g = Presentation.from_names(sorted(edges))
        try:
            e = essentialize(g)
        except EmptyShiftError:
            return
        assert is_essential(e)
        assert essentialize(e) == e


class TestEpPoint:
    def test_normal_form(self):
        assert EpPoint.parse("01(0)") == EpPoint(("0", "1"), ("0",))
        assert EpPoint.parse("(00)") == EpPoint((), ("0",))
        assert EpPoint.parse("1(01)") == EpPoint((), ("1", "0"))
        assert EpPoint.parse("0(0)") == EpPoint((), ("0",))

    def test_empty_period_rejected(self):
        with pytest.raises(PresentationError):
            EpPoint(("0",), ())

    def test_str_roundtrip(self):
        for s in ["(0)", "1(0)", "01(0)", "(001)"]:
            assert str(EpPoint.parse(s)) == s

    def test_multichar_symbols(self):
        x = EpPoint.parse("ab cd (ef)")
        assert x.preperiod == ("ab", "cd") and x.period == ("ef",)
        assert str(x) == "ab cd (ef)"

    @given(st.lists(st.sampled_from("01"), max_size=5), st.lists(st.sampled_from("01"), min_size=1, max_size=5))
    def test_normalization_preserves_ray(self, u, v):
        x = EpPoint(tuple(u), tuple(v))
        n = len(u) + 3 * len(v)
        ray = (tuple(u) + tuple(v) * 4)[:n]
        assert x.prefix(n) == ray
        # minimal: no shorter representation exists
        assert normalize_ep(x.preperiod, x.period) == (x.preperiod, x.period)
        assert EpPoint(x.preperiod, x.period * 2) == x

    def test_shift_and_prepend(self):
        x = EpPoint.parse("01(0)")
        assert x.shift(1) == EpPoint.parse("1(0)")
        assert x.shift(5) == EpPoint.parse("(0)")
        assert x.shift(1).prepend(("0",)) == x


class TestReadableFrom:
    def test_even_examples(self):
        g = even_shift()
        assert g.vertex_names(readable_from(g, EpPoint.parse("(0)"))) == {"A", "B"}
        assert g.vertex_names(readable_from(g, EpPoint.parse("01(0)"))) == {"B"}
        assert readable_from(g, EpPoint.parse("(01)")) == frozenset()

    def test_full2(self):
        g = full_shift(2)
        for s in ["(0)", "1(01)", "0110(1)"]:
            assert g.vertex_names(readable_from(g, EpPoint.parse(s))) == {"*"}

    def test_unknown_symbol_not_in_shift(self):
        assert readable_from(even_shift(), EpPoint.parse("(2)")) == frozenset()

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_agrees_with_membership_oracle(self, name):
        g = named(name)
        rng = random.Random(7)
        for _ in range(100):
            u = tuple(rng.choice(g.alphabet) for _ in range(rng.randint(0, 3)))
            v = tuple(rng.choice(g.alphabet) for _ in range(rng.randint(1, 3)))
            x = EpPoint(u, v)
            assert bool(readable_from(g, x)) == member(g, x)

    def test_random_points_are_members(self, g, rng):
        for _ in range(50):
            assert readable_from(g, random_point(g, rng))


class TestPotential:
    def test_norms(self):
        assert norm_inf(Potential.constant(1)) == 1
        assert norm_inf(Potential("label", {"0": 1, "1": 3})) == 3
        assert norm_inf(Potential("label", {"0": -2, "1": 1.5})) == 2

    def test_exact_decimals(self):
        F = parse_potential('{"kind": "label", "depth": 1, "table": {"0": 0.1, "1": 0.2}}')
        assert F.table["0"] + F.table["1"] == Fraction(3, 10)

    def test_totality(self):
        F = Potential("label", {"0": 1})
        with pytest.raises(PresentationError, match="not total"):
            F.resolve(even_shift())

    def test_inadmissible_keys_ignored(self):
        F = Potential("label", {"00": 1, "01": 2, "10": 3, "11": 4}, depth=2)
        assert set(F.resolve(golden_mean())) == {(0, 0), (0, 1), (1, 0)}

    def test_depth_checks(self):
        with pytest.raises(DepthError):
            Potential("label", {"0": 1}, depth=0)
        with pytest.raises(DepthError):
            Potential("label", {"01": 1}, depth=1).resolve(even_shift())

    def test_schema(self):
        with pytest.raises(PresentationError, match="schema"):
            parse_potential({"kind": "weird", "table": {}})


class TestHigherBlock:
    def test_identity(self):
        hb, wm = higher_block(full_shift(2), 1)
        assert hb == full_shift(2) and wm == {"0": ("0",), "1": ("1",)}

    def test_full2_k2(self):
        hb, wm = higher_block(full_shift(2), 2)
        assert hb.alphabet == ("00", "01", "10", "11")
        assert len(hb.edges) == 8

    def test_golden_mean_k2(self):
        hb, _ = higher_block(golden_mean(), 2)
        assert hb.alphabet == ("00", "01", "10")

    def test_k0(self):
        with pytest.raises(DepthError):
            higher_block(full_shift(2), 0)

    @pytest.mark.parametrize("k", [2, 3])
    def test_conjugacy(self, g, k):
        rng = random.Random(k)
        hb, wm = higher_block(g, k)
        for _ in range(200):
            x = random_point(g, rng)
            y = recode_point(x, wm)
            assert readable_from(hb, y), (x, y)
            assert decode_point(y, wm) == x
            assert recode_point(x.shift(1), wm) == y.shift(1)

    def test_recode_potential(self):
        g = golden_mean()
        F = Potential("label", {"00": 1, "01": 2, "10": 3}, depth=2)
        hb, wm = higher_block(g, 2)
        F1 = recode_potential(F, g, wm)
        assert {k: float(v) for k, v in F1.resolve(hb).items()} == {(0,): 1.0, (1,): 2.0, (2,): 3.0}

    def test_random_presentations_essential(self):
        rng = random.Random(3)
        for _ in range(30):
            assert is_essential(random_presentation(rng))
