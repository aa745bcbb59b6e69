from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rcfold import (
    AllZero,
    CapExceeded,
    Config,
    Event,
    Measure,
    OverlappingDomains,
    SiteSpace,
    SpaceMismatch,
    concat,
    cylinder,
    enumerate_upsets,
    max_config,
    normalize,
    reverse,
    sup_distance,
)
from rcfold.serialize import measure_from_json, measure_to_json

from oracles import brute_upset_masks

F = Fraction


def binary(n):
    return SiteSpace.binary(range(1, n + 1))


class TestNormalize:
    def test_uniform(self):
        m = normalize(binary(2), [1, 1, 1, 1])
        assert m.weights == (F(1, 4),) * 4

    def test_divide_by_total(self):
        m = normalize(binary(2), [4, 1, 2, 3])
        assert m.weights == (F(2, 5), F(1, 10), F(1, 5), F(3, 10))

    def test_all_zero(self):
        with pytest.raises(AllZero):
            normalize(binary(2), [0, 0, 0, 0])

    def test_weights_sum_to_one_enforced(self):
        with pytest.raises(Exception):
            Measure(binary(1), (F(1, 3), F(1, 3)))


class TestConcat:
    def test_two_singletons(self):
        a = SiteSpace.binary([1]).config([1])
        b = SiteSpace.binary([2]).config([0])
        c = concat(a, b)
        assert c.space.sites == (1, 2)
        assert c.values == (1, 0)

    def test_empty_identity(self):
        a = SiteSpace.binary([]).config([])
        b = binary(2).config([1, 0])
        assert concat(a, b).values == (1, 0)

    def test_interleaved_sites(self):
        a = SiteSpace.binary([1, 3]).config([0, 1])
        b = SiteSpace.binary([2]).config([1])
        c = concat(a, b)
        assert c.space.sites == (1, 2, 3)
        assert c.values == (0, 1, 1)

    def test_overlap_rejected(self):
        a = SiteSpace.binary([1]).config([1])
        with pytest.raises(OverlappingDomains):
            concat(a, a)

    @given(st.integers(0, 62))
    def test_associative(self, bits):
        # split six sites into three groups by the two-bit pattern per site
        sites = list(range(6))
        groups = ([], [], [])
        for s in sites:
            groups[(bits >> s) % 3].append(s)
        cfgs = [
            SiteSpace.binary(g).config([1] * len(g)) for g in groups
        ]
        left = concat(concat(cfgs[0], cfgs[1]), cfgs[2])
        right = concat(cfgs[0], concat(cfgs[1], cfgs[2]))
        assert left == right


class TestReverse:
    def test_binary_flip(self):
        sp = binary(2)
        w = sp.config([0, 1])
        beta = (sp.config([0, 0]), sp.config([1, 1]))
        assert reverse(w, beta).values == (1, 0)

    def test_general_pair(self):
        sp = binary(2)
        w = sp.config([1, 1])
        beta = (sp.config([0, 0]), sp.config([1, 1]))
        assert reverse(w, beta).values == (0, 0)

    def test_outside_range_undefined(self):
        sp = SiteSpace((1,), ((0, 1, 2),))
        w = sp.config([2])
        beta = (sp.config([0]), sp.config([1]))
        assert reverse(w, beta) is None

    def test_involution_inside_range(self):
        sp = SiteSpace((1, 2), ((0, 1, 2), (0, 1)))
        beta = (sp.config([0, 1]), sp.config([2, 0]))
        for vals in [(0, 0), (0, 1), (2, 0), (2, 1)]:
            w = sp.config(vals)
            assert reverse(reverse(w, beta), beta) == w


class TestMaxConfig:
    def test_binary(self):
        assert max_config(binary(3)).values == (1, 1, 1)

    def test_mixed_radix(self):
        sp = SiteSpace((1, 2), ((0, 1, 2), (0, 1)))
        assert max_config(sp).values == (2, 1)

    def test_ordered_symbols(self):
        sp = SiteSpace(("s",), (("a", "b", "c"),))
        assert max_config(sp).symbols() == ("c",)


class TestUpsets:
    @pytest.mark.parametrize("n,count", [(0, 2), (1, 3), (2, 6), (3, 20), (4, 168)])
    def test_counts_match_brute_force(self, n, count):
        got = enumerate_upsets(binary(n))
        assert len(got) == count
        assert sorted(e.mask for e in got) == brute_upset_masks(n)

    def test_every_member_upward_closed(self):
        for e in enumerate_upsets(binary(3)):
            assert e.is_increasing()

    def test_cap(self):
        with pytest.raises(CapExceeded):
            enumerate_upsets(binary(6))

    def test_bar_maps_increasing_to_decreasing(self):
        for e in enumerate_upsets(binary(3)):
            barred = e.bar()
            assert barred.bar() == e
            assert barred.is_decreasing()


class TestSupDistance:
    def test_equal(self):
        m = normalize(binary(1), [1, 1])
        assert sup_distance(m, m) == 0

    def test_point_vs_uniform(self):
        sp = binary(1)
        p = normalize(sp, [1, 1])
        q = Measure(sp, (F(1), F(0)))
        assert sup_distance(p, q) == F(1, 2)

    def test_folded_vs_limit(self):
        sp = binary(2)
        p = Measure(sp, (F(3, 7), F(1, 14), F(1, 14), F(3, 7)))
        q = Measure(sp, (F(1, 2), F(0), F(0), F(1, 2)))
        assert sup_distance(p, q) == F(1, 14)

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            sup_distance(normalize(binary(1), [1, 1]), normalize(binary(2), [1] * 4))


class TestEvents:
    def test_cylinder(self):
        sp = binary(3)
        w = sp.config([1, 1, 0])
        e = cylinder(w, [1])
        assert sorted(e.indices()) == [4, 5, 6, 7]

    def test_cylinder_empty_region_is_full(self):
        sp = binary(2)
        assert cylinder(sp.config([0, 1]), []).count == 4

    def test_bar_involution_general(self):
        sp = SiteSpace((1, 2), ((0, 1, 2), (0, 1)))
        e = Event.from_indices(sp, [0, 3, 5])
        assert e.bar().bar() == e

    def test_boolean_algebra(self):
        sp = binary(2)
        a = Event.from_indices(sp, [0, 1])
        b = Event.from_indices(sp, [1, 2])
        assert sorted((a & b).indices()) == [1]
        assert sorted((a | b).indices()) == [0, 1, 2]
        assert sorted(a.complement().indices()) == [2, 3]


class TestMeasure:
    def test_prob_of_event(self):
        m = normalize(binary(2), [4, 1, 2, 3])
        e = Event.from_indices(binary(2), [0, 3])
        assert m.prob(e) == F(7, 10)

    def test_uniform_on_support(self):
        sp = binary(2)
        m = Measure.uniform_on(Event.from_indices(sp, [1, 2]))
        assert m.weights == (F(0), F(1, 2), F(1, 2), F(0))

    def test_symmetry_detection(self):
        sp = binary(2)
        assert Measure(sp, (F(3, 7), F(1, 14), F(1, 14), F(3, 7))).is_symmetric()
        assert not normalize(sp, [4, 1, 2, 3]).is_symmetric()

    @given(st.lists(st.integers(0, 20), min_size=4, max_size=4).filter(any))
    def test_normalize_sums_to_one(self, ws):
        m = normalize(binary(2), ws)
        assert sum(m.weights) == 1


class TestMeasureJson:
    def test_round_trip(self):
        m = normalize(binary(2), [4, 1, 2, 3])
        obj = measure_to_json(m)
        assert obj["weights"] == ["2/5", "1/10", "1/5", "3/10"]
        assert measure_from_json(obj) == m

    def test_general_alphabets(self):
        sp = SiteSpace(("a", "b"), (("x", "y", "z"), (0, 1)))
        m = normalize(sp, [1] * 6)
        assert measure_from_json(measure_to_json(m)) == m
