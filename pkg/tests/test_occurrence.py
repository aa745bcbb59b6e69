from fractions import Fraction

import pytest

from rcfold import (
    Event,
    FoldSpec,
    Measure,
    PreconditionFailed,
    SiteSpace,
    box,
    box_with_rule,
    check_disjoint_cluster_bound,
    check_folding_hypothesis_bound,
    disjoint_pairs,
    enumerate_upsets,
    event_slice,
    fold,
    full_rule,
    increasing_decreasing_rule,
    increasing_only_rule,
    induced_rule,
    ising_build,
    IsingSpec,
)
from rcfold.occurrence import box_product_sweep
from rcfold.generators import random_product_measure, random_fkg_measure

F = Fraction


def binary(n):
    return SiteSpace.binary(range(1, n + 1))


def coord_event(sp, site, value):
    return Event.from_predicate(sp, lambda c: c.value_at(site) == value)


class TestDisjointPairs:
    def test_full_events_contain_empty_pair(self):
        sp = binary(2)
        full = Event.full(sp)
        pairs = disjoint_pairs(full, full, sp.config([0, 1]))
        assert (frozenset(), frozenset()) in pairs

    def test_three_site_example(self):
        sp = binary(3)
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 1)
        w = sp.config([1, 1, 0])
        got = disjoint_pairs(a, b, w)
        assert got == frozenset(
            {
                (frozenset({1}), frozenset({2})),
                (frozenset({1}), frozenset({2, 3})),
                (frozenset({1, 3}), frozenset({2})),
            }
        )

    def test_omega_outside_a_gives_empty(self):
        # w is in every one of its own cylinders, so w outside A kills all pairs
        sp = binary(3)
        a = coord_event(sp, 1, 1)
        b = Event.full(sp)
        w = sp.config([0, 1, 1])
        assert disjoint_pairs(a, b, w) == frozenset()


class TestBox:
    def test_box_with_full_space(self):
        sp = binary(2)
        a = coord_event(sp, 1, 1)
        assert box(a, Event.full(sp)) == a

    def test_two_coordinates(self):
        sp = binary(2)
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 1)
        assert sorted(box(a, b).indices()) == [3]

    def test_box_inside_intersection(self):
        sp = binary(3)
        for amask in range(0, 256, 7):
            for bmask in range(0, 256, 11):
                a, b = Event(sp, amask), Event(sp, bmask)
                assert box(a, b).is_subset(a & b)

    def test_box_monotone(self):
        sp = binary(2)
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 1)
        bigger = b | coord_event(sp, 1, 1)
        assert box(a, b).is_subset(box(a, bigger))


class TestBoxWithRule:
    def test_full_rule_equals_box(self):
        sp = binary(2)
        rule = full_rule()
        for amask in range(16):
            for bmask in range(16):
                a, b = Event(sp, amask), Event(sp, bmask)
                assert box_with_rule(a, b, rule) == box(a, b)

    def test_increasing_only_matches_box_on_increasing_events(self):
        sp = binary(3)
        rule = increasing_only_rule()
        ups = enumerate_upsets(sp)
        for a in ups:
            for b in ups:
                assert box_with_rule(a, b, rule) == box(a, b)

    def test_increasing_decreasing_identity(self):
        sp = binary(3)
        rule = increasing_decreasing_rule()
        ups = enumerate_upsets(sp)
        for a in ups:
            for b_up in ups:
                b = b_up.complement()  # decreasing
                assert box_with_rule(a, b, rule) == a & b

    def test_rule_output_inside_box(self):
        sp = binary(2)
        for rule in (increasing_only_rule(), increasing_decreasing_rule()):
            for amask in range(16):
                for bmask in range(16):
                    a, b = Event(sp, amask), Event(sp, bmask)
                    assert box_with_rule(a, b, rule).is_subset(box(a, b))


class TestEventSlice:
    def test_full_event_slices_to_full(self):
        sp = binary(2)
        spec = FoldSpec((1,), (1,))
        sliced = event_slice(sp, spec, Event.full(sp))
        assert sliced == Event.full(sliced.space)

    def test_coordinate_slice(self):
        sp = binary(2)
        spec = FoldSpec((1,), (1,))
        e = Event.from_indices(sp, [2, 3])  # first coordinate is 1
        assert event_slice(sp, spec, e).count == 2  # both folded configs lift in

    def test_partial_slice(self):
        sp = binary(2)
        spec = FoldSpec((1,), (1,))
        e = Event.from_indices(sp, [3])  # only 11
        sliced = event_slice(sp, spec, e)
        assert sorted(sliced.indices()) == [1]

    def test_slice_of_box_contained_in_box_of_slices(self):
        sp = binary(3)
        rule = full_rule()
        specs = [FoldSpec((), ()), FoldSpec((1,), (1,)), FoldSpec((2,), (0,)), FoldSpec((1, 3), (1, 0))]
        events = [Event(sp, m) for m in (0b10011001, 0b11110000, 0b01100110, 0b11111110)]
        for spec in specs:
            pushed = induced_rule(rule, sp, spec)
            for a in events:
                for b in events:
                    lhs = event_slice(sp, spec, box_with_rule(a, b, rule))
                    rhs = box_with_rule(
                        event_slice(sp, spec, a), event_slice(sp, spec, b), pushed
                    )
                    assert lhs.is_subset(rhs)

    def test_slice_inclusion_exhaustive_two_sites(self):
        from rcfold.folding import _first_fold_specs

        sp = binary(2)
        rules = [full_rule(), increasing_only_rule()]
        for spec in _first_fold_specs(sp):
            for rule in rules:
                pushed = induced_rule(rule, sp, spec)
                for amask in range(16):
                    for bmask in range(16):
                        a, b = Event(sp, amask), Event(sp, bmask)
                        lhs = event_slice(sp, spec, box_with_rule(a, b, rule))
                        rhs = box_with_rule(
                            event_slice(sp, spec, a), event_slice(sp, spec, b), pushed
                        )
                        assert lhs.is_subset(rhs)


class TestInducedRule:
    def test_empty_conditioning_keeps_rule(self):
        sp = binary(2)
        spec = FoldSpec((), ())
        rule = full_rule()
        pushed = induced_rule(rule, sp, spec)
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 1)
        for w in sp.iter_configs():
            assert pushed.select(a, b, w) == rule.select(a, b, w)

    def test_full_induces_full(self):
        from rcfold import fold_window

        sp = binary(3)
        spec = FoldSpec((2,), (1,))
        pushed = induced_rule(full_rule(), sp, spec)
        fsp = fold_window(sp, spec).folded_space
        for amask in range(0, 16, 3):
            for bmask in range(0, 16, 5):
                a, b = Event(fsp, amask), Event(fsp, bmask)
                for w in fsp.iter_configs():
                    assert pushed.select(a, b, w) == disjoint_pairs(a, b, w)

    def test_induced_pairs_avoid_conditioned_sites(self):
        sp = binary(3)
        spec = FoldSpec((2,), (1,))
        pushed = induced_rule(increasing_only_rule(), sp, spec)
        fsp = SiteSpace((1, 3), ((0, 1), (0, 1)))
        a = Event.from_indices(fsp, [2, 3])
        b = Event.from_indices(fsp, [1, 3])
        for w in fsp.iter_configs():
            for k, l in pushed.select(a, b, w):
                assert 2 not in k and 2 not in l


class TestDisjointClusterBound:
    def test_two_site_increasing_decreasing(self):
        build = ising_build(IsingSpec((1, 2), ((1, 2, F(2)),)))
        sp = build.measure.space
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 0)
        rep = check_disjoint_cluster_bound(
            build.measure, build.base, increasing_decreasing_rule(), a, b, 0
        )
        assert rep.lhs == F(1, 6)
        assert rep.rhs == F(1, 3)
        assert rep.ok

    def test_full_event_sides(self):
        build = ising_build(IsingSpec((1, 2), ((1, 2, F(2)),)))
        sp = build.measure.space
        full = Event.full(sp)
        a = coord_event(sp, 1, 1)
        rep = check_disjoint_cluster_bound(
            build.measure, build.base, increasing_decreasing_rule(), a, full, 0
        )
        # bar of the full event is itself; symmetric measures keep P(A)
        assert rep.lhs <= rep.rhs
        assert rep.ok

    def test_asymmetric_base_rejected(self):
        from rcfold import BondStateAssignment, HyperbondStructure, RcrBase

        sp = binary(2)
        struct = HyperbondStructure(sp, ((1, 2),))
        base = RcrBase(
            struct, ((BondStateAssignment(struct, (frozenset({(1, 1)}),)), F(1)),)
        )
        p = Measure(sp, (F(0), F(0), F(0), F(1)))
        with pytest.raises(PreconditionFailed, match="symmetric"):
            check_disjoint_cluster_bound(
                p, base, full_rule(), Event.full(sp), Event.full(sp), 0
            )

    def test_three_site_sweep(self):
        build = ising_build(
            IsingSpec((1, 2, 3), ((1, 2, F(2)), (2, 3, F(2)), (1, 3, F(2))))
        )
        sp = build.measure.space
        rule = increasing_decreasing_rule()
        ups = enumerate_upsets(sp)
        for a in ups:
            for b_up in ups:
                rep = check_disjoint_cluster_bound(
                    build.measure, build.base, rule, a, b_up.complement(), 0
                )
                assert rep.ok


class TestFoldingHypothesisBound:
    def test_product_measure_full_rule_consistent(self):
        m = random_product_measure(2, __import__("random").Random(3))
        sp = m.space
        for amask in range(16):
            for bmask in range(16):
                rep = check_folding_hypothesis_bound(
                    m, full_rule(), Event(sp, amask), Event(sp, bmask), 0
                )
                assert rep.consistent
                assert rep.conclusion_ok  # independent case: the product bound holds

    def test_full_event_trivial(self):
        m = random_fkg_measure(2, 9)
        sp = m.space
        full = Event.full(sp)
        b = coord_event(sp, 2, 1)
        rep = check_folding_hypothesis_bound(m, full_rule(), full, b, 0)
        assert rep.conclusion_ok  # P(full box B) = P(B) <= P(B)

    def test_ising_counterexample_is_consistent(self):
        build = ising_build(IsingSpec((1, 2), ((1, 2, F(2)),)))
        sp = build.measure.space
        a = coord_event(sp, 1, 1)
        b = coord_event(sp, 2, 1)
        rep = check_folding_hypothesis_bound(
            build.measure, increasing_only_rule(), a, b, 0
        )
        assert rep.lhs == F(1, 3)
        assert rep.rhs == F(1, 4)
        assert not rep.conclusion_ok
        assert not rep.hypothesis_ok  # some folding must also fail
        assert rep.consistent

    def test_meta_property_on_random_fkg(self):
        import random

        rng = random.Random(12)
        for seed in range(6):
            m = random_fkg_measure(2, 100 + seed)
            sp = m.space
            for _ in range(10):
                a = Event(sp, rng.randrange(16))
                b = Event(sp, rng.randrange(16))
                for rule in (full_rule(), increasing_only_rule()):
                    rep = check_folding_hypothesis_bound(m, rule, a, b, 0)
                    assert rep.consistent


class TestBoxProductSweep:
    def test_matches_direct_box_on_two_sites(self):
        m = random_product_measure(2, __import__("random").Random(1))
        res = box_product_sweep(m)
        assert res["pairs"] == 256
        assert not res["violations"]

    def test_product_three_sites(self):
        m = random_product_measure(3, __import__("random").Random(2))
        res = box_product_sweep(m)
        assert res["pairs"] == 65536
        assert not res["violations"]
