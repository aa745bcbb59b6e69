from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rcfold import (
    FoldPath,
    FoldSpec,
    FoldingUndefined,
    Measure,
    SiteSpace,
    branch_limit,
    check_convergence_bound,
    enumerate_essential_prefixes,
    essentialize,
    fold,
    fold_path,
    normalize,
    sup_distance,
)
from rcfold.generators import random_measure

from oracles import recursive_essential_prefixes, square_renormalize

F = Fraction


def binary(n):
    return SiteSpace.binary(range(1, n + 1))


P_BASE = Measure(binary(2), (F(2, 5), F(1, 10), F(1, 5), F(3, 10)))
P_SYM = Measure(binary(2), (F(3, 7), F(1, 14), F(1, 14), F(3, 7)))


class TestFold:
    def test_empty_conditioning(self):
        assert fold(P_BASE, FoldSpec((), ())) == P_SYM

    def test_single_site(self):
        f = fold(P_BASE, FoldSpec((1,), (1,)))
        assert f.space.sites == (2,)
        assert f.weights == (F(1, 2), F(1, 2))

    def test_uniform_fixed(self):
        u = Measure.uniform(binary(3))
        for spec in [FoldSpec((), ()), FoldSpec((2,), (0,)), FoldSpec((1, 3), (1, 0))]:
            f = fold(u, spec)
            assert f == Measure.uniform(f.space)

    def test_ising_doubles_interaction(self):
        # agreement weight 2 folds to agreement weight 4, no field
        p = Measure(binary(2), (F(1, 3), F(1, 6), F(1, 6), F(1, 3)))
        f = fold(p, FoldSpec((), ()))
        assert f.weights == (F(2, 5), F(1, 10), F(1, 10), F(2, 5))

    def test_undefined_when_mass_vanishes(self):
        p = Measure(binary(2), (F(1, 2), F(1, 2), F(0), F(0)))
        with pytest.raises(FoldingUndefined):
            fold(p, FoldSpec((), ()))  # every reversal product is zero

    def test_output_symmetric(self):
        for seed in range(20):
            m = random_measure(3, seed)
            f = fold(m, FoldSpec((3,), (1,)))
            assert f.is_symmetric()

    def test_ternary_beta_relabeling(self):
        sp = SiteSpace((1,), ((0, 1, 2),))
        m = normalize(sp, [1, 2, 4])
        spec = FoldSpec((), (), beta=((0,), (2,)))
        f = fold(m, spec)
        assert f.space.alphabets == ((0, 1),)
        assert f.weights == (F(1, 2), F(1, 2))  # both products are 1*4

    def test_inessential_equals_squaring(self):
        for seed in range(20):
            m = random_measure(2, seed)
            sym = fold(m, FoldSpec((), ()))
            assert fold(sym, FoldSpec((), ())) == square_renormalize(sym)


class TestFoldPath:
    def test_empty_path_identity(self):
        assert fold_path(P_BASE, FoldPath(())) is P_BASE

    def test_double_empty_squares_twice(self):
        out = fold_path(P_SYM, [FoldSpec((), ()), FoldSpec((), ())])
        expected = square_renormalize(square_renormalize(P_SYM))
        assert out == expected
        assert out.weights == (F(648, 1297), F(1, 2594), F(1, 2594), F(648, 1297))

    def test_composition_matches_single_steps(self):
        path = [FoldSpec((1,), (1,)), FoldSpec((), ())]
        via_path = fold_path(P_BASE, path)
        step = fold(P_BASE, path[0])
        assert via_path == square_renormalize(step)

    def test_beta_rejected_after_first_step(self):
        with pytest.raises(Exception):
            FoldPath((FoldSpec((), ()), FoldSpec((), (), beta=((0,), (1,)))))


class TestEssentialize:
    def test_moves_conditioned_steps_forward(self):
        k1 = FoldSpec((1,), (1,))
        e = FoldSpec((), ())
        k2 = FoldSpec((2,), (0,))
        out = essentialize([k1, e, k2, e])
        assert out.steps == (k1, k2, e, e)

    def test_all_essential_unchanged(self):
        k1 = FoldSpec((1,), (0,))
        k2 = FoldSpec((2,), (1,))
        assert essentialize([k1, k2]).steps == (k1, k2)

    def test_first_step_stays_first(self):
        e = FoldSpec((), ())
        k = FoldSpec((2,), (1,))
        assert essentialize([e, k, e]).steps == (e, k, e)

    def test_preserves_fold_path_exactly(self):
        import random

        rng = random.Random(0)
        for seed in range(30):
            m = random_measure(3, seed)
            steps = []
            remaining = list(m.space.sites)
            for _ in range(4):
                k = tuple(s for s in remaining if rng.getrandbits(1))
                steps.append(FoldSpec(k, tuple(rng.getrandbits(1) for _ in k)))
                remaining = [s for s in remaining if s not in k]
            path = FoldPath(tuple(steps))
            assert fold_path(m, path) == fold_path(m, essentialize(path))


class TestBranchLimit:
    def test_symmetric_start(self):
        bl = branch_limit(P_SYM, [])
        assert bl.measure.weights == (F(1, 2), F(0), F(0), F(1, 2))
        assert bl.ratio == F(1, 6)
        assert bl.emitted_at == 1

    def test_uniform_on_support_is_fixed_point(self):
        sp = binary(2)
        m = Measure(sp, (F(1, 2), F(0), F(0), F(1, 2)))
        bl = branch_limit(m, [])
        assert bl.measure == m
        assert bl.ratio == 0

    def test_complete_pairing_fixed_point(self):
        sp = binary(2)
        m = Measure(sp, (F(0), F(1, 2), F(1, 2), F(0)))
        bl = branch_limit(m, [])
        assert bl.measure == m

    def test_limit_is_pointwise_limit_of_iterates(self):
        for seed in range(10):
            m = random_measure(3, seed)
            prefix = [FoldSpec((), ())]
            bl = branch_limit(m, prefix)
            iterate = fold_path(m, prefix + [FoldSpec((), ())] * 6)
            bound = m.space.size * bl.ratio ** (2**6)
            assert sup_distance(iterate, bl.measure) <= bound


class TestConvergenceBound:
    def test_two_site_example(self):
        r = check_convergence_bound(P_SYM, [], 2)
        assert r.distance == F(1, 74)
        assert r.bound == F(1, 9)  # 4 * (1/6)^2
        assert r.ok

    def test_uniform_start_distance_zero(self):
        sp = binary(2)
        m = Measure(sp, (F(1, 2), F(0), F(0), F(1, 2)))
        r = check_convergence_bound(m, [], 3)
        assert r.distance == 0
        assert r.ok

    def test_sweep_over_random_measures(self):
        from rcfold.generators import random_fkg_measure

        for seed in range(25):
            m = random_fkg_measure(3, seed)
            r = check_convergence_bound(m, [FoldSpec((), ())], 4)  # i = L + 3
            assert r.ok

    def test_requires_i_past_prefix(self):
        with pytest.raises(Exception):
            check_convergence_bound(P_SYM, [], 1)


class TestEnumerateEssentialPrefixes:
    def test_single_site_first_folds(self):
        m = normalize(binary(1), [1, 2])
        got = list(enumerate_essential_prefixes(m, 1))
        keys = {tuple((s.k_sites, s.alpha) for s in p) for p in got}
        assert keys == {
            (((), ()),),
            (((1,), (0,)),),
            (((1,), (1,)),),
        }

    def test_max_len_zero_empty(self):
        m = normalize(binary(2), [1, 2, 3, 4])
        assert list(enumerate_essential_prefixes(m, 0)) == []

    def test_matches_recursive_oracle(self):
        m = normalize(binary(2), [1, 2, 3, 4])
        ours = {
            tuple((s.k_sites, s.alpha, s.beta) for s in p)
            for p in enumerate_essential_prefixes(m, 3)
        }
        oracle = recursive_essential_prefixes(m, 3)
        assert ours == oracle
        assert len(ours) == 33

    def test_cap_enforced(self):
        from rcfold import CapExceeded

        m = Measure.uniform(binary(5))
        with pytest.raises(CapExceeded):
            list(enumerate_essential_prefixes(m, 1))

    def test_terminal_spaces_shrink(self):
        m = normalize(binary(2), [1, 2, 3, 4])
        for p in enumerate_essential_prefixes(m, 3):
            sizes = []
            remaining = set(m.space.sites)
            for step in p:
                remaining -= set(step.k_sites)
                sizes.append(len(remaining))
            assert sizes == sorted(sizes, reverse=True)


@given(st.integers(0, 2**16 - 1))
def test_fold_symmetry_property(bits):
    weights = [(bits >> (4 * k) & 15) + 1 for k in range(4)]
    m = normalize(binary(2), weights)
    f = fold(m, FoldSpec((), ()))
    assert f.weights == tuple(reversed(f.weights))
