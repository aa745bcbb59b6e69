"""Seeded measure generators for suites and the CLI.

Random measures draw independent integer weights uniformly from 1..64 and
normalize. The conditioned generators reject until their predicate holds
or the retry budget runs out, then fall back to a family known to satisfy
it (product measures, or a balanced mixture on up to three sites); the
fallback is re-verified, so a generator never returns a measure violating
its own contract. Everything is deterministic in the seed.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .association import (
    ExchangeableLevels,
    exchangeable_from_levels,
    is_fkg,
    is_nfkg,
)
from .errors import InvalidParams, RcfoldError
from .measures import Event, Measure, SiteSpace, normalize
from .rcr import IsingSpec, complete_pairing_base, induced_measure

RETRY_BUDGET = 10**5
WEIGHT_TOP = 64


def binary_space(n: int) -> SiteSpace:
    if n < 0:
        raise InvalidParams("site count must be nonnegative")
    return SiteSpace.binary(range(1, n + 1))


def random_measure(n: int, seed: int) -> Measure:
    rng = random.Random(seed)
    space = binary_space(n)
    return normalize(space, [rng.randrange(1, WEIGHT_TOP + 1) for _ in range(space.size)])


def random_product_measure(n: int, rng: random.Random) -> Measure:
    space = binary_space(n)
    margins = [Fraction(rng.randrange(1, 8), 8) for _ in range(n)]
    weights = []
    for i in range(space.size):
        w = Fraction(1)
        for j, m in enumerate(margins):
            w *= m if i >> (n - 1 - j) & 1 else 1 - m
        weights.append(w)
    return Measure(space, tuple(weights))


def _fkg_quick_reject(nums: Sequence[int], n: int) -> bool:
    """Cheap necessary condition: scan pairs, bail on first violation."""
    size = 1 << n
    for i in range(size):
        for j in range(i + 1, size):
            jo = i | j
            if jo == i or jo == j:
                continue
            if nums[jo] * nums[i & j] < nums[i] * nums[j]:
                return True
    return False


def _draw_weights(rng: random.Random, size: int) -> list[int]:
    bits = rng.getrandbits(6 * size)
    return [(bits >> (6 * k) & 63) + 1 for k in range(size)]


def random_fkg_measure(n: int, seed: int, budget: int = RETRY_BUDGET) -> Measure:
    """Rejection-sample a measure satisfying the lattice condition.

    Falls back to a random product measure (which satisfies it with
    equality) when the budget runs out; rejection at four sites and above
    almost always ends there.
    """
    rng = random.Random(seed)
    space = binary_space(n)
    size = space.size
    for _ in range(budget):
        nums = _draw_weights(rng, size)
        if _fkg_quick_reject(nums, n):
            continue
        m = normalize(space, nums)
        if is_fkg(m).verdict:
            return m
    fallback = random_product_measure(n, rng)
    if not is_fkg(fallback).verdict:
        raise RcfoldError("fallback product measure fails the lattice condition")
    return fallback


def _balanced_mixture(n: int, rng: random.Random) -> Measure:
    """Mix the balanced-uniform measure with the uniform one (n <= 3 only,
    where the mixture is exchangeable with log-concave levels)."""
    space = binary_space(n)
    lam = Fraction(rng.randrange(1, 8), 8)
    balanced = induced_measure(complete_pairing_base(space))
    uniform = Measure.uniform(space)
    return Measure(
        space,
        tuple(lam * a + (1 - lam) * b for a, b in zip(balanced.weights, uniform.weights)),
    )


def _nfkg_quick_reject(nums: Sequence[int], n: int) -> bool:
    """Necessary condition from the no-conditioning fold: balanced
    reversal products must be equal and dominate the rest."""
    size = 1 << n
    want = {n // 2, (n + 1) // 2}
    level = None
    for i in range(size):
        if i.bit_count() in want:
            p = nums[i] * nums[size - 1 - i]
            if level is None:
                level = p
            elif p != level:
                return True
    for i in range(size):
        if i.bit_count() not in want and nums[i] * nums[size - 1 - i] > level:
            return True
    return False


def random_nfkg_measure(n: int, seed: int, budget: int = RETRY_BUDGET) -> Measure:
    """Rejection-sample a measure satisfying the weak negative condition.

    Falls back to a random product measure or, on up to three sites, a
    balanced mixture; the fallback is verified before being returned.
    """
    rng = random.Random(seed)
    space = binary_space(n)
    size = space.size
    for _ in range(budget):
        nums = _draw_weights(rng, size)
        if _nfkg_quick_reject(nums, n):
            continue
        m = normalize(space, nums)
        if is_nfkg(m).verdict:
            return m
    if n <= 3 and rng.randrange(2):
        fallback = _balanced_mixture(n, rng)
    else:
        fallback = random_product_measure(n, rng)
    if not is_nfkg(fallback).verdict:
        raise RcfoldError("fallback measure fails the weak negative condition")
    return fallback


def uniform_subset_measure(n: int, bit_strings: Sequence[str]) -> Measure:
    """Uniform measure on the configurations given as 0/1 strings."""
    space = binary_space(n)
    indices = []
    for s in bit_strings:
        if len(s) != n or any(ch not in "01" for ch in s):
            raise InvalidParams(f"bad configuration string {s!r}")
        indices.append(int(s, 2))
    if not indices:
        raise InvalidParams("the subset must be nonempty")
    return Measure.uniform_on(Event.from_indices(space, indices))


def exchangeable_measure(n: int, level_weights: Sequence) -> Measure:
    return exchangeable_from_levels(ExchangeableLevels.from_weights(n, level_weights))


def ising_spec_from_edge_list(edges: Sequence[tuple], fields=None) -> IsingSpec:
    """Build a model spec from (u, v, weight) triples; vertices inferred."""
    vertices = []
    for u, v, _ in edges:
        for w in (u, v):
            if w not in vertices:
                vertices.append(w)
    field_tuple = None
    if fields is not None:
        field_tuple = tuple(fields.get(v, Fraction(1)) for v in vertices)
    return IsingSpec(tuple(vertices), tuple(edges), field_tuple)
