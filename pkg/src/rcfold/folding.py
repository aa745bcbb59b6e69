"""The folding transform, iterated paths, and branch limits.

A folding step is a triple (K, alpha, beta): condition the product P x P on
both copies agreeing with alpha on K and lying pointwise inside the symbol
pair beta off K, then project to the first copy. Concretely, on the reduced
space over the sites off K,

    folded(w) proportional to P(alpha.w) * P(alpha.w_reversed)

where the reversal swaps each coordinate between its two beta symbols. The
output alphabet is relabeled {0, 1} in inherited symbol order, so folded
measures are always binary, and they are symmetric under global reversal by
construction. A step with K empty squares the weights of a symmetric
measure; iterating it drives the measure to the uniform distribution on its
maxima, with a super-exponential sup-norm convergence bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as iter_product
from typing import Iterator, Sequence

from .errors import CapExceeded, FoldingUndefined, InvalidParams
from .measures import Config, Event, Measure, SiteSpace, normalize, sup_distance

BRANCH_CAP = 4


@dataclass(frozen=True)
class FoldSpec:
    """One folding step.

    ``k_sites`` lists the conditioned sites and ``alpha`` their raw symbols
    (aligned with ``k_sites``). ``beta`` gives the two retained symbols per
    remaining site, as a pair of raw-symbol rows aligned with the remaining
    sites in space order; it is omitted (None) on binary alphabets, where
    the canonical labeling is the identity.
    """

    k_sites: tuple
    alpha: tuple
    beta: tuple[tuple, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "k_sites", tuple(self.k_sites))
        object.__setattr__(self, "alpha", tuple(self.alpha))
        if self.beta is not None:
            b1, b2 = self.beta
            object.__setattr__(self, "beta", (tuple(b1), tuple(b2)))
        if len(self.k_sites) != len(self.alpha):
            raise InvalidParams("one alpha symbol per conditioned site required")
        if len(set(self.k_sites)) != len(self.k_sites):
            raise InvalidParams("conditioned sites must be distinct")

    @property
    def is_essential_shape(self) -> bool:
        return bool(self.k_sites)


@dataclass(frozen=True)
class FoldPath:
    """An ordered sequence of folding steps.

    Each step's conditioned sites must lie inside the space remaining after
    the earlier steps; beta may appear on the first step only (every later
    space is binary with the canonical labeling).
    """

    steps: tuple[FoldSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for step in self.steps[1:]:
            if step.beta is not None:
                raise InvalidParams("beta is only meaningful on the first step")

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass(frozen=True)
class BranchLimit:
    """Limit data for a branch: its essential prefix then empty steps forever.

    ``measure`` is uniform on ``argmax_set``, the maxima of the measure
    after the prefix. ``emitted_at`` (called L) is the step index of that
    measure along the branch, counting the first fold as step 1. ``ratio``
    is the largest weight of a non-maximal configuration divided by the
    maximal weight; the sup-distance of the i-th iterate from the limit is
    at most |Omega| * ratio ** (2 ** (i - L)).
    """

    space: SiteSpace
    measure: Measure
    argmax_set: Event
    emitted_at: int
    ratio: Fraction


def _resolve_spec(space: SiteSpace, spec: FoldSpec):
    """Validate a spec against a space; return positional fold data.

    Returns (k_positions, alpha_value_indices, co_positions, pairs) where
    pairs[j] = (low_index, high_index) are the two retained alphabet indices
    at the j-th remaining site, in inherited alphabet order.
    """
    pos = space.site_pos
    for s in spec.k_sites:
        if s not in pos:
            raise InvalidParams(f"site {s!r} not in space")
    order = sorted(range(len(spec.k_sites)), key=lambda i: pos[spec.k_sites[i]])
    k_positions = tuple(pos[spec.k_sites[i]] for i in order)
    alpha_idx = []
    for i in order:
        alph = space.alphabets[pos[spec.k_sites[i]]]
        sym = spec.alpha[i]
        if sym not in alph:
            raise InvalidParams(f"alpha symbol {sym!r} not in alphabet at {spec.k_sites[i]!r}")
        alpha_idx.append(alph.index(sym))
    k_set = set(k_positions)
    co_positions = tuple(p for p in range(space.n) if p not in k_set)

    if spec.beta is None:
        pairs = []
        for p in co_positions:
            if space.radices[p] != 2:
                raise InvalidParams("beta may be omitted on binary alphabets only")
            pairs.append((0, 1))
        return k_positions, tuple(alpha_idx), co_positions, tuple(pairs)

    b1, b2 = spec.beta
    if len(b1) != len(co_positions) or len(b2) != len(co_positions):
        raise InvalidParams("beta rows must cover exactly the remaining sites")
    pairs = []
    for j, p in enumerate(co_positions):
        alph = space.alphabets[p]
        if b1[j] not in alph or b2[j] not in alph:
            raise InvalidParams("beta symbol outside the site's alphabet")
        x, y = alph.index(b1[j]), alph.index(b2[j])
        if x == y:
            raise InvalidParams("beta components must be pointwise distinct")
        pairs.append((min(x, y), max(x, y)))
    return k_positions, tuple(alpha_idx), co_positions, tuple(pairs)


@dataclass(frozen=True)
class FoldWindow:
    """A fold spec resolved against a concrete space, with lifting helpers.

    ``lift`` maps a folded configuration back to the full-space
    configuration it came from (alpha on the conditioned sites, the
    matching beta symbol elsewhere).
    """

    space: SiteSpace
    spec: FoldSpec
    folded_space: SiteSpace
    k_positions: tuple[int, ...]
    alpha_idx: tuple[int, ...]
    co_positions: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]

    def lift_values(self, folded_values: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.space.n
        for p, v in zip(self.k_positions, self.alpha_idx):
            out[p] = v
        for p, pair, bit in zip(self.co_positions, self.pairs, folded_values):
            out[p] = pair[bit]
        return tuple(out)

    def lift_config(self, folded: Config) -> Config:
        return Config(self.space, self.lift_values(folded.values))

    def lift_index(self, folded_index: int) -> int:
        return self.space.config_index(self.lift_values(self.folded_space.values_at(folded_index)))

    def lift_event(self, folded_event: Event) -> Event:
        return Event.from_indices(self.space, (self.lift_index(i) for i in folded_event.indices()))

    def slice_event(self, full_event: Event) -> Event:
        """Folded configurations whose lift lies in the full-space event."""
        return Event.from_indices(
            self.folded_space,
            (
                i
                for i in range(self.folded_space.size)
                if full_event.contains_index(self.lift_index(i))
            ),
        )


def fold_window(space: SiteSpace, spec: FoldSpec) -> FoldWindow:
    k_positions, alpha_idx, co_positions, pairs = _resolve_spec(space, spec)
    folded_space = SiteSpace(
        tuple(space.sites[p] for p in co_positions), tuple((0, 1) for _ in co_positions)
    )
    return FoldWindow(space, spec, folded_space, k_positions, alpha_idx, co_positions, pairs)


def _fold_nums(space: SiteSpace, nums: Sequence[int], spec: FoldSpec):
    """Integer-weight folding engine; raises FoldingUndefined on zero mass."""
    k_positions, alpha_idx, co_positions, pairs = _resolve_spec(space, spec)
    weights = space.index_weights
    base = sum(weights[p] * v for p, v in zip(k_positions, alpha_idx))
    # contribution of folded bit j at its original site, per bit value
    tbl = [
        (weights[p] * lo, weights[p] * hi)
        for p, (lo, hi) in zip(co_positions, pairs)
    ]
    m = len(co_positions)
    out = []
    for folded in range(1 << m):
        fwd = base
        rev = base
        for j in range(m):
            bit = folded >> (m - 1 - j) & 1
            fwd += tbl[j][bit]
            rev += tbl[j][1 - bit]
        out.append(nums[fwd] * nums[rev])
    if not any(out):
        raise FoldingUndefined(f"fold {spec} has zero total mass")
    folded_space = SiteSpace(
        tuple(space.sites[p] for p in co_positions), tuple((0, 1) for _ in co_positions)
    )
    return folded_space, out


def fold(p: Measure, spec: FoldSpec) -> Measure:
    """Apply one folding step; the result is binary and reversal-symmetric."""
    nums, _ = p.int_weights
    folded_space, out = _fold_nums(p.space, nums, spec)
    return normalize(folded_space, out)


def fold_path(p: Measure, path: FoldPath | Sequence[FoldSpec]) -> Measure:
    """Left-fold of ``fold`` over the steps; an empty path returns p."""
    steps = tuple(path)
    if not steps:
        return p
    space = p.space
    nums, _ = p.int_weights
    for spec in steps:
        space, nums = _fold_nums(space, nums, spec)
    return normalize(space, nums)


def essentialize(path: FoldPath | Sequence[FoldSpec]) -> FoldPath:
    """Move nonempty-K steps after the first to the front, preserving order.

    The first step stays first (it symmetrizes the measure either way);
    empty-K steps are appended. The folded result is unchanged exactly.
    """
    steps = tuple(path)
    if not steps:
        return FoldPath(())
    head, rest = steps[0], steps[1:]
    essential = tuple(s for s in rest if s.is_essential_shape)
    inessential = tuple(s for s in rest if not s.is_essential_shape)
    return FoldPath((head,) + essential + inessential)


def _limit_from_nums(space: SiteSpace, nums: Sequence[int], emitted_at: int) -> BranchLimit:
    top = max(nums)
    argmax = Event.from_indices(space, (i for i, w in enumerate(nums) if w == top))
    below = [w for w in nums if 0 < w < top]
    ratio = Fraction(max(below), top) if below else Fraction(0)
    return BranchLimit(space, Measure.uniform_on(argmax), argmax, emitted_at, ratio)


def branch_limit(p: Measure, essential_prefix: FoldPath | Sequence[FoldSpec]) -> BranchLimit:
    """Limit of the branch: the prefix followed by empty-K steps forever.

    The limit is uniform on the maxima of the prefix-folded measure. With
    an empty prefix, p itself is taken as the state after the first fold
    (step 1), so emitted_at = max(len(prefix), 1).
    """
    steps = tuple(essential_prefix)
    space = p.space
    nums, _ = p.int_weights
    for spec in steps:
        space, nums = _fold_nums(space, nums, spec)
    return _limit_from_nums(space, nums, max(len(steps), 1))


@dataclass(frozen=True)
class ConvergenceCheck:
    distance: Fraction
    bound: Fraction
    ok: bool


def check_convergence_bound(
    p: Measure, prefix: FoldPath | Sequence[FoldSpec], i: int
) -> ConvergenceCheck:
    """Compare the i-th branch iterate against its sup-norm bound.

    The iterate applies i - L empty-K folds after the prefix, L being the
    prefix step count (min 1: an empty prefix treats p as the state after
    the first fold). The bound is |Omega| * ratio ** (2 ** (i - L)) with
    |Omega| the size of p's own space.
    """
    steps = tuple(prefix)
    ell = max(len(steps), 1)
    if i <= ell:
        raise InvalidParams(f"iterate index {i} must exceed the prefix length {ell}")
    space = p.space
    nums, _ = p.int_weights
    for spec in steps:
        space, nums = _fold_nums(space, nums, spec)
    limit = _limit_from_nums(space, nums, ell)
    empty_step = FoldSpec((), ())
    for _ in range(i - ell):
        space, nums = _fold_nums(space, nums, empty_step)
    iterate = normalize(space, nums)
    distance = sup_distance(iterate, limit.measure)
    bound = p.space.size * limit.ratio ** (2 ** (i - ell))
    return ConvergenceCheck(distance, bound, distance <= bound)


def _first_fold_specs(space: SiteSpace) -> Iterator[FoldSpec]:
    """All (K, alpha, beta) first folds of a space, in canonical order."""
    n = space.n
    for kmask in range(1 << n):
        k_positions = [p for p in range(n) if kmask >> p & 1]
        k_sites = tuple(space.sites[p] for p in k_positions)
        co_positions = [p for p in range(n) if not kmask >> p & 1]
        alpha_choices = iter_product(*(space.alphabets[p] for p in k_positions))
        beta_site_choices = [
            list(combinations(space.alphabets[p], 2)) for p in co_positions
        ]
        for alpha in alpha_choices:
            for beta_cols in iter_product(*beta_site_choices):
                if all(space.radices[p] == 2 for p in co_positions):
                    beta = None
                else:
                    beta = (
                        tuple(c[0] for c in beta_cols),
                        tuple(c[1] for c in beta_cols),
                    )
                yield FoldSpec(k_sites, alpha, beta)


def _extension_specs(space: SiteSpace) -> Iterator[FoldSpec]:
    """All nonempty-K binary steps available on a folded space."""
    n = space.n
    for kmask in range(1, 1 << n):
        k_sites = tuple(space.sites[p] for p in range(n) if kmask >> p & 1)
        for alpha in iter_product((0, 1), repeat=len(k_sites)):
            yield FoldSpec(k_sites, alpha)


def iter_essential_branches(
    p: Measure, max_len: int | None = None
) -> Iterator[tuple[FoldPath, SiteSpace, tuple[int, ...]]]:
    """Depth-first stream of (prefix, folded space, folded int weights).

    Yields every defined essential prefix: a first fold, then nonempty-K
    steps. Prefix length is capped at max_len (default: one more than the
    site count, which already exhausts every branch).
    """
    if max_len is None:
        max_len = p.space.n + 1
    if max_len <= 0:
        return
    nums, _ = p.int_weights

    def descend(space, nums, path, depth):
        for spec in _extension_specs(space):
            try:
                sub_space, sub_nums = _fold_nums(space, nums, spec)
            except FoldingUndefined:
                continue
            sub_path = path + (spec,)
            yield FoldPath(sub_path), sub_space, tuple(sub_nums)
            if depth + 1 < max_len:
                yield from descend(sub_space, sub_nums, sub_path, depth + 1)

    for first in _first_fold_specs(p.space):
        try:
            space, out = _fold_nums(p.space, nums, first)
        except FoldingUndefined:
            continue
        yield FoldPath((first,)), space, tuple(out)
        if max_len > 1:
            yield from descend(space, out, (first,), 1)


def enumerate_essential_prefixes(
    p: Measure, max_len: int, cap: int = BRANCH_CAP
) -> Iterator[FoldPath]:
    """Every defined essential prefix up to max_len, deduplicated by steps."""
    if p.space.n > cap:
        raise CapExceeded(f"|sites|={p.space.n} exceeds cap {cap}")
    seen = set()
    for path, _, _ in iter_essential_branches(p, max_len):
        key = tuple((s.k_sites, s.alpha, s.beta) for s in path)
        if key not in seen:
            seen.add(key)
            yield path
