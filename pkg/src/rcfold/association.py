"""Association checkers: lattice conditions, PA/NA scans, and pipelines.

The lattice (FKG) condition P(join) P(meet) >= P(w) P(w') has an exactly
equivalent folded form: every defined folding puts its maximum at the
all-ones configuration. Its negative counterparts ask instead that the
balanced configurations (number of ones within 1/2 of half the sites) be
maxima of every defined folding, weakly (NFKG) or strictly and equal-valued
(SNFKG). Positive and negative association are verified by exhaustive scans
over increasing event pairs, the negative scan restricted to pairs carried
by complementary coordinate sets.

The two pipelines walk every essential branch of the folding tree down to
its limiting distribution and certify it by an explicit cluster base: a
ferromagnetic pair base built from the limit's support on the positive
side, the uniform complete-pairing base on the strict negative side. All
arithmetic is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Sequence

from .errors import (
    CapExceeded,
    InvalidParams,
    NonBinaryAlphabet,
    PreconditionFailed,
    RcfoldError,
)
from .folding import (
    FoldPath,
    FoldSpec,
    FoldingUndefined,
    _first_fold_specs,
    _fold_nums,
    iter_essential_branches,
)
from .measures import (
    UPSET_CAP,
    Config,
    Event,
    Measure,
    SiteSpace,
    _upset_masks,
    as_fraction,
    normalize,
    weight_summer,
)
from .rcr import (
    complete_pairing_base,
    construct_uniform_symmetric_rcr,
    induced_measure,
    predicates,
    verify_rcr,
)

BRANCH_CAP = 4


@dataclass(frozen=True)
class AssociationReport:
    """Verdict of an exhaustive check, a witness when it fails, and counts."""

    verdict: bool
    witness: dict | None
    quantifier_log: dict

    def __bool__(self) -> bool:
        return self.verdict


def _require_binary(space: SiteSpace, what: str) -> None:
    if not space.is_binary:
        raise NonBinaryAlphabet(f"{what} requires a binary space")


def _event_configs(event: Event) -> list[str]:
    return [str(c) for c in event.configs()]


def _config_str(space: SiteSpace, index: int) -> str:
    return str(space.config_at(index))


def describe_path(path: FoldPath | Sequence[FoldSpec]) -> str:
    parts = []
    for s in path:
        if s.k_sites:
            body = ",".join(f"{site}={sym}" for site, sym in zip(s.k_sites, s.alpha))
        else:
            body = "-"
        parts.append(f"[{body}]")
    return "".join(parts) or "[]"


def is_fkg(p: Measure) -> AssociationReport:
    """Scan all configuration pairs for the lattice condition."""
    _require_binary(p.space, "the lattice condition")
    nums, _ = p.int_weights
    size = p.space.size
    checked = 0
    for i in range(size):
        for j in range(i + 1, size):
            jo, me = i | j, i & j
            if jo == i or jo == j:
                continue  # comparable pairs hold with equality
            checked += 1
            if nums[jo] * nums[me] < nums[i] * nums[j]:
                return AssociationReport(
                    False,
                    {
                        "omega": _config_str(p.space, i),
                        "omega_prime": _config_str(p.space, j),
                        "lhs": p.weights[jo] * p.weights[me],
                        "rhs": p.weights[i] * p.weights[j],
                    },
                    {"pairs": checked},
                )
    return AssociationReport(True, None, {"pairs": checked})


def is_fkg_via_foldings(p: Measure) -> AssociationReport:
    """Equivalent folded form: every defined folding peaks at all-ones."""
    _require_binary(p.space, "the folded lattice condition")
    nums, _ = p.int_weights
    checked = 0
    for spec in _first_fold_specs(p.space):
        try:
            fspace, fnums = _fold_nums(p.space, nums, spec)
        except FoldingUndefined:
            continue
        checked += 1
        top = max(fnums)
        if fnums[-1] != top:
            best = fnums.index(top)
            return AssociationReport(
                False,
                {
                    "fold": describe_path([spec]),
                    "max_at": _config_str(fspace, best),
                    "value_at_ones": Fraction(fnums[-1], sum(fnums)),
                    "max_value": Fraction(top, sum(fnums)),
                },
                {"foldings": checked},
            )
    return AssociationReport(True, None, {"foldings": checked})


def is_pa(p: Measure, cap: int = UPSET_CAP) -> AssociationReport:
    """P(A and B) >= P(A) P(B) over all pairs of increasing events."""
    _require_binary(p.space, "positive association")
    n = p.space.n
    if n > cap:
        raise CapExceeded(f"|sites|={n} exceeds cap {cap}")
    ups = _upset_masks(n)
    nums, den = p.int_weights
    wsum = weight_summer(nums, p.space.size)
    sums = [wsum(m) for m in ups]
    for i in range(len(ups)):
        si = sums[i]
        mi = ups[i]
        for j in range(i, len(ups)):
            if wsum(mi & ups[j]) * den < si * sums[j]:
                return AssociationReport(
                    False,
                    {
                        "A": _event_configs(Event(p.space, mi)),
                        "B": _event_configs(Event(p.space, ups[j])),
                        "lhs": Fraction(wsum(mi & ups[j]), den),
                        "rhs": Fraction(si * sums[j], den * den),
                    },
                    {"upsets": len(ups), "pairs": len(ups) ** 2},
                )
    return AssociationReport(True, None, {"upsets": len(ups), "pairs": len(ups) ** 2})


@lru_cache(maxsize=None)
def _lifted_upsets(space: SiteSpace, nmask: int) -> tuple[int, ...]:
    """Nontrivial increasing events measurable on the sites in nmask,
    lifted to full-space masks."""
    positions = [q for q in range(space.n) if nmask >> q & 1]
    k = len(positions)
    sub_index = []
    for i in range(space.size):
        vals = space.values_at(i)
        s = 0
        for q in positions:
            s = s * 2 + vals[q]
        sub_index.append(s)
    lifted = []
    for um in _upset_masks(k):
        if um == 0 or um == (1 << (1 << k)) - 1:
            continue  # empty and full events hold trivially
        lifted.append(sum(1 << i for i in range(space.size) if um >> sub_index[i] & 1))
    return tuple(lifted)


def is_na(p: Measure, cap: int = UPSET_CAP) -> AssociationReport:
    """P(A and B) <= P(A) P(B) for increasing pairs with disjoint support.

    A pair has disjoint support when, for some coordinate set N, every
    member of A and B is recognized on N and its complement respectively.
    It suffices to scan pairs where A is measurable on N and B on the
    complement, both increasing: any supported pair is sandwiched between
    such a factored pair (same intersection, no larger marginals), so the
    factored scan decides the full definition.
    """
    _require_binary(p.space, "negative association")
    n = p.space.n
    if n > cap:
        raise CapExceeded(f"|sites|={n} exceeds cap {cap}")
    nums, den = p.int_weights
    wsum = weight_summer(nums, p.space.size)
    full = (1 << n) - 1
    scanned = 0
    for nmask in range(1 << n):
        side_a = _lifted_upsets(p.space, nmask)
        if not side_a:
            continue
        side_b = _lifted_upsets(p.space, full ^ nmask)
        sums_b = [(mb, wsum(mb)) for mb in side_b]
        for ma in side_a:
            sa = wsum(ma)
            for mb, sb in sums_b:
                scanned += 1
                if wsum(ma & mb) * den > sa * sb:
                    return AssociationReport(
                        False,
                        {
                            "N": sorted(
                                (p.space.sites[q] for q in range(n) if nmask >> q & 1),
                                key=repr,
                            ),
                            "A": _event_configs(Event(p.space, ma)),
                            "B": _event_configs(Event(p.space, mb)),
                            "lhs": Fraction(wsum(ma & mb), den),
                            "rhs": Fraction(sa * sb, den * den),
                        },
                        {"splits": 1 << n, "pairs": scanned},
                    )
    return AssociationReport(True, None, {"splits": 1 << n, "pairs": scanned})


def _balanced_indices(m: int) -> list[int]:
    """Folded-space indices whose popcount k has |k - m/2| <= 1/2."""
    want = {m // 2, (m + 1) // 2}
    return [i for i in range(1 << m) if i.bit_count() in want]


def _nfkg_violation(space: SiteSpace, nums: Sequence[int]) -> dict | None:
    for spec in _first_fold_specs(space):
        try:
            fspace, fnums = _fold_nums(space, nums, spec)
        except FoldingUndefined:
            continue
        top = max(fnums)
        total = sum(fnums)
        for i in _balanced_indices(fspace.n):
            if fnums[i] != top:
                return {
                    "fold": describe_path([spec]),
                    "balanced": _config_str(fspace, i),
                    "value": Fraction(fnums[i], total),
                    "max_value": Fraction(top, total),
                }
    return None


def _snfkg_violation(space: SiteSpace, nums: Sequence[int]) -> dict | None:
    for spec in _first_fold_specs(space):
        try:
            fspace, fnums = _fold_nums(space, nums, spec)
        except FoldingUndefined:
            continue
        m = fspace.n
        balanced = _balanced_indices(m)
        vals = {fnums[i] for i in balanced}
        total = sum(fnums)
        if len(vals) > 1:
            return {
                "fold": describe_path([spec]),
                "reason": "balanced configurations not equal-valued",
            }
        level = vals.pop()
        unbalanced = set(range(1 << m)) - set(balanced)
        for i in sorted(unbalanced):
            if fnums[i] >= level:
                return {
                    "fold": describe_path([spec]),
                    "reason": "unbalanced configuration not strictly below",
                    "omega": _config_str(fspace, i),
                    "value": Fraction(fnums[i], total),
                    "balanced_value": Fraction(level, total),
                }
    return None


def is_nfkg(p: Measure) -> AssociationReport:
    """Balanced configurations are maxima of every defined folding."""
    _require_binary(p.space, "the negative lattice condition")
    nums, _ = p.int_weights
    witness = _nfkg_violation(p.space, nums)
    log = {"foldings": sum(1 for _ in _first_fold_specs(p.space))}
    return AssociationReport(witness is None, witness, log)


def is_snfkg(p: Measure, check_closure: bool = True) -> AssociationReport:
    """Balanced configurations are equal and strictly maximal per folding.

    On a positive verdict this also re-derives two consequences and raises
    if either fails (they are theorems, so a failure is a library bug):
    the weak condition holds, and every defined folding satisfies the
    strict condition again.
    """
    _require_binary(p.space, "the strict negative lattice condition")
    nums, _ = p.int_weights
    witness = _snfkg_violation(p.space, nums)
    log = {"foldings": sum(1 for _ in _first_fold_specs(p.space))}
    if witness is not None:
        return AssociationReport(False, witness, log)
    if check_closure:
        if _nfkg_violation(p.space, nums) is not None:
            raise RcfoldError("strict condition without the weak one")
        for spec in _first_fold_specs(p.space):
            try:
                fspace, fnums = _fold_nums(p.space, nums, spec)
            except FoldingUndefined:
                continue
            if _snfkg_violation(fspace, fnums) is not None:
                raise RcfoldError("strict condition not preserved by a folding")
    return AssociationReport(True, None, log)


@dataclass(frozen=True)
class BranchFailure:
    branch: str
    stage: str
    detail: str


@dataclass(frozen=True)
class PipelineReport:
    ok: bool
    branches: int
    distinct_limits: int
    failures: tuple[BranchFailure, ...]
    final: AssociationReport

    def __bool__(self) -> bool:
        return self.ok


def _reduced_key(space: SiteSpace, nums: Sequence[int]):
    g = 0
    for w in nums:
        g = gcd(g, w)
    return space.sites, tuple(w // g for w in nums)


def fkg_theorem_pipeline(p: Measure, cap: int = BRANCH_CAP) -> PipelineReport:
    """Certify positive association along every essential branch limit.

    Requires the lattice condition. Each branch limit must be a symmetric
    uniform two-valued measure satisfying the lattice condition; its pair
    base must exist, be symmetric, ferromagnetic and pairwise, and
    reproduce the limit exactly. The final stage is the exhaustive
    positive-association scan of p itself.
    """
    _require_binary(p.space, "the positive association pipeline")
    if p.space.n > cap:
        raise CapExceeded(f"|sites|={p.space.n} exceeds cap {cap}")
    if not is_fkg(p).verdict:
        raise PreconditionFailed("measure does not satisfy the lattice condition")

    failures: list[BranchFailure] = []
    branches = 0
    seen = set()
    for path, space, nums in iter_essential_branches(p):
        branches += 1
        key = _reduced_key(space, nums)
        if key in seen:
            continue
        seen.add(key)
        name = describe_path(path)
        top = max(nums)
        argmax = Event.from_indices(space, (i for i, w in enumerate(nums) if w == top))
        limit = Measure.uniform_on(argmax)
        if argmax.bar() != argmax:
            failures.append(BranchFailure(name, "symmetric", "limit support not reversal-closed"))
            continue
        if not is_fkg(limit).verdict:
            failures.append(BranchFailure(name, "lattice", "limit fails the lattice condition"))
            continue
        try:
            base = construct_uniform_symmetric_rcr(argmax)
        except PreconditionFailed as exc:
            failures.append(BranchFailure(name, "construct", str(exc)))
            continue
        flags = predicates(base)
        if not (flags.symmetric and flags.ferromagnetic and flags.pairwise):
            failures.append(BranchFailure(name, "predicates", repr(flags)))
            continue
        if not verify_rcr(limit, base, 0).ok:
            failures.append(BranchFailure(name, "represent", "base does not reproduce the limit"))
    final = is_pa(p)
    ok = not failures and final.verdict
    return PipelineReport(ok, branches, len(seen), tuple(failures), final)


@lru_cache(maxsize=None)
def _pairing_data(space: SiteSpace):
    base = complete_pairing_base(space)
    return base, induced_measure(base), predicates(base)


def snfkg_limit_rcr(p: Measure, cap: int = BRANCH_CAP) -> PipelineReport:
    """Certify negative association along every essential branch limit.

    Requires the strict negative condition. Each branch limit must equal
    the measure induced by the uniform complete-pairing base of its
    terminal space, whose predicates must be symmetric, antiferromagnetic,
    isolated and pairwise. The final stage is the exhaustive
    negative-association scan of p itself.
    """
    _require_binary(p.space, "the negative association pipeline")
    if p.space.n > cap:
        raise CapExceeded(f"|sites|={p.space.n} exceeds cap {cap}")
    if not is_snfkg(p).verdict:
        raise PreconditionFailed("measure does not satisfy the strict negative condition")

    failures: list[BranchFailure] = []
    branches = 0
    seen = set()
    for path, space, nums in iter_essential_branches(p):
        branches += 1
        key = _reduced_key(space, nums)
        if key in seen:
            continue
        seen.add(key)
        name = describe_path(path)
        top = max(nums)
        argmax = Event.from_indices(space, (i for i, w in enumerate(nums) if w == top))
        limit = Measure.uniform_on(argmax)
        base, pairing_measure, flags = _pairing_data(space)
        if limit != pairing_measure:
            failures.append(
                BranchFailure(name, "pairing", "limit differs from the pairing measure")
            )
            continue
        if not (
            flags.symmetric
            and flags.antiferromagnetic
            and flags.isolated_edges
            and flags.pairwise
        ):
            failures.append(BranchFailure(name, "predicates", repr(flags)))
    final = is_na(p)
    ok = not failures and final.verdict
    return PipelineReport(ok, branches, len(seen), tuple(failures), final)


def disagreement_count(omega: Config) -> int:
    """Number of site pairs on which the configuration disagrees.

    Over the complete pair set this equals k (m - k) for k ones among m
    sites, so it is maximal exactly at the balanced occupation numbers and
    strictly smaller elsewhere.
    """
    _require_binary(omega.space, "disagreement counting")
    vals = omega.values
    n = len(vals)
    return sum(1 for u in range(n) for v in range(u + 1, n) if vals[u] != vals[v])


def perturb(p: Measure, eps: Fraction | int) -> Measure:
    """Tilt each weight by (1 + eps) per disagreeing site pair.

    The tilt is maximal exactly on balanced configurations, so it turns
    any measure satisfying the weak negative condition into one satisfying
    the strict condition, while converging to p as eps shrinks.
    """
    _require_binary(p.space, "the disagreement tilt")
    eps = as_fraction(eps)
    if eps <= 0:
        raise InvalidParams("the tilt parameter must be positive")
    factor = 1 + eps
    raw = [
        w * factor ** disagreement_count(p.space.config_at(i))
        for i, w in enumerate(p.weights)
    ]
    return normalize(p.space, raw)


@dataclass(frozen=True)
class ExchangeableLevels:
    """Per-level weights of an exchangeable measure: P(w) = p_{|w|}."""

    n: int
    p: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(as_fraction(x) for x in self.p))
        if len(self.p) != self.n + 1:
            raise InvalidParams("need one level weight per occupation number 0..n")
        if any(x < 0 for x in self.p):
            raise InvalidParams("level weights must be nonnegative")
        if sum(comb(self.n, k) * x for k, x in enumerate(self.p)) != 1:
            raise InvalidParams("level weights must normalize over the cube")

    @classmethod
    def from_weights(cls, n: int, weights: Sequence) -> "ExchangeableLevels":
        ws = [as_fraction(w) for w in weights]
        if len(ws) != n + 1:
            raise InvalidParams("need one level weight per occupation number 0..n")
        total = sum(comb(n, k) * w for k, w in enumerate(ws))
        if total == 0:
            raise InvalidParams("level weights are all zero")
        return cls(n, tuple(w / total for w in ws))


def exchangeable_from_levels(levels: ExchangeableLevels) -> Measure:
    """The exchangeable measure assigning p_{|w|} to each configuration."""
    space = SiteSpace.binary(range(1, levels.n + 1))
    return Measure(space, tuple(levels.p[i.bit_count()] for i in range(space.size)))


def is_ulc(levels: ExchangeableLevels) -> bool:
    """Ultra log concavity: p_{k+1} p_{k-1} <= p_k^2 at every interior k."""
    p = levels.p
    return all(p[k + 1] * p[k - 1] <= p[k] ** 2 for k in range(1, levels.n))


def levels_from_measure(p: Measure) -> ExchangeableLevels | None:
    """Extract level weights if the measure is exchangeable, else None."""
    if not p.space.is_binary:
        return None
    n = p.space.n
    levels: list[Fraction | None] = [None] * (n + 1)
    for i, w in enumerate(p.weights):
        k = i.bit_count()
        if levels[k] is None:
            levels[k] = w
        elif levels[k] != w:
            return None
    return ExchangeableLevels(n, tuple(levels))
