"""Finite product spaces, configurations, events, and exact measures.

A ``SiteSpace`` fixes an ordered list of sites and a finite ordered alphabet
per site. Configurations store one alphabet index per site and are
addressable by a mixed-radix integer (first site most significant), so a
binary space enumerates its configurations as plain bit patterns. Events
store membership as an integer bitmask over configuration indices.

All probabilities are ``fractions.Fraction``; nothing on a verification
path ever touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Callable, Iterable, Iterator, Sequence

from .errors import (
    AllZero,
    CapExceeded,
    InvalidParams,
    NonBinaryAlphabet,
    OverlappingDomains,
    SpaceMismatch,
)

Symbol = object
Rational = Fraction | int

UPSET_CAP = 5


def as_fraction(x) -> Fraction:
    """Coerce an int, Fraction, or 'num/den' string to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise InvalidParams(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class SiteSpace:
    """An ordered finite product space: sites and one ordered alphabet each.

    The alphabet order is the total order used for maxima, increasing
    events, and symbol reversal. Site identifiers must be distinct and
    mutually comparable (their sorted order is the canonical merge order
    for concatenation).
    """

    sites: tuple
    alphabets: tuple[tuple, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "alphabets", tuple(tuple(a) for a in self.alphabets))
        if len(self.sites) != len(self.alphabets):
            raise InvalidParams("one alphabet per site required")
        if len(set(self.sites)) != len(self.sites):
            raise InvalidParams("site identifiers must be distinct")
        for a in self.alphabets:
            if not a:
                raise InvalidParams("alphabets must be nonempty")
            if len(set(a)) != len(a):
                raise InvalidParams("alphabet symbols must be distinct")
        try:
            sorted(self.sites)
        except TypeError as exc:
            raise InvalidParams("site identifiers must be mutually orderable") from exc

    @classmethod
    def binary(cls, sites: Iterable) -> "SiteSpace":
        sites = tuple(sites)
        return cls(sites, tuple((0, 1) for _ in sites))

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def radices(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.alphabets)

    @cached_property
    def size(self) -> int:
        out = 1
        for r in self.radices:
            out *= r
        return out

    @cached_property
    def is_binary(self) -> bool:
        return all(r == 2 for r in self.radices)

    @cached_property
    def site_pos(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    @cached_property
    def index_weights(self) -> tuple[int, ...]:
        # mixed-radix place values, first site most significant
        w = [1] * self.n
        for i in range(self.n - 2, -1, -1):
            w[i] = w[i + 1] * self.radices[i + 1]
        return tuple(w)

    def config_index(self, values: Sequence[int]) -> int:
        idx = 0
        for v, r in zip(values, self.radices):
            idx = idx * r + v
        return idx

    def values_at(self, index: int) -> tuple[int, ...]:
        out = []
        for r in reversed(self.radices):
            out.append(index % r)
            index //= r
        return tuple(reversed(out))

    def config(self, values: Sequence[int]) -> "Config":
        return Config(self, tuple(values))

    def config_at(self, index: int) -> "Config":
        return Config(self, self.values_at(index))

    def iter_configs(self) -> Iterator["Config"]:
        for i in range(self.size):
            yield self.config_at(i)

    def subspace(self, sites: Iterable) -> "SiteSpace":
        """Sub-space over a subset of sites, keeping this space's order."""
        keep = set(sites)
        unknown = keep - set(self.sites)
        if unknown:
            raise InvalidParams(f"unknown sites: {sorted(unknown, key=repr)}")
        picked = tuple(s for s in self.sites if s in keep)
        return SiteSpace(picked, tuple(self.alphabets[self.site_pos[s]] for s in picked))

    @cached_property
    def flip_table(self) -> tuple[int, ...]:
        """index -> index of the configuration with every symbol reversed."""
        out = []
        for i in range(self.size):
            vals = self.values_at(i)
            out.append(self.config_index(tuple(r - 1 - v for v, r in zip(vals, self.radices))))
        return tuple(out)


@dataclass(frozen=True)
class Config:
    """A configuration: one alphabet index per site of its space."""

    space: SiteSpace
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.space.n:
            raise InvalidParams("one value per site required")
        for v, r in zip(self.values, self.space.radices):
            if not 0 <= v < r:
                raise InvalidParams(f"value index {v} outside alphabet of size {r}")

    @cached_property
    def index(self) -> int:
        return self.space.config_index(self.values)

    def symbols(self) -> tuple:
        return tuple(a[v] for a, v in zip(self.space.alphabets, self.values))

    def value_at(self, site) -> int:
        return self.values[self.space.site_pos[site]]

    def ones(self) -> int:
        """Number of sites carrying their maximal symbol (binary: the 1s)."""
        return sum(1 for v, r in zip(self.values, self.space.radices) if v == r - 1)

    def bar(self) -> "Config":
        """Pointwise symbol reversal within each site's alphabet order."""
        return Config(
            self.space,
            tuple(r - 1 - v for v, r in zip(self.values, self.space.radices)),
        )

    def leq(self, other: "Config") -> bool:
        """Coordinatewise partial order induced by the alphabet orders."""
        _require_same_space(self.space, other.space)
        return all(a <= b for a, b in zip(self.values, other.values))

    def join(self, other: "Config") -> "Config":
        _require_same_space(self.space, other.space)
        return Config(self.space, tuple(max(a, b) for a, b in zip(self.values, other.values)))

    def meet(self, other: "Config") -> "Config":
        _require_same_space(self.space, other.space)
        return Config(self.space, tuple(min(a, b) for a, b in zip(self.values, other.values)))

    def restrict(self, sites: Iterable) -> "Config":
        sub = self.space.subspace(sites)
        return Config(sub, tuple(self.values[self.space.site_pos[s]] for s in sub.sites))

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols())


def _require_same_space(a: SiteSpace, b: SiteSpace) -> None:
    if a != b:
        raise SpaceMismatch("objects live on different spaces")


def concat(a: Config, b: Config) -> Config:
    """Concatenate configurations on disjoint site sets.

    The merged space lists sites in sorted identifier order, each keeping
    the alphabet of the space it came from.
    """
    overlap = set(a.space.sites) & set(b.space.sites)
    if overlap:
        raise OverlappingDomains(f"domains overlap on {sorted(overlap, key=repr)}")
    entries = []
    for cfg in (a, b):
        for s, alph, v in zip(cfg.space.sites, cfg.space.alphabets, cfg.values):
            entries.append((s, alph, v))
    entries.sort(key=lambda t: t[0])
    space = SiteSpace(tuple(e[0] for e in entries), tuple(e[1] for e in entries))
    return Config(space, tuple(e[2] for e in entries))


def reverse(omega: Config, beta: tuple[Config, Config]) -> Config | None:
    """Exchange each coordinate between the two beta symbols.

    Returns None (the undefined marker, weight zero downstream) when some
    coordinate of omega lies outside its {beta_i(1), beta_i(2)} pair.
    """
    b1, b2 = beta
    _require_same_space(omega.space, b1.space)
    _require_same_space(omega.space, b2.space)
    out = []
    for w, x, y in zip(omega.values, b1.values, b2.values):
        if x == y:
            raise InvalidParams("beta components must be pointwise distinct")
        if w == x:
            out.append(y)
        elif w == y:
            out.append(x)
        else:
            return None
    return Config(omega.space, tuple(out))


def max_config(space: SiteSpace) -> Config:
    """The configuration carrying the maximal symbol at every site."""
    return Config(space, tuple(r - 1 for r in space.radices))


@dataclass(frozen=True)
class Event:
    """A subset of configurations, stored as a bitmask over indices."""

    space: SiteSpace
    mask: int

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.space.size):
            raise InvalidParams("event mask outside the space")

    @classmethod
    def empty(cls, space: SiteSpace) -> "Event":
        return cls(space, 0)

    @classmethod
    def full(cls, space: SiteSpace) -> "Event":
        return cls(space, (1 << space.size) - 1)

    @classmethod
    def from_indices(cls, space: SiteSpace, indices: Iterable[int]) -> "Event":
        m = 0
        for i in indices:
            m |= 1 << i
        return cls(space, m)

    @classmethod
    def from_configs(cls, space: SiteSpace, configs: Iterable[Config]) -> "Event":
        return cls.from_indices(space, (c.index for c in configs))

    @classmethod
    def from_predicate(cls, space: SiteSpace, pred: Callable[[Config], bool]) -> "Event":
        return cls.from_indices(space, (i for i in range(space.size) if pred(space.config_at(i))))

    @property
    def count(self) -> int:
        return self.mask.bit_count()

    def indices(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def configs(self) -> Iterator[Config]:
        for i in self.indices():
            yield self.space.config_at(i)

    def contains_index(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def contains(self, c: Config) -> bool:
        _require_same_space(self.space, c.space)
        return self.contains_index(c.index)

    def complement(self) -> "Event":
        return Event(self.space, ((1 << self.space.size) - 1) ^ self.mask)

    def __and__(self, other: "Event") -> "Event":
        _require_same_space(self.space, other.space)
        return Event(self.space, self.mask & other.mask)

    def __or__(self, other: "Event") -> "Event":
        _require_same_space(self.space, other.space)
        return Event(self.space, self.mask | other.mask)

    def is_subset(self, other: "Event") -> bool:
        _require_same_space(self.space, other.space)
        return not self.mask & ~other.mask

    def bar(self) -> "Event":
        """Image under pointwise symbol reversal (an involution)."""
        flip = self.space.flip_table
        return Event.from_indices(self.space, (flip[i] for i in self.indices()))

    def is_increasing(self) -> bool:
        """Closure upward under the coordinatewise partial order (binary)."""
        if not self.space.is_binary:
            raise NonBinaryAlphabet("increasing events are defined on binary spaces")
        n = self.space.n
        for i in self.indices():
            for j in range(n):
                w = 1 << (n - 1 - j)
                if not i & w and not self.contains_index(i | w):
                    return False
        return True

    def is_decreasing(self) -> bool:
        return self.complement().is_increasing()


def cylinder(omega: Config, region: Iterable) -> Event:
    """The cylinder [omega]_K: configurations agreeing with omega on K."""
    space = omega.space
    region = set(region)
    unknown = region - set(space.sites)
    if unknown:
        raise InvalidParams(f"unknown sites: {sorted(unknown, key=repr)}")
    fixed = [(p, omega.values[p]) for p, s in enumerate(space.sites) if s in region]

    def match(i: int) -> bool:
        vals = space.values_at(i)
        return all(vals[p] == v for p, v in fixed)

    return Event.from_indices(space, (i for i in range(space.size) if match(i)))


def enumerate_upsets(space: SiteSpace, cap: int = UPSET_CAP) -> tuple[Event, ...]:
    """All increasing events of a binary space, in ascending mask order.

    Built by the block recursion: an up-set on n sites is a pair (A, B) of
    up-sets on n-1 sites with A subset of B, where A is the first-site-0
    block and B the first-site-1 block. Counts follow the Dedekind numbers
    2, 3, 6, 20, 168, 7581, which is why the cap defaults to 5 sites.
    """
    if not space.is_binary:
        raise NonBinaryAlphabet("up-set enumeration requires binary alphabets")
    if space.n > cap:
        raise CapExceeded(f"|sites|={space.n} exceeds cap {cap}")
    masks = _upset_masks(space.n)
    return tuple(Event(space, m) for m in masks)


def _upset_masks(n: int) -> list[int]:
    masks = [0, 1]
    for k in range(1, n + 1):
        half = 1 << (k - 1)
        prev = masks
        masks = sorted(
            a | (b << half)
            for a in prev
            for b in prev
            if not a & ~b
        )
    return masks


@dataclass(frozen=True)
class Measure:
    """An exact probability vector over all configurations of a space."""

    space: SiteSpace
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        if len(self.weights) != self.space.size:
            raise InvalidParams("one weight per configuration required")
        if any(w < 0 for w in self.weights):
            raise InvalidParams("weights must be nonnegative")
        if sum(self.weights) != 1:
            raise InvalidParams("weights must sum to exactly 1")

    @classmethod
    def uniform(cls, space: SiteSpace) -> "Measure":
        w = Fraction(1, space.size)
        return cls(space, (w,) * space.size)

    @classmethod
    def uniform_on(cls, support: Event) -> "Measure":
        if support.count == 0:
            raise AllZero("support is empty")
        w = Fraction(1, support.count)
        return cls(
            support.space,
            tuple(w if support.contains_index(i) else Fraction(0) for i in range(support.space.size)),
        )

    @cached_property
    def int_weights(self) -> tuple[tuple[int, ...], int]:
        """Common-denominator integer view (nums, den); nums sum to den."""
        den = 1
        for w in self.weights:
            den = lcm(den, w.denominator)
        nums = tuple(w.numerator * (den // w.denominator) for w in self.weights)
        return nums, den

    def prob_index(self, i: int) -> Fraction:
        return self.weights[i]

    def prob(self, event: Event) -> Fraction:
        _require_same_space(self.space, event.space)
        nums, den = self.int_weights
        return Fraction(sum(nums[i] for i in event.indices()), den)

    def support(self) -> Event:
        return Event.from_indices(self.space, (i for i, w in enumerate(self.weights) if w > 0))

    def argmax(self) -> Event:
        top = max(self.weights)
        return Event.from_indices(self.space, (i for i, w in enumerate(self.weights) if w == top))

    def is_symmetric(self) -> bool:
        """Invariance under pointwise symbol reversal of configurations."""
        flip = self.space.flip_table
        return all(self.weights[i] == self.weights[flip[i]] for i in range(self.space.size))


def normalize(space: SiteSpace, weights: Sequence[Rational]) -> Measure:
    """Scale a nonnegative weight vector to an exact probability vector."""
    ws = [as_fraction(w) for w in weights]
    if any(w < 0 for w in ws):
        raise InvalidParams("weights must be nonnegative")
    total = sum(ws)
    if total == 0:
        raise AllZero("cannot normalize an all-zero weight vector")
    return Measure(space, tuple(w / total for w in ws))


def sup_distance(p: Measure, q: Measure) -> Fraction:
    """Exact sup-norm distance max over configurations of |P - Q|."""
    _require_same_space(p.space, q.space)
    return max(abs(a - b) for a, b in zip(p.weights, q.weights))


def weight_summer(nums: Sequence[int], size: int) -> Callable[[int], int]:
    """Fast mask -> integer-weight-sum closure via byte lookup tables.

    Used by the exhaustive pair scans; exact because everything is int.
    """
    n_bytes = (size + 7) // 8
    padded = list(nums) + [0] * (n_bytes * 8 - size)
    tables = []
    for b in range(n_bytes):
        base = b * 8
        t = [0] * 256
        for m in range(1, 256):
            low = m & -m
            t[m] = t[m ^ low] + padded[base + low.bit_length() - 1]
        tables.append(t)
    if n_bytes == 1:
        t0 = tables[0]
        return lambda mask: t0[mask]

    def total(mask: int) -> int:
        s = 0
        for t in tables:
            s += t[mask & 255]
            mask >>= 8
        return s

    return total
