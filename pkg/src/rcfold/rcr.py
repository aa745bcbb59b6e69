"""Set-valued cluster bases and their induced measures.

A hyperbond structure fixes a family of site subsets (bonds). A bond-state
assignment gives each bond a set of local configurations; a bond is active
when its state is a proper subset of the local product space. A base is a
sparse probability vector over assignments, and it represents a measure P
when

    P(w) = (1/Z) * sum over assignments compatible with w of their weight,

compatibility meaning that w restricted to every bond lies in the bond's
state. The module also provides the structural predicates used by the
association pipelines, the point-mass base built from a symmetric
join/meet-closed support, the uniform base over complete pairings, and the
classic two-state edge base for agreement-weighted (Ising-type) measures.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product as iter_product
from typing import Iterator

from .errors import (
    InvalidParams,
    NoCompatiblePair,
    NonBinaryAlphabet,
    PreconditionFailed,
    RcfoldError,
    SpaceMismatch,
)
from .measures import (
    Config,
    Event,
    Measure,
    SiteSpace,
    as_fraction,
    normalize,
    sup_distance,
)


@dataclass(frozen=True)
class HyperbondStructure:
    """A duplicate-free family of nonempty site subsets of a space."""

    space: SiteSpace
    bonds: tuple[tuple, ...]

    def __post_init__(self):
        pos = self.space.site_pos
        canon = []
        for b in self.bonds:
            b = tuple(b)
            if not b:
                raise InvalidParams("bonds must be nonempty")
            if len(set(b)) != len(b):
                raise InvalidParams("bond sites must be distinct")
            for s in b:
                if s not in pos:
                    raise InvalidParams(f"bond site {s!r} not in space")
            canon.append(tuple(sorted(b, key=pos.__getitem__)))
        if len(set(canon)) != len(canon):
            raise InvalidParams("bond list must be duplicate-free")
        object.__setattr__(self, "bonds", tuple(canon))

    @cached_property
    def bond_positions(self) -> tuple[tuple[int, ...], ...]:
        pos = self.space.site_pos
        return tuple(tuple(pos[s] for s in b) for b in self.bonds)

    def bond_space_size(self, i: int) -> int:
        out = 1
        for p in self.bond_positions[i]:
            out *= self.space.radices[p]
        return out

    def full_state(self, i: int) -> frozenset:
        ranges = [range(self.space.radices[p]) for p in self.bond_positions[i]]
        return frozenset(iter_product(*ranges))

    @classmethod
    def all_pairs(cls, space: SiteSpace) -> "HyperbondStructure":
        return cls(space, tuple(combinations(space.sites, 2)))


@dataclass(frozen=True)
class BondStateAssignment:
    """One set-valued state per bond, stored as local value-index tuples."""

    structure: HyperbondStructure
    states: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.states) != len(self.structure.bonds):
            raise InvalidParams("one state per bond required")
        object.__setattr__(self, "states", tuple(frozenset(s) for s in self.states))

    def is_active(self, i: int) -> bool:
        return len(self.states[i]) != self.structure.bond_space_size(i)

    def active_bonds(self) -> tuple[tuple, ...]:
        return tuple(b for i, b in enumerate(self.structure.bonds) if self.is_active(i))

    def sort_key(self) -> tuple:
        return tuple(tuple(sorted(s)) for s in self.states)


@dataclass(frozen=True)
class RcrBase:
    """A sparse base: distinct assignments with positive weights summing to 1."""

    structure: HyperbondStructure
    atoms: tuple[tuple[BondStateAssignment, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((a, as_fraction(w)) for a, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if any(w <= 0 for _, w in atoms):
            raise InvalidParams("atom weights must be positive")
        if sum(w for _, w in atoms) != 1:
            raise InvalidParams("atom weights must sum to exactly 1")
        keys = [a.states for a, _ in atoms]
        if len(set(keys)) != len(keys):
            raise InvalidParams("atom assignments must be distinct")
        for a, _ in atoms:
            if a.structure != self.structure:
                raise SpaceMismatch("atom assignment on a different structure")


def compatible(eta: BondStateAssignment, omega: Config) -> bool:
    """True iff omega restricted to every bond lies in that bond's state."""
    if eta.structure.space != omega.space:
        raise SpaceMismatch("assignment and configuration on different spaces")
    vals = omega.values
    for positions, state in zip(eta.structure.bond_positions, eta.states):
        if tuple(vals[p] for p in positions) not in state:
            return False
    return True


def _compatible_index(eta: BondStateAssignment, values: tuple[int, ...]) -> bool:
    for positions, state in zip(eta.structure.bond_positions, eta.states):
        if tuple(values[p] for p in positions) not in state:
            return False
    return True


def _induced_raw(base: RcrBase) -> list[Fraction]:
    space = base.structure.space
    out = [Fraction(0)] * space.size
    for i in range(space.size):
        vals = space.values_at(i)
        for eta, w in base.atoms:
            if _compatible_index(eta, vals):
                out[i] += w
    return out


def induced_measure(base: RcrBase) -> Measure:
    """The measure represented by a base, normalized over all configurations."""
    raw = _induced_raw(base)
    if not any(raw):
        raise NoCompatiblePair("no configuration is compatible with any atom")
    return normalize(base.structure.space, raw)


@dataclass(frozen=True)
class RcrCheck:
    max_dev: Fraction
    ok: bool


def verify_rcr(p: Measure, base: RcrBase, eps: Fraction | int = 0) -> RcrCheck:
    """Exact sup-norm deviation between p and the base's induced measure."""
    if p.space != base.structure.space:
        raise SpaceMismatch("measure and base on different spaces")
    dev = sup_distance(p, induced_measure(base))
    return RcrCheck(dev, dev <= as_fraction(eps))


def clusters(eta: BondStateAssignment) -> tuple[frozenset, ...]:
    """Site partition generated by active bonds, untouched sites singleton.

    Union-find over the space's sites; every active bond merges all its
    sites into one component.
    """
    space = eta.structure.space
    parent = list(range(space.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, positions in enumerate(eta.structure.bond_positions):
        if eta.is_active(i):
            head = find(positions[0])
            for p in positions[1:]:
                parent[find(p)] = head
    groups: dict[int, list] = {}
    for p in range(space.n):
        groups.setdefault(find(p), []).append(space.sites[p])
    pos = space.site_pos
    return tuple(
        frozenset(g) for g in sorted(groups.values(), key=lambda g: min(pos[s] for s in g))
    )


def cluster_count(eta: BondStateAssignment) -> int:
    return len(clusters(eta))


@dataclass(frozen=True)
class BasePredicates:
    """Structural flags of a base, each checked on every atom.

    ``ferromagnetic`` and ``antiferromagnetic`` are None on non-binary
    spaces, where they are not defined.
    """

    symmetric: bool
    ferromagnetic: bool | None
    antiferromagnetic: bool | None
    isolated_edges: bool
    pairwise: bool


def _state_reversed(state: frozenset, radices: tuple[int, ...]) -> frozenset:
    return frozenset(tuple(r - 1 - v for v, r in zip(t, radices)) for t in state)


def predicates(base: RcrBase) -> BasePredicates:
    """Evaluate the structural predicates of a base atom by atom."""
    struct = base.structure
    space = struct.space
    pairwise = all(len(b) <= 2 for b in struct.bonds)
    binary = space.is_binary

    symmetric = True
    ferro: bool | None = True if binary else None
    antiferro: bool | None = True if binary else None
    isolated = True

    for eta, _ in base.atoms:
        active_positions = []
        for i, positions in enumerate(struct.bond_positions):
            state = eta.states[i]
            radices = tuple(space.radices[p] for p in positions)
            if _state_reversed(state, radices) != state:
                symmetric = False
            full_size = struct.bond_space_size(i)
            active = len(state) != full_size
            if active:
                active_positions.append(set(positions))
            if binary:
                if state and tuple(1 for _ in positions) not in state:
                    ferro = False
                if active:
                    if len(positions) != 2 or state != frozenset({(0, 1), (1, 0)}):
                        antiferro = False
        for a, b in combinations(active_positions, 2):
            if a & b:
                isolated = False
    return BasePredicates(symmetric, ferro, antiferro, isolated, pairwise)


def _join_meet_closed(d: Event) -> bool:
    members = list(d.configs())
    for a, b in combinations(members, 2):
        if not (d.contains(a.join(b)) and d.contains(a.meet(b))):
            return False
    return True


def construct_uniform_symmetric_rcr(d: Event) -> RcrBase:
    """Point-mass pair base representing the uniform measure on d.

    Requires d nonempty, closed under global symbol reversal, and closed
    under join and meet (the product-lattice condition the uniform measure
    on d must satisfy). The base puts every site pair whose coordinates
    agree across all of d in the two-equal state, and leaves every other
    pair unconstrained; the induced measure is then exactly uniform on d.
    """
    space = d.space
    if not space.is_binary:
        raise NonBinaryAlphabet("pair-base construction requires a binary space")
    failures = []
    if d.count == 0:
        failures.append("support is empty")
    else:
        if d.bar() != d:
            failures.append("support is not symmetric under reversal")
        if not _join_meet_closed(d):
            failures.append("uniform measure on the support fails the lattice (FKG) condition")
    if failures:
        raise PreconditionFailed("; ".join(failures))

    struct = HyperbondStructure.all_pairs(space)
    members = list(d.configs())
    states = []
    for i, (pu, pv) in enumerate(struct.bond_positions):
        if all(c.values[pu] == c.values[pv] for c in members):
            states.append(frozenset({(0, 0), (1, 1)}))
        else:
            states.append(struct.full_state(i))
    eta = BondStateAssignment(struct, tuple(states))
    return RcrBase(struct, ((eta, Fraction(1)),))


@dataclass(frozen=True)
class SublatticeFlags:
    sublattice: bool
    symmetric: bool
    separates_points: bool
    equals_full: bool


def check_sublattice(lattice: Event) -> SublatticeFlags:
    """Flags for a subset of a binary cube; enforces the separation lemma.

    ``separates_points`` requires the subset to be nonempty and, for every
    pair of sites, to contain a configuration distinguishing them. A
    symmetric point-separating sublattice must be the full cube; that
    implication is re-checked here and a violation raises.
    """
    space = lattice.space
    if not space.is_binary:
        raise NonBinaryAlphabet("sublattice flags are defined on binary spaces")
    sub = _join_meet_closed(lattice)
    sym = lattice.bar() == lattice
    members = list(lattice.configs())
    separates = bool(members)
    for i, j in combinations(range(space.n), 2):
        if not any(c.values[i] != c.values[j] for c in members):
            separates = False
            break
    full = lattice.mask == (1 << space.size) - 1
    if sub and sym and separates and not full:
        raise RcfoldError("separation lemma violated: proper symmetric separating sublattice")
    return SublatticeFlags(sub, sym, separates, full)


def _matchings(items: tuple) -> Iterator[tuple[tuple, ...]]:
    """All pairings covering every item but at most one (odd leftovers)."""
    if len(items) <= 1:
        yield ()
        return
    first, rest = items[0], items[1:]
    # leave `first` unmatched only when the count is odd
    if len(items) % 2 == 1:
        yield from _matchings(rest)
    for k, other in enumerate(rest):
        pair = (first, other)
        remaining = rest[:k] + rest[k + 1 :]
        for tail in _matchings(remaining):
            yield (pair,) + tail


def complete_pairing_base(space: SiteSpace) -> RcrBase:
    """Uniform base over complete pairings with anti-equal active pairs.

    Atoms are the (near-)perfect matchings of the complete graph on the
    sites, one unmatched site allowed when the count is odd. Matched pairs
    carry the state {(0,1),(1,0)}; unmatched pairs stay unconstrained. The
    induced measure is uniform on the configurations whose number of 1s is
    within 1/2 of half the site count.
    """
    if not space.is_binary:
        raise NonBinaryAlphabet("complete pairings require a binary space")
    struct = HyperbondStructure.all_pairs(space)
    bond_index = {b: i for i, b in enumerate(struct.bonds)}
    pos = space.site_pos
    anti = frozenset({(0, 1), (1, 0)})
    atoms = []
    all_matchings = list(_matchings(space.sites))
    weight = Fraction(1, len(all_matchings))
    for matching in all_matchings:
        states = [struct.full_state(i) for i in range(len(struct.bonds))]
        for u, v in matching:
            key = tuple(sorted((u, v), key=pos.__getitem__))
            states[bond_index[key]] = anti
        atoms.append((BondStateAssignment(struct, tuple(states)), weight))
    return RcrBase(struct, tuple(atoms))


@dataclass(frozen=True)
class IsingSpec:
    """An agreement-weighted pair model on a simple graph.

    Each edge carries a rational agreement weight x > 0 (the factor gained
    when its endpoints agree); each vertex optionally carries a rational
    field weight (the factor gained when it holds symbol 1, default 1).
    """

    vertices: tuple
    edges: tuple[tuple, ...]  # (u, v, Fraction)
    fields: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidParams("vertices must be distinct")
        vset = set(self.vertices)
        canon = []
        seen = set()
        for u, v, x in self.edges:
            if u == v:
                raise InvalidParams("self-loops are not allowed")
            if u not in vset or v not in vset:
                raise InvalidParams(f"edge endpoint outside vertex set: {(u, v)}")
            key = frozenset((u, v))
            if key in seen:
                raise InvalidParams(f"duplicate edge {(u, v)}")
            seen.add(key)
            x = as_fraction(x)
            if x <= 0:
                raise InvalidParams("edge weights must be positive")
            canon.append((u, v, x))
        object.__setattr__(self, "edges", tuple(canon))
        if self.fields is not None:
            f = tuple(as_fraction(x) for x in self.fields)
            if len(f) != len(self.vertices):
                raise InvalidParams("one field weight per vertex required")
            if any(x <= 0 for x in f):
                raise InvalidParams("field weights must be positive")
            object.__setattr__(self, "fields", f)

    @property
    def space(self) -> SiteSpace:
        return SiteSpace.binary(self.vertices)

    def edge_probability(self, x: Fraction) -> Fraction:
        """The activation probability 1 - 1/x of an agreement weight."""
        return 1 - Fraction(1, 1) / x


def ising_measure(spec: IsingSpec) -> Measure:
    """Exact measure proportional to the product of edge and field factors."""
    space = spec.space
    pos = space.site_pos
    fields = spec.fields or tuple(Fraction(1) for _ in spec.vertices)
    raw = []
    for i in range(space.size):
        vals = space.values_at(i)
        w = Fraction(1)
        for u, v, x in spec.edges:
            if vals[pos[u]] == vals[pos[v]]:
                w *= x
        for f, val in zip(fields, vals):
            if val == 1:
                w *= f
        raw.append(w)
    return normalize(space, raw)


@dataclass(frozen=True)
class IsingBuild:
    measure: Measure
    base: RcrBase
    fk_marginal: tuple[tuple[BondStateAssignment, Fraction], ...]


def ising_build(spec: IsingSpec) -> IsingBuild:
    """Measure plus its two-state edge base, with the cluster marginal.

    Requires every field weight 1 and every edge weight x >= 1, so each
    edge's activation probability p = 1 - 1/x lies in [0, 1). The base is
    the product over edges of (equal-pair state with probability p, full
    state otherwise). The state marginal of the joint distribution is also
    computed two ways, by the closed product-times-2^clusters formula and
    by direct summation, and the two must agree exactly.
    """
    if spec.fields is not None and any(f != 1 for f in spec.fields):
        raise PreconditionFailed("base construction requires all field weights equal to 1")
    if any(x < 1 for _, _, x in spec.edges):
        raise PreconditionFailed("base construction requires edge weights >= 1")
    space = spec.space
    struct = HyperbondStructure(space, tuple((u, v) for u, v, _ in spec.edges))
    diag = frozenset({(0, 0), (1, 1)})
    full = frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})
    probs = [spec.edge_probability(x) for _, _, x in spec.edges]

    atoms = []
    fk_all = []  # (assignment, closed-formula weight) over the whole product
    for choice in iter_product((True, False), repeat=len(spec.edges)):
        w = Fraction(1)
        for act, p in zip(choice, probs):
            w *= p if act else 1 - p
        eta = BondStateAssignment(
            struct, tuple(diag if act else full for act in choice)
        )
        fk_all.append((eta, w * (1 << cluster_count(eta))))
        if w > 0:
            atoms.append((eta, w))
    base = RcrBase(struct, tuple(atoms))
    measure = ising_measure(spec)

    # closed formula, normalized
    z_fk = sum(w for _, w in fk_all)
    fk = tuple((eta, w / z_fk) for eta, w in fk_all)
    # direct state marginal of the joint: weight times compatible count
    atom_weight = {eta.states: w for eta, w in base.atoms}
    direct = []
    for eta, _ in fk_all:
        w = atom_weight.get(eta.states, Fraction(0))
        n_compat = sum(
            1 for i in range(space.size) if _compatible_index(eta, space.values_at(i))
        )
        direct.append(w * n_compat)
    z_direct = sum(direct)
    for (eta, closed), raw in zip(fk, direct):
        if closed != raw / z_direct:
            raise RcfoldError("cluster marginal mismatch between formula and summation")
    return IsingBuild(measure, base, tuple((eta, w) for eta, w in fk if w > 0))
