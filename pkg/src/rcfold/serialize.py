"""JSON round-trips for the file formats the CLI speaks.

Rationals are serialized as "num/den" strings so files stay exact and
diff-able. Measure files list weights in mixed-radix configuration order
(first site most significant). Event files carry either an explicit
configuration list or a hex bitmask over configuration indices.
"""
from __future__ import annotations

import json
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any

from .errors import InvalidParams
from .folding import BranchLimit, FoldPath, FoldSpec
from .measures import Config, Event, Measure, SiteSpace
from .rcr import BondStateAssignment, HyperbondStructure, IsingSpec, RcrBase


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text)
    raise InvalidParams(f"expected a rational string, got {text!r}")


def space_to_json(space: SiteSpace) -> dict:
    return {
        "sites": list(space.sites),
        "alphabets": [list(a) for a in space.alphabets],
    }


def space_from_json(obj: dict) -> SiteSpace:
    return SiteSpace(tuple(obj["sites"]), tuple(tuple(a) for a in obj["alphabets"]))


def measure_to_json(p: Measure) -> dict:
    out = space_to_json(p.space)
    out["weights"] = [fraction_str(w) for w in p.weights]
    return out


def measure_from_json(obj: dict) -> Measure:
    space = space_from_json(obj)
    return Measure(space, tuple(parse_fraction(w) for w in obj["weights"]))


def config_to_json(c: Config) -> list:
    return list(c.symbols())


def config_from_json(space: SiteSpace, symbols: list) -> Config:
    values = []
    for sym, alph in zip(symbols, space.alphabets):
        if sym not in alph:
            raise InvalidParams(f"symbol {sym!r} not in alphabet {alph}")
        values.append(alph.index(sym))
    if len(symbols) != space.n:
        raise InvalidParams("configuration length does not match the space")
    return Config(space, tuple(values))


def event_to_json(e: Event) -> dict:
    out = space_to_json(e.space)
    if e.count <= 64:
        out["configs"] = [config_to_json(c) for c in e.configs()]
    else:
        out["mask_hex"] = hex(e.mask)
    return out


def event_from_json(obj: dict, space: SiteSpace | None = None) -> Event:
    if space is None:
        space = space_from_json(obj)
    if "mask_hex" in obj:
        return Event(space, int(obj["mask_hex"], 16))
    if "configs" in obj:
        return Event.from_configs(
            space, (config_from_json(space, c) for c in obj["configs"])
        )
    raise InvalidParams("event file needs 'configs' or 'mask_hex'")


def spec_to_json(spec: FoldSpec) -> dict:
    out = {"K": list(spec.k_sites), "alpha": list(spec.alpha)}
    if spec.beta is not None:
        out["beta"] = [list(spec.beta[0]), list(spec.beta[1])]
    else:
        out["beta"] = None
    return out


def spec_from_json(obj: dict) -> FoldSpec:
    beta = obj.get("beta")
    if beta is not None:
        beta = (tuple(beta[0]), tuple(beta[1]))
    return FoldSpec(tuple(obj["K"]), tuple(obj["alpha"]), beta)


def path_to_json(path: FoldPath) -> list:
    return [spec_to_json(s) for s in path]


def path_from_json(obj: list) -> FoldPath:
    return FoldPath(tuple(spec_from_json(s) for s in obj))


def limit_to_json(limit: BranchLimit) -> dict:
    return {
        "space": space_to_json(limit.space),
        "weights": [fraction_str(w) for w in limit.measure.weights],
        "argmax": [config_to_json(c) for c in limit.argmax_set.configs()],
        "L": limit.emitted_at,
        "a": fraction_str(limit.ratio),
    }


def base_to_json(base: RcrBase) -> dict:
    space = base.structure.space
    out = space_to_json(space)
    out["bonds"] = [list(b) for b in base.structure.bonds]
    atoms = []
    for eta, w in base.atoms:
        states = []
        for (bond, positions, state) in zip(
            base.structure.bonds, base.structure.bond_positions, eta.states
        ):
            alphabets = [space.alphabets[p] for p in positions]
            states.append(
                sorted([alph[v] for alph, v in zip(alphabets, t)] for t in state)
            )
        atoms.append({"weight": fraction_str(w), "states": states})
    out["atoms"] = atoms
    return out


def base_from_json(obj: dict) -> RcrBase:
    space = space_from_json(obj)
    struct = HyperbondStructure(space, tuple(tuple(b) for b in obj["bonds"]))
    atoms = []
    for atom in obj["atoms"]:
        states = []
        for positions, rows in zip(struct.bond_positions, atom["states"]):
            alphabets = [space.alphabets[p] for p in positions]
            state = frozenset(
                tuple(alph.index(sym) for alph, sym in zip(alphabets, row))
                for row in rows
            )
            states.append(state)
        atoms.append(
            (BondStateAssignment(struct, tuple(states)), parse_fraction(atom["weight"]))
        )
    return RcrBase(struct, tuple(atoms))


def ising_to_json(spec: IsingSpec) -> dict:
    return {
        "vertices": list(spec.vertices),
        "edges": [[u, v, fraction_str(x)] for u, v, x in spec.edges],
        "fields": [fraction_str(f) for f in spec.fields] if spec.fields else None,
    }


def ising_from_json(obj: dict) -> IsingSpec:
    fields = obj.get("fields")
    return IsingSpec(
        tuple(obj["vertices"]),
        tuple((u, v, parse_fraction(x)) for u, v, x in obj["edges"]),
        tuple(parse_fraction(f) for f in fields) if fields else None,
    )


def jsonable(obj: Any) -> Any:
    """Recursively convert package objects into JSON-ready structures."""
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, Measure):
        return measure_to_json(obj)
    if isinstance(obj, Event):
        return event_to_json(obj)
    if isinstance(obj, Config):
        return config_to_json(obj)
    if isinstance(obj, FoldSpec):
        return spec_to_json(obj)
    if isinstance(obj, FoldPath):
        return path_to_json(obj)
    if isinstance(obj, BranchLimit):
        return limit_to_json(obj)
    if isinstance(obj, RcrBase):
        return base_to_json(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, frozenset):
        return sorted((jsonable(v) for v in obj), key=repr)
    return obj


def dumps_canonical(obj: Any) -> str:
    """Stable, diff-able JSON: fixed key order, two-space indent."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=False) + "\n"
