"""Reproducible verification suites with canonical JSON reports.

Each suite expands a seeded configuration into a deterministic list of
fully specified instances, runs them (optionally across worker processes,
which never changes the report bytes), and assembles a stable JSON report:
one row per instance or aggregate sweep, a summary, and an overall
verdict. Failing rows embed a reproduction command line. Wall-clock
timings are deliberately kept out of the report so identical runs are
byte-identical; they go to stderr instead.
"""
from __future__ import annotations

import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as iter_product

from .association import (
    ExchangeableLevels,
    exchangeable_from_levels,
    fkg_theorem_pipeline,
    is_fkg,
    is_fkg_via_foldings,
    is_na,
    is_nfkg,
    is_snfkg,
    is_ulc,
    perturb,
    snfkg_limit_rcr,
)
from .errors import RcfoldError
from .folding import (
    FoldPath,
    FoldSpec,
    _first_fold_specs,
    branch_limit,
    check_convergence_bound,
    essentialize,
    fold,
    fold_path,
)
from .generators import (
    binary_space,
    random_fkg_measure,
    random_measure,
    random_nfkg_measure,
    random_product_measure,
)
from .measures import Event, Measure, enumerate_upsets
from .occurrence import (
    box_product_sweep,
    check_disjoint_cluster_bound,
    check_folding_hypothesis_bound,
    increasing_decreasing_rule,
    rule_by_name,
)
from .parallel import pmap
from .rcr import IsingSpec, check_sublattice, complete_pairing_base, induced_measure, ising_build, ising_measure, verify_rcr
from .serialize import dumps_canonical, jsonable


@dataclass(frozen=True)
class RunConfig:
    """Knobs of a suite run; everything that affects the report is here."""

    seed: int = 7
    jobs: int = 1
    instances: int | None = None
    max_sites: int = 5
    max_upsets: int = 5
    max_branch_len: int = 5
    out: str | None = None
    only: int | None = None

    def __post_init__(self):
        if self.seed < 0 or self.jobs < 1:
            raise RcfoldError("seed must be nonnegative and jobs positive")
        if any(c < 1 for c in (self.max_sites, self.max_upsets, self.max_branch_len)):
            raise RcfoldError("caps must be positive")


def _iseed(master: int, part: int, i: int) -> int:
    return (master * 1_000_003 + part * 7_919 + i) % (2**31 - 1)


def _repro(suite: str, cfg: RunConfig, row_id: int) -> str:
    cmd = f"rcfold suite {suite} --seed {cfg.seed} --only {row_id}"
    if cfg.instances is not None:
        cmd += f" --instances {cfg.instances}"
    return cmd


# ---------------------------------------------------------------------------
# instance workers (top level so they pickle across worker processes)
# ---------------------------------------------------------------------------


def _fkg_pipeline_instance(args):
    n, seed = args
    m = random_fkg_measure(n, seed)
    rep = fkg_theorem_pipeline(m)
    row = {
        "kind": "fkg-pipeline",
        "n": n,
        "seed": seed,
        "branches": rep.branches,
        "distinct_limits": rep.distinct_limits,
        "pa_pairs": rep.final.quantifier_log["pairs"],
        "ok": rep.ok,
    }
    if not rep.ok:
        row["failures"] = [jsonable(f) for f in rep.failures]
        if not rep.final.verdict:
            row["pa_witness"] = jsonable(rep.final.witness)
    return row


def _fkg_equiv_instance(args):
    n, seed = args
    m = random_measure(n, seed)
    direct = is_fkg(m)
    folded = is_fkg_via_foldings(m)
    return {
        "kind": "lattice-equivalence",
        "n": n,
        "seed": seed,
        "direct": direct.verdict,
        "folded": folded.verdict,
        "ok": direct.verdict == folded.verdict,
    }


def _random_path(rng: random.Random, sites: tuple, length: int) -> FoldPath:
    steps = []
    remaining = list(sites)
    for _ in range(length):
        k = tuple(s for s in remaining if rng.getrandbits(1))
        alpha = tuple(rng.getrandbits(1) for _ in k)
        steps.append(FoldSpec(k, alpha))
        remaining = [s for s in remaining if s not in k]
    return FoldPath(tuple(steps))


def _reorder_instance(args):
    (seed,) = args
    m = random_measure(3, seed)
    rng = random.Random(seed ^ 0x5EED)
    path = _random_path(rng, m.space.sites, 4)
    left = fold_path(m, path)
    right = fold_path(m, essentialize(path))
    return {
        "kind": "essential-reorder",
        "seed": seed,
        "path": [list(s.k_sites) for s in path],
        "ok": left == right,
    }


def _converge_instance(args):
    n, seed = args
    m = random_measure(n, seed)
    checks = 0
    ok = True
    detail = None
    tail_bound = Fraction(1, 10**9)
    for spec in _first_fold_specs(m.space):
        prefix = [spec]
        bl = branch_limit(m, prefix)
        last = None
        for i in range(2, 8):  # L = 1 for a length-1 prefix
            r = check_convergence_bound(m, prefix, i)
            checks += 1
            if not r.ok:
                ok = False
                detail = {"prefix": jsonable(FoldPath((spec,))), "i": i, "distance": r.distance, "bound": r.bound}
                break
            last = r
        if not ok:
            break
        if bl.ratio <= Fraction(1, 2) and last is not None and last.distance >= tail_bound:
            ok = False
            detail = {"prefix": jsonable(FoldPath((spec,))), "tail_distance": last.distance}
            break
    row = {"kind": "convergence", "n": n, "seed": seed, "checks": checks, "ok": ok}
    if detail:
        row["detail"] = jsonable(detail)
    return row


def _ising_weights(n_edges: int, weighting: str) -> list[Fraction]:
    table = {"2": Fraction(2), "3": Fraction(3), "5/2": Fraction(5, 2)}
    if weighting in table:
        return [table[weighting]] * n_edges
    if weighting == "mixed":
        cycle = [Fraction(2), Fraction(3), Fraction(5, 2)]
        return [cycle[i % 3] for i in range(n_edges)]
    raise RcfoldError(f"unknown weighting {weighting!r}")


def _rcr_roundtrip_instance(args):
    v, edges, weighting = args
    xs = _ising_weights(len(edges), weighting)
    spec = IsingSpec(tuple(range(1, v + 1)), tuple((u, w, x) for (u, w), x in zip(edges, xs)))
    build = ising_build(spec)  # internally cross-checks the cluster marginal
    rep_ok = verify_rcr(build.measure, build.base, 0).ok
    squared = IsingSpec(spec.vertices, tuple((u, w, x * x) for u, w, x in spec.edges))
    fold_ok = fold(build.measure, FoldSpec((), ())) == ising_measure(squared)
    return {
        "kind": "ising-roundtrip",
        "vertices": v,
        "edges": [list(e) for e in edges],
        "weighting": weighting,
        "represent_ok": rep_ok,
        "fold_squares_ok": fold_ok,
        "ok": rep_ok and fold_ok,
    }


def _sublattice_row(args):
    (m,) = args
    space = binary_space(m)
    total = 1 << space.size
    sublattices = 0
    qualifying = 0
    exceptions = 0
    for mask in range(total):
        try:
            flags = check_sublattice(Event(space, mask))
        except RcfoldError:
            exceptions += 1
            continue
        if flags.sublattice:
            sublattices += 1
            if flags.symmetric and flags.separates_points:
                qualifying += 1
                if not flags.equals_full:
                    exceptions += 1
    return {
        "kind": "sublattice-sweep",
        "m": m,
        "subsets": total,
        "sublattices": sublattices,
        "symmetric_separating": qualifying,
        "exceptions": exceptions,
        "ok": exceptions == 0,
    }


def _nfkg_instance(args):
    n, seed = args
    m = random_nfkg_measure(n, seed)
    nfkg_ok = is_nfkg(m).verdict
    na = is_na(m)
    tilted = is_snfkg(perturb(m, Fraction(1, 8)))
    row = {
        "kind": "nfkg-na",
        "n": n,
        "seed": seed,
        "nfkg": nfkg_ok,
        "na": na.verdict,
        "tilt_snfkg": tilted.verdict,
        "ok": nfkg_ok and na.verdict and tilted.verdict,
    }
    if not na.verdict:
        row["na_witness"] = jsonable(na.witness)
    return row


def _ulc_chunk(args):
    n, start, chunk = args
    checked = 0
    ulc_count = 0
    failures = []
    for levels in chunk:
        checked += 1
        lv = ExchangeableLevels.from_weights(n, levels)
        if not is_ulc(lv):
            continue
        ulc_count += 1
        if not is_na(exchangeable_from_levels(lv)).verdict:
            failures.append(list(levels))
    return {"n": n, "start": start, "checked": checked, "ulc": ulc_count, "failures": failures}


def _snfkg_instance(args):
    kind, n, seed = args
    if kind == "perturbed":
        m = perturb(random_nfkg_measure(n, seed), Fraction(1, 8))
    elif kind == "pairing":
        m = induced_measure(complete_pairing_base(binary_space(n)))
    else:
        raise RcfoldError(f"unknown instance kind {kind!r}")
    rep = snfkg_limit_rcr(m)
    row = {
        "kind": f"snfkg-{kind}",
        "n": n,
        "seed": seed,
        "branches": rep.branches,
        "distinct_limits": rep.distinct_limits,
        "na": rep.final.verdict,
        "ok": rep.ok,
    }
    if not rep.ok:
        row["failures"] = [jsonable(f) for f in rep.failures]
    return row


def _bk_instance(args):
    kind, seed = args
    if kind == "uniform":
        m = Measure.uniform(binary_space(3))
    else:
        m = random_product_measure(3, random.Random(seed))
    res = box_product_sweep(m)
    return {
        "kind": f"box-product-{kind}",
        "seed": seed,
        "pairs": res["pairs"],
        "violations": len(res["violations"]),
        "ok": not res["violations"],
    }


_GRAPHS_232 = {
    "edge2": (2, ((1, 2),)),
    "path3": (3, ((1, 2), (2, 3))),
    "triangle3": (3, ((1, 2), (2, 3), (1, 3))),
}


def _cluster_bound_instance(args):
    (graph_name,) = args
    v, edges = _GRAPHS_232[graph_name]
    spec = IsingSpec(tuple(range(1, v + 1)), tuple((u, w, Fraction(2)) for u, w in edges))
    build = ising_build(spec)
    m, base = build.measure, build.base
    rule = increasing_decreasing_rule()
    ups = enumerate_upsets(m.space)
    downs = [u.complement() for u in ups]
    pairs = 0
    bad = None
    for a in ups:
        for b in downs:
            pairs += 1
            rep = check_disjoint_cluster_bound(m, base, rule, a, b, 0)
            if not rep.ok:
                bad = {"A": jsonable(a), "B": jsonable(b), "lhs": rep.lhs, "rhs": rep.rhs}
                break
        if bad:
            break
    row = {"kind": "cluster-bound", "graph": graph_name, "pairs": pairs, "ok": bad is None}
    if bad:
        row["witness"] = jsonable(bad)
    return row


def _hypothesis_instance(args):
    kind, n, seed, n_pairs, rule_names = args
    rng = random.Random(seed)
    if kind == "product":
        m = random_product_measure(n, rng)
        size = m.space.size
        pair_list = [(a, b) for a in range(1 << size) for b in range(1 << size)]
    else:
        m = random_fkg_measure(n, seed)
        size = m.space.size
        full = (1 << size) - 1
        pair_list = [
            (rng.randrange(full + 1), rng.randrange(full + 1)) for _ in range(n_pairs)
        ]
    inconsistent = 0
    hyp_true = 0
    checked = 0
    for amask, bmask in pair_list:
        a, b = Event(m.space, amask), Event(m.space, bmask)
        for rule_name in rule_names:
            rep = check_folding_hypothesis_bound(m, rule_by_name(rule_name), a, b, 0)
            checked += 1
            if rep.hypothesis_ok:
                hyp_true += 1
            if not rep.consistent:
                inconsistent += 1
    return {
        "kind": f"folding-hypothesis-{kind}",
        "n": n,
        "seed": seed,
        "checked": checked,
        "hypothesis_held": hyp_true,
        "inconsistent": inconsistent,
        "ok": inconsistent == 0,
    }


# ---------------------------------------------------------------------------
# suite definitions
# ---------------------------------------------------------------------------


def _is_connected(v: int, edges) -> bool:
    parent = list(range(v + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, w in edges:
        parent[find(u)] = find(w)
    return len({find(x) for x in range(1, v + 1)}) == 1


def connected_graphs(vmax: int):
    """Labeled connected graphs on 1..vmax vertices, deterministic order."""
    out = []
    for v in range(1, vmax + 1):
        pool = list(combinations(range(1, v + 1), 2))
        for emask in range(1 << len(pool)):
            edges = tuple(pool[i] for i in range(len(pool)) if emask >> i & 1)
            if _is_connected(v, edges):
                out.append((v, edges))
    return out


def _assemble(suite: str, cfg: RunConfig, params: dict, worker, specs) -> dict:
    ids = list(range(len(specs)))
    if cfg.only is not None:
        ids = [i for i in ids if i == cfg.only]
    t0 = time.monotonic()
    rows = pmap(worker, [specs[i] for i in ids], cfg.jobs)
    elapsed = time.monotonic() - t0
    print(f"[{suite}] {len(ids)} instances in {elapsed:.2f}s", file=sys.stderr)
    instances = []
    failed = 0
    for row_id, row in zip(ids, rows):
        row = {"id": row_id, **row}
        if not row.get("ok", False):
            failed += 1
            row["repro"] = _repro(suite, cfg, row_id)
        instances.append(row)
    return {
        "suite": suite,
        "seed": cfg.seed,
        "params": params,
        "instances": instances,
        "summary": {"total": len(instances), "failed": failed},
        "ok": failed == 0,
    }


def suite_fkg_pa(cfg: RunConfig) -> dict:
    n3 = cfg.instances if cfg.instances is not None else 500
    n4 = max(1, n3 // 5)
    neq = n3 * 4
    specs = []
    specs += [("pipe", (3, _iseed(cfg.seed, 1, i))) for i in range(n3)]
    specs += [("pipe", (4, _iseed(cfg.seed, 2, i))) for i in range(n4)]
    eq_sizes = [1, 2, 3]
    specs += [
        ("equiv", (eq_sizes[i % 3], _iseed(cfg.seed, 3, i))) for i in range(neq)
    ]
    params = {"pipeline_n3": n3, "pipeline_n4": n4, "equivalence": neq}
    return _assemble("fkg-pa", cfg, params, _fkg_pa_worker, specs)


def _fkg_pa_worker(spec):
    tag, args = spec
    return _fkg_pipeline_instance(args) if tag == "pipe" else _fkg_equiv_instance(args)


def suite_folding_convergence(cfg: RunConfig) -> dict:
    n_reorder = cfg.instances if cfg.instances is not None else 200
    n_conv = max(1, n_reorder // 2)
    specs = []
    specs += [("reorder", (_iseed(cfg.seed, 4, i),)) for i in range(n_reorder)]
    conv_sizes = [2, 3]
    specs += [
        ("converge", (conv_sizes[i % 2], _iseed(cfg.seed, 5, i))) for i in range(n_conv)
    ]
    params = {"reorder": n_reorder, "convergence": n_conv}
    return _assemble("folding-convergence", cfg, params, _folding_worker, specs)


def _folding_worker(spec):
    tag, args = spec
    return _reorder_instance(args) if tag == "reorder" else _converge_instance(args)


def suite_rcr_roundtrip(cfg: RunConfig) -> dict:
    vmax = 4 if cfg.instances is None or cfg.instances >= 38 else 3
    weightings = ["2", "3", "5/2", "mixed"]
    specs = [
        (v, edges, w) for v, edges in connected_graphs(vmax) for w in weightings
    ]
    params = {"vmax": vmax, "weightings": weightings, "graphs": len(specs) // len(weightings)}
    return _assemble("rcr-roundtrip", cfg, params, _rcr_roundtrip_instance, specs)


def suite_sublattice(cfg: RunConfig) -> dict:
    mmax = 4 if cfg.instances is None or cfg.instances >= 4 else 3
    specs = [(m,) for m in range(mmax + 1)]
    return _assemble("sublattice", cfg, {"m_max": mmax}, _sublattice_row, specs)


def suite_nfkg_na(cfg: RunConfig) -> dict:
    count = cfg.instances if cfg.instances is not None else 200
    sizes = [1, 2, 3]
    specs = [
        ("nfkg", (sizes[i % 3], _iseed(cfg.seed, 6, i))) for i in range(count)
    ]
    ulc_ns = (3, 4, 5) if cfg.instances is None else (3,)
    chunk_size = 64
    for n in ulc_ns:
        level_vectors = list(iter_product(range(1, 5), repeat=n + 1))
        for start in range(0, len(level_vectors), chunk_size):
            specs.append(("ulc", (n, start, tuple(level_vectors[start : start + chunk_size]))))
    params = {"nfkg": count, "ulc_ns": list(ulc_ns)}
    return _assemble("nfkg-na", cfg, params, _nfkg_na_worker, specs)


def _nfkg_na_worker(spec):
    tag, args = spec
    if tag == "nfkg":
        return _nfkg_instance(args)
    row = _ulc_chunk(args)
    return {
        "kind": "ulc-na",
        "n": row["n"],
        "start": row["start"],
        "checked": row["checked"],
        "ulc": row["ulc"],
        "failures": row["failures"],
        "ok": not row["failures"],
    }


def suite_snfkg_na(cfg: RunConfig) -> dict:
    count = cfg.instances if cfg.instances is not None else 100
    sizes = [1, 2, 3]
    specs = [
        ("perturbed", sizes[i % 3], _iseed(cfg.seed, 8, i)) for i in range(count)
    ]
    specs += [("pairing", n, 0) for n in (2, 3, 4)]
    params = {"perturbed": count, "pairing_ns": [2, 3, 4]}
    return _assemble("snfkg-na", cfg, params, _snfkg_instance, specs)


def suite_bk_sanity(cfg: RunConfig) -> dict:
    count = cfg.instances if cfg.instances is not None else 3
    specs = [("product", _iseed(cfg.seed, 9, i)) for i in range(count)]
    specs.append(("uniform", 0))
    return _assemble("bk-sanity", cfg, {"products": count}, _bk_instance, specs)


def suite_lemma_232(cfg: RunConfig) -> dict:
    specs = [(name,) for name in _GRAPHS_232]
    return _assemble("lemma-232", cfg, {"graphs": list(_GRAPHS_232)}, _cluster_bound_instance, specs)


def suite_lemma_233(cfg: RunConfig) -> dict:
    count = cfg.instances if cfg.instances is not None else 20
    sizes = [2, 3]
    rules = ("full", "increasing_only")
    specs = [
        ("fkg", sizes[i % 2], _iseed(cfg.seed, 10, i), 12, rules) for i in range(count)
    ]
    specs.append(("product", 2, _iseed(cfg.seed, 11, 0), 0, ("full",)))
    params = {"fkg_instances": count, "pairs_per_instance": 12, "rules": list(rules)}
    return _assemble("lemma-233", cfg, params, _hypothesis_instance, specs)


SUITES = {
    "fkg-pa": suite_fkg_pa,
    "snfkg-na": suite_snfkg_na,
    "nfkg-na": suite_nfkg_na,
    "rcr-roundtrip": suite_rcr_roundtrip,
    "folding-convergence": suite_folding_convergence,
    "bk-sanity": suite_bk_sanity,
    "lemma-232": suite_lemma_232,
    "lemma-233": suite_lemma_233,
    "sublattice": suite_sublattice,
}


def run_suite(name: str, cfg: RunConfig) -> dict:
    if name not in SUITES:
        raise RcfoldError(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
    return SUITES[name](cfg)


def render_report(report: dict) -> str:
    return dumps_canonical(report)
