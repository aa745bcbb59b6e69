"""Command-line driver.

Subcommands mirror the library: ``gen`` writes measure files, ``fold`` and
``limit`` run the folding transform, ``rcr`` verifies and constructs
cluster bases, ``occurrence`` runs box operations and the two occurrence
bounds, ``check`` and ``pipeline`` run the association machinery, and
``suite`` runs a named reproducible batch. Exit status is 0 when the
requested verdict holds and 1 otherwise. Flags fall back to RCFOLD_*
environment variables (RCFOLD_SEED, RCFOLD_JOBS, RCFOLD_OUT,
RCFOLD_CAP_SITES).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .association import (
    fkg_theorem_pipeline,
    is_fkg,
    is_na,
    is_nfkg,
    is_pa,
    is_snfkg,
    is_ulc,
    levels_from_measure,
    snfkg_limit_rcr,
)
from .errors import RcfoldError
from .folding import branch_limit, fold_path
from .generators import (
    exchangeable_measure,
    ising_spec_from_edge_list,
    random_fkg_measure,
    random_nfkg_measure,
    uniform_subset_measure,
)
from .measures import as_fraction
from .occurrence import (
    box_with_rule,
    check_disjoint_cluster_bound,
    check_folding_hypothesis_bound,
    rule_by_name,
)
from .rcr import construct_uniform_symmetric_rcr, ising_build, ising_measure, verify_rcr
from .serialize import (
    base_from_json,
    base_to_json,
    dumps_canonical,
    event_from_json,
    event_to_json,
    ising_from_json,
    ising_to_json,
    jsonable,
    limit_to_json,
    measure_from_json,
    measure_to_json,
    path_from_json,
)
from .suites import SUITES, RunConfig, render_report, run_suite


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


def _env_str(name: str) -> str | None:
    return os.environ.get(name) or None


def _load(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _emit(obj, out: str | None) -> None:
    text = dumps_canonical(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_edges(text: str):
    """Edge list syntax: '1-2:2,2-3:5/2' (weight defaults to 2)."""
    edges = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        uv, _, x = part.partition(":")
        u, _, v = uv.partition("-")
        weight = Fraction(x) if x else Fraction(2)
        u, v = u.strip(), v.strip()
        edges.append((int(u) if u.isdigit() else u, int(v) if v.isdigit() else v, weight))
    return edges


def _cmd_gen(args) -> int:
    if args.kind == "ising":
        spec = ising_spec_from_edge_list(_parse_edges(args.edges))
        measure = ising_measure(spec)
    elif args.kind == "exchangeable":
        levels = [Fraction(x) for x in args.levels.split(",")]
        measure = exchangeable_measure(args.sites, levels)
    elif args.kind == "random_fkg":
        measure = random_fkg_measure(args.sites, args.seed)
    elif args.kind == "random_nfkg":
        measure = random_nfkg_measure(args.sites, args.seed)
    elif args.kind == "uniform_subset":
        measure = uniform_subset_measure(args.sites, args.configs.split(","))
    else:
        raise RcfoldError(f"unknown generator {args.kind!r}")
    _emit(measure_to_json(measure), args.out)
    return 0


def _cmd_fold(args) -> int:
    measure = measure_from_json(_load(args.measure))
    path = path_from_json(_load(args.path))
    _emit(measure_to_json(fold_path(measure, path)), args.out)
    return 0


def _cmd_limit(args) -> int:
    measure = measure_from_json(_load(args.measure))
    path = path_from_json(_load(args.path))
    _emit(limit_to_json(branch_limit(measure, path)), args.out)
    return 0


def _cmd_rcr(args) -> int:
    if args.rcr_cmd == "verify":
        measure = measure_from_json(_load(args.measure))
        base = base_from_json(_load(args.base))
        check = verify_rcr(measure, base, as_fraction(args.eps))
        _emit({"max_dev": check.max_dev, "ok": check.ok}, args.out)
        return 0 if check.ok else 1
    if args.rcr_cmd == "construct":
        event = event_from_json(_load(args.event))
        base = construct_uniform_symmetric_rcr(event)
        _emit(base_to_json(base), args.out)
        return 0
    if args.rcr_cmd == "ising":
        spec = ising_from_json(_load(args.spec))
        build = ising_build(spec)
        _emit(
            {
                "measure": measure_to_json(build.measure),
                "base": base_to_json(build.base),
                "spec": ising_to_json(spec),
            },
            args.out,
        )
        return 0
    raise RcfoldError(f"unknown rcr subcommand {args.rcr_cmd!r}")


def _cmd_occurrence(args) -> int:
    measure = measure_from_json(_load(args.measure)) if args.measure else None
    if args.occ_cmd == "box":
        space = measure.space if measure else None
        a = event_from_json(_load(args.a), space)
        b = event_from_json(_load(args.b), a.space)
        boxed = box_with_rule(a, b, rule_by_name(args.rule))
        _emit(event_to_json(boxed), args.out)
        return 0
    if args.occ_cmd == "check-232":
        base = base_from_json(_load(args.base))
        a = event_from_json(_load(args.a), measure.space)
        b = event_from_json(_load(args.b), measure.space)
        rep = check_disjoint_cluster_bound(
            measure, base, rule_by_name(args.rule), a, b, as_fraction(args.eps)
        )
        _emit(jsonable(rep), args.out)
        return 0 if rep.ok else 1
    if args.occ_cmd == "check-233":
        a = event_from_json(_load(args.a), measure.space)
        b = event_from_json(_load(args.b), measure.space)
        rep = check_folding_hypothesis_bound(
            measure, rule_by_name(args.rule), a, b, as_fraction(args.eps)
        )
        _emit(jsonable(rep), args.out)
        return 0 if rep.consistent else 1
    raise RcfoldError(f"unknown occurrence subcommand {args.occ_cmd!r}")


_CHECKS = {
    "fkg": is_fkg,
    "pa": is_pa,
    "na": is_na,
    "nfkg": is_nfkg,
    "snfkg": is_snfkg,
}


def _cmd_check(args) -> int:
    measure = measure_from_json(_load(args.measure))
    if args.predicate == "ulc":
        levels = levels_from_measure(measure)
        verdict = levels is not None and is_ulc(levels)
        report = {
            "verdict": verdict,
            "exchangeable": levels is not None,
            "levels": [w for w in levels.p] if levels else None,
        }
    else:
        fn = _CHECKS[args.predicate]
        if args.predicate in ("pa", "na"):
            rep = fn(measure, cap=args.cap_sites)
        else:
            rep = fn(measure)
        report = {
            "verdict": rep.verdict,
            "witness": rep.witness,
            "quantifier_log": rep.quantifier_log,
        }
    _emit(jsonable(report), args.out)
    return 0 if report["verdict"] else 1


def _cmd_pipeline(args) -> int:
    measure = measure_from_json(_load(args.measure))
    if args.pipeline == "fkg-theorem":
        rep = fkg_theorem_pipeline(measure)
    else:
        rep = snfkg_limit_rcr(measure)
    _emit(jsonable(rep), args.out)
    return 0 if rep.ok else 1


def _cmd_suite(args) -> int:
    cfg = RunConfig(
        seed=args.seed,
        jobs=args.jobs,
        instances=args.instances,
        max_sites=args.cap_sites,
        out=args.out,
        only=args.only,
    )
    report = run_suite(args.name, cfg)
    text = render_report(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcfold",
        description="Exact folding, cluster-base, and association checks on finite product spaces.",
    )
    parser.add_argument("--seed", type=int, default=_env_int("RCFOLD_SEED", 7))
    parser.add_argument("--jobs", type=int, default=_env_int("RCFOLD_JOBS", 1))
    parser.add_argument("--cap-sites", type=int, default=_env_int("RCFOLD_CAP_SITES", 5))
    parser.add_argument("--out", default=_env_str("RCFOLD_OUT"))

    # the shared flags are also accepted after the subcommand; SUPPRESS keeps
    # a pre-subcommand value from being clobbered by the sub-level default
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cap-sites", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a measure file")
    p.add_argument("kind", choices=["ising", "exchangeable", "random_fkg", "random_nfkg", "uniform_subset"])
    p.add_argument("--sites", type=int, default=3)
    p.add_argument("--edges", default="1-2:2", help="edge list, e.g. 1-2:2,2-3:5/2")
    p.add_argument("--levels", default="1,2,1", help="per-level weights, e.g. 1,2,1")
    p.add_argument("--configs", default="", help="comma-separated 0/1 strings")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("fold", parents=[common], help="apply a fold path to a measure")
    p.add_argument("measure")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_fold)

    p = sub.add_parser("limit", parents=[common], help="branch limit after an essential prefix")
    p.add_argument("measure")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_limit)

    p = sub.add_parser("rcr", help="cluster-base operations")
    rsub = p.add_subparsers(dest="rcr_cmd", required=True)
    q = rsub.add_parser("verify", parents=[common])
    q.add_argument("measure")
    q.add_argument("base")
    q.add_argument("--eps", default="0")
    q.set_defaults(fn=_cmd_rcr)
    q = rsub.add_parser("construct", parents=[common])
    q.add_argument("event")
    q.set_defaults(fn=_cmd_rcr)
    q = rsub.add_parser("ising", parents=[common])
    q.add_argument("spec")
    q.set_defaults(fn=_cmd_rcr)

    p = sub.add_parser("occurrence", help="box operations and occurrence bounds")
    osub = p.add_subparsers(dest="occ_cmd", required=True)
    q = osub.add_parser("box", parents=[common])
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--rule", default="full")
    q.add_argument("--measure")
    q.set_defaults(fn=_cmd_occurrence)
    q = osub.add_parser("check-232", parents=[common])
    q.add_argument("--measure", required=True)
    q.add_argument("--base", required=True)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--rule", default="increasing_decreasing")
    q.add_argument("--eps", default="0")
    q.set_defaults(fn=_cmd_occurrence)
    q = osub.add_parser("check-233", parents=[common])
    q.add_argument("--measure", required=True)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--rule", default="full")
    q.add_argument("--eps", default="0")
    q.set_defaults(fn=_cmd_occurrence)

    p = sub.add_parser("check", parents=[common], help="association predicates")
    p.add_argument("predicate", choices=["fkg", "pa", "na", "nfkg", "snfkg", "ulc"])
    p.add_argument("measure")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("pipeline", parents=[common], help="end-to-end association pipelines")
    p.add_argument("pipeline", choices=["fkg-theorem", "snfkg-rcr"])
    p.add_argument("measure")
    p.set_defaults(fn=_cmd_pipeline)

    p = sub.add_parser("suite", parents=[common], help="run a reproducible verification suite")
    p.add_argument("name", choices=sorted(SUITES))
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--only", type=int, default=None)
    p.set_defaults(fn=_cmd_suite)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RcfoldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
