"""Command-line entry point: ``girthforge <subcommand> ...``.

Exit codes: 0 success, 1 a checked property fails (a witness is printed or
written with ``--witness``), 2 usage or input error, 3 construction retries
exhausted, 4 an enumeration hit its cap.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import construction as cons
from . import homs, montecarlo as mc
from .digraph import INFINITE, girth, short_cycles
from .errors import (
    DigraphFormatError,
    DimensionMismatch,
    EnumerationTruncated,
    InvalidColouring,
    NoMajorityColour,
    NotLarge,
    RetriesExhausted,
)
from .model import ModelParams, build_blowup, sample
from .textio import canonical_json, dump_digraph, format_map, parse_digraph, parse_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RETRIES, EXIT_TRUNCATED = 0, 1, 2, 3, 4
DEFAULT_CLI_LIMIT = 100_000


class _UsageError(Exception):
    pass


def _read(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_digraph(text)
    except DigraphFormatError as exc:
        raise _UsageError(f"{path}: {exc}") from None


def _digraph(path):
    return _read(path)[1]


def _mapping(args, D, C):
    if args.map is not None:
        try:
            line = next(l for l in Path(args.map).read_text().splitlines() if l.startswith("map"))
        except (OSError, StopIteration):
            raise _UsageError(f"no 'map ...' line found in {args.map}") from None
        image = parse_map(line)
    elif args.image is not None:
        image = [int(x) for x in args.image.split()]
    else:
        raise _UsageError("give the mapping with --map FILE or --image 'i0 i1 ...'")
    try:
        return homs.VertexMapping(D.order, C.order, image)
    except DimensionMismatch as exc:
        raise _UsageError(str(exc)) from None


def _emit(args, text):
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _witness(args, lines):
    text = "".join(line + "\n" for line in lines)
    if getattr(args, "witness", None):
        Path(args.witness).write_text(text)
    sys.stdout.write(text)


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _default_seed():
    env = os.environ.get("GIRTHFORGE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError("GIRTHFORGE_SEED must be an integer") from None


def _params(args) -> ModelParams:
    if args.p_force is not None and not args.unsafe:
        raise _UsageError("--p-force requires --unsafe")
    seed = args.seed if args.seed is not None else _default_seed()
    args.seed = seed
    try:
        return ModelParams(args.n, args.ell, args.k, args.eps, seed, args.unsafe, args.p_force)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


# ---------------------------------------------------------------- subcommands


def cmd_gen_d0(args):
    D = _digraph(args.pattern)
    if args.n < 1:
        raise _UsageError("--n must be positive")
    D0 = build_blowup(D, args.n)
    _emit(args, dump_digraph(D0.digraph, "d0", {"blocks": (D.order, args.n)}))
    return EXIT_OK


def cmd_sample(args):
    D = _digraph(args.pattern)
    params = _params(args)
    S = sample(build_blowup(D, params.n), params)
    _emit(args, dump_digraph(S.arcs, "sample", {"blocks": (D.order, params.n), "seed": params.seed}))
    return EXIT_OK


def cmd_construct(args):
    D = _digraph(args.pattern)
    params = _params(args)
    try:
        art = cons.construct(D, params, args.max_retries)
    except RetriesExhausted as exc:
        print(f"retries exhausted: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    cons.save_artifact(art, args.out)
    g = girth(art.Dstar)
    print(f"attempts {art.attempts}")
    print(f"girth {'inf' if g == INFINITE else g}")
    print(f"matching {len(art.M)}")
    return EXIT_OK


def cmd_girth(args):
    g = girth(_digraph(args.input))
    print("inf" if g == INFINITE else g)
    return EXIT_OK


def cmd_short_cycles(args):
    cycles = short_cycles(_digraph(args.input), args.ell)
    lines = [f"cycles {len(cycles)}"] + [" ".join(map(str, c)) for c in cycles]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_find_hom(args):
    D, C = _digraph(args.input), _digraph(args.to)
    rho = homs.find_acyclic_hom(D, C)
    if rho is None:
        print("no acyclic homomorphism")
        return EXIT_FAIL
    _emit(args, format_map(rho.image) + "\n")
    return EXIT_OK


def cmd_check_hom(args):
    D, C = _digraph(args.input), _digraph(args.to)
    rho = _mapping(args, D, C)
    v = homs.check_acyclic_hom(D, C, rho)
    if v is None:
        print("ok")
        return EXIT_OK
    _witness(args, [f"violation {v.kind}", "witness " + " ".join(map(str, v.witness))])
    return EXIT_FAIL


def cmd_enumerate_homs(args):
    D, C = _digraph(args.input), _digraph(args.to)
    found = homs.enumerate_acyclic_homs(D, C, args.limit + 1)
    truncated = len(found) > args.limit
    found = found[: args.limit]
    _emit(args, "".join(format_map(r.image) + "\n" for r in found))
    if truncated:
        print(f"truncated at {args.limit}", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_check_core(args):
    D = _digraph(args.input)
    w = homs.core_witness(D)
    if w is None:
        print("core")
        return EXIT_OK
    print("not a core")
    _witness(args, [format_map(w.image)])
    return EXIT_FAIL


def cmd_check_pointed(args):
    C, D = _digraph(args.codomain), _digraph(args.input)
    try:
        pair = homs.pointed_witness(C, D, args.limit)
    except EnumerationTruncated as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_TRUNCATED
    if pair is None:
        print("pointed")
        return EXIT_OK
    print("not pointed")
    _witness(args, [format_map(pair[0].image), format_map(pair[1].image)])
    return EXIT_FAIL


def cmd_check_unique(args):
    Dstar, D = _digraph(args.input), _digraph(args.pattern)
    try:
        res = homs.is_uniquely_colourable(Dstar, D, args.limit)
    except EnumerationTruncated as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_TRUNCATED
    if res.unique:
        print("uniquely colourable")
        return EXIT_OK
    print(f"not uniquely colourable: {res.reason}")
    if res.pair is not None:
        _witness(args, [format_map(res.pair[0].image), format_map(res.pair[1].image)])
    return EXIT_FAIL


def _load_artifact(path):
    try:
        return cons.load_artifact(path)
    except (OSError, ValueError, KeyError) as exc:
        raise _UsageError(f"cannot load artifact {path}: {exc}") from None


def cmd_derive_f(args):
    art = _load_artifact(args.artifact)
    C = _digraph(args.to)
    phi = _mapping(args, art.Dstar, C)
    try:
        f = cons.derive_f(phi, art, C, args.k)
    except InvalidColouring as exc:
        raise _UsageError(str(exc)) from None
    except NoMajorityColour as exc:
        print(f"no majority colour: {exc}")
        return EXIT_FAIL
    _emit(args, format_map(f.image) + "\n")
    return EXIT_OK


def cmd_verify(args):
    art = _load_artifact(args.artifact)
    codomains = [_digraph(p) for p in args.codomain] if args.codomain else None
    try:
        report = cons.verify_theorem1(art, args.k, codomains, args.limit)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    doc = report.to_dict()
    doc["config"] = _config(args)
    _emit(args, canonical_json(doc))
    if report.failures() or not (report.girth_ok and report.psi_ok):
        return EXIT_FAIL
    if any(e["status"] == "Truncated" for e in report.part_iii):
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_mc(args):
    params = _params(args)
    keep_raw = args.raw is not None
    try:
        if args.estimator == "zu":
            p_est, y_est = mc.mc_zU_acyclic(params, args.tau, args.u_size, args.trials, keep_raw)
            doc = {"P_acyclic": p_est.to_report(), "Y": y_est.to_report()}
            est = y_est
        else:
            D = _digraph(args.pattern) if args.pattern else None
            if D is None:
                raise _UsageError(f"mc {args.estimator} needs --pattern")
            if args.estimator == "short-cycles":
                est = mc.mc_short_cycles(D, params, args.trials, args.jobs, keep_raw)
                doc = est.to_report()
            elif args.estimator == "intersecting-pairs":
                est = mc.mc_intersecting_pairs(D, params, args.trials, args.jobs, keep_raw)
                doc = est.to_report()
            elif args.estimator == "good-arc-load":
                spec = "full" if args.set is None else [int(x) for x in args.set.split()]
                res = mc.mc_good_arc_load(D, params, spec, args.trials, keep_raw)
                est = res.estimate
                doc = res.to_report()
                if not res.distribution_ok:
                    est = None
            else:
                cycle = [int(x) for x in args.cycle.split()]
                est = mc.mc_Pr(D, params, cycle, args.w, args.trials, args.random_sets, args.jobs, keep_raw)
                doc = est.to_report()
    except NotLarge as exc:
        raise _UsageError(str(exc)) from None
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    doc = {"config": _config(args), "report": doc}
    _emit(args, canonical_json(doc))
    if keep_raw and est is not None:
        Path(args.raw).write_text(est.to_csv())
    if est is None or est.verdict == "ExceedsBound":
        return EXIT_FAIL
    return EXIT_OK


def cmd_chernoff(args):
    try:
        res = mc.chernoff_check(args.m, args.prob, args.gamma)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    _emit(args, canonical_json({"config": _config(args), "report": res.to_report()}))
    return EXIT_OK if res.holds else EXIT_FAIL


def cmd_eval_bounds(args):
    params = _params(args)
    extras = {}
    for key in ("p", "w", "b", "s", "tau", "u_size", "m", "prob", "gamma"):
        value = getattr(args, f"x_{key}")
        if value is not None:
            extras["U_size" if key == "u_size" else key] = value
    if "gamma" in extras and not {"m", "prob"} <= extras.keys():
        raise _UsageError("--gamma needs --m and --prob")
    table = mc.eval_bounds(params, args.a, extras)
    _emit(args, canonical_json({"config": _config(args), "report": table.to_report()}))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _model_flags(p, require=True):
    p.add_argument("--n", type=int, required=require, help="block size")
    p.add_argument("--ell", type=int, required=require, help="girth target")
    p.add_argument("--k", type=int, default=2, help="codomain order bound (default 2)")
    p.add_argument("--eps", type=float, required=require, help="0 < eps < 1/(4 ell)")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (default $GIRTHFORGE_SEED or 0)")
    p.add_argument("--unsafe", action="store_true", help="allow eps outside the safe range and --p-force")
    p.add_argument("--p-force", type=float, default=None, help="force the arc probability (needs --unsafe)")


def _map_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--map", help="file holding a 'map ...' line")
    g.add_argument("--image", help="images inline, e.g. '0 0 1'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="girthforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-d0", help="write the blow-up D0 of a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_d0)

    p = sub.add_parser("sample", help="sample a spanning subdigraph of D0")
    p.add_argument("--pattern", required=True)
    _model_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("construct", help="run the construction and save an artifact directory")
    p.add_argument("--pattern", required=True)
    _model_flags(p)
    p.add_argument("--max-retries", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("girth", help="print the directed girth")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_girth)

    p = sub.add_parser("short-cycles", help="list cycles shorter than --ell")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_short_cycles)

    p = sub.add_parser("find-hom", help="find an acyclic homomorphism")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_find_hom)

    p = sub.add_parser("check-hom", help="check a mapping is an acyclic homomorphism")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--to", required=True)
    _map_flags(p)
    p.add_argument("--witness")
    p.set_defaults(func=cmd_check_hom)

    p = sub.add_parser("enumerate-homs", help="list acyclic homomorphisms in lexicographic order")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--limit", type=int, default=DEFAULT_CLI_LIMIT)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate_homs)

    p = sub.add_parser("check-core", help="decide whether a digraph is a core")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--witness")
    p.set_defaults(func=cmd_check_core)

    p = sub.add_parser("check-pointed", help="decide whether --codomain is --in-pointed")
    p.add_argument("--codomain", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--limit", type=int, default=DEFAULT_CLI_LIMIT)
    p.add_argument("--witness")
    p.set_defaults(func=cmd_check_pointed)

    p = sub.add_parser("check-unique", help="decide unique --pattern-colourability")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--limit", type=int, default=DEFAULT_CLI_LIMIT)
    p.add_argument("--witness")
    p.set_defaults(func=cmd_check_unique)

    p = sub.add_parser("derive-f", help="pigeonhole map D -> C from a colouring of D*")
    p.add_argument("--artifact", required=True)
    p.add_argument("--to", required=True)
    _map_flags(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive_f)

    p = sub.add_parser("verify-theorem1", help="check an artifact against small codomains")
    p.add_argument("--artifact", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--codomain", action="append", help="explicit codomain file (repeatable)")
    p.add_argument("--limit", type=int, default=cons.DEFAULT_ENUMERATION_LIMIT)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo estimators")
    p.add_argument("estimator", choices=["short-cycles", "intersecting-pairs", "good-arc-load", "pr", "zu"])
    p.add_argument("--pattern")
    _model_flags(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--set", help="explicit large set for good-arc-load (default: all blocks)")
    p.add_argument("--cycle", default="0 1", help="pattern cycle for pr")
    p.add_argument("--w", type=int, default=1, help="set size for pr")
    p.add_argument("--random-sets", action="store_true")
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--u-size", type=int, default=10)
    p.add_argument("--raw", help="write per-trial values as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("chernoff", help="exact binomial tail against the Chernoff bound")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--prob", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_chernoff)

    p = sub.add_parser("eval-bounds", help="evaluate the bound chains at given parameters")
    _model_flags(p)
    p.add_argument("--a", type=int, required=True, help="pattern order")
    for key, typ in (("p", float), ("w", int), ("b", int), ("s", int), ("tau", int),
                     ("u-size", int), ("m", int), ("prob", float), ("gamma", float)):
        p.add_argument(f"--x-{key}", dest=f"x_{key.replace('-', '_')}", type=typ, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"girthforge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
