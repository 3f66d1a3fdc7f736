"""Command-line surface.

Exit codes: 0 success, 1 precondition or hypothesis violation, 2 certificate
verification failure, 3 parse or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import witnesses as wit
from .canon import NAMED
from .engine import classify, term_invariants, window_report
from .rca import normalize
from .sandbox import CapTooLarge, FinMap, HypothesisViolation, closure, is_maximal, run_preset, maximality_pipeline
from .terms import ParseError, Rca, Term, compose, flatten, parse_term, serialize, term_eval
from .transversal import NoResult, SetFamily, UniverseTooLarge, construct_h, enumerate_j, filter_h

EXIT_OK, EXIT_PRECONDITION, EXIT_UNVERIFIED, EXIT_PARSE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def load_term(arg: str) -> Term:
    """A builtin name, a path to a term file, or an inline JSON term."""
    if arg in NAMED:
        return NAMED[arg]
    path = Path(arg)
    if path.is_file():
        return parse_term(path.read_bytes())
    if arg.lstrip().startswith("{"):
        return parse_term(arg)
    raise ParseError(0, f"{arg!r} is not a builtin name, a term file or a JSON term")


def _read_text(arg: str) -> str:
    try:
        return Path(arg).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(0, f"cannot read {arg!r}: {e.strerror}") from None


def _maps(text: str) -> list[FinMap]:
    """One map literal per line, or a JSON list of literals."""
    text = text.strip()
    try:
        if text.startswith("[["):
            return [FinMap.of(m) for m in json.loads(text)]
        return [FinMap.parse(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]
    except (json.JSONDecodeError, ValueError, TypeError) as e:
        raise ParseError(0, f"bad map literal: {e}") from None


def _bounds_text(b: dict) -> str:
    return str(b["exact"]) if "exact" in b else f"[{b['lo']}, {b['hi']}]"


def cmd_eval(args) -> tuple[dict, str, int]:
    t = load_term(args.term)
    points = args.points if args.points else list(range(args.upto))
    values = [[n, term_eval(t, n)] for n in points]
    text = "\n".join(f"{n} -> {v}" for n, v in values)
    return {"term": serialize(t), "values": values}, text, EXIT_OK


def _invariant_payload(t: Term, W: int) -> tuple[dict, list[str]]:
    rep = term_invariants(t)
    win = window_report(t, W)
    data = {"term": serialize(t), "invariants": rep.to_json(), "window_report": win.to_json()}
    inv = data["invariants"]
    lines = [f"term: {data['term']}"]
    lines += [f"{k} = {_bounds_text(inv[k])}" for k in ("d", "c", "k", "rank")]
    lines.append(f"image = {rep.image if rep.image is not None else 'unknown'}")
    lines.append(f"infinite kernel class = {inv['has_infinite_kernel_class']}")
    lines.append(f"source = {inv['source']}")
    lines.append(f"window W = {W}: observed collapse {win.c_obs}, distinct values {win.distinct}, "
                 f"gaps below max {win.missing_below_max}, largest fibers {win.largest_fibers}")
    return data, lines


def cmd_invariants(args):
    data, lines = _invariant_payload(load_term(args.term), args.window)
    return data, "\n".join(lines), EXIT_OK


def cmd_classify(args):
    t = load_term(args.term)
    flags = classify(t)
    data = {"term": serialize(t), "flags": flags.to_json(), "window": args.window}
    return data, "\n".join([f"term: {data['term']}"] + [f"{n}={v}" for n, v in flags.items()]), EXIT_OK


def cmd_compose(args):
    t = compose(*(load_term(a) for a in args.terms))
    factors = flatten(t)
    if len(factors) == 1 and isinstance(factors[0], Rca):
        t = Rca(normalize(factors[0].map))
    data, lines = _invariant_payload(t, args.window)
    flags = classify(t)
    data["flags"] = flags.to_json()
    lines.append("flags: " + " ".join(f"{n}={v}" for n, v in flags.items()))
    return data, "\n".join(lines), EXIT_OK


_KINDED = {"w_dual", "w_right_gen"}


def cmd_witness(args):
    fn = wit.WITNESSES.get(args.name)
    if fn is None:
        raise UsageError(f"unknown witness {args.name!r}; choose from {', '.join(sorted(wit.WITNESSES))}")
    terms = [load_term(a) for a in args.terms]
    if args.name in _KINDED:
        if args.kind is None:
            raise UsageError(f"{args.name} needs --kind")
        cert = fn(args.kind, *terms, W=args.window)
    else:
        cert = fn(*terms, W=args.window)
    return cert.to_json(), cert.to_text(), EXIT_OK if cert.verified else EXIT_UNVERIFIED


def cmd_jset(args):
    try:
        M = SetFamily.from_text(_read_text(args.family))
    except ValueError as e:
        raise ParseError(0, f"bad family file: {e}") from None
    if args.avoid:
        J = filter_h(M, args.avoid, args.max_universe)
    else:
        J = enumerate_j(M, args.max_universe)
    data = {"family_size": len(M), "universe_size": len(M.universe), "avoid": sorted(args.avoid or []),
            "J": [sorted(H) for H in J]}
    lines = [f"family: {len(M)} members over {len(M.universe)} points",
             f"J(M){' avoiding ' + str(sorted(args.avoid)) if args.avoid else ''}: {len(J)} sets"]
    lines += ["  {" + ", ".join(map(str, sorted(H))) + "}" for H in J]
    if args.construct:
        H = construct_h(M)
        data["construct_h"] = sorted(H)
        lines.append("construct_h: {" + ", ".join(map(str, sorted(H))) + "}")
    return data, "\n".join(lines), EXIT_OK


def cmd_sandbox(args):
    if args.action == "pipeline":
        if args.preset:
            rep = run_preset(args.preset)
        else:
            if not (args.W and args.U and args.n):
                raise UsageError("pipeline needs --preset, or --W, --U and --n")
            rep = maximality_pipeline(_maps(_read_text(args.W)), _maps(_read_text(args.U)), args.n, args.cap)
        return rep.to_json(), rep.to_text(), EXIT_OK
    maps = _maps("\n".join(args.maps))
    if not maps:
        raise UsageError(f"{args.action} needs at least one map")
    n = maps[0].n
    if args.action == "closure":
        S = sorted(closure(maps, n))
        data = {"n": n, "size": len(S), "elements": [list(m.images) for m in S]}
        return data, f"closure in T_{n}: {len(S)} elements\n" + "\n".join(str(m) for m in S), EXIT_OK
    rep = is_maximal(maps, n)
    data = {"n": n, "size": len(rep.elements), "closed": rep.closed, "proper": rep.proper, "maximal": rep.maximal}
    text = (f"subset of T_{n} with {len(rep.elements)} elements: closed={str(rep.closed).lower()}, "
            f"proper={str(rep.proper).lower()}, maximal={str(rep.maximal).lower()}")
    return data, text, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--window", type=int, default=argparse.SUPPRESS, help="verification window W")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["text", "json"], default=argparse.SUPPRESS)

    p = _Parser(prog="maxsub", description="Transformations of N and maximal subsemigroups.")
    p.add_argument("--window", type=int, default=wit.DEFAULT_WINDOW)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json"], default="text")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="evaluate a term pointwise")
    s.add_argument("term")
    s.add_argument("points", nargs="*", type=int)
    s.add_argument("--upto", type=int, default=20)
    s.set_defaults(run=cmd_eval)

    for verb, fn in (("invariants", cmd_invariants), ("classify", cmd_classify)):
        s = sub.add_parser(verb, parents=[common])
        s.add_argument("term")
        s.set_defaults(run=fn)

    s = sub.add_parser("compose", parents=[common], help="compose terms left to right")
    s.add_argument("terms", nargs="+")
    s.set_defaults(run=cmd_compose)

    s = sub.add_parser("witness", parents=[common])
    s.add_argument("name")
    s.add_argument("terms", nargs="+")
    s.add_argument("--kind", choices=["IF", "FI", "Cp"])
    s.set_defaults(run=cmd_witness)

    s = sub.add_parser("jset", parents=[common], help="minimal transversals of a set family file")
    s.add_argument("family")
    s.add_argument("--avoid", type=int, nargs="+")
    s.add_argument("--construct", action="store_true")
    s.add_argument("--max-universe", type=int, default=20)
    s.set_defaults(run=cmd_jset)

    s = sub.add_parser("sandbox", parents=[common], help="finite T_n experiments")
    s.add_argument("action", choices=["pipeline", "closure", "maximal"])
    s.add_argument("maps", nargs="*", help="map literals such as [1,0,0]")
    s.add_argument("--preset", choices=["sym3", "sym4"])
    s.add_argument("--W")
    s.add_argument("--U")
    s.add_argument("--n", type=int)
    s.add_argument("--cap", type=int, default=1)
    s.set_defaults(run=cmd_sandbox)
    return p


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.window < 1:
            raise UsageError("--window must be positive")
        data, text, code = args.run(args)
    except UsageError as e:
        print(e, file=err)
        return EXIT_PARSE
    except ParseError as e:
        print(f"parse error at byte {e.offset}: {e.reason}", file=err)
        return EXIT_PARSE
    except (wit.PreconditionViolation, wit.UnsupportedStructure, HypothesisViolation,
            CapTooLarge, UniverseTooLarge, NoResult) as e:
        print(f"precondition violated: {e}", file=err)
        return EXIT_PRECONDITION
    if args.format == "json":
        payload = {"window": args.window, "seed": args.seed, **data}
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        out.write(f"# window W = {args.window}, seed = {args.seed}\n{text}\n")
    return code


def main() -> None:
    sys.exit(run())
