"""Command line front end.

Exit codes: 0 success, 1 usage or parse error, 2 budget refusal,
3 window too small, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import formats
from .covers import (EXHAUSTIVE_BUDGET, Linear, Power, ScaleVerdict, check_cover, dimension_profile,
                     exact_cover, min_families_greedy, validate)
from .dim_transform import (PowerWitness, NagataWitness, nagata_to_power, power_to_nagata,
                            proof_chain_check, sample_scales, validate_witness, witness_from_recipe)
from .errors import BudgetExceeded, CoarseDimError, ParseError, WindowTooSmall
from .higson import (ObservedFunction, decay_verdict, default_battery, higson_profile, membership_estimate,
                     theorem_crosscheck)
from .metric_core import DEFAULT_POINT_BUDGET, TOL
from .scale_functions import classify, numeric_check, parse, to_text

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_WINDOW, EXIT_INVALID = 0, 1, 2, 3, 4
BUDGET_ENV = "COARSEDIM_BUDGET"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _global_options(suppress):
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="seed for heuristic choices")
    p.add_argument("--budget-points", type=int, default=d(None),
                   help=f"point budget (default {DEFAULT_POINT_BUDGET}, or ${BUDGET_ENV})")
    p.add_argument("--budget-exact", type=int, default=d(EXHAUSTIVE_BUDGET),
                   help="largest space handed to the exhaustive solver")
    p.add_argument("--tolerance", type=float, default=d(TOL))
    p.add_argument("--out", default=d(None), help="output file (or directory for higson)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsedim", parents=[_global_options(False)],
                     description="Cover-based dimension estimates on finite metric samples.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_global_options(True)]

    sp = sub.add_parser("space", parents=common, help="write a space description file")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", type=int, metavar="N", help="grid dimension 1..3")
    src.add_argument("--cayley", choices=["free-abelian", "free"])
    src.add_argument("--tree", action="store_true", help="regular rooted tree")
    src.add_argument("--in", dest="infile", help="existing space file")
    sp.add_argument("--side", type=int)
    sp.add_argument("--norm", default="l1")
    sp.add_argument("--offset", type=int, default=0)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--radius", type=int)
    sp.add_argument("--branching", type=int)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--basepoint", type=int)
    sp.add_argument("--remetrize", action="store_true", help="apply d -> ln(1 + d)")

    cp = sub.add_parser("cover", parents=common, help="family count at one scale pair")
    cp.add_argument("space")
    cp.add_argument("--r", type=float, required=True)
    bound = cp.add_mutually_exclusive_group()
    bound.add_argument("--D", type=float, help="explicit piece-diameter bound")
    bound.add_argument("--power-alpha", type=float, help="bound r^alpha")
    bound.add_argument("--linear-c", type=float, help="bound c*r")
    cp.add_argument("--method", choices=["exact", "greedy"], default="exact")
    cp.add_argument("--emit-witness", metavar="FILE")
    cp.add_argument("--check", metavar="WITNESS", help="validate a cover file instead of solving")

    tp = sub.add_parser("transform", parents=common, help="transport a dimension witness")
    tp.add_argument("recipe")
    tp.add_argument("--direction", choices=["forward", "backward"], required=True)
    tp.add_argument("--r-samples", type=_floats, help="comma separated scales")
    tp.add_argument("--audit", action="store_true", help="append the inequality audit per r")

    fp = sub.add_parser("scalefn", parents=common, help="classify a scale function")
    fp.add_argument("expression")
    fp.add_argument("--mode", choices=["subpower", "sublinear"], required=True)
    fp.add_argument("--numeric", action="store_true", help="finite-window check instead")
    fp.add_argument("--horizon", type=float, default=1e6)
    fp.add_argument("--grid", type=_floats)

    hp = sub.add_parser("higson", parents=common, help="Higson profile and membership")
    hp.add_argument("space")
    hp.add_argument("--function", required=True, help="expression in the norm n")
    hp.add_argument("--mode", choices=["subpower", "sublinear"], required=True)
    hp.add_argument("--battery", help="';'-separated scale functions")
    hp.add_argument("--annuli", type=int, default=12)
    hp.add_argument("--centers", type=int, default=64)
    hp.add_argument("--probe", action="append", default=[],
                    help="extra scale function profiled outside the battery (no class check)")
    hp.add_argument("--crosscheck", action="store_true")

    rp = sub.add_parser("report", parents=common, help="family counts over a list of scales (CSV)")
    rp.add_argument("space")
    rp.add_argument("--r-list", type=_floats, required=True)
    rb = rp.add_mutually_exclusive_group(required=True)
    rb.add_argument("--power-alpha", type=float)
    rb.add_argument("--linear-c", type=float)
    return parser


def _point_budget(args):
    if args.budget_points is not None:
        return args.budget_points
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_POINT_BUDGET


def _emit(args, text, out):
    if args.out and args.command != "higson":
        Path(args.out).write_text(text)
    else:
        out.write(text)


def _load_space(path, args):
    doc = formats.load_space_doc(Path(path).read_text())
    return doc, formats.build_space(doc, budget=_point_budget(args))


def cmd_space(args, out):
    if args.infile:
        doc = formats.load_space_doc(Path(args.infile).read_text())
    elif args.grid is not None:
        doc = {"kind": "grid", "n": args.grid, "side": args.side, "norm": args.norm,
               "offset": args.offset}
    elif args.cayley:
        doc = {"kind": "cayley", "group": args.cayley, "rank": args.rank, "radius": args.radius}
    else:
        doc = {"kind": "tree", "branching": args.branching, "depth": args.depth}
    if args.basepoint is not None:
        doc["basepoint"] = args.basepoint
    if args.remetrize:
        doc["remetrize"] = int(doc.get("remetrize", 0)) + 1
    formats.build_space(doc, budget=_point_budget(args))  # validates parameters and budget
    _emit(args, formats.dump_space(doc), out)
    return EXIT_OK


def _bound(args):
    if args.power_alpha is not None:
        return Power(args.power_alpha)
    if args.linear_c is not None:
        return Linear(args.linear_c)
    return None


def cmd_cover(args, out):
    doc, pointed = _load_space(args.space, args)
    space = pointed.space
    kind = _bound(args)
    if args.check:
        cover = formats.load_cover(Path(args.check).read_text(), space)
        if kind is not None:
            rep = validate(cover.relabel(space, args.r, cover.claimed_bound), kind)
        else:
            rep = check_cover(cover, r=args.r, bound=args.D, tol=args.tolerance)
        _emit(args, formats.dumps(rep.to_dict()) + "\n", out)
        return EXIT_OK if rep.passed else EXIT_INVALID
    if kind is not None:
        D = kind.bound(args.r)
    elif args.D is not None:
        D = args.D
    else:
        raise CoarseDimError("cover needs one of --D, --power-alpha, --linear-c")
    greedy = min_families_greedy(space, args.r, D, seed=args.seed)
    exact = None
    if args.method == "exact":
        exact = exact_cover(space, args.r, D, budget=args.budget_exact)
    verdict = ScaleVerdict(args.r, D, exact.family_count if exact else None,
                           greedy.family_count, "exhaustive" if exact else "greedy")
    chosen = exact or greedy
    if args.emit_witness:
        Path(args.emit_witness).write_text(formats.dump_cover(chosen, doc))
    result = {"r": verdict.r, "D": verdict.D, "method": verdict.method,
              "families": verdict.families, "min_families_exact": verdict.min_families_exact,
              "greedy_families": verdict.greedy_families}
    _emit(args, formats.dumps(result) + "\n", out)
    return EXIT_OK


def cmd_transform(args, out):
    recipe = formats.load_recipe(Path(args.recipe).read_text())
    source = witness_from_recipe(recipe)
    if args.direction == "forward":
        if not isinstance(source, PowerWitness):
            raise CoarseDimError("forward transport needs a power witness recipe")
        target = power_to_nagata(source)
        head = [f"source: power alpha={formats.fmt(source.alpha)} r0={formats.fmt(source.r0)}",
                f"target: nagata c={formats.fmt(target.c)} r0'={formats.fmt(target.r0_prime)}"]
    else:
        if not isinstance(source, NagataWitness):
            raise CoarseDimError("backward transport needs a Nagata witness recipe")
        target = nagata_to_power(source)
        head = [f"source: nagata c={formats.fmt(source.c)} r0'={formats.fmt(source.r0_prime)}",
                f"target: power alpha={formats.fmt(target.alpha)} r0={formats.fmt(target.r0)}"]
    head.append(f"families: {target.family_count}")
    samples = args.r_samples if args.r_samples else sample_scales(target.threshold)
    result = validate_witness(target, samples)
    lines = head + ["r,bound,families,covering,disjoint,bounded,passed"]
    for r, rep in result.rows:
        lines.append(",".join([formats.fmt(r), formats.fmt(rep.bound), str(rep.family_count),
                               str(rep.covering).lower(), str(rep.disjoint).lower(),
                               str(rep.bounded).lower(), str(rep.passed).lower()]))
    if result.skipped:
        lines.append("skipped (at or below threshold): " + ",".join(formats.fmt(r) for r in result.skipped))
    if result.window_empty:
        lines.append(f"note: {result.note}")
    if args.audit:
        param = source.alpha if args.direction == "forward" else source.c
        for r, _ in result.rows:
            try:
                chain = proof_chain_check(args.direction, param, r)
            except CoarseDimError as exc:
                lines.append(f"audit r={formats.fmt(r)}: {exc}")
                continue
            status = "all links hold" if chain.all_hold else "violated: " + "; ".join(
                link.name for link in chain.links if not link.holds)
            lines.append(f"audit r={formats.fmt(r)}: {status}")
    lines.append("validation: " + ("pass" if result.passed else "FAIL"))
    _emit(args, "\n".join(lines) + "\n", out)
    return EXIT_OK if result.passed else EXIT_INVALID


def cmd_scalefn(args, out):
    f = parse(args.expression)
    if args.numeric:
        c = numeric_check(f, args.mode, args.horizon, grid=args.grid)
    else:
        c = classify(f)
    text = (f"function: {to_text(f)}\nverdict ({args.mode}): {c.verdict(args.mode)}\n"
            f"subpower: {c.subpower}\nsublinear: {c.sublinear}\ncertificate: {c.certificate}\n")
    _emit(args, text, out)
    return EXIT_OK


def cmd_higson(args, out):
    _, pointed = _load_space(args.space, args)
    fn = formats.norm_function(args.function)
    f = ObservedFunction.of_norm(pointed, fn, args.function)
    battery = ([parse(s) for s in args.battery.split(";") if s.strip()]
               if args.battery else list(default_battery(args.mode)))
    kw = {"annulus_count": args.annuli, "max_centers": args.centers}
    report = membership_estimate(pointed, f, args.mode, battery, **kw)
    outdir = Path(args.out or "profiles")
    outdir.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, entry in enumerate(report.entries):
        path = outdir / f"profile_{args.mode}_{i}.csv"
        path.write_text(formats.profile_csv(entry.profile))
        lines.append(f"p = {entry.function}: {entry.verdict} ({path.name})")
    lines.append("verdict: " + report.summary())
    for i, text in enumerate(args.probe):
        p = parse(text)
        prof = higson_profile(pointed, f, p, mode="probe", **kw)
        path = outdir / f"probe_{i}.csv"
        path.write_text(formats.profile_csv(prof))
        lines.append(f"probe p = {to_text(p)}: {decay_verdict(prof)} ({path.name})")
    code = EXIT_OK
    if args.crosscheck:
        cc = theorem_crosscheck(pointed, f, seed=args.seed, **kw)
        lines.append(f"crosscheck: CB_P(X) {'in' if cc.subpower_on_X.in_algebra else 'out'}, "
                     f"CB_L(X') {'in' if cc.sublinear_on_Xprime.in_algebra else 'out'}, "
                     f"agreement {'yes' if cc.agreement else 'no'}")
        lines.append(f"ball identity checked at {cc.ball_identity_checked} centers, "
                     f"ball inclusion at {cc.ball_inclusion_checked}, "
                     f"violations {len(cc.violations)}")
        lines.extend(f"note: {n}" for n in cc.notes)
        lines.extend(f"violation: {formats.dumps(v)}" for v in cc.violations)
        if not cc.passed:
            code = EXIT_INVALID
    out.write("\n".join(lines) + "\n")
    return code


def cmd_report(args, out):
    _, pointed = _load_space(args.space, args)
    kind = _bound(args)
    prof = dimension_profile(pointed.space, args.r_list, kind, exact_budget=args.budget_exact,
                             seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "D", "method", "min_families_exact", "greedy_families", "families"])
    for v in prof:
        w.writerow([formats.fmt(v.r), formats.fmt(v.D), v.method,
                    "" if v.min_families_exact is None else v.min_families_exact,
                    v.greedy_families, v.families])
    _emit(args, buf.getvalue(), out)
    if args.out:
        out.write(f"bound: {kind.describe()}; counts {prof.counts}; "
                  f"monotone: {'yes' if prof.monotone else 'no'}\n")
    return EXIT_OK


COMMANDS = {"space": cmd_space, "cover": cmd_cover, "transform": cmd_transform,
            "scalefn": cmd_scalefn, "higson": cmd_higson, "report": cmd_report}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except WindowTooSmall as exc:
        print(f"window too small: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except (CoarseDimError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
