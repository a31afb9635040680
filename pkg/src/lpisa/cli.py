"""Command-line front end: ``lpisa {decode,isa,batch,dfrac,oracle,validate}``.

Flip positions are 1-based and comma-separated. Exit codes: 0 success or
all-zero decode, 1 usage or input error, 2 decoding failure, 3 insufficient
noise, 4 solver error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .code_model import AlistError, TannerCode, gf2_rank, load_builtin, parse_alist
from .experiment import OracleCapExceeded, bars_csv, brute_force_instantons, export_report, run_batch
from .isa import InsufficientNoise, TheoremViolation, isa_run
from .lp_decoder import FORMULATIONS, FlipSupport, LpDecoder, OutcomeKind
from .lp_solver import LpError
from .pcw_analysis import bsc_weight, fractional_distance, frac_weight, max_frac_weight
from .rng import TrialRng

EXIT_OK, EXIT_USAGE, EXIT_FAILURE, EXIT_NOISE, EXIT_SOLVER = 0, 1, 2, 3, 4
BUILTINS = ("tanner155",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_code(source: str) -> TannerCode:
    if source in BUILTINS:
        return load_builtin(source)
    p = Path(source)
    if not p.is_file():
        raise UsageError(f"no such code: {source!r} (use an alist path or one of {', '.join(BUILTINS)})")
    return parse_alist(p.read_text())


def parse_flips(text: str, n: int) -> FlipSupport:
    text = text.strip()
    if not text:
        return FlipSupport(n, ())
    try:
        pos = [int(t) for t in text.replace(" ", "").split(",")]
    except ValueError:
        raise UsageError(f"flip list must be comma-separated integers, got {text!r}") from None
    bad = [p for p in pos if not 1 <= p <= n]
    if bad:
        raise UsageError(f"flip positions out of range 1..{n}: {bad}")
    if len(set(pos)) != len(pos):
        raise UsageError("duplicate flip position")
    return FlipSupport.from_one_based(n, pos)


class Out:
    """Human-readable lines, or one JSON object per line with --json."""

    def __init__(self, as_json: bool) -> None:
        self.as_json = as_json

    def header(self, cmd: str, code_src: str, code: TannerCode, **params) -> None:
        if self.as_json:
            self.emit({"header": cmd, "code": code_src, "fingerprint": code.fingerprint(), **params})
        else:
            extra = " ".join(f"{k}={v}" for k, v in params.items())
            print(f"# lpisa {cmd} code={code_src} fingerprint={code.fingerprint()} {extra}".rstrip())

    def emit(self, obj: dict) -> None:
        print(json.dumps(obj, sort_keys=True))

    def text(self, line: str) -> None:
        if not self.as_json:
            print(line)


def _pcw_fields(pcw) -> dict:
    if pcw is None:
        return {}
    nz = {i + 1: str(v) for i, v in enumerate(pcw.f) if v}
    w = bsc_weight(pcw)
    return {"w_bsc": w.w_bsc, "e": w.e, "frac_weight": str(frac_weight(pcw)),
            "max_frac_weight": str(max_frac_weight(pcw)), "nonzero": nz}


def cmd_decode(args, out: Out) -> int:
    code = load_code(args.code)
    flips = parse_flips(args.flips, code.n)
    out.header("decode", args.code, code, flips=len(flips), formulation=args.formulation)
    res = LpDecoder(code, args.formulation).decode(flips)
    info = {"kind": res.kind.value, "cost": str(res.cost), **_pcw_fields(res.pcw)}
    if out.as_json:
        out.emit(info)
    else:
        print(f"outcome: {res.kind.value}")
        print(f"cost: {res.cost}")
        if res.pcw is not None:
            print(f"w_bsc: {info['w_bsc']} (e={info['e']})")
            print(f"frac_weight: {info['frac_weight']} ~ {float(Fraction(info['frac_weight'])):.4f}")
            print("nonzero: " + " ".join(f"{i}:{v}" for i, v in info["nonzero"].items()))
    return EXIT_OK if res.kind is OutcomeKind.ALL_ZERO else EXIT_FAILURE


def cmd_isa(args, out: Out) -> int:
    code = load_code(args.code)
    rng = TrialRng(args.seed, args.trial)
    if args.flips is not None:
        start = parse_flips(args.flips, code.n)
        k0 = len(start)
    else:
        from .experiment import initiation

        if not 1 <= args.k0 <= code.n:
            raise UsageError(f"--k0 must lie in 1..{code.n}")
        k0 = args.k0
        start = initiation(code.n, k0, rng)
    out.header("isa", args.code, code, seed=args.seed, trial=args.trial, k0=k0, formulation=args.formulation)
    try:
        res = isa_run(code, start, rng, LpDecoder(code, args.formulation))
    except InsufficientNoise as exc:
        if out.as_json:
            out.emit({"initial": start.one_based(), "result": "insufficient_noise"})
        else:
            print(f"insufficient noise: {exc}")
        return EXIT_NOISE
    steps = [
        {"step": s.index, "weight": s.input_weight.w_bsc, "median_size": len(s.median),
         "median_weight": s.median_weight.w_bsc, "branch": s.branch.value,
         "subsets_failing": sum(o.is_failure for _, o in s.subset_outcomes), "halted": s.halted}
        for s in res.trace
    ]
    info = {"initial": start.one_based(), "instanton": res.instanton.one_based(), "size": len(res.instanton),
            "final_weight": res.final_weight, "final_frac_weight": str(frac_weight(res.final_pcw)),
            "steps_used": res.steps_used, "weights": res.weights}
    if args.trace:
        Path(args.trace).write_text(json.dumps({**info, "trace": steps}, indent=1) + "\n")
    if out.as_json:
        out.emit(info)
    else:
        print(f"instanton: {','.join(map(str, info['instanton']))}")
        print(f"size: {info['size']}")
        print(f"final pcw weight: {res.final_weight} (frac {info['final_frac_weight']})")
        print(f"steps used: {res.steps_used} of at most {2 * k0}")
        print("weights: " + " -> ".join(map(str, res.weights)))
    return EXIT_OK


def cmd_batch(args, out: Out) -> int:
    code = load_code(args.code)
    if not 1 <= args.k0 <= code.n:
        raise UsageError(f"--k0 must lie in 1..{code.n}")
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    out.header("batch", args.code, code, seed=args.seed, k0=args.k0, trials=args.trials,
               formulation=args.formulation)
    report = run_batch(code, args.k0, args.trials, args.seed, workers=args.workers, formulation=args.formulation)
    if args.out:
        export_report(report, f"{args.out}.json")
        export_report(report, f"{args.out}.csv")
    if out.as_json:
        out.emit({"frequency_bars": report.frequency_bars, "unique_bars": report.unique_bars,
                  "tallies": report.tallies})
    else:
        sys.stdout.write(bars_csv(report))
        print("# tallies: " + " ".join(f"{k}={v}" for k, v in report.tallies.items()))
    return EXIT_OK


def cmd_dfrac(args, out: Out) -> int:
    code = load_code(args.code)
    out.header("dfrac", args.code, code, include_box=args.include_box)
    res = fractional_distance(code, workers=args.workers, include_box=args.include_box)
    w = bsc_weight(res.pcw).w_bsc
    info = {"d_frac": str(res.value), "decimal": f"{float(res.value):.4f}", "facets_solved": res.facets_solved,
            "minimizers": len(res.minimizers), "facet": res.facet.describe(), "w_bsc": w}
    if out.as_json:
        out.emit(info)
    else:
        print(f"d_frac: {res.value} ~ {info['decimal']}")
        print(f"attained on {info['facet']}; {len(res.minimizers)} minimizing facets of {res.facets_solved}")
        print(f"w_bsc of the minimizer: {w}")
    return EXIT_OK


def cmd_oracle(args, out: Out) -> int:
    code = load_code(args.code)
    out.header("oracle", args.code, code, max_size=args.max_size)
    try:
        found = sorted(brute_force_instantons(code, args.max_size, cap=args.cap), key=lambda s: (len(s), s.support))
    except OracleCapExceeded as exc:
        raise UsageError(str(exc)) from None
    for s in found:
        if out.as_json:
            out.emit({"instanton": s.one_based(), "size": len(s)})
        else:
            print(",".join(map(str, s.one_based())))
    out.text(f"# {len(found)} instantons of size <= {args.max_size}")
    return EXIT_OK


def cmd_validate(args, out: Out) -> int:
    try:
        code = parse_alist(Path(args.path).read_text())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except AlistError as exc:
        if out.as_json:
            out.emit({"valid": False, "line": exc.line, "error": str(exc)})
        else:
            print(f"invalid: {exc}")
        return EXIT_USAGE
    info = {"valid": True, "n": code.n, "m": code.m, "rank": gf2_rank(code),
            "check_degrees": sorted(set(code.check_degrees)), "var_degrees": sorted(set(code.var_degrees)),
            "fingerprint": code.fingerprint()}
    if out.as_json:
        out.emit(info)
    else:
        print(f"valid alist: n={code.n} m={code.m} rank={info['rank']} fingerprint={info['fingerprint']}")
        print(f"check degrees {info['check_degrees']}, variable degrees {info['var_degrees']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    default_workers = int(os.environ.get("LPISA_WORKERS", "1"))
    p = _Parser(prog="lpisa", description="LP decoding, instanton search and pseudo-codeword analysis.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, formulation=True):
        sp.add_argument("--code", required=True, help="alist path or built-in name (tanner155)")
        sp.add_argument("--json", action="store_true", help="emit JSON lines")
        if formulation:
            sp.add_argument("--formulation", choices=FORMULATIONS, default="full")

    sp = sub.add_parser("decode", help="LP-decode one flip pattern")
    common(sp)
    sp.add_argument("--flips", required=True, help='1-based positions, e.g. "1,5,9" ("" for none)')
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("isa", help="run one instanton search")
    common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--k0", type=int, help="number of random initiation flips")
    g.add_argument("--flips", help="explicit 1-based initiation")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--trial", type=int, default=0, help="trial index within the seed's streams")
    sp.add_argument("--trace", help="write the step trace as JSON here")
    sp.set_defaults(func=cmd_isa)

    sp = sub.add_parser("batch", help="run many searches and print the bar table")
    common(sp)
    sp.add_argument("--k0", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", help="write OUT.json and OUT.csv")
    sp.add_argument("--workers", type=int, default=default_workers, help="default from LPISA_WORKERS")
    sp.set_defaults(func=cmd_batch)

    sp = sub.add_parser("dfrac", help="fractional distance")
    common(sp, formulation=False)
    sp.add_argument("--include-box", action="store_true",
                    help="also tighten the faces f_i = 1 (minimum over all nonzero vertices)")
    sp.add_argument("--workers", type=int, default=default_workers)
    sp.set_defaults(func=cmd_dfrac)

    sp = sub.add_parser("oracle", help="brute-force instantons of a small code")
    common(sp, formulation=False)
    sp.add_argument("--max-size", type=int, required=True)
    sp.add_argument("--cap", type=int, default=2_000_000, help="maximum number of decodes")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="lint an alist file")
    sp.add_argument("path")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error; keep main() callable from code
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    out = Out(args.json)
    try:
        return args.func(args, out)
    except (UsageError, AlistError) as exc:
        print(f"lpisa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LpError, TheoremViolation, ArithmeticError) as exc:
        print(f"lpisa: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
