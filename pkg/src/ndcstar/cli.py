"""Command line front end: ``ndcstar <command> SYSTEM.json [options]``.

Exit status: 0 when every requested verdict passes, 1 when a check fails
(including unmet preconditions), 2 when the input is invalid.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Sequence

from .algebra import Tolerance, _jsonable
from .definiteness import is_alpha_nd_direct, is_alpha_nd_gamma, is_alpha_pd
from .errors import DomainError, StructuralError
from .group_action import validate_action, validate_group
from .haagerup import ExhaustionChain, c0_window_report, haagerup_to_nd, nd_to_haagerup, pd_family
from .kernel_cocycle import build_module, verify_module
from .schoenberg_semigroup import (
    DEFAULT_T_GRID,
    generator_check,
    schoenberg_converse,
    schoenberg_forward,
    verify_cp_semigroup,
)
from .systemfile import SCHEMA_VERSION, InputError, SystemFile, dumps, load

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _grid(text: str | None) -> list[float]:
    if not text:
        return list(DEFAULT_T_GRID)
    try:
        ts = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad t grid {text!r}", "--t") from None
    if not ts or any(t < 0 for t in ts):
        raise InputError("t grid must be non-empty and non-negative", "--t")
    return ts


def _chain(system: SystemFile, name: str | None) -> ExhaustionChain:
    if name is None:
        if len(system.chains) == 1:
            name = next(iter(system.chains))
        else:
            return ExhaustionChain.from_lists(system.group, [[system.group.identity], list(system.group)])
    if name not in system.chains:
        raise InputError(f"unknown chain {name!r}", "$.chains")
    try:
        return ExhaustionChain.from_lists(system.group, system.chains[name])
    except StructuralError as exc:
        raise InputError(str(exc), f"$.chains.{name}") from None


def cmd_validate(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    g = validate_group(system.group)
    a = validate_action(system.action, tol)
    return g.valid and a.valid, {
        "group": {"order": system.group.order, **g.to_dict()},
        "algebra": system.algebra.to_json(),
        "action": a.to_dict(),
        "functions": sorted(system.functions),
    }


def cmd_check(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    f = system.function(args.fn)
    alpha = system.action
    modes = {
        "pd": ["pd"],
        "nd-direct": ["nd_direct"],
        "nd-gamma": ["nd_gamma"],
        "nd": ["nd_direct", "nd_gamma"],
        "both": ["nd_direct", "nd_gamma"],
    }[args.mode]
    out = {}
    for m in modes:
        if m == "pd":
            out[m] = is_alpha_pd(f, alpha, tol)
        elif m == "nd_direct":
            out[m] = is_alpha_nd_direct(f, alpha, tol, central_coefficients=args.central_coefficients, seed=args.seed)
        else:
            out[m] = is_alpha_nd_gamma(f, alpha, tol)
    if len(modes) == 2:
        out["agree"] = out["nd_direct"].passed == out["nd_gamma"].passed
    passed = all(v.passed for k, v in out.items() if k != "agree")
    return passed, out


def cmd_gns(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    X = build_module(system.function(args.fn), system.action, tol)
    rep = verify_module(X)
    return rep.passed, {
        "gram": [[X.gram.entry(i, j).to_json() for j in range(X.gram.n)] for i in range(X.gram.n)],
        "quotient_rank": X.quotient_rank,
        "verify": rep.to_dict(),
    }


def cmd_schoenberg(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    f = system.function(args.fn)
    ts = _grid(args.t)
    run = schoenberg_forward if args.direction == "forward" else schoenberg_converse
    rep = run(f, system.action, ts, tol)
    return rep.passed, rep.to_dict()


def cmd_semigroup(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    f = system.function(args.fn)
    rep = verify_cp_semigroup(f, system.action, _grid(args.t), tol, choi=args.choi)
    gen = generator_check(f, system.action, tol)
    return rep.passed and gen.passed, {"semigroup": rep.to_dict(), "generator": gen.to_dict()}


def cmd_haagerup(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    chain = _chain(system, args.chain)
    if args.mode == "build-nd":
        if args.family not in system.families:
            raise InputError(f"unknown family {args.family!r}", "$.families")
        fam = pd_family(system.action, [system.function(n) for n in system.families[args.family]], tol)
        psi, rep = haagerup_to_nd(fam, chain, tol, args.terms)
        out = rep.to_dict()
        out["psi"] = [v.to_json() for v in psi.elements()]
        out["c0_window"] = c0_window_report(psi, chain).to_dict()
        return rep.passed, out
    fam, rep = nd_to_haagerup(system.function(args.fn), system.action, _grid(args.t), tol)
    out = rep.to_dict()
    out["c0_window"] = [c0_window_report(h, chain).to_dict() for h in fam]
    return rep.passed, out


def cmd_report(system: SystemFile, args, tol: Tolerance) -> tuple[bool, dict]:
    """Every function through the three definiteness checks; informational, passes if it runs."""
    ok, base = cmd_validate(system, args, tol)
    rows = {}
    for name in sorted(system.functions):
        f = system.functions[name]
        rows[name] = {
            "pd": is_alpha_pd(f, system.action, tol).passed,
            "nd_direct": is_alpha_nd_direct(f, system.action, tol, seed=args.seed).passed,
            "nd_gamma": is_alpha_nd_gamma(f, system.action, tol).passed,
            "central_valued": f.is_central_valued(tol),
        }
    return ok, {"validate": base, "functions": rows}


COMMANDS = {
    "validate": cmd_validate,
    "check": cmd_check,
    "gns": cmd_gns,
    "schoenberg": cmd_schoenberg,
    "semigroup": cmd_semigroup,
    "haagerup": cmd_haagerup,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("system", help="system description JSON file")
    common.add_argument("--tol", type=float, default=None, help="relative tolerance (default: file value or 1e-9)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", metavar="OUT", default=None, help="write the full report to OUT ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = argparse.ArgumentParser(prog="ndcstar", description="Definiteness checks for twisted functions on finite groups.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="load and validate a system file")
    c = sub.add_parser("check", parents=[common], help="positive / negative definiteness verdicts")
    c.add_argument("--fn", required=True)
    c.add_argument("--mode", choices=["pd", "nd", "nd-direct", "nd-gamma", "both"], default="both")
    c.add_argument("--central-coefficients", action="store_true", help="weaker test over central sum-zero coefficients")
    g = sub.add_parser("gns", parents=[common], help="Hilbert module, action and cocycle of a function")
    g.add_argument("--fn", required=True)
    s = sub.add_parser("schoenberg", parents=[common], help="exp(-t psi) positive definiteness")
    s.add_argument("--fn", required=True)
    s.add_argument("--direction", choices=["forward", "converse"], default="forward")
    s.add_argument("--t", default=None, help="comma-separated t grid")
    m = sub.add_parser("semigroup", parents=[common], help="completely positive multiplier semigroup")
    m.add_argument("--fn", required=True)
    m.add_argument("--t", default=None)
    m.add_argument("--choi", action="store_true", help="verify complete positivity through Choi matrices")
    h = sub.add_parser("haagerup", help="constructions between PD families and ND functions")
    hsub = h.add_subparsers(dest="mode", required=True)
    hn = hsub.add_parser("build-nd", parents=[common], help="sum of 1 - |h_j|^2 over a family")
    hn.add_argument("--family", required=True)
    hn.add_argument("--terms", type=int, default=None)
    hf = hsub.add_parser("build-family", parents=[common], help="the family exp(-t psi)")
    hf.add_argument("--fn", required=True)
    hf.add_argument("--t", default=None)
    for q in (hn, hf):
        q.add_argument("--chain", default=None)
    sub.add_parser("report", parents=[common], help="summary of every function in the file")
    return p


def _summary(command: str, passed: bool, result: dict) -> str:
    status = "PASS" if passed else "FAIL"
    parts = []
    for k, v in result.items():
        if isinstance(v, dict) and "passed" in v:
            parts.append(f"{k}={'pass' if v['passed'] else 'fail'}")
        elif isinstance(v, bool):
            parts.append(f"{k}={v}")
    return f"{command}: {status}" + (f" ({', '.join(parts)})" if parts else "")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        tol_arg = Tolerance(args.tol) if args.tol is not None else None
        system = load(args.system, tol_arg)
        tol = tol_arg or system.tol or Tolerance()
        try:
            passed, result = COMMANDS[args.command](system, args, tol)
            error = None
        except DomainError as exc:
            passed, result, error = False, {}, str(exc)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StructuralError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "system": system.digest,
        "seed": args.seed,
        "tol": {"eps": tol.eps, "relative": tol.relative},
        "passed": bool(passed),
    }
    if error is not None:
        report["error"] = error
    report["result"] = _jsonable(result)
    if args.timing:
        report["wall_time"] = time.perf_counter() - start

    print(_summary(args.command, passed, report["result"]) + (f": {error}" if error else ""))
    if args.json:
        text = dumps(report)
        if args.json == "-":
            sys.stdout.write(text)
        else:
            with open(args.json, "w") as fh:
                fh.write(text)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
