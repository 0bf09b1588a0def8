"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings
from decimal import ROUND_HALF_EVEN, Decimal

from .config import ConfigError, load_config
from .dist import EndpointSingularity, Exponential
from .mechanism import NonMonotoneDemand, UnitDemandViolation, allocation_from_demand, verify_ic
from .profit import oracle_threshold_search, profit_breakdown
from .sim import MarketConfig, run, summarize
from .solver import (VirtualValues, check_regularity, find_thresholds, gap_monotone, solve,
                     sweep_lambda)
from .update import UpdateRule, validate_assumption1

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

TABLE_P0 = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
TABLE_RATES = (0.5, 1.0, 2.0)


class NumericalFailure(RuntimeError):
    pass


def round3(x: float) -> str:
    """Half-to-even rounding of the shortest decimal repr to 3 places."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def lower_threshold_table():
    """Lower thresholds for exponential beliefs under pure noise trading.

    Returns ``{(p0, rate): p_l}`` with unrounded values.
    """
    out = {}
    for p0 in TABLE_P0:
        for rate in TABLE_RATES:
            v = VirtualValues(Exponential(rate), UpdateRule.noise(), p0)
            out[(p0, rate)] = find_thresholds(v).p_l
    return out


def _atomic_write(path, text):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v):
    return "" if v is None else repr(float(v))


def _emit(args, obj):
    json.dump(obj, sys.stdout, indent=args.json_indent)
    sys.stdout.write("\n")


def _err(msg):
    sys.stderr.write(f"ammdesign: {msg}\n")


def _require_config(args):
    if not args.config:
        raise ConfigError("--config PATH is required for this command")
    return load_config(args.config)


# -- commands ---------------------------------------------------------------

def cmd_solve(args):
    cfg = _require_config(args)
    mech = solve(cfg.distribution, cfg.update_rule, cfg.p0)
    if args.emit_curve:
        p, x, y = mech.curve(1001)
        _atomic_write(args.emit_curve, _csv(
            ([repr(float(a)), repr(float(b)), repr(float(c))] for a, b, c in zip(p, x, y)),
            ["p_hat", "x_star", "y"]))
    _emit(args, mech.to_dict())
    return EXIT_OK


def cmd_verify(args):
    cfg = _require_config(args)
    d, u, p0 = cfg.distribution, cfg.update_rule, cfg.p0
    report = {}
    a1 = validate_assumption1(u, d, p0)
    report["assumption1"] = a1.to_dict()
    reg = check_regularity(VirtualValues(d, u, p0))
    report["regularity"] = reg.to_dict()

    rule = None
    if cfg.demand_curve is not None:
        ok, where, amount = cfg.demand_curve.check_non_increasing()
        report["demand_monotone"] = {"passed": ok, "worst_increase": amount, "at": where}
        if ok:
            try:
                rule = allocation_from_demand(cfg.demand_curve, p0)
            except (NonMonotoneDemand, UnitDemandViolation) as exc:
                report["demand_monotone"] = {"passed": False, "error": str(exc)}
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rule = solve(d, u, p0).allocation
    if rule is not None:
        report["ic"] = verify_ic(rule, 201, lo=d.lo, hi=d.hi).to_dict()
        report["profit_equivalence"] = profit_breakdown(rule, d, u).to_dict()
    checks = [a1.passed, reg.regular,
              report.get("demand_monotone", {"passed": True})["passed"],
              report.get("ic", {"passed": rule is not None})["passed"],
              report.get("profit_equivalence", {"consistent": rule is not None})["consistent"]]
    report["passed"] = all(checks)
    _emit(args, report)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_sweep(args):
    cfg = _require_config(args)
    d = cfg.distribution
    rows = sweep_lambda(d, cfg.p0, cfg.lambdas)
    sys.stdout.write(_csv(
        ([repr(r.lam), repr(float(pl)), repr(float(ph)), repr(float(gap)), mark]
         for r in rows for (_, pl, ph, gap, mark) in [r.csv_fields(d.lo, d.hi)]),
        ["lambda", "p_l", "p_h", "gap", "degenerate"]))
    if all(r.regular for r in rows) and not gap_monotone(rows):
        _err("gap is not non-increasing in lambda on a regular instance")
        return EXIT_FAIL
    return EXIT_OK


def cmd_oracle(args):
    cfg = _require_config(args)
    grid_n = args.grid_n or cfg.grid_n
    res = oracle_threshold_search(cfg.distribution, cfg.update_rule, cfg.p0, grid_n,
                                  keep_surface=bool(args.surface_csv))
    if args.surface_csv:
        _atomic_write(args.surface_csv, _csv(
            ([_num(a), _num(b), repr(c)] for a, b, c in res.surface_rows()),
            ["p_l", "p_h", "profit"]))
    _emit(args, res.to_dict())
    return EXIT_OK


def cmd_simulate(args):
    cfg = _require_config(args)
    mc = MarketConfig(cfg.distribution, cfg.update_rule, cfg.p0, cfg.rounds, cfg.seed,
                      cfg.resolve_each_round)
    state = run(mc)
    if args.ledger_csv:
        _atomic_write(args.ledger_csv, state.ledger_csv())
    out = summarize(state).to_dict()
    if state.halted:
        out["diagnostic"] = state.diagnostic
    _emit(args, out)
    return EXIT_OK


def cmd_table_fig2(args):
    table = lower_threshold_table()
    rows = [[repr(p0)] + [round3(table[(p0, r)]) for r in TABLE_RATES] for p0 in TABLE_P0]
    sys.stdout.write(_csv(rows, ["p0", "rate_0.5", "rate_1", "rate_2"]))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "table-fig2": cmd_table_fig2,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH")
    common.add_argument("--json-indent", type=int, default=argparse.SUPPRESS, metavar="N")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="ammdesign", parents=[common],
                                description="Optimal incentive-compatible AMM solver")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="solve for the optimal mechanism")
    s.add_argument("--emit-curve", metavar="FILE")
    sub.add_parser("verify", parents=[common], help="run every model check")
    sub.add_parser("sweep", parents=[common], help="no-trade gap across linear weights")
    o = sub.add_parser("oracle", parents=[common], help="brute-force threshold search")
    o.add_argument("--grid-n", type=int)
    o.add_argument("--surface-csv", metavar="FILE")
    m = sub.add_parser("simulate", parents=[common], help="sequential trading simulation")
    m.add_argument("--ledger-csv", metavar="FILE")
    sub.add_parser("table-fig2", parents=[common], help="exponential lower-threshold table")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    for name, default in (("config", None), ("json_indent", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            return COMMANDS[args.command](args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except (EndpointSingularity, NumericalFailure, ArithmeticError, RuntimeError) as exc:
        _err(f"numerical failure: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        # model-level rejections (p0 outside support, bad parameters) are config problems
        _err(f"invalid input: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
