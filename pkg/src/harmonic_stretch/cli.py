"""Command-line front end: classify / gen / pack / validate / opt / audit /
compare, all emitting machine-readable output.

Exit codes: 0 success, 1 validation or audit failure, 2 usage errors
(malformed rationals, unreadable inputs, unknown flags).  f and eta are
mandatory wherever the computation is parameterized; there are no silent
defaults.  An optional --config JSON file supplies flag values (explicit
flags win).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import adjust, engine, trace as trace_mod
from .checker import check_static_validity, packing_from_document
from .classify import (
    ClassConstants,
    classify,
    primary_spot_size,
    standby_reserved,
    standby_spot_size,
)
from .model import Config, InvariantViolationError, TraceError, format_ratio, parse_ratio
from .oracle import dedicated_baseline, optimal_packing
from .weights import audit_algorithm_packing, exception_bound, total_weight

USAGE_ERROR = 2
CHECK_FAILURE = 1


class UsageError(Exception):
    pass


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc


def _build_config(args) -> Config:
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    if getattr(args, "f", None) is not None:
        values["f"] = args.f
    if getattr(args, "eta", None) is not None:
        values["eta"] = args.eta
    if "f" not in values or "eta" not in values:
        raise UsageError("both --f and --eta are required (flag or --config)")
    try:
        return Config(f=int(values["f"]), eta=parse_ratio(values["eta"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read_packing(path: str, config) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read packing {path}: {exc}") from exc


def _write_out(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def cmd_classify(args) -> int:
    config = _build_config(args)
    try:
        size = parse_ratio(args.size)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 < size <= 1:
        raise UsageError(f"size must lie in (0, 1], got {size}")
    i, j = classify(size, config)
    consts = ClassConstants.for_config(config)
    print(f"i={i} j={j}")
    print(f"standby_size={format_ratio(config.standby_size(size))}")
    print(f"standby_class_count={consts.standby_class_count}")
    if i <= 6:
        print(f"primary_spot_size={format_ratio(primary_spot_size(i))}")
    if j <= consts.standby_class_count - 1:
        print(f"standby_spot_size={format_ratio(standby_spot_size(j, config))}")
        print(f"standby_reserved={format_ratio(standby_reserved(j, config))}")
    print(f"sr_primary_capacity={format_ratio(consts.sr_primary_capacity)}")
    print(f"sr_standby_capacity={format_ratio(consts.sr_standby_capacity)}")
    print(f"small_mirror_reserved={format_ratio(consts.small_mirror_reserved)}")
    print(f"small_open_threshold={format_ratio(consts.small_open_threshold)}")
    return 0


def cmd_gen(args) -> int:
    config = _build_config(args)
    events = trace_mod.generate_trace(args.mode, args.n, args.seed, config,
                                      grid=args.grid,
                                      recover_all_at_end=args.recover_all)
    _write_out(trace_mod.write_trace(events), args.out)
    return 0


def _read_trace_file(path: str, config) -> list:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read trace {path}: {exc}") from exc
    try:
        events = trace_mod.read_trace(text)
    except (TraceError, ValueError, KeyError) as exc:
        raise UsageError(f"malformed trace {path}: {exc}") from exc
    problems = trace_mod.validate_trace(events, config)
    if problems:
        raise UsageError(f"invalid trace {path}: " + "; ".join(problems[:5]))
    return events


def cmd_pack(args) -> int:
    config = _build_config(args)
    events = _read_trace_file(args.trace, config)
    try:
        result = trace_mod.run_trace(events, config,
                                     check_every_event=args.check,
                                     collect_log=bool(args.log))
    except TraceError as exc:
        raise UsageError(str(exc)) from exc
    if args.log:
        with open(args.log, "w") as fh:
            for rec in result.log:
                fh.write(json.dumps(rec) + "\n")
    snapshot = result.state.to_snapshot()
    if args.out:
        _write_out(_dump_json(snapshot), args.out)
    print(f"events={result.event_count} arrivals={result.arrival_count} "
          f"bins={result.bin_count}")
    if result.violations:
        for v in result.violations:
            print(f"violation: {v}", file=sys.stderr)
        return CHECK_FAILURE
    return 0


def cmd_validate(args) -> int:
    config = _build_config(args) if (args.f or args.eta or args.config) else None
    doc = _read_packing(args.packing, config)
    try:
        packing = packing_from_document(doc, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    verdict = check_static_validity(packing)
    if verdict.valid:
        print("valid")
        return 0
    witness = ",".join(str(b) for b in verdict.witness or [])
    print(f"invalid witness={{{witness}}} {verdict.reason}")
    return CHECK_FAILURE


def cmd_opt(args) -> int:
    config = _build_config(args)
    try:
        sizes = [parse_ratio(tok) for tok in args.sizes.split(",") if tok]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        count, doc = optimal_packing(sizes, config, max_n=args.max_n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"opt_bins={count}")
    _write_out(_dump_json(doc), args.out)
    return 0


def cmd_audit(args) -> int:
    config = _build_config(args) if (args.f or args.eta or args.config) else None
    doc = _read_packing(args.packing, config)
    try:
        packing = packing_from_document(doc, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = audit_algorithm_packing(packing)
    _write_out(_dump_json(report.to_dict()), args.out)
    return 0 if report.ok else CHECK_FAILURE


def cmd_compare(args) -> int:
    config = _build_config(args)
    events = _read_trace_file(args.trace, config)
    sizes = [ev.size for ev in events if ev.kind == "arrive"]
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    weight = total_weight(sizes, config)
    bound = exception_bound(config)
    rows = ["algo,bins,total_weight,exception_bound,bins_le_weight_plus_bound"]
    opt_bins = None
    if args.opt:
        opt_bins, _ = optimal_packing(sizes, config, max_n=args.max_n)
    for algo in algos:
        if algo == "hs":
            result = trace_mod.run_trace(events, config, collect_log=False)
            bins = result.bin_count
        elif algo == "dedicated":
            bins = (config.f + 1) * len(sizes)
        else:
            raise UsageError(f"unknown algorithm {algo!r} (expected hs,dedicated)")
        rows.append(f"{algo},{bins},{weight},{bound},{bins <= weight + bound}")
    if opt_bins is not None:
        limit = Fraction(7, 4)
        rows.append(f"opt,{opt_bins},{weight},{bound},"
                    f"{opt_bins >= weight / limit}")
    _write_out("\n".join(rows) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonic-stretch",
        description="Fault-tolerant online bin packing tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--f", type=int, help="failure budget (integer >= 1)")
        p.add_argument("--eta", help="standby shrink factor, 'num/den' or integer")
        p.add_argument("--config", help="JSON file supplying flag defaults")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("classify", help="classify a size, print class constants")
    p.add_argument("--size", required=True, help="item size, 'num/den'")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gen", help="generate a trace")
    p.add_argument("--mode", default="random",
                   choices=["random", "adversarial-active-kill", "class-boundary"])
    p.add_argument("--n", type=int, required=True, help="number of arrivals")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=48,
                   help="size grid denominator for random mode")
    p.add_argument("--recover-all", action="store_true",
                   help="append recoveries so the trace ends failure-free")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("pack", help="run a trace through the engine")
    p.add_argument("--trace", required=True)
    p.add_argument("--check", action="store_true",
                   help="re-check every invariant after each event")
    p.add_argument("--log", help="write placement/promotion log (JSONL) here")
    common(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("validate", help="static validity check of a packing")
    p.add_argument("--packing", required=True)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("opt", help="brute-force optimal packing")
    p.add_argument("--sizes", required=True, help="comma-separated 'num/den' sizes")
    p.add_argument("--max-n", type=int, default=5, dest="max_n")
    common(p)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("audit", help="weight report for a packing snapshot")
    p.add_argument("--packing", required=True)
    common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("compare", help="bin counts and weight bounds per algorithm")
    p.add_argument("--trace", required=True)
    p.add_argument("--algos", default="hs,dedicated")
    p.add_argument("--opt", action="store_true",
                   help="also solve the instance exactly (tiny traces only)")
    p.add_argument("--max-n", type=int, default=5, dest="max_n")
    common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
