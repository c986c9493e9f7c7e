"""Command line entry point: ``qossim {calibrate,quote,sweep,serve}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .metrics import emit_csv, format_gains, format_summary, rows_from_records, sweep_rows
from .pricing import calibrate_fixed_price, optimize_menu
from .simulator import parse_slowdown, run_sweep

log = logging.getLogger("qossim")

SEED_ENV = "QOSSIM_SEED"


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.premium_slope is not None:
        if args.premium_slope < 0:
            raise ConfigError("--premium-slope must be nonnegative")
        cfg = cfg.with_overrides(pricing=dataclasses.replace(
            cfg.pricing, contention_premium_slope=args.premium_slope))
    if args.slowdown is not None:
        try:
            parse_slowdown(args.slowdown)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg = cfg.with_overrides(slowdown=args.slowdown)
    base = os.environ.get(SEED_ENV)
    seeds = cfg.seeds
    if args.seeds is not None or base is not None:
        try:
            start = int(base) if base is not None else (seeds[0] if seeds else 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {base!r}") from None
        count = args.seeds if args.seeds is not None else len(seeds)
        if count < 1:
            raise ConfigError("--seeds must be at least 1")
        seeds = tuple(range(start, start + count))
    return cfg.with_overrides(seeds=seeds)


def cmd_calibrate(args, cfg: ExperimentConfig) -> int:
    rate = calibrate_fixed_price(cfg.catalog, cfg.mix, cfg.pricing)
    print(f"bench rate per node-minute: {rate.rate:.6f}")
    print(f"expected revenue per job:   {rate.expected_revenue:.6f}")
    return 0


def cmd_quote(args, cfg: ExperimentConfig) -> int:
    try:
        job = cfg.catalog.get(args.job)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    result = optimize_menu(cfg.mix, job.tier_options(), cfg.pricing)
    print(f"menu for job type {job.name} (expected revenue {result.expected_revenue:.4f})")
    print(f"{'tier':>6} {'minutes':>8} {'nodes':>6} {'price':>12}")
    for tier in result.menu.tiers:
        print(f"{tier.tier_id:>6} {tier.completion_time:>8g} {tier.node_count:>6} "
              f"{tier.price:>12.4f}")
    return 0


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    out = Path(args.out or cfg.output)
    records = run_sweep(cfg.capacities, cfg.mean_iats, cfg.seeds,
                        cfg.sweep_setup(parallel=args.parallel))
    rows = rows_from_records(records)
    try:
        emit_csv(rows, out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return 3
    report = format_summary(rows) + "\n\n" + format_gains(sweep_rows(rows)) + "\n"
    out.with_name(out.stem + "_summary.txt").write_text(report)
    if args.event_log:
        log_dir = Path(args.event_log)
        log_dir.mkdir(parents=True, exist_ok=True)
        for r in records:
            r.result.write_log(log_dir / f"c{r.capacity}_iat{r.mean_iat:g}_s{r.seed}_{r.strategy}.jsonl")
    print(report, end="")
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_serve(args, cfg: ExperimentConfig) -> int:
    import uvicorn

    from .service import QuoteService, create_app

    service = QuoteService(cfg.catalog, cfg.mix, args.capacity, cfg.pricing,
                           expiry=args.expiry)
    uvicorn.run(create_app(service), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON); defaults to the bundled setup")
    common.add_argument("--premium-slope", type=float, help="contention premium slope")
    common.add_argument("--slowdown", help="none | linear:SLOPE[:THRESHOLD]")
    common.add_argument("--seeds", type=int, help="number of seeds, counted up from the base seed")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qossim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", parents=[common], help="print the Bench rate")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("quote", parents=[common], help="print an optimized menu for one job type")
    p.add_argument("--job", default="IO")
    p.set_defaults(func=cmd_quote)

    p = sub.add_parser("sweep", parents=[common], help="run the capacity x IAT sweep")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--parallel", type=int, default=1, help="worker threads")
    p.add_argument("--event-log", help="directory for per-run JSONL event logs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", parents=[common], help="start the quote service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--capacity", type=int, default=50)
    p.add_argument("--expiry", type=float, default=60.0, help="quote lifetime in seconds")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
