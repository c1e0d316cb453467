"""Command line interface.

Exit codes: 0 success, 1 data error (unreadable or malformed input), 2 usage
error (bad flags or parameter values).
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import sys
from typing import Sequence

from .clmath import (
    PairProfile,
    TokenAmounts,
    liquidity_from_equal_value,
    pair_for_class,
    position_value,
    real_reserves,
    symmetric_range,
)
from .dataio import (
    BarSeries,
    average_daily_return,
    clip_window,
    daily_fee_returns,
    load_bars,
)
from .engine import BacktestConfig, run_backtest
from .errors import DataError, UsageError
from .strategies import (
    FIXED,
    NOLP,
    PASSIVE,
    RESET,
    StrategyConfig,
    initialize,
    mark_to_market,
    on_close,
)
from .sweep import (
    GridSpec,
    axis_from_span,
    build_grid,
    compute_baselines,
    rank_results,
    render_report,
    run_sweep,
    write_results_csv,
)

logger = logging.getLogger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clbacktest",
        description="Backtest concentrated-liquidity strategies on hourly AMM pool data.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    backtest = commands.add_parser(
        "backtest", help="run one strategy over a bar CSV and print its metrics"
    )
    _add_data_flags(backtest)
    _add_window_flags(backtest)
    backtest.add_argument(
        "--strategy",
        required=True,
        help="strategy spec: nolp | passive | fixed:a=0.10 | reset:a=0.10,r=0.05",
    )
    backtest.add_argument(
        "--snap-ticks",
        action="store_true",
        help="snap range bounds to the pair's tick spacing",
    )
    backtest.add_argument(
        "--trajectory", metavar="PATH", help="write per-bar rows to this CSV file"
    )
    backtest.set_defaults(handler=_cmd_backtest)

    sweep = commands.add_parser(
        "sweep", help="backtest a parameter grid and print a ranked report"
    )
    _add_data_flags(sweep)
    _add_window_flags(sweep)
    sweep.add_argument(
        "--kind", required=True, choices=(FIXED, RESET), help="strategy family to sweep"
    )
    sweep.add_argument(
        "--grid",
        metavar="MIN,MAX,STEP",
        help="override the parameter axis (applies to both axes of a reset grid)",
    )
    sweep.add_argument(
        "--snap-ticks",
        action="store_true",
        help="snap range bounds to the pair's tick spacing",
    )
    sweep.add_argument(
        "--dump", metavar="PATH", help="write per-configuration metrics to this CSV file"
    )
    sweep.add_argument(
        "--jobs",
        type=int,
        default=None,
        metavar="N",
        help="worker processes (default: all cores); results do not depend on it",
    )
    sweep.set_defaults(handler=_cmd_sweep)

    daily = commands.add_parser(
        "daily-returns", help="estimate pool-level daily LP fee returns from a bar CSV"
    )
    _add_data_flags(daily, pair_class=False)
    _add_window_flags(daily)
    daily.set_defaults(handler=_cmd_daily_returns)

    selfcheck = commands.add_parser(
        "selfcheck", help="recompute built-in reference scenarios and verify known values"
    )
    selfcheck.set_defaults(handler=_cmd_selfcheck)

    return parser


def parse_strategy_spec(text: str, snap_spacing: int | None = None) -> StrategyConfig:
    """Parse a strategy spec string such as ``fixed:a=0.10``."""
    kind, _, params_text = text.strip().partition(":")
    kind = kind.strip().lower()
    params: dict[str, float] = {}
    if params_text.strip():
        for part in params_text.split(","):
            key, eq, value = part.partition("=")
            key = key.strip()
            if not eq or not key:
                raise UsageError(f"malformed strategy parameter {part.strip()!r}, expected key=value")
            try:
                params[key] = float(value.strip())
            except ValueError:
                raise UsageError(f"strategy parameter {key!r} must be a number, got {value.strip()!r}") from None

    expected = {NOLP: (), PASSIVE: (), FIXED: ("a",), RESET: ("a", "r")}
    if kind not in expected:
        raise UsageError(
            f"unknown strategy {kind!r}; valid specs: nolp, passive, fixed:a=0.10, reset:a=0.10,r=0.05"
        )
    wanted = expected[kind]
    if set(params) != set(wanted):
        raise UsageError(
            f"strategy {kind!r} takes parameters {', '.join(wanted) or '(none)'}, got "
            f"{', '.join(sorted(params)) or '(none)'}"
        )
    return StrategyConfig(
        kind=kind,
        a=params.get("a"),
        r=params.get("r"),
        snap_spacing=snap_spacing,
    )


def _add_data_flags(sub: argparse.ArgumentParser, pair_class: bool = True) -> None:
    sub.add_argument("--data", required=True, metavar="PATH", help="hourly bar CSV")
    sub.add_argument(
        "--fee", required=True, type=float, metavar="RATE", help="pool fee rate, e.g. 0.003"
    )
    if pair_class:
        sub.add_argument(
            "--pair-class",
            choices=("volatile", "stable"),
            default="volatile",
            help="tick spacing and report rounding preset (default: volatile)",
        )


def _add_window_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--from",
        dest="start",
        type=dt.date.fromisoformat,
        default=None,
        metavar="DATE",
        help="first UTC date to include (YYYY-MM-DD)",
    )
    sub.add_argument(
        "--to",
        dest="end",
        type=dt.date.fromisoformat,
        default=None,
        metavar="DATE",
        help="last UTC date to include (YYYY-MM-DD)",
    )


def _load_series(args, pair: PairProfile) -> BarSeries:
    series = load_bars(args.data, pair, args.fee)
    series = clip_window(series, args.start, args.end)
    logger.debug("loaded %d bars from %s", len(series.bars), args.data)
    return series


def _cmd_backtest(args) -> int:
    pair = pair_for_class(args.pair_class)
    series = _load_series(args, pair)
    strategy = parse_strategy_spec(
        args.strategy, snap_spacing=pair.tick_spacing if args.snap_ticks else None
    )
    config = BacktestConfig(strategy=strategy, fee_rate=args.fee)
    result = run_backtest(config, series.bars)
    print(f"strategy  {strategy.label()}")
    print(f"bars      {len(series.bars)}")
    print(f"fees      {result.fees:.6f}")
    print(f"value     {result.value:.6f}")
    print(f"total     {result.total:.6f}")
    if args.trajectory:
        with open(args.trajectory, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(("timestamp", "fee", "value", "total"))
            for point in result.trajectory:
                writer.writerow(
                    (point.timestamp, repr(point.fee), repr(point.value), repr(point.total))
                )
        logger.debug("wrote %d trajectory rows to %s", len(result.trajectory), args.trajectory)
    return 0


def _cmd_sweep(args) -> int:
    pair = pair_for_class(args.pair_class)
    series = _load_series(args, pair)
    axis = None
    if args.grid:
        pieces = args.grid.split(",")
        if len(pieces) != 3:
            raise UsageError(f"--grid expects MIN,MAX,STEP, got {args.grid!r}")
        try:
            start, stop, step = (float(p) for p in pieces)
        except ValueError:
            raise UsageError(f"--grid values must be numbers, got {args.grid!r}") from None
        axis = axis_from_span(start, stop, step)
    spec = GridSpec(
        pair_class=args.pair_class,
        kind=args.kind,
        a_axis=axis,
        r_axis=axis if args.kind == RESET else None,
        snap_spacing=pair.tick_spacing if args.snap_ticks else None,
    )
    grid = build_grid(spec)
    logger.debug("sweeping %d configurations", len(grid))
    baselines = compute_baselines(series)
    results = run_sweep(grid, series, jobs=args.jobs)
    summary = rank_results(results, baselines, pair_class=args.pair_class)
    print(render_report(summary))
    if args.dump:
        write_results_csv(results, args.dump)
        logger.debug("dumped %d rows to %s", len(results), args.dump)
    return 0


def _cmd_daily_returns(args) -> int:
    series = load_bars(args.data, pair_for_class("volatile"), args.fee)
    points = daily_fee_returns(series)
    start, end = args.start, args.end
    shown = [
        p
        for p in points
        if (start is None or p.date >= start) and (end is None or p.date <= end)
    ]
    if not shown:
        raise UsageError(f"window {start}..{end} selects no daily returns")
    print("date,lp_return")
    for point in shown:
        print(f"{point.date.isoformat()},{point.lp_return!r}")
    if start is not None or end is not None:
        print(f"average,{average_daily_return(points, start, end)!r}")
    return 0


def _cmd_selfcheck(args) -> int:
    """Recompute reference scenarios for an ETH-USDC-like pool at 2000."""
    checks: list[tuple[str, float, float, float]] = []

    narrow = liquidity_from_equal_value(2000.0, 0.10, 1000.0)
    wide = liquidity_from_equal_value(2000.0, 0.20, 1000.0)
    checks.append(("deposit 1000 at 2000 into 10% range: liquidity", narrow, 240.3, 0.005))
    checks.append(("deposit 1000 at 2000 into 20% range: liquidity", wide, 128.3, 0.005))
    checks.append(("narrow-over-wide liquidity ratio", narrow / wide, 1.875, 0.005))

    narrow_range = symmetric_range(2000.0, 0.10)
    wide_range = symmetric_range(2000.0, 0.20)
    checks.append(
        ("10% position value after drop to 1900", position_value(narrow, narrow_range, 1900.0), 967.63, 0.005)
    )
    checks.append(
        ("20% position value after drop to 1900", position_value(wide, wide_range, 1900.0), 971.81, 0.005)
    )

    amounts = real_reserves(narrow, narrow_range, 2100.0)
    checks.append(("10% position at 2100: quote tokens", amounts.y, 765.06, 0.005))
    checks.append(("10% position at 2100: base token value", amounts.x * 2100.0, 252.87, 0.005))

    state = initialize(StrategyConfig(kind=RESET, a=0.10, r=0.05), 2000.0, 1000.0)
    before = mark_to_market(state, 2100.0)
    state = on_close(state, 2100.0)
    below, above = state.positions
    checks.append(("reset at 2100: liquidity below", below.liquidity, 359.0, 0.01))
    checks.append(("reset at 2100: liquidity above", above.liquidity, 119.0, 0.01))
    checks.append(("reset at 2100: new trigger lower bound", state.reset_range.lower, 2000.0, 1e-9))
    checks.append(("reset at 2100: new trigger upper bound", state.reset_range.upper, 2205.0, 1e-9))
    checks.append(("reset at 2100: value conserved", mark_to_market(state, 2100.0), before, 1e-9))

    failures = 0
    for name, got, want, tolerance in checks:
        ok = abs(got - want) <= tolerance * abs(want)
        failures += 0 if ok else 1
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}: got {got:.6f}, want {want:.6f} (tol {tolerance:g})")
    print(f"{len(checks) - failures}/{len(checks)} reference checks passed")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
