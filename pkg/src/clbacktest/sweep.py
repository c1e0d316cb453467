"""Parameter sweeps over strategy grids, ranking, and report rendering."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .dataio import BarSeries
from .engine import BacktestConfig, BacktestResult, run_backtest
from .errors import UsageError
from .strategies import (
    FIXED,
    RESET,
    StrategyConfig,
    fixed_config,
    nolp_config,
    passive_config,
    reset_config,
)

PAIR_CLASSES = ("volatile", "stable")

# Default parameter axes per pair class: volatile pairs use a 0.6% step up to
# 99.6% (166 values), stable pairs a 0.1% step up to 50% (500 values) for the
# range width and up to 5% (50 values per axis) for reset grids. Values are
# built as integer-numerator divisions so the endpoints are exact floats.
_VOLATILE_AXIS = tuple((6 * k) / 1000 for k in range(1, 167))
_STABLE_FIXED_AXIS = tuple(k / 1000 for k in range(1, 501))
_STABLE_RESET_AXIS = tuple(k / 1000 for k in range(1, 51))

ResultPair = tuple[StrategyConfig, BacktestResult]


@dataclass(frozen=True)
class GridSpec:
    """A strategy family plus the parameter axes to sweep.

    Axes left as None fall back to the pair class defaults above. ``a_axis``
    holds range half-widths, ``r_axis`` reset trigger half-widths (reset
    grids are the full cross product).
    """

    pair_class: str
    kind: str
    a_axis: tuple[float, ...] | None = None
    r_axis: tuple[float, ...] | None = None
    snap_spacing: int | None = None

    def __post_init__(self) -> None:
        if self.pair_class not in PAIR_CLASSES:
            raise UsageError(f"pair_class must be one of {PAIR_CLASSES}, got {self.pair_class!r}")
        if self.kind not in (FIXED, RESET):
            raise UsageError(f"only fixed and reset strategies sweep, got {self.kind!r}")
        if self.kind == FIXED and self.r_axis is not None:
            raise UsageError("fixed grids take no r axis")


@dataclass(frozen=True)
class Baselines:
    """Reference runs the ranked strategies are compared against."""

    nolp: BacktestResult
    passive: BacktestResult


@dataclass(frozen=True)
class SweepSummary:
    """Ranked sweep outcome: extremal configurations plus the full grid."""

    best_total: ResultPair
    worst_total: ResultPair
    best_fees: ResultPair
    baselines: Baselines
    all_results: tuple[ResultPair, ...]
    pair_class: str


def axis_from_span(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic axis start, start+step, ... up to stop."""
    for name, value in (("start", start), ("stop", stop), ("step", step)):
        if not math.isfinite(value) or value <= 0.0:
            raise UsageError(f"axis {name} must be finite and > 0, got {value!r}")
    if stop < start:
        raise UsageError(f"axis stop {stop!r} is below start {start!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def default_axis(pair_class: str, kind: str) -> tuple[float, ...]:
    """Default parameter axis for a pair class and strategy family."""
    if pair_class == "volatile":
        return _VOLATILE_AXIS
    return _STABLE_FIXED_AXIS if kind == FIXED else _STABLE_RESET_AXIS


def build_grid(spec: GridSpec) -> list[StrategyConfig]:
    """Expand a GridSpec into concrete strategy configurations."""
    a_axis = spec.a_axis if spec.a_axis is not None else default_axis(spec.pair_class, spec.kind)
    if not a_axis:
        raise UsageError("a axis is empty")
    if spec.kind == FIXED:
        return [fixed_config(a, snap_spacing=spec.snap_spacing) for a in a_axis]
    r_axis = spec.r_axis if spec.r_axis is not None else default_axis(spec.pair_class, spec.kind)
    if not r_axis:
        raise UsageError("r axis is empty")
    return [
        reset_config(a, r, snap_spacing=spec.snap_spacing)
        for a in a_axis
        for r in r_axis
    ]


def run_sweep(
    grid: Sequence[StrategyConfig],
    series: BarSeries,
    jobs: int | None = 1,
    initial_value: float = 1.0,
) -> list[ResultPair]:
    """Backtest every configuration in the grid over the series.

    Results come back in grid order and are identical whatever ``jobs`` is;
    trajectories are dropped to keep memory flat across large grids.
    """
    configs = list(grid)
    if not configs:
        raise UsageError("cannot sweep an empty grid")
    if jobs is None:
        jobs = os.cpu_count() or 1
    workers = max(1, min(jobs, len(configs)))
    if workers == 1:
        results = _run_chunk((configs, series.bars, series.fee_rate, initial_value))
        return list(zip(configs, results))

    chunks = [configs[i::workers] for i in range(workers)]
    payloads = [(chunk, series.bars, series.fee_rate, initial_value) for chunk in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk_results = list(pool.map(_run_chunk, payloads))
    # Stitch the strided chunks back into grid order.
    results: list[BacktestResult | None] = [None] * len(configs)
    for offset, chunk_result in enumerate(chunk_results):
        for j, result in enumerate(chunk_result):
            results[offset + j * workers] = result
    return list(zip(configs, results))


def compute_baselines(series: BarSeries, initial_value: float = 1.0) -> Baselines:
    """Run the no-deposit and full-range reference strategies."""
    nolp = run_backtest(
        BacktestConfig(strategy=nolp_config(), fee_rate=series.fee_rate, initial_value=initial_value),
        series.bars,
        keep_trajectory=False,
    )
    passive = run_backtest(
        BacktestConfig(strategy=passive_config(), fee_rate=series.fee_rate, initial_value=initial_value),
        series.bars,
        keep_trajectory=False,
    )
    return Baselines(nolp=nolp, passive=passive)


def rank_results(
    results: Sequence[ResultPair],
    baselines: Baselines,
    pair_class: str = "volatile",
) -> SweepSummary:
    """Pick the extremal configurations; ties go to the smaller parameters."""
    if not results:
        raise UsageError("cannot rank an empty result list")
    if pair_class not in PAIR_CLASSES:
        raise UsageError(f"pair_class must be one of {PAIR_CLASSES}, got {pair_class!r}")
    return SweepSummary(
        best_total=_extremal(results, "total", best=True),
        worst_total=_extremal(results, "total", best=False),
        best_fees=_extremal(results, "fees", best=True),
        baselines=baselines,
        all_results=tuple(results),
        pair_class=pair_class,
    )


def render_report(summary: SweepSummary, format: str = "markdown-table") -> str:
    """Render the ranked summary as a table.

    Baseline rows come first, then Best/Worst (total) and Best (fees) rows
    for each strategy family present in the results. Metrics display with 3
    decimals for volatile runs and 4 for stable ones.
    """
    decimals = 3 if summary.pair_class == "volatile" else 4
    rows: list[tuple[str, str, BacktestResult]] = [
        ("No-LP", "-", summary.baselines.nolp),
        ("Passive", "-", summary.baselines.passive),
    ]
    for kind, label in ((FIXED, "Fixed"), (RESET, "Reset")):
        family = [item for item in summary.all_results if item[0].kind == kind]
        if not family:
            continue
        for row_name, item in (
            (f"Best {label} (total)", _extremal(family, "total", best=True)),
            (f"Worst {label} (total)", _extremal(family, "total", best=False)),
            (f"Best {label} (fees)", _extremal(family, "fees", best=True)),
        ):
            rows.append((row_name, _param_text(item[0]), item[1]))

    header = ("strategy", "parameters", "fees", "value", "total")
    if format == "markdown-table":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        for name, params, result in rows:
            cells = (
                name,
                params,
                f"{result.fees:.{decimals}f}",
                f"{result.value:.{decimals}f}",
                f"{result.total:.{decimals}f}",
            )
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines)
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for name, params, result in rows:
            writer.writerow(
                [
                    name,
                    params,
                    f"{result.fees:.{decimals}f}",
                    f"{result.value:.{decimals}f}",
                    f"{result.total:.{decimals}f}",
                ]
            )
        return buffer.getvalue()
    raise UsageError(f"unknown report format {format!r}")


def write_results_csv(results: Sequence[ResultPair], dest) -> None:
    """Dump per-configuration metrics at full precision for machine use."""

    def _write(handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("kind", "a", "r", "fees", "value", "total"))
        for config, result in results:
            writer.writerow(
                (
                    config.kind,
                    "" if config.a is None else repr(config.a),
                    "" if config.r is None else repr(config.r),
                    repr(result.fees),
                    repr(result.value),
                    repr(result.total),
                )
            )

    if hasattr(dest, "write"):
        _write(dest)
        return
    with open(os.fspath(dest), "w", newline="", encoding="utf-8") as handle:
        _write(handle)


def _run_chunk(payload) -> list[BacktestResult]:
    configs, bars, fee_rate, initial_value = payload
    out = []
    for config in configs:
        run_config = BacktestConfig(
            strategy=config, fee_rate=fee_rate, initial_value=initial_value
        )
        out.append(run_backtest(run_config, bars, keep_trajectory=False))
    return out


def _extremal(results: Sequence[ResultPair], metric: str, best: bool) -> ResultPair:
    sign = -1.0 if best else 1.0
    return min(
        results,
        key=lambda item: (sign * getattr(item[1], metric), _param_key(item[0])),
    )


def _param_key(config: StrategyConfig) -> tuple[float, float]:
    return (
        config.a if config.a is not None else math.inf,
        config.r if config.r is not None else math.inf,
    )


def _param_text(config: StrategyConfig) -> str:
    def pct(value: float) -> str:
        text = f"{100.0 * value:.4f}".rstrip("0")
        if text.endswith("."):
            text += "0"
        return f"{text}%"

    if config.kind == RESET:
        return f"a={pct(config.a)}, r={pct(config.r)}"
    return f"a={pct(config.a)}"
