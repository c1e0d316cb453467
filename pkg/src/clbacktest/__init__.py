"""Backtesting toolkit for concentrated-liquidity market making.

Closed-form position math for constant-product pools with range liquidity,
four provision strategies (hold, full-range, fixed range, resetting range),
an hourly fee-accrual backtest with non-compounding and compounding ledgers,
CSV ingestion, and parameter sweeps with ranked reports.
"""

from .clmath import (
    PairProfile,
    PriceRange,
    TokenAmounts,
    VirtualReserves,
    liquidity_from_equal_value,
    liquidity_one_sided,
    pair_for_class,
    position_value,
    real_reserves,
    symmetric_range,
    tick_index,
    tick_price,
    virtual_reserves,
)
from .dataio import (
    BarSeries,
    DailyReturnPoint,
    average_daily_return,
    clip_window,
    daily_fee_returns,
    load_bars,
    save_bars,
)
from .engine import (
    BacktestConfig,
    BacktestResult,
    HourlyBar,
    TrajectoryPoint,
    accrue_fees,
    replay_trajectory,
    run_backtest,
)
from .errors import DataError, UsageError
from .strategies import (
    LiquidityPosition,
    StrategyConfig,
    StrategyState,
    active_liquidity,
    fixed_config,
    initialize,
    mark_to_market,
    nolp_config,
    on_close,
    passive_config,
    reset_config,
    scale_liquidity,
)
from .sweep import (
    Baselines,
    GridSpec,
    SweepSummary,
    axis_from_span,
    build_grid,
    compute_baselines,
    rank_results,
    render_report,
    run_sweep,
    write_results_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig",
    "BacktestResult",
    "Baselines",
    "BarSeries",
    "DailyReturnPoint",
    "DataError",
    "GridSpec",
    "HourlyBar",
    "LiquidityPosition",
    "PairProfile",
    "PriceRange",
    "StrategyConfig",
    "StrategyState",
    "SweepSummary",
    "TokenAmounts",
    "TrajectoryPoint",
    "UsageError",
    "VirtualReserves",
    "accrue_fees",
    "active_liquidity",
    "average_daily_return",
    "axis_from_span",
    "build_grid",
    "clip_window",
    "compute_baselines",
    "daily_fee_returns",
    "fixed_config",
    "initialize",
    "liquidity_from_equal_value",
    "liquidity_one_sided",
    "load_bars",
    "mark_to_market",
    "nolp_config",
    "on_close",
    "pair_for_class",
    "passive_config",
    "position_value",
    "rank_results",
    "real_reserves",
    "render_report",
    "replay_trajectory",
    "reset_config",
    "run_backtest",
    "run_sweep",
    "save_bars",
    "scale_liquidity",
    "symmetric_range",
    "tick_index",
    "tick_price",
    "virtual_reserves",
    "write_results_csv",
]
