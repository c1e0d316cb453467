"""Hourly backtest engine with a non-compounding and a compounding ledger.

Per bar, in this order:

1. fee accrual against the state carried into the bar, priced at the bar's
   close: ``fee = volume * fee_rate * active_liquidity / pool_liquidity``;
2. mark-to-market of both ledgers at the close;
3. compounding: the compounding ledger's liquidity is scaled by
   ``(value + fee) / value``, folding the fee back into the deposit;
4. strategy reaction to the close (resets fire here).

The first bar only establishes the entry price and initial deposit; no fees
accrue on it. Three per-unit metrics summarize a run, each divided by the
initial budget: ``fees`` (sum of non-compounded fee income), ``value`` (final
mark-to-market of the non-compounding ledger, fee cash excluded), and
``total`` (final value of the compounding ledger including the last bar's
fee). "Final" means at the last bar's close, before any same-bar reset; that
matches the last trajectory row, and a reset conserves value anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DataError, UsageError
from .strategies import (
    StrategyConfig,
    StrategyState,
    active_liquidity,
    initialize,
    mark_to_market,
    on_close,
    scale_liquidity,
)


@dataclass(frozen=True)
class HourlyBar:
    """One hour of pool history: close price, traded volume, pool liquidity.

    ``volume`` and ``tvl`` are in quote-token units; ``pool_liquidity`` is the
    pool-wide liquidity in the same scale as position liquidity. ``tvl`` is
    optional and only needed for daily pool-level return estimates.
    """

    timestamp: int
    price: float
    volume: float
    pool_liquidity: float
    tvl: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.timestamp, int) or isinstance(self.timestamp, bool):
            raise DataError(f"timestamp must be an integer, got {self.timestamp!r}")
        if not math.isfinite(self.price) or self.price <= 0.0:
            raise DataError(f"price must be finite and > 0, got {self.price!r}")
        if not math.isfinite(self.volume) or self.volume < 0.0:
            raise DataError(f"volume must be finite and >= 0, got {self.volume!r}")
        if not math.isfinite(self.pool_liquidity) or self.pool_liquidity <= 0.0:
            raise DataError(
                f"pool_liquidity must be finite and > 0, got {self.pool_liquidity!r}"
            )
        if self.tvl is not None and (not math.isfinite(self.tvl) or self.tvl < 0.0):
            raise DataError(f"tvl must be finite and >= 0, got {self.tvl!r}")


@dataclass(frozen=True)
class BacktestConfig:
    """Strategy plus the run parameters shared by every bar."""

    strategy: StrategyConfig
    fee_rate: float
    initial_value: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.fee_rate) or not 0.0 <= self.fee_rate < 1.0:
            raise UsageError(f"fee_rate must lie in [0, 1), got {self.fee_rate!r}")
        if not math.isfinite(self.initial_value) or self.initial_value <= 0.0:
            raise UsageError(
                f"initial_value must be finite and > 0, got {self.initial_value!r}"
            )


class TrajectoryPoint(NamedTuple):
    """Per-bar outputs, each divided by the initial budget."""

    timestamp: int
    fee: float
    value: float
    total: float


@dataclass(frozen=True)
class BacktestResult:
    """Per-unit run metrics and, optionally, the full per-bar trajectory."""

    fees: float
    value: float
    total: float
    trajectory: tuple[TrajectoryPoint, ...] = ()


def accrue_fees(state: StrategyState, bar: HourlyBar, fee_rate: float) -> float:
    """Fee income of ``state`` over one bar.

    The position's share of the bar's fee pot is its active liquidity at the
    close divided by the pool's liquidity. The multiplication order is fixed;
    results are reproducible bit-for-bit.
    """
    liquidity = active_liquidity(state, bar.price)
    return bar.volume * fee_rate * liquidity / bar.pool_liquidity


def run_backtest(
    config: BacktestConfig,
    bars: Sequence[HourlyBar],
    keep_trajectory: bool = True,
) -> BacktestResult:
    """Run one strategy over a bar sequence and summarize it.

    Bars must be in strictly increasing timestamp order. The first bar fixes
    the entry price; fees start accruing on the second.
    """
    if not bars:
        raise UsageError("cannot backtest an empty bar sequence")
    _check_ordering(bars)

    budget = config.initial_value
    first = bars[0]
    state_plain = initialize(config.strategy, first.price, budget)
    state_comp = state_plain

    fee_sum = 0.0
    value_now = mark_to_market(state_plain, first.price)
    total_now = value_now
    trajectory: list[TrajectoryPoint] = []
    if keep_trajectory:
        trajectory.append(
            TrajectoryPoint(first.timestamp, 0.0, value_now / budget, total_now / budget)
        )

    for bar in bars[1:]:
        price = bar.price
        fee_plain = accrue_fees(state_plain, bar, config.fee_rate)
        fee_comp = accrue_fees(state_comp, bar, config.fee_rate)
        fee_sum += fee_plain

        value_now = mark_to_market(state_plain, price)
        value_comp = mark_to_market(state_comp, price)
        total_now = value_comp + fee_comp

        if fee_comp > 0.0 and value_comp > 0.0:
            state_comp = scale_liquidity(state_comp, (value_comp + fee_comp) / value_comp)

        state_plain = on_close(state_plain, price)
        state_comp = on_close(state_comp, price)

        if keep_trajectory:
            trajectory.append(
                TrajectoryPoint(
                    bar.timestamp,
                    fee_plain / budget,
                    value_now / budget,
                    total_now / budget,
                )
            )

    return BacktestResult(
        fees=fee_sum / budget,
        value=value_now / budget,
        total=total_now / budget,
        trajectory=tuple(trajectory),
    )


def replay_trajectory(result: BacktestResult) -> list[TrajectoryPoint]:
    """Per-bar rows of a stored result, oldest first."""
    if not result.trajectory:
        raise UsageError("result holds no trajectory (run with keep_trajectory=True)")
    return list(result.trajectory)


def _check_ordering(bars: Sequence[HourlyBar]) -> None:
    for i in range(1, len(bars)):
        if bars[i].timestamp <= bars[i - 1].timestamp:
            raise DataError(
                f"bar {i + 1}: timestamp {bars[i].timestamp} does not increase "
                f"over previous {bars[i - 1].timestamp}"
            )
