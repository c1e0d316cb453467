"""Liquidity-provision strategies as immutable state machines.

Four strategies share one lifecycle: :func:`initialize` turns a budget into a
state at the entry price, :func:`on_close` reacts to an hourly closing price,
and :func:`active_liquidity` / :func:`mark_to_market` answer the two questions
the backtest engine asks every bar.

* ``nolp``     - hold the initial 50/50 token split, never deposit.
* ``passive``  - deposit everything into a full-range position.
* ``fixed``    - deposit 50/50 into the symmetric range of half-width ``a``
                 around the entry price and never touch it again.
* ``reset``    - like ``fixed``, but when the close leaves the trigger
                 interval of half-width ``r`` the position is liquidated at
                 the close and redeposited one-sided around it.

States are frozen dataclasses; every transition returns a new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .clmath import (
    PriceRange,
    TokenAmounts,
    liquidity_for_value,
    liquidity_from_equal_value,
    liquidity_one_sided,
    nearest_spaced_tick,
    position_value,
    real_reserves,
    symmetric_range,
    tick_price,
)
from .errors import UsageError

NOLP = "nolp"
PASSIVE = "passive"
FIXED = "fixed"
RESET = "reset"

KINDS = (NOLP, PASSIVE, FIXED, RESET)


@dataclass(frozen=True)
class StrategyConfig:
    """Identity and parameters of one strategy instance.

    ``a`` is the half-width factor of the liquidity range (bounds at
    p/(1+a) and p*(1+a)); ``r`` is the same-shaped factor for the reset
    trigger interval. ``snap_spacing``, when set, snaps range bounds to tick
    indices that are multiples of it.
    """

    kind: str
    a: float | None = None
    r: float | None = None
    snap_spacing: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise UsageError(f"unknown strategy kind {self.kind!r}")
        needs_a = self.kind in (FIXED, RESET)
        if needs_a:
            if self.a is None or not math.isfinite(self.a) or self.a <= 0.0:
                raise UsageError(f"strategy {self.kind!r} needs a > 0, got {self.a!r}")
        elif self.a is not None:
            raise UsageError(f"strategy {self.kind!r} takes no range width a")
        if self.kind == RESET:
            if self.r is None or not math.isfinite(self.r) or self.r <= 0.0:
                raise UsageError(f"strategy {self.kind!r} needs r > 0, got {self.r!r}")
        elif self.r is not None:
            raise UsageError(f"strategy {self.kind!r} takes no reset width r")
        if self.snap_spacing is not None and self.snap_spacing < 1:
            raise UsageError(f"snap_spacing must be >= 1, got {self.snap_spacing!r}")

    def label(self) -> str:
        """Human-readable name, e.g. ``fixed(a=6.0%)``."""
        if self.kind == FIXED:
            return f"fixed(a={_pct(self.a)})"
        if self.kind == RESET:
            return f"reset(a={_pct(self.a)}, r={_pct(self.r)})"
        return self.kind


def nolp_config() -> StrategyConfig:
    return StrategyConfig(kind=NOLP)


def passive_config() -> StrategyConfig:
    return StrategyConfig(kind=PASSIVE)


def fixed_config(a: float, snap_spacing: int | None = None) -> StrategyConfig:
    return StrategyConfig(kind=FIXED, a=a, snap_spacing=snap_spacing)


def reset_config(a: float, r: float, snap_spacing: int | None = None) -> StrategyConfig:
    return StrategyConfig(kind=RESET, a=a, r=r, snap_spacing=snap_spacing)


@dataclass(frozen=True)
class LiquidityPosition:
    """One range position: where the liquidity sits and how much of it."""

    price_range: PriceRange
    liquidity: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.liquidity) or self.liquidity < 0.0:
            raise ValueError(f"liquidity must be finite and >= 0, got {self.liquidity!r}")


@dataclass(frozen=True)
class StrategyState:
    """Everything a strategy owns between bars.

    ``positions`` holds range positions (fixed/reset), ``full_range_liquidity``
    the passive deposit, and ``holdings`` loose tokens (nolp). ``reset_range``
    is the trigger interval of a reset strategy, None for everything else.
    """

    config: StrategyConfig
    entry_price: float
    positions: tuple[LiquidityPosition, ...] = ()
    holdings: TokenAmounts = TokenAmounts()
    full_range_liquidity: float = 0.0
    reset_range: PriceRange | None = None


def initialize(config: StrategyConfig, price: float, budget: float) -> StrategyState:
    """Deploy ``budget`` (in quote-token units) at the entry price."""
    if not math.isfinite(price) or price <= 0.0:
        raise ValueError(f"price must be a finite positive number, got {price!r}")
    if not math.isfinite(budget) or budget < 0.0:
        raise ValueError(f"budget must be finite and >= 0, got {budget!r}")

    if config.kind == NOLP:
        holdings = TokenAmounts(x=budget / (2.0 * price), y=budget / 2.0)
        return StrategyState(config=config, entry_price=price, holdings=holdings)

    if config.kind == PASSIVE:
        liquidity = budget / (2.0 * math.sqrt(price))
        return StrategyState(config=config, entry_price=price, full_range_liquidity=liquidity)

    price_range = symmetric_range(price, config.a)
    if config.snap_spacing is not None:
        price_range = _snap_symmetric(price_range, price, config.snap_spacing)
        liquidity = liquidity_for_value(price_range, price, budget)
    else:
        liquidity = liquidity_from_equal_value(price, config.a, budget)
    position = LiquidityPosition(price_range=price_range, liquidity=liquidity)

    reset_range = None
    if config.kind == RESET:
        reset_range = symmetric_range(price, config.r)
    return StrategyState(
        config=config,
        entry_price=price,
        positions=(position,),
        reset_range=reset_range,
    )


def on_close(state: StrategyState, price: float) -> StrategyState:
    """React to an hourly closing price.

    Only reset strategies ever change state: when the close sits outside the
    open trigger interval (touching a bound counts as outside), all positions
    are liquidated at the close and redeposited one-sided around it, and a new
    trigger interval is centered on the close.
    """
    if state.config.kind != RESET or state.reset_range is None:
        return state
    if state.reset_range.lower < price < state.reset_range.upper:
        return state

    withdrawn_x = 0.0
    withdrawn_y = 0.0
    for position in state.positions:
        amounts = real_reserves(position.liquidity, position.price_range, price)
        withdrawn_x += amounts.x
        withdrawn_y += amounts.y

    a = state.config.a
    below_lower = price / (1.0 + a)
    above_upper = price * (1.0 + a)
    if state.config.snap_spacing is not None:
        spacing = state.config.snap_spacing
        below_lower = _snap_outer(below_lower, spacing, must_stay_below=price)
        above_upper = _snap_outer(above_upper, spacing, must_stay_above=price)
    below = PriceRange(below_lower, price)
    above = PriceRange(price, above_upper)

    liquidity_below = liquidity_one_sided(below, TokenAmounts(x=0.0, y=withdrawn_y), price)
    liquidity_above = liquidity_one_sided(above, TokenAmounts(x=withdrawn_x, y=0.0), price)
    positions = (
        LiquidityPosition(price_range=below, liquidity=liquidity_below),
        LiquidityPosition(price_range=above, liquidity=liquidity_above),
    )
    return replace(
        state,
        positions=positions,
        reset_range=symmetric_range(price, state.config.r),
    )


def active_liquidity(state: StrategyState, price: float) -> float:
    """Liquidity of the state that earns fees at the given price.

    A position is active when the price is inside its closed range. When two
    positions share a bound at the price (the situation right after a reset),
    the shared point is attributed to the lower position only, so the total
    is never double-counted.
    """
    total = state.full_range_liquidity
    for index, position in enumerate(state.positions):
        price_range = position.price_range
        if not price_range.contains(price):
            continue
        if price == price_range.lower and _another_ends_here(state.positions, index, price):
            continue
        total += position.liquidity
    return total


def mark_to_market(state: StrategyState, price: float) -> float:
    """Total state value in quote-token units at the given price."""
    total = 0.0
    for position in state.positions:
        total += position_value(position.liquidity, position.price_range, price)
    if state.full_range_liquidity > 0.0:
        total += 2.0 * state.full_range_liquidity * math.sqrt(price)
    if state.holdings.x > 0.0 or state.holdings.y > 0.0:
        total += state.holdings.x * price + state.holdings.y
    return total


def scale_liquidity(state: StrategyState, factor: float) -> StrategyState:
    """Scale every liquidity amount and holding by ``factor`` (compounding)."""
    if not math.isfinite(factor) or factor < 0.0:
        raise ValueError(f"factor must be finite and >= 0, got {factor!r}")
    positions = tuple(
        LiquidityPosition(price_range=p.price_range, liquidity=p.liquidity * factor)
        for p in state.positions
    )
    holdings = TokenAmounts(x=state.holdings.x * factor, y=state.holdings.y * factor)
    return replace(
        state,
        positions=positions,
        holdings=holdings,
        full_range_liquidity=state.full_range_liquidity * factor,
    )


def _another_ends_here(
    positions: tuple[LiquidityPosition, ...], index: int, price: float
) -> bool:
    return any(
        other.price_range.upper == price
        for i, other in enumerate(positions)
        if i != index
    )


def _snap_symmetric(price_range: PriceRange, price: float, spacing: int) -> PriceRange:
    """Snap both bounds to spaced ticks, keeping the deposit price inside."""
    lower_tick = nearest_spaced_tick(price_range.lower, spacing)
    upper_tick = nearest_spaced_tick(price_range.upper, spacing)
    while tick_price(lower_tick) >= price:
        lower_tick -= spacing
    while tick_price(upper_tick) <= price:
        upper_tick += spacing
    return PriceRange(tick_price(lower_tick), tick_price(upper_tick))


def _snap_outer(
    bound: float,
    spacing: int,
    must_stay_below: float | None = None,
    must_stay_above: float | None = None,
) -> float:
    """Snap an outer reset bound without crossing the trigger price."""
    tick = nearest_spaced_tick(bound, spacing)
    if must_stay_below is not None:
        while tick_price(tick) >= must_stay_below:
            tick -= spacing
    if must_stay_above is not None:
        while tick_price(tick) <= must_stay_above:
            tick += spacing
    return tick_price(tick)


def _pct(value: float | None) -> str:
    text = f"{100.0 * value:.4f}".rstrip("0")
    if text.endswith("."):
        text += "0"
    return f"{text}%"
