"""Closed-form position math for concentrated liquidity on constant-product pools.

Prices are quoted as token Y per token X (for an ETH-USDC pool: USDC per ETH).
A position is described by a price range [lower, upper] and a liquidity scale
L. While the pool price p is inside the range, the virtual reserves (x', y')
of the position satisfy

    x' * y' = L**2      and      y' / x' = p,

so x' = L / sqrt(p) and y' = L * sqrt(p). The real reserves are the virtual
reserves minus the amounts the position would hold at the range bounds, which
gives the piecewise formulas in :func:`real_reserves`.

All arithmetic is plain float64. Formula shapes are deliberately fixed (for
example ``value = y + x * p``) so that results are reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TICK_BASE = 1.0001
# Largest |i| for which TICK_BASE**i stays comfortably inside float range;
# same bound as the common on-chain implementations.
MAX_TICK = 887272

_LOG_TICK_BASE = math.log(TICK_BASE)


def _require_finite_positive(value: float, name: str) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class PriceRange:
    """A price interval [lower, upper] with 0 < lower < upper, both finite."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        _require_finite_positive(self.lower, "lower")
        if not math.isfinite(self.upper):
            raise ValueError(f"upper must be finite, got {self.upper!r}")
        if self.upper <= self.lower:
            raise ValueError(
                f"upper must exceed lower, got [{self.lower!r}, {self.upper!r}]"
            )

    def contains(self, price: float) -> bool:
        return self.lower <= price <= self.upper


@dataclass(frozen=True)
class TokenAmounts:
    """Non-negative real token amounts: x is the base token, y the quote."""

    x: float = 0.0
    y: float = 0.0

    def __post_init__(self) -> None:
        for name, amount in (("x", self.x), ("y", self.y)):
            if not math.isfinite(amount) or amount < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {amount!r}")

    def value_at(self, price: float) -> float:
        """Quote-token value of the pair of amounts at the given price."""
        return self.x * price + self.y


@dataclass(frozen=True)
class VirtualReserves:
    """Virtual reserve pair backing liquidity L at a price inside the range."""

    x_virtual: float
    y_virtual: float


@dataclass(frozen=True)
class PairProfile:
    """Static facts about a trading pair that the engine needs.

    tick_spacing restricts valid tick indices to multiples of itself when
    snapping is enabled; 60 is typical for volatile pairs, 10 for stable ones.
    """

    name: str
    tick_spacing: int
    quote_is_stable: bool = True

    def __post_init__(self) -> None:
        if self.tick_spacing < 1:
            raise ValueError(f"tick_spacing must be >= 1, got {self.tick_spacing}")


VOLATILE_PAIR = PairProfile(name="volatile", tick_spacing=60)
STABLE_PAIR = PairProfile(name="stable", tick_spacing=10)


def pair_for_class(pair_class: str) -> PairProfile:
    """Map a pair class name ('volatile' or 'stable') to its profile."""
    if pair_class == "volatile":
        return VOLATILE_PAIR
    if pair_class == "stable":
        return STABLE_PAIR
    raise ValueError(f"unknown pair class {pair_class!r}")


def tick_price(index: int) -> float:
    """Price of tick ``index``, i.e. TICK_BASE**index."""
    if abs(index) > MAX_TICK:
        raise ValueError(f"tick index {index} outside [-{MAX_TICK}, {MAX_TICK}]")
    return TICK_BASE**index


def tick_index(price: float) -> int:
    """Largest tick index whose price does not exceed ``price``.

    The log-based estimate can land one tick off near boundaries, so the
    result is nudged until tick_price(i) <= price < tick_price(i + 1).
    """
    _require_finite_positive(price, "price")
    i = math.floor(math.log(price) / _LOG_TICK_BASE)
    i = max(-MAX_TICK, min(MAX_TICK, i))
    while i < MAX_TICK and tick_price(i + 1) <= price:
        i += 1
    while i > -MAX_TICK and tick_price(i) > price:
        i -= 1
    return i


def nearest_spaced_tick(price: float, spacing: int) -> int:
    """Tick index closest to ``price`` in log space among multiples of spacing."""
    if spacing < 1:
        raise ValueError(f"spacing must be >= 1, got {spacing}")
    _require_finite_positive(price, "price")
    exact = math.log(price) / _LOG_TICK_BASE
    step = round(exact / spacing)
    bound = MAX_TICK // spacing
    return max(-bound, min(bound, step)) * spacing


def snap_price(price: float, spacing: int) -> float:
    """Snap a price to the nearest tick whose index is a multiple of spacing."""
    return tick_price(nearest_spaced_tick(price, spacing))


def symmetric_range(price: float, a: float) -> PriceRange:
    """Range [price / (1 + a), price * (1 + a)] around ``price``.

    The bounds are symmetric multiplicatively: their geometric midpoint is
    ``price`` itself. ``a`` is the half-width factor and must be positive.
    """
    _require_finite_positive(price, "price")
    if not math.isfinite(a) or a <= 0.0:
        raise ValueError(f"a must be a finite positive number, got {a!r}")
    return PriceRange(price / (1.0 + a), price * (1.0 + a))


def real_reserves(liquidity: float, price_range: PriceRange, price: float) -> TokenAmounts:
    """Real token amounts held by a position at the given pool price.

    Inside the range both tokens are held; below the range the position is
    entirely base token, above it entirely quote token. The boundary points
    use the in-range branch; both branches agree there.
    """
    _validate_liquidity(liquidity)
    _require_finite_positive(price, "price")
    sqrt_lower = math.sqrt(price_range.lower)
    sqrt_upper = math.sqrt(price_range.upper)
    if price < price_range.lower:
        x = liquidity * (1.0 / sqrt_lower - 1.0 / sqrt_upper)
        return TokenAmounts(x=x, y=0.0)
    if price > price_range.upper:
        y = liquidity * (sqrt_upper - sqrt_lower)
        return TokenAmounts(x=0.0, y=y)
    sqrt_price = math.sqrt(price)
    x = liquidity * (1.0 / sqrt_price - 1.0 / sqrt_upper)
    y = liquidity * (sqrt_price - sqrt_lower)
    return TokenAmounts(x=x, y=y)


def position_value(liquidity: float, price_range: PriceRange, price: float) -> float:
    """Mark-to-market value of a position in quote-token units: y + x * p."""
    amounts = real_reserves(liquidity, price_range, price)
    return amounts.y + amounts.x * price


def virtual_reserves(liquidity: float, price: float) -> VirtualReserves:
    """Virtual reserves implied by liquidity at an in-range price."""
    _validate_liquidity(liquidity)
    _require_finite_positive(price, "price")
    sqrt_price = math.sqrt(price)
    return VirtualReserves(x_virtual=liquidity / sqrt_price, y_virtual=liquidity * sqrt_price)


def liquidity_from_equal_value(price: float, a: float, total_value: float) -> float:
    """Liquidity that deposits ``total_value`` 50/50 into symmetric_range(price, a).

    For the symmetric range the in-range reserves at its own midprice satisfy
    x * p = y, and the closed form below follows from setting y = total/2:

        L = (total / 2) / (sqrt(p) * (1 - 1 / sqrt(1 + a)))
    """
    _require_finite_positive(price, "price")
    if not math.isfinite(a) or a <= 0.0:
        raise ValueError(f"a must be a finite positive number, got {a!r}")
    if not math.isfinite(total_value) or total_value < 0.0:
        raise ValueError(f"total_value must be finite and >= 0, got {total_value!r}")
    return (total_value / 2.0) / (math.sqrt(price) * (1.0 - 1.0 / math.sqrt(1.0 + a)))


def liquidity_for_value(price_range: PriceRange, price: float, total_value: float) -> float:
    """Liquidity such that the position is worth ``total_value`` at ``price``.

    Generic inverse of :func:`position_value`; used when the range is not
    centered on the deposit price (tick-snapped ranges).
    """
    if not math.isfinite(total_value) or total_value < 0.0:
        raise ValueError(f"total_value must be finite and >= 0, got {total_value!r}")
    unit = position_value(1.0, price_range, price)
    if unit <= 0.0:
        raise ValueError(
            f"range [{price_range.lower!r}, {price_range.upper!r}] holds no value at {price!r}"
        )
    return total_value / unit


def liquidity_one_sided(price_range: PriceRange, deposit: TokenAmounts, price: float) -> float:
    """Liquidity minted by depositing a single token into a one-sided range.

    A quote-only deposit requires a range at or below ``price`` (the position
    would hold only Y there); a base-only deposit requires a range at or above
    it. A zero deposit mints zero liquidity. Depositing both tokens at once is
    not a one-sided operation and is rejected.
    """
    _require_finite_positive(price, "price")
    if deposit.x > 0.0 and deposit.y > 0.0:
        raise ValueError("one-sided deposit cannot contain both tokens")
    if deposit.x == 0.0 and deposit.y == 0.0:
        return 0.0
    sqrt_lower = math.sqrt(price_range.lower)
    sqrt_upper = math.sqrt(price_range.upper)
    if deposit.y > 0.0:
        if price < price_range.upper:
            raise ValueError(
                "quote-token deposit needs a range at or below the current price"
            )
        return deposit.y / (sqrt_upper - sqrt_lower)
    if price > price_range.lower:
        raise ValueError(
            "base-token deposit needs a range at or above the current price"
        )
    return deposit.x / (1.0 / sqrt_lower - 1.0 / sqrt_upper)


def _validate_liquidity(liquidity: float) -> None:
    if not math.isfinite(liquidity) or liquidity < 0.0:
        raise ValueError(f"liquidity must be finite and >= 0, got {liquidity!r}")
