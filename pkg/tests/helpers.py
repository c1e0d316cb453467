"""Shared fixture builders for the test suite."""

from __future__ import annotations

import csv
import io
from typing import Sequence

from clbacktest import HourlyBar

CSV_HEADER = ("timestamp", "price", "volume", "pool_liquidity", "tvl")


def make_bars(
    prices: Sequence[float],
    volumes: Sequence[float] | None = None,
    liquidity: float | Sequence[float] = 10_000.0,
    tvls: Sequence[float | None] | None = None,
    start: int = 1_600_000_000,
    step: int = 3600,
) -> tuple[HourlyBar, ...]:
    count = len(prices)
    if volumes is None:
        volumes = [0.0] * count
    if tvls is None:
        tvls = [None] * count
    if isinstance(liquidity, (int, float)):
        liquidity = [float(liquidity)] * count
    return tuple(
        HourlyBar(
            timestamp=start + i * step,
            price=float(prices[i]),
            volume=float(volumes[i]),
            pool_liquidity=float(liquidity[i]),
            tvl=tvls[i],
        )
        for i in range(count)
    )


def csv_text(rows: Sequence[Sequence[object]], header: Sequence[str] = CSV_HEADER) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()
