"""Grid construction, batch execution, ranking, report rendering."""

import csv
import io

import pytest

from clbacktest import (
    BacktestConfig,
    Baselines,
    BarSeries,
    GridSpec,
    UsageError,
    axis_from_span,
    build_grid,
    compute_baselines,
    fixed_config,
    nolp_config,
    pair_for_class,
    rank_results,
    render_report,
    reset_config,
    run_backtest,
    run_sweep,
    write_results_csv,
)
from helpers import make_bars

VOLATILE = pair_for_class("volatile")


def _series(prices=None, volumes=None, fee_rate=0.003):
    if prices is None:
        prices = [2000.0, 2050.0, 1980.0, 2100.0, 2020.0]
    if volumes is None:
        volumes = [0.0] + [1e6] * (len(prices) - 1)
    return BarSeries(
        pair=VOLATILE, fee_rate=fee_rate, bars=make_bars(prices, volumes=volumes, liquidity=1e5)
    )


class TestBuildGrid:
    def test_volatile_fixed_cardinality(self):
        grid = build_grid(GridSpec(pair_class="volatile", kind="fixed"))
        assert len(grid) == 166
        assert grid[0].a == 0.006
        assert grid[-1].a == 0.996

    def test_stable_fixed_cardinality(self):
        grid = build_grid(GridSpec(pair_class="stable", kind="fixed"))
        assert len(grid) == 500
        assert grid[0].a == 0.001
        assert grid[-1].a == 0.5

    def test_stable_reset_cardinality(self):
        grid = build_grid(GridSpec(pair_class="stable", kind="reset"))
        assert len(grid) == 2500
        assert reset_config(0.002, 0.004) in grid

    def test_volatile_reset_cardinality(self):
        grid = build_grid(GridSpec(pair_class="volatile", kind="reset"))
        assert len(grid) == 166 * 166
        assert grid[0] == reset_config(0.006, 0.006)

    def test_grids_are_ascending(self):
        grid = build_grid(GridSpec(pair_class="stable", kind="fixed"))
        widths = [config.a for config in grid]
        assert widths == sorted(widths)

    def test_axis_override(self):
        spec = GridSpec(pair_class="volatile", kind="fixed", a_axis=(0.05, 0.10))
        assert [c.a for c in build_grid(spec)] == [0.05, 0.10]

    def test_spec_validation(self):
        with pytest.raises(UsageError):
            GridSpec(pair_class="exotic", kind="fixed")
        with pytest.raises(UsageError):
            GridSpec(pair_class="stable", kind="nolp")
        with pytest.raises(UsageError):
            GridSpec(pair_class="stable", kind="fixed", r_axis=(0.01,))


class TestAxisFromSpan:
    def test_simple_span(self):
        assert axis_from_span(0.05, 0.25, 0.05) == (
            0.05,
            0.05 + 0.05,
            0.05 + 2 * 0.05,
            0.05 + 3 * 0.05,
            0.05 + 4 * 0.05,
        )

    def test_endpoint_survives_float_noise(self):
        assert len(axis_from_span(0.1, 0.3, 0.1)) == 3
        assert len(axis_from_span(0.001, 0.05, 0.001)) == 50

    def test_invalid_spans(self):
        with pytest.raises(UsageError):
            axis_from_span(0.0, 0.1, 0.01)
        with pytest.raises(UsageError):
            axis_from_span(0.2, 0.1, 0.01)
        with pytest.raises(UsageError):
            axis_from_span(0.1, 0.2, -0.01)


class TestRunSweep:
    def test_results_follow_grid_order(self):
        series = _series()
        grid = [fixed_config(a) for a in (0.05, 0.10, 0.15)]
        results = run_sweep(grid, series)
        assert [config for config, _ in results] == grid

    def test_deterministic(self):
        series = _series()
        grid = build_grid(
            GridSpec(pair_class="volatile", kind="fixed", a_axis=(0.05, 0.10, 0.15))
        )
        assert run_sweep(grid, series) == run_sweep(grid, series)

    def test_parallel_matches_serial(self):
        series = _series()
        grid = [fixed_config(0.01 * k) for k in range(1, 8)]
        serial = run_sweep(grid, series, jobs=1)
        parallel = run_sweep(grid, series, jobs=3)
        assert parallel == serial

    def test_accepts_baseline_configs(self):
        series = _series()
        results = run_sweep([nolp_config()], series)
        assert results[0][1].fees == 0.0

    def test_rejects_empty_grid(self):
        with pytest.raises(UsageError):
            run_sweep([], _series())


class TestRankResults:
    def _results(self, totals, fees=None):
        series = _series()
        base = run_backtest(
            BacktestConfig(strategy=fixed_config(0.10), fee_rate=0.003), series.bars
        )
        out = []
        for i, total in enumerate(totals):
            config = fixed_config(0.01 * (i + 1))
            fee_value = fees[i] if fees else base.fees
            result = type(base)(fees=fee_value, value=base.value, total=total, trajectory=())
            out.append((config, result))
        return out

    def _baselines(self):
        return compute_baselines(_series())

    def test_argmax_total(self):
        results = self._results([0.9, 1.1, 1.0])
        summary = rank_results(results, self._baselines())
        assert summary.best_total == results[1]
        assert summary.worst_total == results[0]

    def test_tie_breaks_to_smaller_width(self):
        results = self._results([1.0, 1.0, 1.0])
        summary = rank_results(results, self._baselines())
        assert summary.best_total == results[0]
        assert summary.worst_total == results[0]

    def test_single_result_is_best_and_worst(self):
        results = self._results([1.05])
        summary = rank_results(results, self._baselines())
        assert summary.best_total == summary.worst_total == results[0]

    def test_best_fees_independent_of_total(self):
        results = self._results([1.0, 1.2, 1.1], fees=[0.5, 0.1, 0.2])
        summary = rank_results(results, self._baselines())
        assert summary.best_total == results[1]
        assert summary.best_fees == results[0]

    def test_permutation_invariance(self):
        results = self._results([0.9, 1.1, 1.0, 1.05])
        summary = rank_results(results, self._baselines())
        shuffled = [results[2], results[0], results[3], results[1]]
        again = rank_results(shuffled, self._baselines())
        assert again.best_total == summary.best_total
        assert again.worst_total == summary.worst_total
        assert again.best_fees == summary.best_fees

    def test_rejects_empty(self):
        with pytest.raises(UsageError):
            rank_results([], self._baselines())


class TestRenderReport:
    def _summary(self, kinds=("fixed", "reset"), pair_class="volatile"):
        series = _series()
        grid = []
        if "fixed" in kinds:
            grid += [fixed_config(a) for a in (0.05, 0.10)]
        if "reset" in kinds:
            grid += [reset_config(0.05, 0.05), reset_config(0.10, 0.05)]
        results = run_sweep(grid, series)
        return rank_results(results, compute_baselines(series), pair_class=pair_class)

    def test_mixed_families_make_eight_rows(self):
        text = render_report(self._summary())
        lines = text.splitlines()
        assert len(lines) == 2 + 8  # header + separator + data rows
        labels = [line.split("|")[1].strip() for line in lines[2:]]
        assert labels == [
            "No-LP",
            "Passive",
            "Best Fixed (total)",
            "Worst Fixed (total)",
            "Best Fixed (fees)",
            "Best Reset (total)",
            "Worst Reset (total)",
            "Best Reset (fees)",
        ]

    def test_single_family_makes_five_rows(self):
        text = render_report(self._summary(kinds=("fixed",)))
        assert len(text.splitlines()) == 2 + 5

    def test_baseline_parameters_are_dashes(self):
        lines = render_report(self._summary()).splitlines()
        nolp_cells = [cell.strip() for cell in lines[2].split("|")]
        assert nolp_cells[2] == "-"

    def test_volatile_rounds_to_three_decimals(self):
        lines = render_report(self._summary()).splitlines()
        fee_cell = lines[3].split("|")[3].strip()
        assert len(fee_cell.split(".")[1]) == 3

    def test_stable_rounds_to_four_decimals(self):
        lines = render_report(self._summary(pair_class="stable")).splitlines()
        fee_cell = lines[3].split("|")[3].strip()
        assert len(fee_cell.split(".")[1]) == 4

    def test_reset_parameters_show_both_widths(self):
        text = render_report(self._summary())
        assert "a=5.0%, r=5.0%" in text

    def test_csv_round_trip_preserves_rounded_values(self):
        summary = self._summary()
        table = render_report(summary)
        rows = list(csv.reader(io.StringIO(render_report(summary, format="csv"))))
        assert rows[0] == ["strategy", "parameters", "fees", "value", "total"]
        table_lines = table.splitlines()[2:]
        assert len(rows) == 1 + len(table_lines)
        for csv_row, line in zip(rows[1:], table_lines):
            cells = [cell.strip() for cell in line.split("|")[1:-1]]
            assert csv_row == cells

    def test_unknown_format(self):
        with pytest.raises(UsageError):
            render_report(self._summary(), format="yaml")


class TestWriteResultsCsv:
    def test_one_row_per_config_with_full_precision(self):
        series = _series()
        grid = [fixed_config(0.05), reset_config(0.05, 0.05)]
        results = run_sweep(grid, series)
        buffer = io.StringIO()
        write_results_csv(results, buffer)
        rows = list(csv.reader(io.StringIO(buffer.getvalue())))
        assert rows[0] == ["kind", "a", "r", "fees", "value", "total"]
        assert len(rows) == 3
        assert rows[1][0] == "fixed"
        assert rows[1][2] == ""  # fixed has no r
        assert float(rows[1][3]) == results[0][1].fees
        assert float(rows[2][5]) == results[1][1].total


def test_compute_baselines():
    series = _series()
    baselines = compute_baselines(series)
    assert isinstance(baselines, Baselines)
    assert baselines.nolp.fees == 0.0
    assert baselines.passive.fees > 0.0
