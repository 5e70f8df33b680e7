"""
Test suite for the design-space sweep and the takeaway checks
"""

import pytest
import sys
import os

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from config import load_defaults
from errors import ConfigurationError, CoverageError
from explorer import (PRESET_SIDES, SweepGrid, SweepRow, alternative_comparison, argmin_latency,
                      evaluate_point, full_grid, rows_from_frame, rows_to_frame, run_sweep,
                      takeaway_report, utilization_spread)

DEFAULTS = load_defaults(clock_hz=200e6, word_bytes=2, dram_bytes_per_cycle=512, alu_pj=1.0,
                         rf_accesses_per_mac=3, inter_pe_factor=1, rho_memory_scale=2.0,
                         plateau_tolerance=0.10, alpha_tolerance=0.02, sweep_workers=1)


def row(side, alpha, rho, G, latency, util=0.5, energy=1.0, status='ok'):
    return SweepRow(array_label=f"{side}x{side}", array_side=side, alpha=alpha, rho=rho, G=G,
                    status=status, avg_utilization=util, latency_ms=latency, energy_mj=energy)


def minima_rows(argmin_by_side, rho=1.0):
    """Two G values per array; the listed G is the faster one"""
    rows = []
    for side, best in argmin_by_side.items():
        for G in (1, 2):
            rows.append(row(side, 1.0, rho, G, 1.0 if G == best else 2.0))
    return rows


class TestSweepGrid:

    def test_empty_axis_rejected(self):
        with pytest.raises(ConfigurationError):
            SweepGrid(arrays=[16], g_values=[], alphas=[1.0], rhos=[1.0])

    def test_points_are_sorted_by_g(self):
        grid = SweepGrid(arrays=[16], g_values=[4, 1, 2, 1], alphas=[1.0], rhos=[1.0])
        assert grid.g_values == [1, 2, 4]
        assert [p[3] for p in grid.points()] == [1, 2, 4]

    def test_full_grid_caps(self):
        points = full_grid().points()
        assert len(points) == 4 * 3 * (5 + 6 + 7)
        assert max(G for _, alpha, _, G in points if alpha == 0.5) == 16
        assert max(G for _, alpha, _, G in points if alpha == 1.0) == 32
        assert max(G for _, alpha, _, G in points if alpha == 2.0) == 64

    def test_excluded_points(self):
        excluded = full_grid().excluded()
        assert len(excluded) == 4 * 3 * (2 + 1)
        point, reason = excluded[0]
        assert point[1] == 0.5 and point[3] == 32
        assert reason == 'G=32 exceeds max_g=16 for alpha=0.5'

    def test_unbounded_grid_excludes_nothing(self):
        grid = SweepGrid(arrays=[16], g_values=[1, 64], alphas=[0.5], rhos=[1.0])
        assert grid.excluded() == []


class TestArgminLatency:

    def test_tie_goes_to_smaller_g(self):
        rows = [row(16, 1.0, 1.0, 4, 5.0), row(16, 1.0, 1.0, 2, 5.0), row(16, 1.0, 1.0, 1, 6.0)]
        assert argmin_latency(rows, 16, 1.0, 1.0) == (2, 5.0)

    def test_skipped_rows_ignored(self):
        rows = [row(16, 1.0, 1.0, 1, 6.0), row(16, 1.0, 1.0, 7, 1.0, status='skipped')]
        assert argmin_latency(rows, 16, 1.0, 1.0) == (1, 6.0)

    def test_missing_coverage(self):
        with pytest.raises(CoverageError):
            argmin_latency([row(16, 1.0, 1.0, 1, 6.0)], 32, 1.0, 1.0)


class TestTakeaways:
    """Checks evaluated on hand-made sweep rows"""

    def test_minima_shift_passes(self):
        rows = minima_rows({16: 1, 32: 2, 64: 2, 128: 2})
        check = takeaway_report(rows, DEFAULTS).get('T1')
        assert check.passed
        assert check.evidence['rho=1'] == {'16x16': 1, '32x32': 2, '64x64': 2, '128x128': 2}

    def test_minima_shift_fails(self):
        rows = minima_rows({16: 2, 32: 2, 64: 1, 128: 1}, rho=2.0)
        check = takeaway_report(rows, DEFAULTS).get('T1')
        assert check.status == 'fail'
        assert 'rho=1' not in check.evidence

    def test_plateau(self):
        rows = [row(64, 0.5, 1.0, G, lat) for G, lat in [(1, 10.0), (2, 8.0), (4, 5.0), (8, 5.2)]]
        check = takeaway_report(rows, DEFAULTS).get('T2')
        assert check.passed
        assert check.evidence['g_values'] == [4, 8]
        assert check.evidence['spread'] == pytest.approx(0.04)

    def test_plateau_too_steep(self):
        rows = [row(64, 0.5, 1.0, G, lat) for G, lat in [(1, 10.0), (2, 8.0), (4, 5.0), (8, 7.0)]]
        assert takeaway_report(rows, DEFAULTS).get('T2').status == 'fail'

    def test_utilization_up_latency_up(self):
        rows = [row(64, 1.0, 2.0, 4, 10.0, util=0.4), row(64, 1.0, 2.0, 16, 12.0, util=0.5)]
        assert takeaway_report(rows, DEFAULTS).get('T3').passed

    def test_small_array_gain(self):
        rows = [
            row(16, 1.0, 2.0, 1, 10.0), row(16, 0.5, 2.0, 1, 5.0),
            row(128, 1.0, 2.0, 1, 4.0), row(128, 0.5, 2.0, 1, 4.0),
        ]
        check = takeaway_report(rows, DEFAULTS).get('T4')
        assert check.passed
        assert check.evidence['latency_ratio'] == {'16x16': 2.0, '128x128': 1.0}

    def test_not_evaluable_on_partial_coverage(self):
        report = takeaway_report([row(16, 1.0, 1.0, 1, 1.0)], DEFAULTS)
        assert [c.status for c in report.checks] == ['not_evaluable'] * 4
        assert not report.all_passed
        assert all('reason' in c['evidence'] for c in report.to_dict())


class TestAlternativeComparison:

    def test_identical_variants(self):
        rows = []
        for side in PRESET_SIDES:
            for alpha in (1.0, 0.5):
                rows.append(row(side, alpha, 2.0, 1, 3.0, util=0.6, energy=2.0))
        table = alternative_comparison(rows, defaults=DEFAULTS)
        assert len(table) == 4
        assert (table['util_delta'] == 0).all()
        assert (table['latency_delta_ms'] == 0).all()
        assert table['util_within_tolerance'].all()
        assert not table['alt_faster'].any()

    def test_cheaper_alternative(self):
        rows = [row(16, 1.0, 2.0, 2, 10.0, util=0.60, energy=4.0),
                row(16, 0.5, 2.0, 2, 4.0, util=0.61, energy=1.0)]
        record = alternative_comparison(rows, defaults=DEFAULTS).iloc[0]
        assert record['array'] == '16x16'
        assert record['latency_delta_ms'] == pytest.approx(-6.0)
        assert record['util_within_tolerance']
        assert record['alt_faster'] and record['alt_lower_energy']

    def test_no_overlap(self):
        with pytest.raises(CoverageError):
            alternative_comparison([row(16, 1.0, 2.0, 1, 1.0)], defaults=DEFAULTS)

    def test_utilization_spread(self):
        rows = [row(16, 1.0, 1.0, 1, 1.0, util=0.60), row(16, 0.5, 1.0, 1, 1.0, util=0.55),
                row(32, 1.0, 1.0, 1, 1.0, util=0.50)]
        assert utilization_spread(rows) == pytest.approx(0.05)
        assert utilization_spread([]) == 0.0

    def test_utilization_spread_by_rho(self):
        rows = [row(16, 1.0, 1.0, 1, 1.0, util=0.60), row(16, 0.5, 1.0, 1, 1.0, util=0.59),
                row(16, 1.0, 2.0, 1, 1.0, util=0.70), row(16, 0.5, 2.0, 1, 1.0, util=0.60)]
        assert utilization_spread(rows, rhos=[1.0]) == pytest.approx(0.01)
        assert utilization_spread(rows, rhos=[2.0]) == pytest.approx(0.10)
        assert utilization_spread(rows, rhos=[0.5]) == 0.0


class TestEvaluatePoint:
    """Real model runs on small grids"""

    def test_baseline_point(self):
        result = evaluate_point(16, 1.0, 1.0, 1, DEFAULTS)
        assert result.ok
        assert result.macs == 568_740_352
        assert result.params == 4_209_088
        assert result.avg_utilization == pytest.approx(0.5942798132, abs=1e-9)
        assert result.util_3x3 == pytest.approx(3.7734375 / 13)
        assert result.util_1x1 >= 0.875
        assert set(result.energy_breakdown) == {'alu', 'dram', 'gbuf', 'array', 'rf'}
        assert result.energy_mj == pytest.approx(sum(result.energy_breakdown.values()))

    def test_non_dividing_group_skipped(self):
        result = evaluate_point(16, 1.0, 1.0, 7, DEFAULTS)
        assert result.status == 'skipped'
        assert 'does not divide' in result.notice
        assert result.error['error'] == 'DivisibilityError'
        assert result.latency_ms is None

    def test_single_point_sweep(self):
        grid = SweepGrid(arrays=[32], g_values=[2], alphas=[1.0], rhos=[1.0])
        rows = run_sweep(grid, DEFAULTS)
        assert len(rows) == 1
        assert rows[0].G == 2

    def test_minimum_at_g1_on_small_array(self):
        grid = SweepGrid(arrays=[16], g_values=[1, 2, 4, 8, 16], alphas=[1.0], rhos=[2.0])
        rows = run_sweep(grid, DEFAULTS)
        assert argmin_latency(rows, 16, 1.0, 2.0)[0] == 1

    def test_skips_reported_in_order(self):
        grid = SweepGrid(arrays=[16], g_values=[7, 1], alphas=[1.0], rhos=[1.0])
        rows = run_sweep(grid, DEFAULTS)
        assert [(r.G, r.status) for r in rows] == [(1, 'ok'), (7, 'skipped')]

    def test_capped_points_reported_as_skipped(self):
        grid = SweepGrid(arrays=[16], g_values=[32, 1], alphas=[0.5], rhos=[1.0], max_g={0.5: 16})
        rows = run_sweep(grid, DEFAULTS)
        assert [(r.G, r.status) for r in rows] == [(1, 'ok'), (32, 'skipped')]
        assert rows[1].notice == 'G=32 exceeds max_g=16 for alpha=0.5'
        assert rows[1].latency_ms is None

    def test_threaded_sweep_matches_serial(self):
        grid = SweepGrid(arrays=[32, 16], g_values=[1, 4], alphas=[1.0], rhos=[1.0])
        serial = run_sweep(grid, DEFAULTS, workers=1)
        threaded = run_sweep(grid, DEFAULTS, workers=3)
        assert rows_to_frame(serial).equals(rows_to_frame(threaded))
        assert [r.array_side for r in serial] == [16, 16, 32, 32]

    def test_frame_round_trip(self):
        grid = SweepGrid(arrays=[16], g_values=[1, 2], alphas=[1.0], rhos=[1.0])
        rows = run_sweep(grid, DEFAULTS)
        frame = rows_to_frame(rows)
        assert 'error' not in frame.columns
        assert 'energy_dram_mj' in frame.columns
        assert rows_from_frame(frame) == rows


# (array side, G) -> (avg utilization %, latency ms, energy mJ) at rho=2
REFERENCE_CELLS = {
    1.0: {
        16: [(68, 66.5, 59.7), (77, 67.7, 60.1), (79, 72.1, 61.0), (79, 81.1, 63.7), (80, 99.2, 69.3)],
        32: [(56, 18.8, 37.2), (65, 17.8, 37.6), (77, 18.2, 38.4), (82, 20.1, 41.1), (83, 24.4, 46.6)],
        64: [(50, 6.9, 30.6), (55, 5.5, 31.1), (66, 4.9, 31.9), (74, 5.2, 34.3), (83, 6.0, 39.3)],
        128: [(46, 4.0, 27.2), (48, 2.5, 27.6), (54, 1.7, 28.5), (64, 1.5, 30.2), (77, 1.6, 33.9)],
    },
    0.5: {
        16: [(68, 17.8, 17.5), (76, 18.3, 17.7), (79, 20.5, 18.2), (79, 25.1, 19.5), (80, 34.1, 21.6)],
        32: [(55, 5.5, 11.9), (65, 5.0, 12.1), (77, 5.2, 12.5), (82, 6.2, 13.9), (83, 8.3, 15.9)],
        64: [(49, 2.5, 10.3), (54, 1.8, 10.5), (66, 1.5, 10.9), (73, 1.7, 12.1), (81, 2.1, 14.1)],
        128: [(45, 1.8, 9.2), (47, 1.0, 9.4), (52, 0.6, 9.8), (63, 0.5, 10.7), (76, 0.5, 12.4)],
    },
}
GROUP_SIZES = [1, 2, 4, 8, 16]


class TestHighResolutionGrid:
    """Full rho=2 grid for alpha 1 and 0.5 on every preset array"""

    @classmethod
    def setup_class(cls):
        grid = SweepGrid(arrays=list(PRESET_SIDES), g_values=GROUP_SIZES, alphas=[0.5, 1.0],
                         rhos=[2.0])
        plateau = SweepGrid(arrays=[64], g_values=GROUP_SIZES, alphas=[0.5], rhos=[1.0])
        cls.rows = run_sweep(grid, DEFAULTS) + run_sweep(plateau, DEFAULTS)

    def cell(self, side, alpha, G):
        return next(r for r in self.rows
                    if (r.array_side, r.alpha, r.rho, r.G) == (side, alpha, 2.0, G))

    def test_every_point_evaluated(self):
        assert len(self.rows) == 4 * 2 * 5 + 5
        assert all(r.ok for r in self.rows)

    def test_latency_minimum_moves_to_larger_groups(self):
        for alpha in (0.5, 1.0):
            argmins = {side: argmin_latency(self.rows, side, alpha, 2.0)[0] for side in PRESET_SIDES}
            assert argmins == {16: 1, 32: 2, 64: 4, 128: 8}, alpha

    def test_utilization_near_reference(self):
        for alpha, by_side in REFERENCE_CELLS.items():
            for side, cells in by_side.items():
                for G, (util, _, _) in zip(GROUP_SIZES, cells):
                    got = self.cell(side, alpha, G).avg_utilization * 100
                    assert got == pytest.approx(util, abs=8), f"{side} alpha={alpha} G={G}"

    def test_latency_near_reference(self):
        for alpha, by_side in REFERENCE_CELLS.items():
            for side, cells in by_side.items():
                for G, (_, latency, _) in zip(GROUP_SIZES, cells):
                    got = self.cell(side, alpha, G).latency_ms
                    assert got == pytest.approx(latency, rel=0.30), f"{side} alpha={alpha} G={G}"

    def test_energy_near_reference(self):
        for alpha, by_side in REFERENCE_CELLS.items():
            for side, cells in by_side.items():
                for G, (_, _, energy) in zip(GROUP_SIZES, cells):
                    got = self.cell(side, alpha, G).energy_mj
                    assert got == pytest.approx(energy, rel=0.40), f"{side} alpha={alpha} G={G}"

    def test_energy_monotone_in_group_size(self):
        for alpha in (0.5, 1.0):
            for side in PRESET_SIDES:
                energies = [self.cell(side, alpha, G).energy_mj for G in GROUP_SIZES]
                assert energies == sorted(energies), f"{side} alpha={alpha}"

    def test_takeaways(self):
        report = takeaway_report(self.rows, DEFAULTS)
        assert report.get('T1').passed
        assert report.get('T3').passed
        assert report.get('T4').passed
        ratios = report.get('T4').evidence['latency_ratio']
        assert ratios['16x16'] == pytest.approx(3.73, abs=0.05)
        assert ratios['128x128'] == pytest.approx(2.20, abs=0.05)

    def test_plateau_evidence(self):
        check = takeaway_report(self.rows, DEFAULTS).get('T2')
        assert check.evidence['g_values'] == [4, 8, 16]
        latencies = check.evidence['latency_ms']
        assert latencies[1] < latencies[0]
        assert latencies[2] > latencies[1]


class TestUnitResolutionSweep:

    def test_utilization_rises_with_group_size(self):
        grid = SweepGrid(arrays=list(PRESET_SIDES), g_values=[1, 2, 4, 8, 16, 32], alphas=[1.0],
                         rhos=[1.0])
        rows = run_sweep(grid, DEFAULTS)
        for side in PRESET_SIDES:
            utils = [r.avg_utilization for r in rows if r.array_side == side]
            assert utils == sorted(utils), f"{side}x{side}"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
