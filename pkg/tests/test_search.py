"""Tests for the scan, bisection, and gap-window drivers."""

import math

import numpy as np
import pytest

from lindblad_bounds.errors import BracketFailure, PrecisionWarning
from lindblad_bounds.search import (critical_coupling_lower_bound, gap_window,
                                    navigator, qcp_family, ratio_onset,
                                    scan_omega)
from lindblad_bounds.builders import z1_observable


class TestFamily:
    def test_decoupled_point_has_no_hamiltonian(self):
        model = qcp_family(0.0)
        assert model.ham_template == ()
        assert model.gamma == 1.0

    def test_negative_coupling_rejected(self):
        with pytest.raises(Exception):
            qcp_family(-1.0)


class TestScan:
    def test_empty_grid_rejected(self, settings):
        with pytest.raises(ValueError):
            scan_omega(qcp_family, [], 3, z1_observable(), "max", settings)

    def test_non_ascending_grid_rejected(self, settings):
        with pytest.raises(ValueError):
            scan_omega(qcp_family, [1.0, 1.0], 3, z1_observable(), "max",
                       settings)
        with pytest.raises(ValueError):
            scan_omega(qcp_family, [2.0, 1.0], 3, z1_observable(), "max",
                       settings)

    def test_per_point_errors_do_not_abort(self, settings):
        records = scan_omega(qcp_family, [-1.0, 0.5], 3, z1_observable(),
                             "max", settings)
        assert len(records) == 2
        assert records[0].status == "error"
        assert records[0].bound is None
        assert records[0].message  # carries the exception text
        assert records[1].status == "optimal"

    def test_decoupled_point_pins_both_directions(self, settings):
        for direction in ("max", "min"):
            (rec,) = scan_omega(qcp_family, [0.0], 3, z1_observable(),
                                direction, settings)
            assert rec.status == "optimal"
            assert abs(rec.bound + 1.0) < 1e-6

    def test_determinism(self, settings):
        grid = [0.5, 1.0, 2.0]
        a = scan_omega(qcp_family, grid, 3, z1_observable(), "max", settings)
        b = scan_omega(qcp_family, grid, 3, z1_observable(), "max", settings)
        for ra, rb in zip(a, b):
            assert ra.bound == rb.bound
            assert ra.status == rb.status
            assert ra.iterations == rb.iterations


class TestCriticalCoupling:
    def test_level3_regression(self, settings):
        value = critical_coupling_lower_bound(qcp_family, 3, tol=5e-3,
                                              settings=settings)
        assert abs(value - 0.92969) < 5e-3

    def test_matches_ratio_onset(self, settings):
        tol = 5e-3
        critical = critical_coupling_lower_bound(qcp_family, 3, tol=tol,
                                                 settings=settings)
        onset = ratio_onset(qcp_family, 3, tol=tol, settings=settings)
        assert abs(critical - onset) < 2 * tol

    def test_bracket_failures(self, settings):
        with pytest.raises(BracketFailure):
            critical_coupling_lower_bound(qcp_family, 3, tol=5e-3,
                                          bracket=(4.0, 16.0),
                                          settings=settings)
        with pytest.raises(BracketFailure):
            critical_coupling_lower_bound(qcp_family, 3, tol=5e-3,
                                          bracket=(0.0, 0.5),
                                          settings=settings)

    def test_parameter_validation(self, settings):
        with pytest.raises(ValueError):
            critical_coupling_lower_bound(qcp_family, 3, tol=0.0,
                                          settings=settings)
        with pytest.raises(ValueError):
            critical_coupling_lower_bound(qcp_family, 3, eps=0.0,
                                          settings=settings)


class TestNavigator:
    def test_huge_rate_infeasible(self, settings):
        assert navigator(qcp_family(1.0), 4, 1e3, settings) == math.inf

    def test_negative_inside_window(self, settings):
        # omega = 2, level 4: the allowed window contains small rates
        assert navigator(qcp_family(2.0), 4, 0.0625, settings) < 0


class TestGapWindow:
    def test_bracket_validation(self, settings):
        with pytest.raises(ValueError):
            gap_window(qcp_family(1.0), 3, bracket=(-0.1, 1.0),
                       settings=settings)
        with pytest.raises(ValueError):
            gap_window(qcp_family(1.0), 3, bracket=(1.0, 1.0),
                       settings=settings)
        with pytest.raises(ValueError):
            gap_window(qcp_family(1.0), 3, grid_points=2, settings=settings)

    def test_level4_regression(self, settings):
        rec = gap_window(qcp_family(2.0), 4, settings=settings)
        assert rec.status == "ok"
        assert rec.omega == 2.0
        assert rec.delta_lb == 0.0
        assert abs(rec.delta_ub - 1.42214799) < 1e-4
        assert rec.navigator_min < 0

    def test_decoupled_point_excludes_everything_but_warns(self, settings):
        # the single-site model has an exact zero navigator at the true
        # decay rate, so the sign is below solver resolution there
        with pytest.warns(PrecisionWarning):
            rec = gap_window(qcp_family(0.0), 4, settings=settings)
        assert rec.status == "no_allowed_region"
        assert math.isnan(rec.delta_lb) and math.isnan(rec.delta_ub)
        assert abs(rec.argmin - 1.0) < 5e-2
        assert abs(rec.navigator_min) < 1e-6

    def test_grid_recorded(self, settings):
        rec = gap_window(qcp_family(2.0), 3, settings=settings)
        assert len(rec.phase1_grid) == 33
        assert rec.phase1_grid[0] == 0.0 and rec.phase1_grid[-1] == 2.0
        assert np.all(np.diff(rec.phase1_grid) > 0)
