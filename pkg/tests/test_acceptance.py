"""Acceptance gate: end-to-end checks of the reference desk-scale results.

Each test is one acceptance criterion and prints one pass/fail line
under ``pytest -v``.  Tests marked ``extended`` need hours of compute
and are excluded from the default run (``-m 'not extended'`` is implied
by deselecting them explicitly: run ``pytest -m extended`` to include
them).
"""

import functools

import numpy as np
import pytest

from lindblad_bounds.backend import (SolverSettings, cross_check,
                                     export_sdpa)
from lindblad_bounds.builders import build_steady_state_sdp, z1_observable
from lindblad_bounds.dense_oracle import (dense_adjoint_lindbladian,
                                          symbolic_superoperator)
from lindblad_bounds.errors import PrecisionWarning
from lindblad_bounds.search import (critical_coupling_lower_bound, gap_window,
                                    navigator, qcp_family, ratio_onset,
                                    steady_state_bound)

SETTINGS = SolverSettings()
BISECT_TOL = 5e-3


@functools.lru_cache(maxsize=None)
def critical(n: int) -> float:
    return critical_coupling_lower_bound(qcp_family, n, tol=BISECT_TOL,
                                         settings=SETTINGS)


@functools.lru_cache(maxsize=None)
def onset(n: int) -> float:
    return ratio_onset(qcp_family, n, tol=BISECT_TOL, settings=SETTINGS)


@functools.lru_cache(maxsize=None)
def max_z1_bound(omega: float, n: int) -> float:
    report = steady_state_bound(qcp_family(omega), n, z1_observable(), "max",
                                SETTINGS)
    assert report.status == "optimal", (omega, n, report.status)
    return report.dual_objective


def test_reference_gap_window_omega2_level6():
    rec = gap_window(qcp_family(2.0), 6, settings=SETTINGS)
    assert rec.status == "ok"
    assert abs(rec.delta_lb - 0.032336) < 5e-3
    assert abs(rec.delta_ub - 1.000000) < 5e-3


@pytest.mark.extended
def test_reference_gap_window_omega2_level7():
    rec = gap_window(qcp_family(2.0), 7, settings=SETTINGS)
    assert rec.status == "ok"
    assert abs(rec.delta_lb - 0.127059) < 5e-3
    assert abs(rec.delta_ub - 0.791741) < 5e-3


@pytest.mark.extended
def test_reference_gap_window_omega2_level8():
    rec = gap_window(qcp_family(2.0), 8, settings=SETTINGS)
    assert rec.status == "ok"
    assert abs(rec.delta_lb - 0.186932) < 5e-3
    assert abs(rec.delta_ub - 0.629361) < 5e-3


def test_critical_coupling_monotone_and_level6_regression():
    values = [critical(n) for n in (3, 4, 5, 6)]
    for lower, higher in zip(values, values[1:]):
        assert higher >= lower - BISECT_TOL
    # frozen desk-scale regression value at the largest default level
    assert abs(values[-1] - 2.101562) < 5e-3


@pytest.mark.extended
def test_critical_coupling_level8():
    assert abs(critical(8) - 2.850755) < 5e-3


def test_absorbing_state_anchors():
    for n in (3, 4, 5):
        for omega in (0.0, 1.0, 2.0, 4.0, 8.0):
            report = steady_state_bound(qcp_family(omega), n, z1_observable(),
                                        "min", SETTINGS)
            # the pinned optimum is a degenerate boundary point; at the
            # largest level the interior-point iteration can stop at
            # numerical precision instead of declared optimality, with
            # the value still resolved to the required accuracy
            assert report.status in ("optimal", "numerical_limit"), \
                (omega, n, report.status)
            assert abs(report.dual_objective + 1.0) < 1e-6, (omega, n)
        assert abs(max_z1_bound(0.0, n) + 1.0) < 1e-6, n


def test_method_agreement_ratio_onset_vs_bisection():
    for n in (4, 5):
        assert abs(onset(n) - critical(n)) < 2 * BISECT_TOL, n


def test_oracle_equivalence_four_site_chain():
    for omega in (0.0, 1.0, 2.5):
        model = qcp_family(omega)
        dense = dense_adjoint_lindbladian(model, 4, "periodic").matrix
        symbolic = symbolic_superoperator(model, 4, "periodic")
        assert np.max(np.abs(dense - symbolic)) < 1e-12, omega
        ident = np.eye(16, dtype=complex).reshape(-1)
        assert np.max(np.abs(dense @ ident)) < 1e-12, omega


def test_monotone_tightening_with_level():
    bounds = [max_z1_bound(4.0, n) for n in (3, 4, 5)]
    for coarse, fine in zip(bounds, bounds[1:]):
        assert fine <= coarse + 1e-6


def test_gap_sanity_decoupled_point():
    # the decoupled model relaxes at exactly Delta = 1 (dense mode
    # oracle): the navigator vanishes there to solver resolution, while
    # Delta = 0.5 is excluded by a macroscopic margin
    assert abs(navigator(qcp_family(0.0), 4, 1.0, SETTINGS)) < 1e-8
    assert navigator(qcp_family(0.0), 4, 0.5, SETTINGS) > 1e-3
    with pytest.warns(PrecisionWarning):
        rec = gap_window(qcp_family(0.0), 4, settings=SETTINGS)
    assert abs(rec.argmin - 1.0) < 5e-2


def test_gap_precision_warning_at_loose_tolerance():
    # deliberately loosened tolerance near the decoupled point: the
    # navigator minimum falls inside the solver noise band and the
    # search must flag that the classification is unresolved
    loose = SolverSettings(tol=1e-6, fallback=False)
    with pytest.warns(PrecisionWarning):
        gap_window(qcp_family(0.1), 6, bracket=(0.8, 1.2), settings=loose,
                   grid_points=9)


def test_cross_solver_sdpa_export(tmp_path):
    prob = build_steady_state_sdp(qcp_family(2.0), 4, z1_observable(), "max")
    internal, reference = cross_check(prob, tmp_path / "steady.dat-s",
                                      SETTINGS)
    assert abs(internal - reference) < 1e-6
    p1, p2 = tmp_path / "a.dat-s", tmp_path / "b.dat-s"
    export_sdpa(prob, p1)
    export_sdpa(prob, p2)
    assert p1.read_bytes() == p2.read_bytes()
