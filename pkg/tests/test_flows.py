"""Invariant SU(2)-structure evolution: integrator and preservation checks."""
from __future__ import annotations

import math
import time
from fractions import Fraction as F

import pytest

from g2calc.flows import (FlowStepError, constraint_residuals, dynamic_equations_check,
                          flow_csv, flow_invariants_symbolic, hypo_flow,
                          invariant_coefficients, se_exact, se_initial)
from g2calc.models import calibrate_mc, se_data
from g2calc.scalars import Ring
from g2calc.structures import SU2Structure


# -- symbolic oracles ----------------------------------------------------------

def test_coefficient_system_matches_coframe():
    dynamic_equations_check(Ring(3))


def test_preservation_identities_exact():
    checks = flow_invariants_symbolic(Ring(3))
    assert checks and all(checks.values())


# -- cone trajectory -----------------------------------------------------------

def test_cone_point_is_exact_solution_residuals():
    res = constraint_residuals(se_initial(1.0))
    assert max(res.values()) == 0.0


def test_se_flow_reaches_cone_scaling_at_t2():
    start = time.monotonic()
    traj = hypo_flow(se_initial(1.0), 1.0, 2.0, 1e-3, residual_limit=1e-8)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    assert len(traj) == 1001
    final = traj[-1]
    exact = se_exact(2.0)
    err = max(abs(u - v) for u, v in zip(final.coefficients(), exact))
    assert err <= 1e-8
    assert max(st.max_residual for st in traj) <= 1e-8


def test_halving_step_is_fourth_order():
    def terminal_error(step):
        traj = hypo_flow(se_initial(1.0), 1.0, 2.0, step)
        return max(abs(u - v) for u, v in zip(traj[-1].coefficients(), se_exact(2.0)))

    coarse = terminal_error(0.02)
    fine = terminal_error(0.01)
    assert coarse / fine >= 12.0


def test_flat_link_is_stationary():
    traj = hypo_flow(se_initial(1.0), 1.0, 2.0, 0.05, a=0.0, b=0.0)
    first = traj[0].coefficients()
    assert all(st.coefficients() == first for st in traj)


# -- constraint monitoring ------------------------------------------------------

def test_initial_violation_is_rejected():
    y = se_initial(1.0)
    y[6] = 1e-3  # y2_1 breaks d(om2 ^ eta) = 0
    with pytest.raises(FlowStepError):
        hypo_flow(y, 1.0, 2.0, 0.1)


def test_degenerate_pairing_raises():
    y = se_initial(1.0)
    y[5], y[6], y[7] = 1.0, 1.0, 0.0  # <om2, om2> = 0
    with pytest.raises(FlowStepError):
        hypo_flow(y, 1.0, 2.0, 0.1, residual_limit=1e9)


def test_residual_names():
    res = constraint_residuals(se_initial(2.0))
    assert set(res) == {"d_omega1", "d_omega2_eta", "d_omega3_eta", "wedge_pairings"}


# -- invariant-basis projection ---------------------------------------------------

def test_invariant_coefficients_roundtrip():
    frame, _ = calibrate_mc(Ring(3))
    se = se_data(frame)
    su2 = SU2Structure(frame, se.eta * 2, se.om1 * 4, se.om2 * 4, se.om3 * 4,
                       on=(2, 3, 4, 5, 6))
    coeffs = invariant_coefficients(su2)
    values = [frame.coerce(c) for c in (2, 0, 4, 0, 0, 0, 0, 4, 0, 0, 0, 0, 4)]
    assert [frame.coerce(c) for c in coeffs] == values


def test_invariant_coefficients_mixed_row():
    frame, _ = calibrate_mc(Ring(3))
    se = se_data(frame)
    om1 = se.om1 * 4 + se.om0 * F(1, 3)
    su2 = SU2Structure(frame, se.eta * 2, om1, se.om2 * 4, se.om3 * 4,
                       on=(2, 3, 4, 5, 6))
    coeffs = invariant_coefficients(su2)
    assert frame.coerce(coeffs[1]) == frame.coerce(F(1, 3))
    assert frame.coerce(coeffs[2]) == frame.coerce(4)


def test_non_invariant_input_rejected():
    frame, _ = calibrate_mc(Ring(3))
    se = se_data(frame)
    stray = frame.basis((3, 5))  # no e4^e6 partner: outside the invariant span
    with pytest.raises(ValueError):
        invariant_coefficients(
            SU2Structure(frame, se.eta, stray, se.om2, se.om3, on=(2, 3, 4, 5, 6)))
    with pytest.raises(ValueError):
        invariant_coefficients(
            SU2Structure(frame, se.eta + frame.one_form("v1"), se.om1, se.om2,
                         se.om3, on=(2, 3, 4, 5, 6)))


def test_structure_initial_matches_vector_initial():
    frame, _ = calibrate_mc(Ring(3))
    se = se_data(frame)
    su2 = SU2Structure(frame, se.eta, se.om1, se.om2, se.om3, on=(2, 3, 4, 5, 6))
    traj_a = hypo_flow(su2, 1.0, 1.5, 0.05)
    traj_b = hypo_flow(se_initial(1.0), 1.0, 1.5, 0.05)
    assert traj_a[-1].coefficients() == traj_b[-1].coefficients()


# -- serialization -----------------------------------------------------------------

def test_flow_csv_layout():
    traj = hypo_flow(se_initial(1.0), 1.0, 1.2, 0.05)
    text = flow_csv(traj)
    lines = text.strip().split("\n")
    assert len(lines) == len(traj) + 1
    header = lines[0].split(",")
    assert header[:3] == ["t", "step", "y0"]
    assert "res_d_omega1" in header and "res_wedge_pairings" in header
    assert len(lines[1].split(",")) == len(header)
    floats = [float(v) for v in lines[-1].split(",")]
    assert floats[0] == pytest.approx(1.2)
