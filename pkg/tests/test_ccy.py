"""Fibre-scaled contact model: torsion formulas and collapse rates."""
from __future__ import annotations

import math
from fractions import Fraction as F

import pytest

from g2calc.ccy import (ccy_frame, ccy_structure, ccy_torsion,
                        conformal_futility, no_go_check, norm_closed_forms,
                        torsion_closed_forms, volume_scaling)
from g2calc.scalars import Ring
from g2calc.structures import g2_torsion


@pytest.fixture(scope="module")
def ring():
    return Ring(3)


# -- frame and assembly ------------------------------------------------------

def test_frame_contact_relation(ring):
    frame, su3 = ccy_frame(ring)
    theta = frame.one_form("th")
    assert theta.d() == su3.omega
    assert su3.omega.d().is_zero
    assert su3.re_u.d().is_zero
    assert su3.im_u.d().is_zero
    su3.validate()


def test_structure_metric_and_dual(ring):
    data = ccy_structure(ring.t(2))
    pos = {leg: p for p, leg in enumerate(data.g2.on)}
    i_th = data.frame.index_of("th")
    theta_entry = data.g2.metric.mat[pos[i_th]][pos[i_th]]
    assert theta_entry == ring.t(4)
    data.g2.verify_metric_compatibility()
    psi_formula = (data.su3.omega.wedge(data.su3.omega) * F(1, 2)
                   - (data.theta * data.h).wedge(data.su3.im_u))
    assert data.g2.psi == psi_formula


def test_differentials_of_phi_psi(ring):
    data = ccy_structure(ring.t(3))
    dh = data.frame.one_form("e1") * data.h.deriv()
    om = data.su3.omega
    assert data.g2.phi.d() == dh.wedge(data.theta).wedge(om) + om.wedge(om) * data.h
    assert data.g2.psi.d() == -dh.wedge(data.theta).wedge(data.su3.im_u)


def test_constant_h_is_coclosed(ring):
    c = ring.parameter("c", invertible=True)
    data = ccy_structure(c)
    assert data.g2.psi.d().is_zero
    assert not data.g2.phi.d().is_zero
    report = ccy_torsion(data)
    assert report.is_coclosed()
    assert report.norms["tau27_norm_sq"] == c * c * F(48, 7)
    assert report.norms["tau1_sq"] == c * c * F(36, 49)


def test_positivity_validation(ring):
    with pytest.raises(ValueError):
        ccy_structure(ring.const(0))
    with pytest.raises(ValueError):
        ccy_structure(-ring.t(2))
    b = ring.parameter("b")  # not invertible: sign unknown
    with pytest.raises(ValueError):
        ccy_structure(b * ring.t(1))


def test_non_monomial_h_rejected_by_exact_hodge(ring):
    with pytest.raises(ValueError):
        ccy_structure(ring.const(1) + ring.t(2))


# -- two-path torsion agreement ----------------------------------------------

def _h_cases(ring):
    c = ring.parameter("c", invertible=True)
    return [c, ring.t(1), ring.t(2), ring.t(3), c * ring.t(2)]


def test_two_path_torsion_agreement(ring):
    for h in _h_cases(ring):
        data = ccy_structure(h)
        report = ccy_torsion(data)  # raises on any formula/extraction mismatch
        frozen = torsion_closed_forms(data)
        direct = g2_torsion(data.g2)
        for name in ("tau1", "tau7", "tau14", "tau27"):
            assert direct.parts()[name] == frozen.parts()[name]
        assert report.norms == {**report.norms, **norm_closed_forms(data)}


def test_norm_values_for_quadratic_monomial(ring):
    data = ccy_structure(ring.t(2))
    norms = ccy_torsion(data).norms
    assert norms["tau1_sq"] == ring.t(4) * F(36, 49)
    assert norms["tau7_norm_sq"] == ring.t(-2) * F(1, 9)
    assert norms["tau14_norm_sq"] == ring.t(-2) * F(8, 3)
    assert norms["tau27_norm_sq"] == ring.t(-2) * 4 + ring.t(4) * F(48, 7)
    assert norms["d_psi_norm_sq"] == ring.t(-2) * 8
    assert norms["d_phi_norm_sq"] == ring.t(-2) * 8 + ring.t(4) * 12


def test_linear_h_gradient_norms(ring):
    data = ccy_structure(ring.t(1))
    norms = ccy_torsion(data).norms
    assert norms["tau7_norm_sq"] == ring.t(-2) * F(1, 36)
    assert norms["tau14_norm_sq"] == ring.t(-2) * F(2, 3)
    assert norms["tau27_norm_sq"] == ring.t(-2) + ring.t(2) * F(48, 7)


def test_norm_pythagoras_consistency(ring):
    """|d phi|^2 = 7 tau1^2 + 36 |tau7|^2 + |tau27|^2 and the dual identity."""
    for h in (ring.t(1), ring.t(3)):
        data = ccy_structure(h)
        n = ccy_torsion(data).norms
        assert n["d_phi_norm_sq"] == (n["tau1_sq"] * 7 + n["tau7_norm_sq"] * 36
                                      + n["tau27_norm_sq"])
        assert n["d_psi_norm_sq"] == n["tau7_norm_sq"] * 48 + n["tau14_norm_sq"]


def test_scalar_torsion_component(ring):
    data = ccy_structure(ring.t(2) * 5)
    tors = ccy_torsion(data).torsion
    assert tors.tau1 == ring.t(2) * F(30, 7)


# -- collapse-rate reports ----------------------------------------------------

def test_no_go_exact_quadratic(ring):
    report = no_go_check(ring.t(2))
    assert report.verdict == "unbounded"
    assert report.exact_norm == "8*t^-2"
    want = 2.0 * math.sqrt(2.0)
    for row in report.grid:
        assert row["r_times_norm"] == pytest.approx(want, abs=1e-10)
    payload = report.to_dict()
    assert set(payload) == {"h", "exact_norm", "grid", "verdict"}


def test_no_go_exact_linear_exponent(ring):
    data = ccy_structure(ring.t(1))
    norm_sq = norm_closed_forms(data)["d_psi_norm_sq"]
    assert norm_sq.leading_exponent("zero") == (-2, 0)  # |d psi| decays like 1/r
    report = no_go_check(ring.t(1))
    for row in report.grid:
        assert row["r_times_norm"] == pytest.approx(math.sqrt(2.0), abs=1e-10)


def test_no_go_constant_bounded(ring):
    report = no_go_check(ring.const(F(1, 2)))
    assert report.verdict == "bounded"
    assert all(row["d_star_phi_norm"] == 0.0 for row in report.grid)
    assert report.sup_log_gradient == 0.0


def test_no_go_sampled_matches_exact(ring):
    report = no_go_check(h_fn=lambda r: r * r)
    assert report.verdict == "unbounded"
    want = 2.0 * math.sqrt(2.0)
    for row in report.grid:
        assert row["r_times_norm"] == pytest.approx(want, rel=1e-4)


def test_no_go_sampled_exp_flat(ring):
    grid = [2.0 ** (-i) for i in range(6)]
    report = no_go_check(h_fn=lambda r: math.exp(-1.0 / r),
                         dh_fn=lambda r: math.exp(-1.0 / r) / (r * r),
                         grid=grid)
    assert report.verdict == "unbounded"
    assert report.sup_log_gradient == pytest.approx(1.0 / min(grid) ** 2, rel=1e-12)
    assert report.exact_norm is None


def test_no_go_sampled_constant_bounded(ring):
    report = no_go_check(h_fn=lambda r: 0.25, dh_fn=lambda r: 0.0)
    assert report.verdict == "bounded"


def test_no_go_argument_validation(ring):
    with pytest.raises(ValueError):
        no_go_check()
    with pytest.raises(ValueError):
        no_go_check(ring.t(1), h_fn=lambda r: r)
    with pytest.raises(ValueError):
        no_go_check(h_fn=lambda r: -r)


# -- conformal rescaling cannot change the blow-up rate ------------------------

@pytest.mark.parametrize("k,m", [(1, 0), (2, 0), (3, 0), (1, 1), (2, 1), (3, 2),
                                 (0, 1), (0, 2)])
def test_conformal_futility_distance_exponent(ring, k, m):
    report = conformal_futility(k, m, ring=ring)
    assert not report.tau7_vanishes
    assert report.norm_sq_exponent == -2 * (m + 1)
    assert report.distance_exponent == F(-1)


def test_conformal_futility_trivial_case(ring):
    report = conformal_futility(0, 0, ring=ring)
    assert report.tau7_vanishes


def test_conformal_futility_rejects_divergent_distance(ring):
    with pytest.raises(ValueError):
        conformal_futility(2, -1, ring=ring)


# -- volume growth of the collapsing model -------------------------------------

def test_volume_scaling_quadratic_h(ring):
    report = volume_scaling(ring.t(2))
    assert report.density_exponent_exact == 7
    assert abs(report.density_exponent_fit - 7.0) <= 0.05
    assert report.density_fit_residual <= 1e-9
    assert abs(report.ball_volume_fit - 8.0) <= 0.1
    assert report.volume_maximal


def test_volume_scaling_constant_h_not_maximal(ring):
    report = volume_scaling(ring.const(1))
    assert report.density_exponent_exact == 5
    assert not report.volume_maximal
