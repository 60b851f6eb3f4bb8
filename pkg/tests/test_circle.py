"""Circle-invariant torsion: closed forms vs direct extraction."""

from __future__ import annotations

from fractions import Fraction as F

import pytest

from g2calc.circle import (
    CircleBundleData,
    check_closed_coclosed,
    decompose_theta_curvature,
    gamma12_basis,
    generic_circle_model,
    invariant_torsion_formula,
    omega8_basis,
    quotient_forms,
)
from g2calc.models import (
    bryant_salamon,
    circle_reduction,
    cone_su3,
    gamma_family,
    invariant_ansatz,
    random_lorentz,
)
from g2calc.scalars import Ring
from g2calc.structures import SU3Torsion, g2_torsion

COMPONENTS = ("tau1", "tau7", "tau14", "tau27")


def assert_torsions_equal(a, b):
    for name in COMPONENTS:
        diff = getattr(a, name) - getattr(b, name)
        assert diff.is_zero, f"{name} differs"


# ---------------------------------------------------------------------------
# The generic pointwise model: a complete verification
# ---------------------------------------------------------------------------

def test_formula_equals_extraction_identically():
    """On the pointwise model every torsion atom is an independent symbolic
    parameter, so agreement here is agreement for every invariant
    structure."""
    m = generic_circle_model()
    assert_torsions_equal(m.formula_torsion(), m.direct_torsion())


def test_generic_model_bases_have_expected_dimensions():
    m = generic_circle_model()
    assert len(omega8_basis(m.su3)) == 8
    assert len(gamma12_basis(m.su3)) == 12


def test_closed_case_kills_scalar_vector_and_27_parts():
    """Substituting the closed-structure multiplet (u6 = -dln t,
    u6h = t J(x), u1 = u1h = lam-part = u12 = 0, u8 = -t sigma) into the
    closed forms leaves only the 2-form component."""
    m = generic_circle_model()
    rg = m.frame.ring
    su3, t = m.su3, m.bundle.t
    x_flat = m.curvature.x_flat
    mult = SU3Torsion(
        u1=rg.zero, u1h=rg.zero,
        u6=-m.bundle.rho,
        u6h=su3.J(x_flat) * t,
        u8=-(m.curvature.sigma * t),
        u8h=m.multiplet.u8h,
        u12=m.frame.zero_form(3),
    )
    curv = decompose_theta_curvature(
        su3.contract_sharp(x_flat, su3.re_u) + m.curvature.sigma, su3)
    tors = invariant_torsion_formula(m.bundle, curv, mult)
    assert tors.tau1.is_zero
    assert tors.tau7.is_zero
    assert tors.tau27.is_zero
    assert not tors.tau14.is_zero


def test_coclosed_case_kills_7_and_14_parts():
    """The co-closed multiplet (u6 = t J(x), u6h = -dln t, u1 = u8h = 0)
    leaves only the scalar and 27-type components."""
    m = generic_circle_model()
    rg = m.frame.ring
    su3, t = m.su3, m.bundle.t
    x_flat = m.curvature.x_flat
    mult = SU3Torsion(
        u1=rg.zero, u1h=m.multiplet.u1h,
        u6=su3.J(x_flat) * t,
        u6h=-m.bundle.rho,
        u8=m.multiplet.u8,
        u8h=m.frame.zero_form(2),
        u12=m.multiplet.u12,
    )
    tors = invariant_torsion_formula(m.bundle, m.curvature, mult)
    assert tors.tau7.is_zero
    assert tors.tau14.is_zero


def test_scalar_torsion_needs_both_atoms():
    """The scalar component is (6 t lam + 24 u1h)/7: it survives lam = 0
    whenever u1h is nonzero."""
    m = generic_circle_model()
    rg = m.frame.ring
    lam0 = decompose_theta_curvature(
        su3_contract := m.su3.contract_sharp(m.curvature.x_flat, m.su3.re_u),
        m.su3)
    tors = invariant_torsion_formula(m.bundle, lam0, m.multiplet)
    assert lam0.lam.is_zero
    assert not tors.tau1.is_zero
    expected = m.multiplet.u1h * F(24, 7)
    assert (tors.tau1 - expected).is_zero


# ---------------------------------------------------------------------------
# Assembled homogeneous structures: the two paths agree
# ---------------------------------------------------------------------------

def symbolic_params_ring():
    rg = Ring(d=3)
    lam = rg.parameter("lam", invertible=True)
    mu = rg.parameter("mu", invertible=True)
    k = rg.parameter("k", invertible=True)
    alf = rg.parameter("alf")
    return rg, lam, mu, k, alf


@pytest.mark.parametrize("seed", range(20))
def test_two_paths_agree_on_symbolic_ansatz(seed):
    """Fully symbolic (lam, mu, k, alpha) with a seeded exact Lorentz A:
    the basic-data formula equals the 7-dimensional extraction."""
    rg, lam, mu, k, alf = symbolic_params_ring()
    a = invariant_ansatz(lam, mu, k, alpha=alf, A=random_lorentz(seed)[1:],
                         ring=rg)
    bundle, curv, mult = circle_reduction(a)
    assert_torsions_equal(invariant_torsion_formula(bundle, curv, mult),
                          g2_torsion(a.g2))


def test_two_paths_agree_on_time_dependent_connection():
    rg = Ring(d=3)
    fam = gamma_family(rg)
    bundle, curv, mult = circle_reduction(fam.deformed)
    assert_torsions_equal(invariant_torsion_formula(bundle, curv, mult),
                          g2_torsion(fam.deformed.g2))


def test_two_paths_agree_and_vanish_on_torsion_free_solution():
    rg = Ring(d=3)
    bs = bryant_salamon(rg)
    bundle, curv, mult = circle_reduction(bs)
    tors = invariant_torsion_formula(bundle, curv, mult)
    for name in COMPONENTS:
        assert getattr(tors, name).is_zero
    assert_torsions_equal(tors, g2_torsion(bs.g2))


# ---------------------------------------------------------------------------
# Quotient-level closure conditions
# ---------------------------------------------------------------------------

def test_closure_conditions_on_model_family():
    rg = Ring(d=3)
    fam = gamma_family(rg)
    base, _, _ = circle_reduction(fam.base)
    deformed, _, _ = circle_reduction(fam.deformed)
    assert check_closed_coclosed(base)[:2] == (True, True)
    assert check_closed_coclosed(deformed)[:2] == (False, True)


def test_closure_conditions_generic_ansatz():
    rg = Ring(d=3)
    a = invariant_ansatz(F(7, 5), F(2, 3), F(1, 3), alpha=F(1, 4), ring=rg,
                         build_g2=False)
    bundle, _, _ = circle_reduction(a)
    closed, coclosed, residuals = check_closed_coclosed(bundle)
    assert not closed and not coclosed
    assert any(not r.is_zero for r in residuals.values())


# ---------------------------------------------------------------------------
# Recovering the basic forms from the invariant 3-form
# ---------------------------------------------------------------------------

def test_quotient_forms_recover_the_cone_data():
    rg = Ring(d=3)
    bs = bryant_salamon(rg)
    g2 = bs.g2
    inv = g2.metric.inverse()
    t = rg.t()
    # orbit field: t^2 theta sharp
    xi_flat = [rg.zero] * 7
    for (j,), c in bs.theta.comps.items():
        xi_flat[j] = c
    xi = [rg.zero] * 7
    for i in range(7):
        for j in range(7):
            xi[i] = xi[i] + inv[i][j] * xi_flat[j] * t * t
    q = quotient_forms(g2, xi)
    assert (q.t - t).is_zero
    assert q.theta == bs.theta
    assert q.omega == bs.omega_c
    assert q.re_u == bs.re_c
    assert q.im_u == bs.im_c


def test_theta_curvature_roundtrip():
    rg = Ring(d=3)
    a = invariant_ansatz(F(7, 5), F(2, 3), F(1, 3), alpha=F(1, 4), ring=rg,
                         build_g2=False)
    su3 = cone_su3(a)
    curv = decompose_theta_curvature(a.theta.d(), su3)
    assert curv.reassemble(su3) == a.theta.d()
