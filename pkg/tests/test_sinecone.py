"""Tests for the sine-squashed interval structure over a torsion-free cone link."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from g2calc.models import MODEL_REGISTRY, bryant_salamon, gamma_family, \
    torsion_free_family_point
from g2calc.scalars import QuadNum
from g2calc.structures import DecompositionError, SU3Structure, standard_su3
from g2calc.exterior import Coframe
from g2calc.scalars import Ring
from g2calc.sinecone import (NearlyKahlerLink, link_of_cone,
                             require_nearly_kahler, sine_cone,
                             sine_cone_model, sine_cone_report)

TOL = 1e-9
MARKS = (math.pi / 4, math.pi / 2, 3 * math.pi / 4)


@pytest.fixture(scope="module")
def link() -> NearlyKahlerLink:
    return link_of_cone()


@pytest.fixture(scope="module")
def structure(link):
    return sine_cone(link)


def test_link_scalar_is_unit(link):
    assert link.u1 == link.frame.ring.one


def test_link_structure_equations(link):
    su3 = link.su3
    om_sq = su3.omega.wedge(su3.omega)
    assert su3.omega.d() == su3.re_u * 3
    assert su3.re_u.d().is_zero
    assert su3.im_u.d() == om_sq * (-2)


def test_link_of_flipped_gauge_and_family_member():
    for anz in (bryant_salamon(gauge=-1),
                torsion_free_family_point(F(3, 5), F(4, 5))):
        lk = link_of_cone(anz)
        assert lk.u1 == lk.frame.ring.one


def test_link_rejects_non_cone_inputs():
    with pytest.raises(ValueError):
        link_of_cone(gamma_family().deformed)
    with pytest.raises(TypeError):
        link_of_cone(object())


def test_exact_scalar_torsion(structure):
    assert structure.tau1_exact == QuadNum(4)
    assert structure.d_phi == structure.psi * 4
    assert structure.psi.d().is_zero


def test_torsion_at_marked_points(structure):
    vals = []
    for t in MARKS:
        p = structure.torsion_at(t)
        assert abs(p.tau1 - 4.0) <= TOL
        assert p.tau7_norm <= TOL
        assert p.tau14_norm <= TOL
        assert p.tau27_norm <= TOL
        assert p.dual_residual <= TOL
        vals.append(p.tau1)
    assert abs(vals[0] - vals[1]) <= TOL
    assert abs(vals[2] - vals[1]) <= TOL


def test_midpoint_metric_is_unit_cone_level(structure, link):
    g = structure.metric_at(math.pi / 2)
    want = np.zeros((7, 7))
    want[0, 0] = 1.0
    for i in range(6):
        for j in range(6):
            want[i + 1, j + 1] = float(structure.link_gram[i][j])
    assert np.array_equal(g, want)
    # the recovered numeric metric agrees with the exact one at the midpoint
    p = structure.torsion_at(math.pi / 2)
    assert p.metric_residual <= TOL
    # and the cross-section Gram is the link Gram (unit-scalar link)
    for i in range(6):
        for j in range(6):
            assert structure.link_gram[i][j] == \
                link.su3.metric.mat[i][j].terms.get(((), 0, 0), QuadNum(0))


def test_grid_report(structure):
    rep = sine_cone_report(structure, grid_points=64)
    assert len(rep.grid) == 64
    assert set(rep.marked) == {"pi/4", "pi/2", "3pi/4"}
    assert rep.tau1_exact == 4.0
    assert rep.tau1_spread <= TOL
    assert rep.max_tau7_norm <= TOL
    assert rep.max_tau14_norm <= TOL
    assert rep.max_tau27_norm <= TOL
    assert rep.max_dual_residual <= TOL
    assert rep.midpoint_metric_residual <= TOL
    d = rep.to_dict()
    assert d["grid_size"] == 64
    assert d["marked"]["pi/2"]["tau1"] == rep.marked["pi/2"].tau1


def test_registry_factory():
    rep = MODEL_REGISTRY["sine-cone"](grid_points=4)
    assert rep.tau1_exact == 4.0
    assert rep.max_tau27_norm <= TOL


def test_rejects_integrable_cross_section():
    rg = Ring(d=3)
    fr = Coframe(("a", "b", "c", "x", "y", "z"), rg)
    fr.set_d_rules({})
    with pytest.raises(DecompositionError):
        sine_cone(standard_su3(fr))


def test_rejects_phase_rotated_cross_section(link):
    s = link.su3
    rot = SU3Structure(s.frame, s.omega, -s.im_u, s.re_u,
                       [list(row) for row in s.metric.mat])
    rot.validate()
    with pytest.raises(DecompositionError):
        sine_cone(rot)


def test_rejects_non_su3_inputs(link):
    with pytest.raises(TypeError):
        sine_cone("not a structure")
    seven = Coframe(("a", "b", "c", "x", "y", "z", "w"), Ring(d=3))
    seven.set_d_rules({})
    with pytest.raises(ValueError):
        sine_cone(standard_su3(seven, on=tuple(range(6))))


def test_homothety_is_normalized_away(link):
    s = link.su3
    rg = s.frame.ring
    scaled = SU3Structure(s.frame, s.omega * rg.const(4),
                          s.re_u * rg.const(8), s.im_u * rg.const(8),
                          [[x * rg.const(4) for x in row] for row in s.metric.mat])
    scaled.validate()
    assert require_nearly_kahler(scaled) == rg.const(F(1, 2))
    sc2 = sine_cone(scaled)
    sc1 = sine_cone(link)
    assert sc2.tau1_exact == QuadNum(4)
    assert np.array_equal(sc2.metric_at(math.pi / 2), sc1.metric_at(math.pi / 2))
    # the frames are distinct instances, so compare raw components
    assert sc2.phi.comps == sc1.phi.comps


def test_default_model_runs():
    rep = sine_cone_model(grid_points=8)
    assert rep.tau1_spread <= TOL
    assert len(rep.points) == 8
