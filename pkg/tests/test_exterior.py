"""Coframe calculus: wedge algebra, d, Hodge star, numeric twin path."""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from g2calc import (
    Coframe,
    Metric,
    Ring,
    contract_numeric,
    form_to_numeric,
    hodge,
    hodge_numeric,
    inner,
    metric_from_phi_numeric,
    norm_sq,
    norm_sq_numeric,
    wedge_numeric,
)


def flat_frame(n, ring=None):
    R = ring or Ring(d=3)
    fr = Coframe([f"e{i}" for i in range(1, n + 1)], R)
    fr.set_d_rules({})
    return fr


def euclid(fr):
    n = fr.n
    return Metric(fr, [[1 if i == j else 0 for j in range(n)] for i in range(n)])


def std_g2(fr):
    def f(*idx):
        return fr.basis(tuple(i - 1 for i in idx))
    return (f(1, 2, 3) + f(1, 4, 5) + f(1, 6, 7)
            + f(2, 4, 6) - f(2, 5, 7) - f(3, 4, 7) - f(3, 5, 6))


class TestWedgeAlgebra:
    def test_anticommutation(self):
        fr = flat_frame(4)
        a = fr.basis((0,)) + 2 * fr.basis((2,))
        b = fr.basis((1,)) - fr.basis((3,))
        assert a.wedge(b) == -(b.wedge(a))
        assert a.wedge(a).is_zero

    def test_associativity(self):
        fr = flat_frame(5)
        a = fr.basis((0,)) + fr.basis((1,))
        b = fr.basis((1, 2)) + 3 * fr.basis((3, 4))
        c = fr.basis((0, 4)) - fr.basis((2, 3))
        assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))

    def test_reordered_constructor_indices(self):
        fr = flat_frame(3)
        assert fr.form(2, {(1, 0): 1}) == -fr.basis((0, 1))

    def test_degree_overflow_is_zero(self):
        fr = flat_frame(3)
        w = fr.basis((0, 1)).wedge(fr.basis((1, 2)))
        assert w.is_zero
        top_plus = fr.basis((0, 1, 2)).wedge(fr.basis((0,)))
        assert top_plus.is_zero and top_plus.degree == 4

    def test_contract(self):
        fr = flat_frame(3)
        w = fr.basis((0, 1, 2))
        v = [0, 1, 0]
        assert w.contract(v) == -fr.basis((0, 2))


class TestExteriorDerivative:
    def test_d_squared_checked_at_construction(self):
        R = Ring(d=3)
        fr = Coframe(["a", "b", "c"], R)
        # da = b^c, db = a^b gives d(da) = db^c = a^b^c != 0
        bad = {"a": fr.basis((1, 2)), "b": fr.basis((0, 1))}
        with pytest.raises(ValueError):
            fr.set_d_rules(bad)

    def test_lie_type_rules(self):
        # da = -2 b^c cyclic: the d^2 = 0 check passes and d acts correctly
        R = Ring(d=3)
        fr = Coframe(["a", "b", "c"], R)
        fr.set_d_rules({
            "a": -2 * fr.basis((1, 2)),
            "b": -2 * fr.basis((2, 0)),
            "c": -2 * fr.basis((0, 1)),
        })
        da = fr.one_form("a").d()
        assert da == -2 * fr.basis((1, 2))
        w = fr.one_form("a").wedge(fr.one_form("b"))
        # d(a^b) = da^b - a^db = -2 b^c^b + 2 a^c^a = 0
        assert w.d().is_zero

    def test_radial_leibniz(self):
        R = Ring(d=3)
        fr = Coframe(["dt", "x", "y"], R, radial="dt")
        fr.set_d_rules({})
        t = R.t()
        w = fr.basis((1, 2)) * (t * t * t)
        dw = w.d()
        assert dw == fr.basis((0, 1, 2)) * (R.const(3) * t * t)

    def test_t_dependence_without_radial_rejected(self):
        fr = flat_frame(3)
        w = fr.basis((1,)) * fr.ring.t()
        with pytest.raises(ValueError):
            w.d()


class TestHodge:
    def test_double_star_signs(self):
        fr = flat_frame(5)
        g = euclid(fr)
        for k, idx in [(1, (0,)), (2, (1, 3)), (3, (0, 2, 4))]:
            a = fr.basis(idx)
            ss = hodge(hodge(a, g), g)
            want = a if (k * (5 - k)) % 2 == 0 else -a
            assert ss == want

    def test_inner_symmetric_bilinear(self):
        fr = flat_frame(4)
        g = euclid(fr)
        a = fr.basis((0, 1)) + 2 * fr.basis((2, 3))
        b = fr.basis((0, 1)) - fr.basis((1, 2))
        assert inner(a, b, g) == inner(b, a, g)
        assert inner(a, a, g) == norm_sq(a, g)
        assert norm_sq(a, g) == fr.ring.const(5)

    def test_flat_g2_identities(self):
        fr = flat_frame(7)
        g = euclid(fr)
        phi = std_g2(fr)
        psi = hodge(phi, g)
        assert norm_sq(phi, g) == fr.ring.const(7)
        assert norm_sq(psi, g) == fr.ring.const(7)
        assert phi.wedge(psi) == g.vol() * 7
        assert hodge(psi, g) == phi

    def test_orientation_flip(self):
        fr = flat_frame(3)
        g = euclid(fr)
        gneg = Metric(fr, [[1 if i == j else 0 for j in range(3)] for i in range(3)],
                      orientation=-1)
        a = fr.basis((0,))
        assert hodge(a, gneg) == -hodge(a, g)
        # norms do not depend on the orientation
        assert norm_sq(a, gneg) == norm_sq(a, g)

    def test_scaled_metric_and_radial(self):
        R = Ring(d=3)
        fr = Coframe(["dt", "a", "b"], R, radial="dt")
        fr.set_d_rules({})
        t = R.t()
        zero, one = R.zero, R.one
        g = Metric(fr, [[one, zero, zero], [zero, t * t, zero], [zero, zero, t * t]])
        assert g.sqrt_det() == t * t
        a = fr.one_form("a")
        assert norm_sq(a, g) == R.t(-2)
        assert hodge(a, g) == -fr.basis((0, 2))

    def test_subframe_metric(self):
        # Hodge star on a 2-dimensional slice of a 4-label frame
        fr = flat_frame(4)
        g2d = Metric(fr, [[1, 0], [0, 1]], on=(1, 3))
        a = fr.basis((1,))
        assert hodge(a, g2d) == fr.basis((3,))
        with pytest.raises(ValueError):
            hodge(fr.basis((0,)), g2d)

    def test_non_unit_determinant_rejected(self):
        R = Ring(d=3)
        R.parameter("c", invertible=False)
        fr = Coframe(["a", "b"], R)
        fr.set_d_rules({})
        c = R.monomial(1, {"c": 1})
        g = Metric(fr, [[R.one + c * c, R.zero], [R.zero, R.one]])
        with pytest.raises(ValueError):
            hodge(fr.basis((0,)), g)


class TestNumericTwin:
    def test_wedge_and_contract_match_exact(self):
        fr = flat_frame(5)
        a = fr.basis((0, 2)) + 3 * fr.basis((1, 4))
        b = fr.basis((3,)) - 2 * fr.basis((2,))
        exact = a.wedge(b)
        num = wedge_numeric(form_to_numeric(a, 1.0), form_to_numeric(b, 1.0))
        assert num == pytest.approx(form_to_numeric(exact, 1.0))
        vec = [0.0, 1.0, 0.0, -2.0, 0.0]
        cn = contract_numeric(form_to_numeric(a, 1.0), vec)
        ce = form_to_numeric(a.contract([0, 1, 0, -2, 0]), 1.0)
        for k in set(cn) | set(ce):
            assert cn.get(k, 0.0) == pytest.approx(ce.get(k, 0.0))

    def test_hodge_matches_exact_on_curved_metric(self):
        R = Ring(d=3)
        fr = Coframe(["dt", "a", "b", "c"], R, radial="dt")
        fr.set_d_rules({})
        t = R.t()
        z, one = R.zero, R.one
        g = Metric(fr, [[one, z, z, z], [z, t * t, z, z],
                        [z, z, t * t, z], [z, z, z, t * t * t * t]])
        w = fr.basis((0, 1)) + fr.basis((2, 3)) * t
        tv = 1.37
        gn = g.evaluate(tv)
        sn = hodge_numeric(form_to_numeric(w, tv), 2, gn)
        se = form_to_numeric(hodge(w, g), tv)
        for k in set(sn) | set(se):
            assert sn.get(k, 0.0) == pytest.approx(se.get(k, 0.0), abs=1e-12)
        assert norm_sq_numeric(form_to_numeric(w, tv), 2, gn) == pytest.approx(
            norm_sq(w, g).evaluate(tv), abs=1e-12)

    def test_metric_from_phi_flat(self):
        fr = flat_frame(7)
        phi = std_g2(fr)
        g = metric_from_phi_numeric(form_to_numeric(phi, 1.0))
        assert np.allclose(g, np.eye(7), atol=1e-12)

    def test_metric_from_phi_rejects_negative(self):
        fr = flat_frame(7)
        phi = std_g2(fr)
        bad = form_to_numeric(-phi, 1.0)
        with pytest.raises(ValueError):
            metric_from_phi_numeric(bad)
