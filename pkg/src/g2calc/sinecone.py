"""Sine-squashed interval metrics over a nearly Kaehler cross-section.

A torsion-free structure on a metric cone induces, at unit radius, a
six-dimensional structure (omega, Upsilon) whose only intrinsic torsion is
the first scalar: d omega = 3 u1 Re Upsilon with every other multiplet zero
and u1 constant.  Over the open interval (0, pi) the squashed product with
metric dt^2 + sin(t)^2 g_N carries the 3-form

    phi = sin^2 t  dt ^ omega + sin^3 t (cos t  Re Upsilon - sin t  Im Upsilon)

whose torsion sits in the scalar slot alone, with constant multiplier
d(phi) = tau1 * dual(phi).  The interval frame uses exact trigonometric
polynomial coefficients, so closure of the dual 4-form and the constancy of
the scalar are verified symbolically; star operators, the recovered metric
and the torsion residuals are evaluated numerically on a t-grid because the
sine factors are not invertible in the coefficient ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction as F

import numpy as np

from .exterior import (Coframe, FormExpr, form_to_numeric, hodge_numeric,
                       metric_from_phi_numeric, norm_sq_numeric, wedge_numeric)
from .models import bryant_salamon
from .scalars import QuadNum, Ring, ScalarExpr
from .structures import (DecompositionError, SU3Structure,
                         TorsionConsistencyError, su3_torsion)
from .trig import TrigPoly, trig_coerce, trig_cos, trig_sin

INTERVAL_LABEL = "dt"
MARKED_POINTS = {"pi/4": math.pi / 4, "pi/2": math.pi / 2, "3pi/4": 3 * math.pi / 4}


# ---------------------------------------------------------------------------
# Exact scalar extraction helpers
# ---------------------------------------------------------------------------

def _value_at_one(sx: ScalarExpr) -> QuadNum:
    """Exact substitution t = 1 (log factors vanish, powers collapse)."""
    out = QuadNum(0, 0, sx.ring.d)
    for (params, _t_exp, log_pow), q in sx.terms.items():
        if params:
            raise ValueError("cannot substitute t = 1 into a parameter-dependent scalar")
        if log_pow:
            continue
        out = out + q
    return out


def _const_term(sx) -> QuadNum:
    """Exact value of a scalar that must be constant."""
    if isinstance(sx, QuadNum):
        return sx
    out = QuadNum(0, 0, sx.ring.d)
    for (params, t_exp, log_pow), q in sx.terms.items():
        if params or t_exp or log_pow:
            raise ValueError(f"scalar {sx!r} is not constant")
        out = out + q
    return out


def _transfer(form: FormExpr, target: Coframe, offset: int, coeff) -> FormExpr:
    """Re-index a form onto another frame, mapping i -> i + offset."""
    comps = {}
    for I, c in form.comps.items():
        J = tuple(i + offset for i in I)
        if any(j < 0 or j >= target.n for j in J):
            raise ValueError(f"component {I} falls outside the target frame")
        comps[J] = coeff(c)
    return target.form(form.degree, comps)


def _proportionality(a: FormExpr, b: FormExpr) -> QuadNum:
    """The exact constant r with a == b * r; raises if none exists."""
    if b.is_zero:
        raise ValueError("cannot divide by the zero form")
    ref_key = min(b.comps)
    ref = b.comps[ref_key]
    if a.is_zero:
        return QuadNum(0, 0, ref.d)
    ca = a.comps.get(ref_key)
    if ca is None:
        raise TorsionConsistencyError("forms are not proportional")
    term_key = min(ref.terms)
    qa = ca.terms.get(term_key)
    if qa is None:
        raise TorsionConsistencyError("forms are not proportional")
    r = qa / ref.terms[term_key]
    if a != b * r:
        raise TorsionConsistencyError("forms are not a constant multiple of each other")
    return r


# ---------------------------------------------------------------------------
# Cross-section extraction from a unit-radius cone
# ---------------------------------------------------------------------------

@dataclass
class NearlyKahlerLink:
    """Unit-radius cross-section data of a torsion-free cone."""
    frame: Coframe              # six labels with the cross-section structure equations
    su3: SU3Structure           # exact structure with its Gram matrix
    u1: ScalarExpr              # the single surviving torsion scalar (constant)


def require_nearly_kahler(su3: SU3Structure) -> ScalarExpr:
    """Check that only the first torsion scalar survives, and return it."""
    tors = su3_torsion(su3)
    offending = [name for name, part in (
        ("u1h", tors.u1h), ("u6", tors.u6), ("u6h", tors.u6h),
        ("u8", tors.u8), ("u8h", tors.u8h), ("u12", tors.u12),
    ) if not part.is_zero]
    if offending:
        raise DecompositionError(
            "torsion outside the first scalar slot: " + ", ".join(offending))
    u1 = su3.frame.coerce(tors.u1)
    if u1.is_zero:
        raise DecompositionError(
            "the first torsion scalar vanishes; the structure is integrable")
    return u1


def link_of_cone(ansatz=None) -> NearlyKahlerLink:
    """Cross-section of a torsion-free cone at unit radius, verified exactly.

    The radial leg must be the first label, unit and orthogonal; the 3-form
    and its dual must reproduce the exact cone shape
    r^2 dr ^ omega + r^3 Re Upsilon with metric dr^2 + r^2 g_N.
    """
    anz = ansatz if ansatz is not None else bryant_salamon()
    if getattr(anz, "g2", None) is None:
        raise TypeError("expected an invariant ansatz carrying its built structure")
    g2 = anz.g2
    frame7 = anz.frame
    rg = frame7.ring
    if frame7.radial_index != 0:
        raise ValueError("the radial leg must be the first frame label")
    mat = g2.metric.mat
    if mat[0][0] != rg.one or any(not mat[0][j].is_zero for j in range(1, 7)):
        raise ValueError("the radial leg is not unit and orthogonal")

    unit = [rg.one] + [rg.zero] * 6
    dtf = frame7.basis((0,))
    om_slice = g2.phi.contract(unit)
    im_slice = -(g2.psi.contract(unit))

    def at_one(form: FormExpr) -> FormExpr:
        return frame7.form(form.degree,
                           {I: rg.const(_value_at_one(c)) for I, c in form.comps.items()})

    om7 = at_one(om_slice)
    im7 = at_one(im_slice)
    re7 = at_one(g2.phi - dtf.wedge(om_slice))

    if g2.phi != dtf.wedge(om7) * rg.t(2) + re7 * rg.t(3):
        raise ValueError("the 3-form does not have the exact cone shape")
    if g2.psi != om7.wedge(om7) * (rg.t(4) * F(1, 2)) - dtf.wedge(im7) * rg.t(3):
        raise ValueError("the dual 4-form does not have the exact cone shape")

    gram = [[_value_at_one(mat[i][j]) for j in range(1, 7)] for i in range(1, 7)]
    for i in range(6):
        for j in range(6):
            if mat[i + 1][j + 1] != rg.t(2) * rg.const(gram[i][j]):
                raise ValueError("the metric does not have the exact cone shape")

    labels6 = frame7.labels[1:]
    frame6 = Coframe(labels6, rg)
    shift = lambda c: c
    rules = {}
    for idx, rule in frame7.d_rules.items():
        if idx == 0:
            raise ValueError("the radial leg must be closed")
        rules[frame7.labels[idx]] = _transfer(rule, frame6, -1, shift)
    frame6.set_d_rules(rules)

    om6 = _transfer(om7, frame6, -1, shift)
    re6 = _transfer(re7, frame6, -1, shift)
    im6 = _transfer(im7, frame6, -1, shift)
    gram6 = [[rg.const(q) for q in row] for row in gram]
    su3 = SU3Structure(frame6, om6, re6, im6, gram6)
    su3.validate()
    u1 = require_nearly_kahler(su3)
    return NearlyKahlerLink(frame6, su3, u1)


# ---------------------------------------------------------------------------
# The squashed interval structure
# ---------------------------------------------------------------------------

@dataclass
class SineConePoint:
    """Numeric torsion sample at one interval position."""
    t: float
    tau1: float
    tau7_norm: float
    tau14_norm: float
    tau27_norm: float
    dual_residual: float      # |star(phi) - exact dual| recovered numerically
    metric_residual: float    # |recovered metric - dt^2 + sin^2 t g_N|

    def as_dict(self) -> dict:
        return {"t": self.t, "tau1": self.tau1, "tau7_norm": self.tau7_norm,
                "tau14_norm": self.tau14_norm, "tau27_norm": self.tau27_norm,
                "dual_residual": self.dual_residual,
                "metric_residual": self.metric_residual}


@dataclass
class SineConeStructure:
    """Exact interval 3-form with numeric star/torsion evaluation."""
    frame: Coframe
    phi: FormExpr
    psi: FormExpr
    d_phi: FormExpr
    tau1_exact: QuadNum         # constant with d(phi) = tau1 * psi, by construction
    link_gram: list[list[QuadNum]]   # cross-section Gram after unit-scalar rescale

    @property
    def on(self) -> tuple[int, ...]:
        return tuple(range(7))

    def metric_at(self, t: float) -> np.ndarray:
        g = np.zeros((7, 7))
        g[0, 0] = 1.0
        s2 = math.sin(t) ** 2
        for i in range(6):
            for j in range(6):
                g[i + 1, j + 1] = s2 * float(self.link_gram[i][j])
        return g

    def torsion_at(self, t: float) -> SineConePoint:
        on = self.on
        phi_n = form_to_numeric(self.phi, t)
        g = metric_from_phi_numeric(phi_n)
        orient = 1
        psi_n = hodge_numeric(phi_n, 3, g, on, orient)
        if wedge_numeric(phi_n, psi_n).get(on, 0.0) < 0:
            orient = -1
            psi_n = {k: -v for k, v in psi_n.items()}

        psi_exact = form_to_numeric(self.psi, t)
        dual_res = max(abs(psi_n.get(k, 0.0) - psi_exact.get(k, 0.0))
                       for k in set(psi_n) | set(psi_exact))
        metric_res = float(np.max(np.abs(g - self.metric_at(t))))

        d_phi_n = form_to_numeric(self.d_phi, t)
        tau1, tau7, tau14, tau27 = _numeric_torsion(phi_n, psi_n, d_phi_n, {}, g, on, orient)
        return SineConePoint(
            t=t,
            tau1=tau1,
            tau7_norm=_safe_norm(tau7, 1, g, on, orient),
            tau14_norm=_safe_norm(tau14, 2, g, on, orient),
            tau27_norm=_safe_norm(tau27, 3, g, on, orient),
            dual_residual=dual_res,
            metric_residual=metric_res,
        )


def _lin(a: dict, ca: float, b: dict, cb: float) -> dict:
    out = {}
    for k in set(a) | set(b):
        v = ca * a.get(k, 0.0) + cb * b.get(k, 0.0)
        if v != 0.0:
            out[k] = v
    return out


def _numeric_torsion(phi, psi, d_phi, d_psi, g, on, orient):
    """Numeric mirror of the exact torsion extraction recipe."""
    def star(a, deg):
        return hodge_numeric(a, deg, g, on, orient)

    tau1 = star(wedge_numeric(d_phi, phi), 7).get((), 0.0) / 7.0
    tau7 = {k: -v / 12.0 for k, v in star(wedge_numeric(star(d_phi, 4), phi), 6).items()}
    tau14 = _lin(star(d_psi, 5), 1.0, star(wedge_numeric(tau7, psi), 5), -4.0)
    rest = _lin(_lin(d_phi, 1.0, psi, -tau1), 1.0, wedge_numeric(tau7, phi), -3.0)
    tau27 = star(rest, 4)
    return tau1, tau7, tau14, tau27


def _safe_norm(comps: dict, degree: int, g, on, orient) -> float:
    if not comps:
        return 0.0
    return math.sqrt(max(norm_sq_numeric(comps, degree, g, on, orient), 0.0))


def sine_cone(link: NearlyKahlerLink | SU3Structure) -> SineConeStructure:
    """Squash a nearly Kaehler cross-section over (0, pi) with sine scaling.

    Accepts the cross-section either as extracted link data or as a bare
    SU(3)-structure; the structure is validated and must carry torsion in
    the first scalar slot only.  A non-unit constant scalar is normalized
    away by the homothety omega -> u1^2 omega, Upsilon -> u1^3 Upsilon.
    """
    su3 = link.su3 if isinstance(link, NearlyKahlerLink) else link
    if not isinstance(su3, SU3Structure):
        raise TypeError("expected an SU(3)-structure or extracted link data")
    if su3.frame.n != 6 or su3.on != tuple(range(6)):
        raise ValueError("the cross-section must fill a six-label frame")
    su3.validate()
    u1 = require_nearly_kahler(su3)
    c = _const_term(u1)

    rg = su3.frame.ring
    om, re_u, im_u = su3.omega, su3.re_u, su3.im_u
    gram = [[_const_term(entry) for entry in row] for row in su3.metric.mat]
    if not (c == 1):
        c2, c3 = c * c, c * c * c
        om = om * rg.const(c2)
        re_u = re_u * rg.const(c3)
        im_u = im_u * rg.const(c3)
        gram = [[q * c2 for q in row] for row in gram]

    if INTERVAL_LABEL in su3.frame.labels:
        raise ValueError(f"cross-section labels may not include {INTERVAL_LABEL!r}")
    d = rg.d
    tf = Coframe((INTERVAL_LABEL,) + tuple(su3.frame.labels), rg,
                 radial=INTERVAL_LABEL, coeff_coerce=trig_coerce(d))
    conv = _const_term
    rules = {}
    for idx, rule in su3.frame.d_rules.items():
        rules[su3.frame.labels[idx]] = _transfer(rule, tf, 1, conv)
    tf.set_d_rules(rules)

    om_t = _transfer(om, tf, 1, conv)
    re_t = _transfer(re_u, tf, 1, conv)
    im_t = _transfer(im_u, tf, 1, conv)
    dtf = tf.one_form(INTERVAL_LABEL)

    s = trig_sin(d)
    cth = trig_cos(d)
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    phi = dtf.wedge(om_t) * s2 + re_t * (s3 * cth) - im_t * s4
    psi = (om_t.wedge(om_t) * (s4 * F(1, 2))
           - dtf.wedge(re_t) * s4 - dtf.wedge(im_t) * (s3 * cth))

    d_psi = psi.d()
    if not d_psi.is_zero:
        raise TorsionConsistencyError("the interval dual 4-form fails to close")
    d_phi = phi.d()
    tau1 = _proportionality(d_phi, psi)
    return SineConeStructure(tf, phi, psi, d_phi, tau1, gram)


# ---------------------------------------------------------------------------
# Grid report
# ---------------------------------------------------------------------------

@dataclass
class SineConeReport:
    """Numeric torsion survey of the squashed interval structure."""
    structure: SineConeStructure
    grid: tuple[float, ...]
    points: list[SineConePoint]
    marked: dict[str, SineConePoint]
    tau1_exact: float
    tau1_spread: float
    max_tau7_norm: float
    max_tau14_norm: float
    max_tau27_norm: float
    max_dual_residual: float
    midpoint_metric_residual: float

    def to_dict(self) -> dict:
        return {
            "tau1_exact": self.tau1_exact,
            "tau1_spread": self.tau1_spread,
            "max_tau7_norm": self.max_tau7_norm,
            "max_tau14_norm": self.max_tau14_norm,
            "max_tau27_norm": self.max_tau27_norm,
            "max_dual_residual": self.max_dual_residual,
            "midpoint_metric_residual": self.midpoint_metric_residual,
            "marked": {k: p.as_dict() for k, p in self.marked.items()},
            "grid_size": len(self.grid),
        }


def sine_cone_report(structure: SineConeStructure, grid_points: int = 64) -> SineConeReport:
    grid = tuple(np.linspace(0.0, math.pi, grid_points + 2)[1:-1])
    points = [structure.torsion_at(t) for t in grid]
    marked = {name: structure.torsion_at(t) for name, t in MARKED_POINTS.items()}
    sample = points + list(marked.values())
    tau1_exact = float(structure.tau1_exact)
    return SineConeReport(
        structure=structure,
        grid=grid,
        points=points,
        marked=marked,
        tau1_exact=tau1_exact,
        tau1_spread=max(abs(p.tau1 - tau1_exact) for p in sample),
        max_tau7_norm=max(p.tau7_norm for p in sample),
        max_tau14_norm=max(p.tau14_norm for p in sample),
        max_tau27_norm=max(p.tau27_norm for p in sample),
        max_dual_residual=max(p.dual_residual for p in sample),
        midpoint_metric_residual=marked["pi/2"].metric_residual,
    )


def sine_cone_model(ring: Ring | None = None, ansatz=None,
                    grid_points: int = 64) -> SineConeReport:
    """Default squashed-interval model over the torsion-free cone cross-section."""
    anz = ansatz if ansatz is not None else bryant_salamon(ring)
    link = link_of_cone(anz)
    structure = sine_cone(link)
    return sine_cone_report(structure, grid_points=grid_points)
