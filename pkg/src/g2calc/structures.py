"""SU(3), G2 and SU(2) structures with exact torsion extraction.

Torsion components are extracted by wedge-and-star projector formulas and
then cross-checked: every scalar or 1-form component that can be read off
two independent ways must agree exactly, every remainder must satisfy its
type-membership identities, and the structure equations must reassemble
exactly from the extracted multiplet.  Any mismatch raises
TorsionConsistencyError rather than returning a silently wrong multiplet.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from typing import Sequence

from .exterior import Coframe, FormExpr, Metric, hodge, inner, norm_sq


class DecompositionError(ValueError):
    """A remainder failed its type-membership identities."""


class TorsionConsistencyError(ValueError):
    """Two independent extraction routes disagreed, or reassembly failed."""


def _scalar_of(form0: FormExpr):
    """Coefficient of a 0-form."""
    if form0.degree != 0:
        raise ValueError("expected a 0-form")
    return form0.coefficient(())


# ---------------------------------------------------------------------------
# SU(3)-structures on six labels
# ---------------------------------------------------------------------------

class SU3Structure:
    """Almost Hermitian SU(3) data (omega, Upsilon) with its metric.

    omega is the Hermitian 2-form, re_u + i*im_u the complex volume form,
    metric the 6x6 block over `on` (default: all frame labels).  The
    compatibility axioms are checked by validate(); J is derived from the
    metric and omega and squares to -1 on 1-forms.
    """

    def __init__(self, frame: Coframe, omega: FormExpr, re_u: FormExpr, im_u: FormExpr,
                 metric_mat: Sequence[Sequence], on: Sequence[int] | None = None,
                 orientation: int = 1):
        self.frame = frame
        self.omega = omega
        self.re_u = re_u
        self.im_u = im_u
        self.on = tuple(sorted(on)) if on is not None else tuple(range(frame.n))
        if len(self.on) != 6:
            raise ValueError("SU(3)-structures need six labels")
        self.metric = Metric(frame, metric_mat, on=self.on, orientation=orientation)
        # Calibrate the orientation against omega^3 = +6 vol, so label order
        # never has to match the complex orientation.
        if omega.wedge(omega).wedge(omega) == self.metric.vol() * (-6):
            self.metric = Metric(frame, metric_mat, on=self.on,
                                 orientation=-orientation)

    # -- stars and norms ----------------------------------------------------
    def star(self, a: FormExpr) -> FormExpr:
        return hodge(a, self.metric)

    def norm_sq(self, a: FormExpr):
        return norm_sq(a, self.metric)

    def inner(self, a: FormExpr, b: FormExpr):
        return inner(a, b, self.metric)

    def vol(self) -> FormExpr:
        return self.metric.vol()

    # -- musical isomorphisms and J ------------------------------------------
    def sharp(self, alpha: FormExpr) -> list:
        """Vector components (over the full frame) of a 1-form on `on`."""
        if alpha.degree != 1:
            raise ValueError("sharp takes a 1-form")
        inv = self.metric.inverse()
        pos = {lab: p for p, lab in enumerate(self.on)}
        zero = self.frame.coerce(0)
        out = [zero] * self.frame.n
        for (i,), c in alpha.comps.items():
            pi = pos[i]
            for j in self.on:
                out[j] = out[j] + inv[pos[j]][pi] * c
        return out

    def J(self, alpha: FormExpr) -> FormExpr:
        """J on 1-forms: the flat of J applied to the sharp of alpha."""
        return self.omega.contract(self.sharp(alpha))

    def contract_sharp(self, alpha: FormExpr, form: FormExpr) -> FormExpr:
        """Interior product of `form` with the vector dual to `alpha`."""
        return form.contract(self.sharp(alpha))

    # -- axioms ---------------------------------------------------------------
    def validate(self) -> None:
        """Check the defining compatibility and normalization axioms."""
        om, re_u, im_u = self.omega, self.re_u, self.im_u
        vol = self.vol()
        checks = [
            ("omega^Re", om.wedge(re_u).is_zero),
            ("omega^Im", om.wedge(im_u).is_zero),
            ("omega^3", om.wedge(om).wedge(om) == vol * 6),
            ("Re^Im", re_u.wedge(im_u) == vol * 4),
            ("star omega", self.star(om) == om.wedge(om) * F(1, 2)),
            ("star Re", self.star(re_u) == im_u),
            ("star Im", self.star(im_u) == -re_u),
            ("|omega|^2", self.norm_sq(om) == self.frame.coerce(3)),
            ("|Re|^2", self.norm_sq(re_u) == self.frame.coerce(4)),
            ("|Im|^2", self.norm_sq(im_u) == self.frame.coerce(4)),
        ]
        for i in self.on:
            e = self.frame.basis((i,))
            jj = self.J(self.J(e))
            checks.append((f"J^2 e{i}", jj == -e))
        bad = [name for name, ok in checks if not ok]
        if bad:
            raise DecompositionError(f"SU(3) axioms failed: {', '.join(bad)}")


def standard_su3(frame: Coframe, on: Sequence[int] | None = None,
                 metric_mat: Sequence[Sequence] | None = None) -> SU3Structure:
    """The constant-coefficient model structure on six labels."""
    on = tuple(sorted(on)) if on is not None else tuple(range(frame.n))
    a, b, c, d, e, f = on

    def w(*legs):
        return frame.basis(legs)

    omega = w(a, b) + w(c, d) + w(e, f)
    re_u = w(a, c, e) - w(a, d, f) - w(b, c, f) - w(b, d, e)
    im_u = w(a, c, f) + w(a, d, e) + w(b, c, e) - w(b, d, f)
    if metric_mat is None:
        metric_mat = [[1 if i == j else 0 for j in range(6)] for i in range(6)]
    return SU3Structure(frame, omega, re_u, im_u, metric_mat, on=on)


@dataclass
class TwoFormParts:
    """beta = lam * omega + (x_flat)# . Re(Upsilon) + sigma8."""
    lam: object
    x_flat: FormExpr
    sigma8: FormExpr


@dataclass
class ThreeFormParts:
    """beta = f_re * Re + f_im * Im + x_flat ^ omega + gamma12."""
    f_re: object
    f_im: object
    x_flat: FormExpr
    gamma12: FormExpr


def decompose_2form(beta: FormExpr, su3: SU3Structure, validate: bool = True) -> TwoFormParts:
    """Split a 2-form into its scalar, 6- and 8-dimensional type parts."""
    om = su3.omega
    om_sq = om.wedge(om)
    lam = _scalar_of(su3.star(beta.wedge(om_sq))) / su3.frame.coerce(6)
    x_flat = -su3.J(su3.star(beta.wedge(su3.re_u))) * F(1, 2)
    sigma = beta - om * lam - su3.contract_sharp(x_flat, su3.re_u)
    if validate:
        bad = []
        if not sigma.wedge(om_sq).is_zero:
            bad.append("sigma^omega^2")
        if not sigma.wedge(su3.re_u).is_zero:
            bad.append("sigma^Re")
        if not sigma.wedge(su3.im_u).is_zero:
            bad.append("sigma^Im")
        if bad:
            raise DecompositionError(f"2-form remainder not of type 8: {', '.join(bad)}")
    return TwoFormParts(lam, x_flat, sigma)


def decompose_3form(beta: FormExpr, su3: SU3Structure, validate: bool = True) -> ThreeFormParts:
    """Split a 3-form into Re/Im multiples, the wedge part and type 12."""
    om = su3.omega
    f_re = _scalar_of(su3.star(beta.wedge(su3.im_u))) / su3.frame.coerce(4)
    f_im = -(_scalar_of(su3.star(beta.wedge(su3.re_u))) / su3.frame.coerce(4))
    x_flat = -su3.J(su3.star(beta.wedge(om))) * F(1, 2)
    gamma = beta - su3.re_u * f_re - su3.im_u * f_im - x_flat.wedge(om)
    if validate:
        bad = []
        if not gamma.wedge(om).is_zero:
            bad.append("gamma^omega")
        if not gamma.wedge(su3.re_u).is_zero:
            bad.append("gamma^Re")
        if not gamma.wedge(su3.im_u).is_zero:
            bad.append("gamma^Im")
        if bad:
            raise DecompositionError(f"3-form remainder not of type 12: {', '.join(bad)}")
    return ThreeFormParts(f_re, f_im, x_flat, gamma)


@dataclass
class SU3Torsion:
    """Intrinsic torsion multiplet of an SU(3)-structure.

    d omega  = 3 u1 Re + 3 u1h Im + u6 ^ omega + u12
    d Re     = 2 u1h omega^2 + u6h ^ Re + u8 ^ omega
    d Im     = -2 u1 omega^2 + u6h ^ Im + u8h ^ omega
    """
    u1: object
    u1h: object
    u6: FormExpr
    u6h: FormExpr
    u8: FormExpr
    u8h: FormExpr
    u12: FormExpr


def su3_torsion(su3: SU3Structure, d_omega: FormExpr | None = None,
                d_re: FormExpr | None = None, d_im: FormExpr | None = None) -> SU3Torsion:
    """Extract the torsion multiplet, cross-checking every shared component.

    The exterior derivatives default to the frame's structure equations but
    can be supplied directly (circle-invariant models build them from
    evolution data rather than a 6-dimensional frame differential).
    """
    om = su3.omega
    om_sq = om.wedge(om)
    d_om = d_omega if d_omega is not None else om.d()
    d_re = d_re if d_re is not None else su3.re_u.d()
    d_im = d_im if d_im is not None else su3.im_u.d()

    p3 = decompose_3form(d_om, su3)
    u1 = p3.f_re / su3.frame.coerce(3)
    u1h = p3.f_im / su3.frame.coerce(3)
    u6 = p3.x_flat
    u12 = p3.gamma12

    p_re = decompose_2form(su3.star(d_re), su3)
    u1h_b = p_re.lam / su3.frame.coerce(4)
    u6h_re = -su3.J(p_re.x_flat)
    u8 = -p_re.sigma8

    p_im = decompose_2form(su3.star(d_im), su3)
    u1_b = -(p_im.lam / su3.frame.coerce(4))
    u6h_im = p_im.x_flat
    u8h = -p_im.sigma8

    if not (u1 - u1_b).is_zero:
        raise TorsionConsistencyError(
            f"u1 mismatch between d(omega) and d(Im) routes: {u1} vs {u1_b}")
    if not (u1h - u1h_b).is_zero:
        raise TorsionConsistencyError(
            f"u1h mismatch between d(omega) and d(Re) routes: {u1h} vs {u1h_b}")
    if not (u6h_re - u6h_im).is_zero:
        raise TorsionConsistencyError("u6h mismatch between d(Re) and d(Im) routes")
    u6h = u6h_im

    re_build = om_sq * (u1h * 2) + u6h.wedge(su3.re_u) + u8.wedge(om)
    if re_build != d_re:
        raise TorsionConsistencyError("d(Re) does not reassemble from the multiplet")
    im_build = om_sq * (u1 * (-2)) + u6h.wedge(su3.im_u) + u8h.wedge(om)
    if im_build != d_im:
        raise TorsionConsistencyError("d(Im) does not reassemble from the multiplet")
    om_build = su3.re_u * (u1 * 3) + su3.im_u * (u1h * 3) + u6.wedge(om) + u12
    if om_build != d_om:
        raise TorsionConsistencyError("d(omega) does not reassemble from the multiplet")
    return SU3Torsion(u1, u1h, u6, u6h, u8, u8h, u12)


# ---------------------------------------------------------------------------
# G2-structures on seven labels
# ---------------------------------------------------------------------------

class G2Structure:
    """A positive 3-form with its compatible metric on seven labels.

    The orientation is calibrated exactly: the metric bilinear of the
    3-form fixes (E.phi)^(E.phi)^phi = 6 g(E,E) vol, and the sign of the
    volume form is chosen so this holds with +6.  psi is the Hodge dual.
    """

    def __init__(self, frame: Coframe, phi: FormExpr, metric_mat: Sequence[Sequence],
                 on: Sequence[int] | None = None):
        self.frame = frame
        self.phi = phi
        self.on = tuple(sorted(on)) if on is not None else tuple(range(frame.n))
        if len(self.on) != 7:
            raise ValueError("G2-structures need seven labels")
        base = Metric(frame, metric_mat, on=self.on, orientation=1)
        i0 = self.on[0]
        e0 = [0] * frame.n
        e0[i0] = 1
        ixphi = phi.contract(e0)
        w = ixphi.wedge(ixphi).wedge(phi)
        c = w.coefficient(self.on)
        denom = base.mat[0][0] * base.sqrt_det() * 6
        ratio = c / denom
        one = frame.coerce(1)
        if ratio == one:
            orientation = 1
        elif ratio == -one:
            orientation = -1
        else:
            raise ValueError(
                f"metric is not the metric of this 3-form: bilinear ratio {ratio}")
        self.metric = Metric(frame, metric_mat, on=self.on, orientation=orientation)
        self.psi = hodge(phi, self.metric)

    def star(self, a: FormExpr) -> FormExpr:
        return hodge(a, self.metric)

    def norm_sq(self, a: FormExpr):
        return norm_sq(a, self.metric)

    def inner(self, a: FormExpr, b: FormExpr):
        return inner(a, b, self.metric)

    def vol(self) -> FormExpr:
        return self.metric.vol()

    def verify_metric_compatibility(self) -> None:
        """Check (Ei.phi)^(Ej.phi)^phi = 6 g_ij vol for all label pairs."""
        frame = self.frame
        vol6 = self.vol() * 6
        cache = {}
        for p, i in enumerate(self.on):
            ei = [0] * frame.n
            ei[i] = 1
            cache[i] = self.phi.contract(ei)
        for p, i in enumerate(self.on):
            for q in range(p, 7):
                j = self.on[q]
                w = cache[i].wedge(cache[j]).wedge(self.phi)
                want = vol6 * self.metric.mat[p][q]
                if w != want:
                    raise ValueError(f"metric incompatibility at pair ({i}, {j})")

    def torsion(self, d_phi: FormExpr | None = None,
                d_psi: FormExpr | None = None) -> "G2Torsion":
        return g2_torsion(self, d_phi=d_phi, d_psi=d_psi)


@dataclass
class G2Torsion:
    """Torsion of a G2-structure.

    d phi = tau1 psi + 3 tau7 ^ phi + star(tau27)
    d psi = 4 tau7 ^ psi + star(tau14)
    """
    tau1: object
    tau7: FormExpr
    tau14: FormExpr
    tau27: FormExpr

    def parts(self):
        return {"tau1": self.tau1, "tau7": self.tau7,
                "tau14": self.tau14, "tau27": self.tau27}


def g2_torsion(g2: G2Structure, d_phi: FormExpr | None = None,
               d_psi: FormExpr | None = None) -> G2Torsion:
    """Extract (tau1, tau7, tau14, tau27), checking the dual route and types.

    tau14 is computed both from the codifferential formula and by
    subtracting the tau7 part of d(psi); the two must agree exactly.
    """
    frame = g2.frame
    phi, psi = g2.phi, g2.psi
    d_phi = d_phi if d_phi is not None else phi.d()
    d_psi = d_psi if d_psi is not None else psi.d()

    tau1 = _scalar_of(g2.star(d_phi.wedge(phi))) / frame.coerce(7)
    tau7 = -(g2.star(g2.star(d_phi).wedge(phi)) * F(1, 12))

    codiff = -(g2.star(d_psi))  # codifferential of phi as a 2-form
    tau14_a = (g2.star(d_psi) * 2 + g2.star(codiff.wedge(phi))) * F(1, 3)
    tau14_b = g2.star(d_psi) - g2.star(tau7.wedge(psi)) * 4
    if tau14_a != tau14_b:
        diff = tau14_a - tau14_b
        raise TorsionConsistencyError(
            f"tau14 routes disagree; residual {diff}")
    tau14 = tau14_b

    tau27 = g2.star(d_phi - psi * tau1 - tau7.wedge(phi) * 3)

    bad = []
    if tau14.wedge(phi) != -g2.star(tau14):
        bad.append("tau14^phi = -star(tau14)")
    if not tau14.wedge(psi).is_zero:
        bad.append("tau14^psi = 0")
    if not tau27.wedge(phi).is_zero:
        bad.append("tau27^phi = 0")
    if not tau27.wedge(psi).is_zero:
        bad.append("tau27^psi = 0")
    if d_psi != tau7.wedge(psi) * 4 + g2.star(tau14):
        bad.append("d(psi) reassembly")
    if d_phi != psi * tau1 + tau7.wedge(phi) * 3 + g2.star(tau27):
        bad.append("d(phi) reassembly")
    if bad:
        raise TorsionConsistencyError(f"torsion checks failed: {', '.join(bad)}")
    return G2Torsion(tau1, tau7, tau14, tau27)


def torsion_norms(g2: G2Structure, tors: G2Torsion) -> dict:
    """Pointwise squared norms of the four torsion components."""
    t1sq = tors.tau1 * tors.tau1
    return {
        "tau1_sq": t1sq,
        "tau7_norm_sq": g2.norm_sq(tors.tau7) if not tors.tau7.is_zero else g2.frame.coerce(0),
        "tau14_norm_sq": g2.norm_sq(tors.tau14) if not tors.tau14.is_zero else g2.frame.coerce(0),
        "tau27_norm_sq": g2.norm_sq(tors.tau27) if not tors.tau27.is_zero else g2.frame.coerce(0),
    }


def conformal_transform(g2: G2Structure, f) -> G2Structure:
    """Scale by a positive factor: phi -> f^3 phi, g -> f^2 g."""
    f = g2.frame.coerce(f)
    f3 = f * f * f
    new_phi = g2.phi * f3
    ff = f * f
    new_mat = [[entry * ff for entry in row] for row in g2.metric.mat]
    return G2Structure(g2.frame, new_phi, new_mat, on=g2.on)


def closed_coclosed(g2: G2Structure, d_phi: FormExpr | None = None,
                    d_psi: FormExpr | None = None) -> tuple[bool, bool]:
    d_phi = d_phi if d_phi is not None else g2.phi.d()
    d_psi = d_psi if d_psi is not None else g2.psi.d()
    return d_phi.is_zero, d_psi.is_zero


# ---------------------------------------------------------------------------
# SU(2)-structures on five labels
# ---------------------------------------------------------------------------

class SU2Structure:
    """Contact quadruple (eta, om1, om2, om3) on five labels.

    The three 2-forms satisfy om_i ^ om_j = 2 delta_ij v with v = om1^2 / 2,
    and the horizontal metric is recovered from the 4-form identity
    g_H(X, Y) v = om1 ^ (X . om2) ^ (Y . om3); the full metric adds eta^2.
    """

    def __init__(self, frame: Coframe, eta: FormExpr, om1: FormExpr, om2: FormExpr,
                 om3: FormExpr, on: Sequence[int] | None = None):
        self.frame = frame
        self.eta = eta
        self.om = (om1, om2, om3)
        self.on = tuple(sorted(on)) if on is not None else tuple(range(frame.n))
        if len(self.on) != 5:
            raise ValueError("SU(2)-structures need five labels")

    def volume4(self) -> FormExpr:
        return self.om[0].wedge(self.om[0]) * F(1, 2)

    def validate_wedge_axioms(self) -> None:
        v = self.volume4()
        if v.is_zero or self.eta.wedge(v).is_zero:
            raise DecompositionError("degenerate contact volume")
        for i in range(3):
            for j in range(3):
                w = self.om[i].wedge(self.om[j])
                want = v * 2 if i == j else self.frame.zero_form(4)
                if w != want:
                    raise DecompositionError(f"om{i+1}^om{j+1} axiom failed")

    def metric_matrix(self) -> list[list]:
        """5x5 metric over `on` from the quaternionic 4-form identity."""
        frame = self.frame
        top = tuple(self.on)
        vol5 = self.eta.wedge(self.volume4())
        denom = vol5.coefficient(top)
        contractions2 = {}
        contractions3 = {}
        for i in self.on:
            ei = [0] * frame.n
            ei[i] = 1
            contractions2[i] = self.om[1].contract(ei)
            contractions3[i] = self.om[2].contract(ei)
        k = len(self.on)
        g = [[None] * k for _ in range(k)]
        for p, i in enumerate(self.on):
            for q, j in enumerate(self.on):
                w = self.eta.wedge(self.om[0]).wedge(contractions2[i]).wedge(contractions3[j])
                gh = w.coefficient(top) / denom
                g[p][q] = gh + self.eta.coefficient((i,)) * self.eta.coefficient((j,))
        for p in range(k):
            for q in range(k):
                if not (g[p][q] - g[q][p]).is_zero:
                    raise DecompositionError("horizontal metric is not symmetric")
        return g

    def hypo_residuals(self) -> dict[str, FormExpr]:
        """Closure conditions: d(om1), d(om2 ^ eta), d(om3 ^ eta)."""
        return {
            "d_om1": self.om[0].d(),
            "d_om2_eta": self.om[1].wedge(self.eta).d(),
            "d_om3_eta": self.om[2].wedge(self.eta).d(),
        }

    def sasaki_einstein_residuals(self, a=2, b=3) -> dict[str, FormExpr]:
        """Residuals of d(eta) = a om1, d(om2) = -b om3^eta, d(om3) = b om2^eta."""
        return {
            "d_eta": self.eta.d() - self.om[0] * a,
            "d_om2": self.om[1].d() + self.om[2].wedge(self.eta) * b,
            "d_om3": self.om[2].d() - self.om[1].wedge(self.eta) * b,
        }


# ---------------------------------------------------------------------------
# Circle-invariant G2-structures from SU(3) data
# ---------------------------------------------------------------------------

def g2_from_su3_circle(frame: Coframe, omega: FormExpr, re_u: FormExpr, im_u: FormExpr,
                       metric6: Sequence[Sequence], basic_on: Sequence[int],
                       theta_leg: FormExpr, t, check_dual: bool = True) -> G2Structure:
    """Assemble phi = (t theta) ^ omega + Re over basic legs plus a circle leg.

    theta_leg is the connection 1-form (unit length 1/t); the metric is the
    basic 6-metric plus t^2 theta x theta.  The standard dual formula
    psi = omega^2/2 - (t theta) ^ Im is verified against the computed star.
    """
    basic_on = tuple(sorted(basic_on))
    theta_idxs = sorted(theta_leg.legs() - set(basic_on))
    support = tuple(sorted(set(basic_on) | theta_leg.legs()))
    if len(support) < 7:
        raise ValueError("need seven independent legs for the total space")
    t = frame.coerce(t)
    phi = (theta_leg * t).wedge(omega) + re_u
    tsq = t * t
    pos = {lab: p for p, lab in enumerate(support)}
    zero = frame.coerce(0)
    k = len(support)
    mat = [[zero] * k for _ in range(k)]
    bpos = {lab: p for p, lab in enumerate(basic_on)}
    for i in basic_on:
        for j in basic_on:
            mat[pos[i]][pos[j]] = frame.coerce(metric6[bpos[i]][bpos[j]])
    for (i,), ci in theta_leg.comps.items():
        for (j,), cj in theta_leg.comps.items():
            mat[pos[i]][pos[j]] = mat[pos[i]][pos[j]] + tsq * ci * cj
    g2 = G2Structure(frame, phi, mat, on=support)
    if check_dual:
        psi_formula = omega.wedge(omega) * F(1, 2) - (theta_leg * t).wedge(im_u)
        if g2.psi != psi_formula:
            raise TorsionConsistencyError(
                "computed star(phi) does not match omega^2/2 - t theta ^ Im")
    return g2


def basic_hodge(alpha: FormExpr, g2: G2Structure, theta_leg: FormExpr, t) -> FormExpr:
    """Quotient Hodge star of a basic form via the total-space star.

    star_6(alpha) = (-1)^deg star_7(alpha ^ t theta) for forms with no
    component along the circle direction.
    """
    t = g2.frame.coerce(t)
    out = hodge(alpha.wedge(theta_leg * t), g2.metric)
    return out if alpha.degree % 2 == 0 else -out
