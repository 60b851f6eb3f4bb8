"""Cohomogeneity-one models over the product of two 3-spheres.

The 7-dimensional total space is a ray crossed with S^3 x S^3, carrying a
two-parameter family of invariant SU(2)-structures on the link plus a
one-parameter connection form.  Everything is exact: frame structure
constants are calibrated once against the Sasaki-Einstein normalization,
the invariant 3-form and its dual are assembled in closed form, and the
closed/co-closed conditions are derived as polynomial constraint sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Sequence

import numpy as np

from .circle import CircleBundleData, ThetaCurvature, decompose_theta_curvature
from .exterior import Coframe, FormExpr, Metric, hodge, norm_sq
from .scalars import QuadNum, Ring, ScalarExpr
from .structures import (
    G2Structure,
    SU2Structure,
    SU3Structure,
    SU3Torsion,
    TorsionConsistencyError,
    g2_from_su3_circle,
    su3_torsion,
)

LABELS = ("dt", "up", "um", "v1", "w1", "v2", "w2")
BASIC = (0, 2, 3, 4, 5, 6)   # everything except the circle direction u+
LINK = (2, 3, 4, 5, 6)       # the 5-dimensional link directions

MC_CANDIDATES = (F(1, 2), F(1))


def _sphere_frame(ring: Ring, eps: F) -> Coframe:
    """Frame with both spheres' Maurer-Cartan rules at scale eps."""
    fr = Coframe(LABELS, ring, radial="dt", mc_scale=eps)
    e = fr.basis
    m4 = ring.const(4 * eps)
    m2 = ring.const(2 * eps)
    fr.set_d_rules({
        # du+- = -2 eps (v1^w1 +- v2^w2)
        "up": -(e((3, 4)) + e((5, 6))) * m2,
        "um": -(e((3, 4)) - e((5, 6))) * m2,
        # dv = -4 eps w^u and dw = -4 eps u^v per sphere, in +-/difference legs
        "v1": (e((1, 4)) + e((2, 4))) * m4,
        "w1": -(e((1, 3)) + e((2, 3))) * m4,
        "v2": (e((1, 6)) - e((2, 6))) * m4,
        "w2": -(e((1, 5)) - e((2, 5))) * m4,
    })
    return fr


@dataclass
class SEData:
    """Normalized Sasaki-Einstein link forms and the self-dual/anti-self-dual
    wedge table they generate."""
    eta: FormExpr
    theta: FormExpr
    om0: FormExpr
    om1: FormExpr
    om2: FormExpr
    om3: FormExpr
    v4: FormExpr

    @property
    def om(self):
        return (self.om0, self.om1, self.om2, self.om3)


def se_data(frame: Coframe) -> SEData:
    e = frame.basis
    q43 = F(4, 3)
    q23 = F(2, 3)
    return SEData(
        eta=frame.one_form("um") * q43,
        theta=frame.one_form("up") * q43,
        om0=(e((3, 4)) + e((5, 6))) * q23,
        om1=-(e((3, 4)) - e((5, 6))) * q23,
        om2=(e((3, 5)) + e((4, 6))) * q23,
        om3=(e((3, 6)) - e((4, 5))) * q23,
        v4=-(e((3, 4, 5, 6))) * F(4, 9),
    )


@dataclass
class CalibrationReport:
    selected: F | None
    tried: dict   # eps -> dict of residual strings


def calibrate_mc(ring: Ring | None = None) -> tuple[Coframe, CalibrationReport]:
    """Pick the structure-constant scale that realizes the Sasaki-Einstein
    normalization d(eta) = 2 om1, d(om2) = -3 om3 ^ eta on the link."""
    rg = ring or Ring(d=3)
    tried = {}
    for eps in MC_CANDIDATES:
        fr = _sphere_frame(rg, eps)
        se = se_data(fr)
        su2 = SU2Structure(fr, se.eta, se.om1, se.om2, se.om3, on=LINK)
        res = su2.sasaki_einstein_residuals(a=2, b=3)
        tried[eps] = {name: str(r) for name, r in res.items() if not r.is_zero}
        if all(r.is_zero for r in res.values()):
            _wedge_table_self_test(fr, se)
            return fr, CalibrationReport(eps, tried)
    raise TorsionConsistencyError(
        f"no Maurer-Cartan scale in {MC_CANDIDATES} matches the link normalization: {tried}")


def _wedge_table_self_test(frame: Coframe, se: SEData) -> None:
    """The four link 2-forms must wedge to the signature (-,+,+,+) table."""
    oms = se.om
    signs = (-1, 1, 1, 1)
    for i in range(4):
        for j in range(4):
            w = oms[i].wedge(oms[j])
            want = se.v4 * (2 * signs[i]) if i == j else frame.zero_form(4)
            if w != want:
                raise TorsionConsistencyError(f"wedge table broken at ({i}, {j})")


def lorentz_rows_residuals(A: Sequence[Sequence], ring: Ring) -> list:
    """Residuals of the spacelike-orthonormality conditions for rows 1..3.

    Row r of A (a 3x4 array) must satisfy -A_r0^2 + sum_k A_rk^2 = 1 and
    distinct rows must be orthogonal in the (-,+,+,+) pairing.
    """
    out = []
    rows = [[ring.const(x) if not isinstance(x, ScalarExpr) else x for x in row]
            for row in A]
    for i in range(3):
        for j in range(i, 3):
            dot = -(rows[i][0] * rows[j][0])
            for kk in range(1, 4):
                dot = dot + rows[i][kk] * rows[j][kk]
            want = ring.one if i == j else ring.zero
            out.append(dot - want)
    return out


@dataclass
class InvariantAnsatz:
    """Invariant structure: link SU(2) data scaled by (lam, mu, A), the
    connection theta = alpha eta_se + k theta_se, and the cone 3-form."""
    frame: Coframe
    ring: Ring
    lam: ScalarExpr
    mu: ScalarExpr
    k: ScalarExpr
    alpha: ScalarExpr
    A: list
    se: SEData
    eta: FormExpr
    om1: FormExpr
    om2: FormExpr
    om3: FormExpr
    theta: FormExpr
    su2: SU2Structure
    omega_c: FormExpr
    re_c: FormExpr
    im_c: FormExpr
    phi: FormExpr
    psi: FormExpr
    g2: G2Structure | None = None

    def d_phi(self) -> FormExpr:
        return self.phi.d()

    def d_psi(self) -> FormExpr:
        return self.psi.d()


def invariant_ansatz(lam, mu, k, alpha=0, A=None, ring: Ring | None = None,
                     build_g2: bool = True, check_lorentz: bool = True,
                     frame: Coframe | None = None) -> InvariantAnsatz:
    """Assemble the invariant G2 ansatz from link parameters.

    lam scales eta, mu and the 3x4 row matrix A rotate/scale the triplet of
    link 2-forms inside the (-,+,+,+) wedge lattice, alpha and k set the
    connection.  With build_g2 the compatible metric and exact Hodge dual
    are constructed and the dual formula is verified.
    """
    if ring is None:
        for cand in (lam, mu, k, alpha):
            if isinstance(cand, ScalarExpr):
                ring = cand.ring
                break
    if frame is None:
        frame, _ = calibrate_mc(ring)
    elif ring is not None and frame.ring is not ring:
        raise ValueError("frame and scalar parameters use different rings")
    rg = frame.ring
    se = se_data(frame)

    def sc(x):
        return x if isinstance(x, ScalarExpr) else rg.const(x)

    lam, mu, k, alpha = sc(lam), sc(mu), sc(k), sc(alpha)
    if A is None:
        A = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    A = [[sc(x) for x in row] for row in A]
    if check_lorentz:
        bad = [str(r) for r in lorentz_rows_residuals(A, rg) if not r.is_zero]
        if bad:
            raise ValueError(f"A rows are not Lorentz-orthonormal: {bad}")

    oms = se.om
    def row_form(i):
        out = frame.zero_form(2)
        for j in range(4):
            if not A[i][j].is_zero:
                out = out + oms[j] * (mu * A[i][j])
        return out

    eta = se.eta * lam
    om1, om2, om3 = row_form(0), row_form(1), row_form(2)
    theta = se.eta * alpha + se.theta * k
    d_theta_expected = (frame.one_form("dt").wedge(se.eta) * alpha.deriv()
                        + (se.om[1] * alpha - se.om[0] * k) * 2)
    if theta.d() != d_theta_expected:
        raise TorsionConsistencyError(
            "connection curvature disagrees with its closed form "
            "a'dt^eta + 2(a w1 - k w0)")
    su2 = SU2Structure(frame, eta, om1, om2, om3, on=LINK)

    t = rg.t()
    dt = frame.one_form("dt")
    t2, t3 = t * t, t * t * t
    omega_c = dt.wedge(eta) * t + om1 * t2
    re_c = dt.wedge(om2) * t2 - eta.wedge(om3) * t3
    im_c = eta.wedge(om2) * t3 + dt.wedge(om3) * t2
    phi = theta.wedge(omega_c) * t + re_c
    psi = omega_c.wedge(omega_c) * F(1, 2) - theta.wedge(im_c) * t

    g2 = None
    if build_g2:
        gP = su2.metric_matrix()
        zero = rg.zero
        g6 = [[zero] * 6 for _ in range(6)]
        g6[0][0] = rg.one
        for p in range(5):
            for q in range(5):
                g6[p + 1][q + 1] = gP[p][q] * t2
        g2 = g2_from_su3_circle(frame, omega_c, re_c, im_c, g6, basic_on=BASIC,
                                theta_leg=theta, t=t, check_dual=False)
        if g2.psi != psi:
            raise TorsionConsistencyError(
                "exact Hodge dual disagrees with the cone dual formula")
    return InvariantAnsatz(frame, rg, lam, mu, k, alpha, A, se, eta, om1, om2, om3,
                           theta, su2, omega_c, re_c, im_c, phi, psi, g2)


# ---------------------------------------------------------------------------
# The torsion-free solution and its gauge family
# ---------------------------------------------------------------------------

def _s3(ring: Ring) -> ScalarExpr:
    return ring.sqrt_d


def bryant_salamon_parameters(ring: Ring | None = None) -> dict:
    """Exact parameter values of the torsion-free member (canonical gauge)."""
    rg = ring or Ring(d=3)
    if rg.d != 3:
        raise ValueError("the torsion-free solution needs sqrt(3): use a ring with d = 3")
    s3 = _s3(rg)
    third = rg.const(F(1, 3))
    return {
        "lam": s3 * F(1, 2),
        "mu": s3 * third,
        "k": rg.const(F(1, 2)),
        "alpha": rg.zero,
        "A": [
            [rg.zero, rg.one, rg.zero, rg.zero],
            [rg.zero, rg.zero, rg.one, rg.zero],
            [-(s3 * third), rg.zero, rg.zero, s3 * F(2, 3)],
        ],
    }


def bryant_salamon(ring: Ring | None = None, gauge: int = 1,
                   frame: Coframe | None = None) -> InvariantAnsatz:
    """The torsion-free cone solution; gauge = -1 flips (k, A_30)."""
    p = bryant_salamon_parameters(ring)
    if gauge == -1:
        p["k"] = -p["k"]
        p["A"][2][0] = -p["A"][2][0]
    return invariant_ansatz(**p, frame=frame)


def torsion_free_family_point(p_frac: F, q_frac: F, ring: Ring | None = None) -> InvariantAnsatz:
    """A member of the circle of torsion-free solutions.

    (A_32, A_33) = (2/sqrt(3)) (p, q) with p^2 + q^2 = 1 rational, and
    (A_22, A_23) = (sqrt(3)/2)(A_33, -A_32).
    """
    rg = ring or Ring(d=3)
    if p_frac * p_frac + q_frac * q_frac != 1:
        raise ValueError("need a rational point on the unit circle")
    s3 = _s3(rg)
    two_over_s3 = s3 * F(2, 3)
    a32 = two_over_s3 * p_frac
    a33 = two_over_s3 * q_frac
    a22 = s3 * F(1, 2) * a33
    a23 = -(s3 * F(1, 2) * a32)
    base = bryant_salamon_parameters(rg)
    A = [
        [rg.zero, rg.one, rg.zero, rg.zero],
        [rg.zero, rg.zero, a22, a23],
        [base["A"][2][0], rg.zero, a32, a33],
    ]
    return invariant_ansatz(base["lam"], base["mu"], base["k"], rg.zero, A, ring=rg)


def _pythagorean(rng) -> tuple[F, F]:
    """Exact rational (cos, sin) on the unit circle."""
    u = F(rng.randint(-9, 9), rng.randint(1, 9))
    den = 1 + u * u
    return (1 - u * u) / den, 2 * u / den


def random_lorentz(seed: int) -> list[list[F]]:
    """Exact rational element of the identity component of O(1,3).

    Product of seeded rational boosts (cosh, sinh) = ((m + 1/m)/2,
    (m - 1/m)/2) and rational rotations; rows 1..3 feed the ansatz A.
    """
    import random
    rng = random.Random(seed)
    mat = [[F(1 if i == j else 0) for j in range(4)] for i in range(4)]

    def apply(plane, c, s, boost):
        i, j = plane
        for row in mat:
            xi, xj = row[i], row[j]
            if boost:
                row[i], row[j] = c * xi + s * xj, s * xi + c * xj
            else:
                row[i], row[j] = c * xi - s * xj, s * xi + c * xj

    for _ in range(rng.randint(2, 4)):
        which = rng.randrange(2)
        if which == 0:
            m = F(rng.randint(1, 9), rng.randint(1, 9))
            c, s = (m + 1 / m) / 2, (m - 1 / m) / 2
            apply((0, rng.randint(1, 3)), c, s, boost=True)
        else:
            c, s = _pythagorean(rng)
            i = rng.randint(1, 2)
            j = rng.randint(i + 1, 3)
            apply((i, j), c, s, boost=False)
    return mat


def cone_su3(a: InvariantAnsatz) -> SU3Structure:
    """Conical almost-Hermitian structure on the ray times the link.

    Metric dt^2 + t^2 g_link; the Sasaki-Einstein input (lam = mu = 1,
    identity A) gives a torsion-free structure.
    """
    rg = a.ring
    t2 = rg.t(2)
    gP = a.su2.metric_matrix()
    zero = rg.zero
    g6 = [[zero] * 6 for _ in range(6)]
    g6[0][0] = rg.one
    for p in range(5):
        for q in range(5):
            g6[p + 1][q + 1] = gP[p][q] * t2
    return SU3Structure(a.frame, a.omega_c, a.re_c, a.im_c, g6, on=BASIC)


def circle_reduction(a: InvariantAnsatz) -> tuple[CircleBundleData, ThetaCurvature, SU3Torsion]:
    """Basic data of the ansatz as a circle-invariant structure: the cone
    quotient structure, the curvature split of theta, and the quotient
    torsion multiplet."""
    su3 = cone_su3(a)
    curv = decompose_theta_curvature(a.theta.d(), su3)
    mult = su3_torsion(su3)
    t = a.ring.t()
    rho = a.frame.one_form("dt") / t
    return CircleBundleData(su3, t, a.theta, rho), curv, mult


def torsion_free_solutions(ring: Ring | None = None) -> list[InvariantAnsatz]:
    """Both sign branches of the exactly torsion-free member.

    (k, A_30) = (1/2, -sqrt(3)/3) and its gauge image (-1/2, +sqrt(3)/3);
    the remaining values lam = sqrt(3)/2, mu = sqrt(3)/3, alpha = 0 are
    shared.
    """
    rg = ring or Ring(d=3)
    plus = bryant_salamon(rg, gauge=1)
    return [plus, bryant_salamon(rg, gauge=-1, frame=plus.frame)]


# ---------------------------------------------------------------------------
# The one-parameter co-closed deformation
# ---------------------------------------------------------------------------

@dataclass
class GammaFamily:
    gamma_name: str
    base: InvariantAnsatz
    deformed: InvariantAnsatz

    @property
    def phi_difference(self) -> FormExpr:
        return self.deformed.phi - self.base.phi

    @property
    def psi_difference(self) -> FormExpr:
        return self.deformed.psi - self.base.psi


def gamma_family(ring: Ring | None = None, gamma_name: str = "gamma",
                 alpha_t_exponent: int = -3) -> GammaFamily:
    """Deform the torsion-free solution's connection by alpha = gamma t^p.

    p = -3 is the exponent forced by the radial part of the closure
    equation; other exponents are accepted so the failure can be exhibited.
    """
    rg = ring or Ring(d=3)
    rg.parameter(gamma_name, invertible=False)
    base = bryant_salamon(rg)
    p = bryant_salamon_parameters(rg)
    alpha = rg.monomial(1, {gamma_name: 1}, t_exp=alpha_t_exponent)
    deformed = invariant_ansatz(p["lam"], p["mu"], p["k"], alpha, p["A"], ring=rg,
                                frame=base.frame)
    return GammaFamily(gamma_name, base, deformed)


@dataclass
class RateReport:
    """Exact and fitted fall-off rates of a scalar quantity q(t) > 0.

    The exact exponents come from the leading term of the closed-form
    squared norm; the fits are log-log regressions over 13 dyadic samples
    toward each end.  nu is the fall-off rate relative to the reference
    cone (the exponent at infinity); a quantity that vanishes identically
    reports the string "zero" in both exponent slots.
    """
    name: str
    exponent_at_zero: int | str
    exponent_at_infinity: int | str
    fit_at_zero: float
    fit_residual_at_zero: float
    fit_at_infinity: float
    fit_residual_at_infinity: float
    nu: int | str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "exponent_at_zero": self.exponent_at_zero,
            "exponent_at_infinity": self.exponent_at_infinity,
            "fit_at_zero": self.fit_at_zero,
            "fit_residual_at_zero": self.fit_residual_at_zero,
            "fit_at_infinity": self.fit_at_infinity,
            "fit_residual_at_infinity": self.fit_residual_at_infinity,
            "nu": self.nu,
        }


def _dyadic_fit(norm_sq_expr: ScalarExpr, params: dict,
                toward_zero: bool) -> tuple[float, float]:
    """Log-log slope of sqrt(norm_sq) over 13 dyadic samples, with the
    maximum absolute regression residual."""
    exps = range(0, -13, -1) if toward_zero else range(0, 13)
    ts = [2.0 ** e for e in exps]
    xs = np.log([t for t in ts])
    ys = np.array([0.5 * np.log(norm_sq_expr.evaluate(t, params)) for t in ts])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.max(np.abs(ys - (slope * xs + intercept))))
    return float(slope), resid


def _half_exponent(e: int, context: str) -> int:
    if e % 2:
        raise ValueError(f"{context}: squared norm has odd leading exponent {e}")
    return e // 2


def decay_rates(fam: GammaFamily, gamma_value: float = 1.0) -> dict[str, RateReport]:
    """Fall-off exponents of |phi_g - phi_0| and |psi_g - psi_0| in the
    base metric, both exactly (leading exponent of the closed form) and by
    dyadic log-log fits."""
    g2 = fam.base.g2
    rg = fam.base.ring
    out = {}
    params = {fam.gamma_name: gamma_value}
    for name, diff in (("phi-difference", fam.phi_difference),
                       ("psi-difference", fam.psi_difference)):
        nsq = norm_sq(diff, g2.metric)
        if gamma_value == 0:
            nsq = nsq.substitute({fam.gamma_name: rg.zero})
        if nsq.is_zero:
            out[name] = RateReport(name, "zero", "zero", 0.0, 0.0, 0.0, 0.0,
                                   "zero")
            continue
        e_inf, log_inf = nsq.leading_exponent("infinity")
        e_zero, log_zero = nsq.leading_exponent("zero")
        if log_inf or log_zero:
            raise ValueError("unexpected logarithmic leading term in decay norm")
        fit0, res0 = _dyadic_fit(nsq, params, toward_zero=True)
        fit1, res1 = _dyadic_fit(nsq, params, toward_zero=False)
        e_inf_half = _half_exponent(e_inf, name)
        out[name] = RateReport(
            name=name,
            exponent_at_zero=_half_exponent(e_zero, name),
            exponent_at_infinity=e_inf_half,
            fit_at_zero=fit0,
            fit_residual_at_zero=res0,
            fit_at_infinity=fit1,
            fit_residual_at_infinity=res1,
            nu=e_inf_half,
        )
    return out


# ---------------------------------------------------------------------------
# Model registry
# ---------------------------------------------------------------------------

def _sine_cone_factory(**kw):
    from .sinecone import sine_cone_model
    return sine_cone_model(**kw)


MODEL_REGISTRY = {
    "su2su2": calibrate_mc,
    "bryant-salamon": bryant_salamon,
    "gamma-family": gamma_family,
    "sine-cone": _sine_cone_factory,
}
