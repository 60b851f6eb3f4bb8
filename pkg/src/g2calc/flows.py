"""Evolution of invariant SU(2)-structures on the doubled-sphere link.

An invariant structure is a coefficient point

    eta = y0 eta_se,    om_i = sum_j y_ij om_j_se   (i = 1, 2, 3; j = 0..3)

in the four-dimensional invariant span of link 2-forms, whose wedge table
has signature (-,+,+,+).  The evolution equations

    d eta = dt(om_1),   d om_2 = -dt(om_3 ^ eta),   d om_3 = dt(om_2 ^ eta)

expand, with link structure constants (a, b) in d(eta_se) = a om_1_se,
d(om_2_se) = -b om_3_se ^ eta_se, d(om_3_se) = b om_2_se ^ eta_se, to

    dy1/dt   = (0, a y0, 0, 0)
    d(y2 y0)/dt = (0, 0,  b y33, -b y32)
    d(y3 y0)/dt = (0, 0, -b y23,  b y22)
    dy0/dt   = (b W - a y0^2 y11) / N

with W = y22 y33 - y23 y32 and N = <y2, y2> in the wedge signature; the
y0 equation is forced by preserving om_2^2 = om_1^2.  The closure
constraints (d om_1 = 0, d(om_2 ^ eta) = 0, d(om_3 ^ eta) = 0) read
y12 = y13 = y21 = y31 = 0 and are preserved along the flow, as are the
wedge pairings; ``flow_invariants_symbolic`` proves both statements as
exact polynomial identities and ``dynamic_equations_check`` verifies the
coefficient expansion against the exterior derivative on the coframe.

The integrator is the classical fourth-order one-step scheme with a fixed
step; every state carries the constraint residuals and integration aborts
if they exceed the configured limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Sequence

from .exterior import Coframe, FormExpr
from .models import SEData, calibrate_mc, se_data
from .scalars import Ring, ScalarExpr
from .structures import SU2Structure, TorsionConsistencyError

WEDGE_SIGNS = (-1, 1, 1, 1)


class FlowStepError(RuntimeError):
    """Raised when constraint residuals exceed the configured limit."""


# ---------------------------------------------------------------------------
# Coefficient vector layout: (y0, y1[0:4], y2[0:4], y3[0:4])
# ---------------------------------------------------------------------------

def _pair(x: Sequence, y: Sequence):
    return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]


def _rhs(y: Sequence[float], a: float, b: float) -> list[float]:
    y0 = y[0]
    y1, y2, y3 = y[1:5], y[5:9], y[9:13]
    w = y2[2] * y3[3] - y2[3] * y3[2]
    n = _pair(y2, y2)
    if n == 0 or y0 == 0:
        raise FlowStepError(f"degenerate structure: y0={y0}, <om2,om2>={n}")
    dy0 = (b * w - a * y0 * y0 * y1[1]) / n
    r2 = (0.0, 0.0, b * y3[3], -b * y3[2])
    r3 = (0.0, 0.0, -b * y2[3], b * y2[2])
    out = [dy0, 0.0, a * y0, 0.0, 0.0]
    out.extend((r2[j] - y2[j] * dy0) / y0 for j in range(4))
    out.extend((r3[j] - y3[j] * dy0) / y0 for j in range(4))
    return out


def _rk4_step(y: list[float], h: float, a: float, b: float) -> list[float]:
    k1 = _rhs(y, a, b)
    k2 = _rhs([v + h / 2 * d for v, d in zip(y, k1)], a, b)
    k3 = _rhs([v + h / 2 * d for v, d in zip(y, k2)], a, b)
    k4 = _rhs([v + h * d for v, d in zip(y, k3)], a, b)
    return [v + h / 6 * (d1 + 2 * d2 + 2 * d3 + d4)
            for v, d1, d2, d3, d4 in zip(y, k1, k2, k3, k4)]


def constraint_residuals(y: Sequence[float], a: float = 2.0, b: float = 3.0) -> dict[str, float]:
    """Closure and wedge-pairing residuals of a coefficient point.

    d(om_1) = 0 reads (y12, y13) = 0; d(om_{2,3} ^ eta) = 0 read
    y0 y21 = y0 y31 = 0 (scaled by the structure constants that produce
    them); the pairing residuals compare <y_i, y_j> to delta_ij <y1, y1>.
    """
    y0 = y[0]
    y1, y2, y3 = y[1:5], y[5:9], y[9:13]
    p11 = _pair(y1, y1)
    return {
        "d_omega1": max(abs(b * y1[2]), abs(b * y1[3])),
        "d_omega2_eta": abs(2 * a * y0 * y2[1]),
        "d_omega3_eta": abs(2 * a * y0 * y3[1]),
        "wedge_pairings": max(abs(_pair(y2, y2) - p11), abs(_pair(y3, y3) - p11),
                              abs(_pair(y1, y2)), abs(_pair(y1, y3)),
                              abs(_pair(y2, y3))),
    }


@dataclass
class FlowState:
    """One sample of the trajectory: time, step, coefficients, residuals."""
    t: float
    step: float
    y0: float
    y1: tuple[float, float, float, float]
    y2: tuple[float, float, float, float]
    y3: tuple[float, float, float, float]
    residuals: dict[str, float]

    def coefficients(self) -> list[float]:
        return [self.y0, *self.y1, *self.y2, *self.y3]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def _make_state(t: float, step: float, y: Sequence[float], a, b) -> FlowState:
    return FlowState(t, step, y[0], tuple(y[1:5]), tuple(y[5:9]), tuple(y[9:13]),
                     constraint_residuals(y, a, b))


def se_initial(t0: float = 1.0) -> list[float]:
    """The cone point y0 = t0, y11 = y22 = y33 = t0^2 (all else zero)."""
    s = t0 * t0
    return [t0, 0.0, s, 0.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0, s]


def se_exact(t: float) -> list[float]:
    """Exact cone trajectory through se_initial(1)."""
    return se_initial(t)


def invariant_coefficients(su2: SU2Structure, se: SEData | None = None) -> list:
    """Project an SU(2)-structure onto the invariant basis, exactly.

    Returns (y0, y1*, y2*, y3*) such that eta = y0 eta_se and
    om_i = sum_j y_ij om_j_se; raises if the forms are not in the span.
    """
    frame = su2.frame
    se = se if se is not None else se_data(frame)
    top = tuple(sorted(se.v4.legs()))
    v4c = se.v4.coefficient(top)
    eta_leg = tuple(sorted(se.eta.legs()))[0]
    base = se.eta.coefficient((eta_leg,))
    y0 = frame.coerce(su2.eta.coefficient((eta_leg,))) / frame.coerce(base)
    if su2.eta != se.eta * y0:
        raise ValueError("eta is not a multiple of the invariant contact form")
    out = [y0]
    for om in su2.om:
        row = []
        for j, om_j in enumerate(se.om):
            c = om.wedge(om_j).coefficient(top)
            row.append(frame.coerce(c) / frame.coerce(v4c * 2 * WEDGE_SIGNS[j]))
        if om != sum((om_j * cj for om_j, cj in zip(se.om, row)), frame.zero_form(2)):
            raise ValueError("2-form outside the invariant span")
        out.extend(row)
    return out


def _float_coefficient(c) -> float:
    if isinstance(c, ScalarExpr):
        if any(key[1] != 0 or key[2] != 0 for key in c.terms):
            raise ValueError("initial data must be a constant-coefficient snapshot")
        return c.evaluate(1.0)
    return float(c)


def hypo_flow(initial, t0: float, t1: float, step: float,
              a: float = 2.0, b: float = 3.0,
              residual_limit: float = 1e-6) -> list[FlowState]:
    """Integrate the coefficient evolution with the classical 4th-order step.

    ``initial`` is either a 13-coefficient sequence or an SU2Structure in
    the invariant basis.  The first state must satisfy the closure
    constraints within ``residual_limit``; integration raises
    FlowStepError as soon as any residual exceeds that limit.
    """
    if isinstance(initial, SU2Structure):
        y = [_float_coefficient(c) for c in invariant_coefficients(initial)]
    else:
        y = [float(v) for v in initial]
    if len(y) != 13:
        raise ValueError(f"need 13 coefficients, got {len(y)}")
    n = round((t1 - t0) / step)
    if n < 1:
        raise ValueError("empty integration interval")
    h = (t1 - t0) / n
    state = _make_state(t0, h, y, a, b)
    if state.max_residual > residual_limit:
        raise FlowStepError(
            f"initial data violates the closure constraints: {state.residuals}")
    trajectory = [state]
    t = t0
    for i in range(n):
        y = _rk4_step(y, h, a, b)
        t = t0 + (i + 1) * h
        state = _make_state(t, h, y, a, b)
        if state.max_residual > residual_limit:
            raise FlowStepError(
                f"constraint residual {state.max_residual:.3e} exceeds "
                f"{residual_limit:.3e} at t={t:.6f}")
        trajectory.append(state)
    return trajectory


def flow_csv(trajectory: Sequence[FlowState]) -> str:
    """Serialize a trajectory: one row per state, coefficients then residuals."""
    res_names = sorted(trajectory[0].residuals)
    coeff_names = ["y0"] + [f"y{i}_{j}" for i in (1, 2, 3) for j in range(4)]
    header = ["t", "step"] + coeff_names + [f"res_{name}" for name in res_names]
    lines = [",".join(header)]
    for st in trajectory:
        row = [repr(st.t), repr(st.step)]
        row.extend(repr(v) for v in st.coefficients())
        row.extend(repr(st.residuals[name]) for name in res_names)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Symbolic verification of the coefficient system
# ---------------------------------------------------------------------------

def dynamic_equations_check(ring: Ring | None = None) -> Coframe:
    """Verify the coefficient expansion against d on the actual coframe.

    With symbolic t-independent coefficients, the exterior derivatives of
    eta and om_i must equal the frozen right-hand sides contracted with
    the invariant basis.  Returns the calibrated coframe on success.
    """
    frame, _ = calibrate_mc(ring)
    rg = frame.ring
    se = se_data(frame)
    a, b = rg.const(2), rg.const(3)
    y0 = rg.parameter("y0", invertible=True)
    rows = [[rg.parameter(f"y{i}{j}") for j in range(4)] for i in (1, 2, 3)]
    y1, y2, y3 = rows
    om_forms = [sum((se.om[j] * row[j] for j in range(4)), frame.zero_form(2))
                for row in rows]
    basis3 = [om_j.wedge(se.eta) for om_j in se.om]

    checks = []
    d_eta = (se.eta * y0).d()
    checks.append(("d_eta", d_eta == se.om[1] * (a * y0)))
    r2 = [rg.const(0), rg.const(0), b * y3[3], -(b * y3[2])]
    r3 = [rg.const(0), rg.const(0), -(b * y2[3]), b * y2[2]]
    d_om2 = om_forms[1].d()
    want2 = -sum((basis3[j] * r3[j] for j in range(4)), frame.zero_form(3))
    checks.append(("d_om2", d_om2 == want2))
    d_om3 = om_forms[2].d()
    want3 = sum((basis3[j] * r2[j] for j in range(4)), frame.zero_form(3))
    checks.append(("d_om3", d_om3 == want3))
    d_om1 = om_forms[0].d()
    want1 = basis3[2] * (b * y1[3]) + basis3[3] * (-(b * y1[2]))
    checks.append(("d_om1_residual", d_om1 == want1))
    for i, name in ((1, "d_om2_eta"), (2, "d_om3_eta")):
        w = om_forms[i].wedge(se.eta * y0).d()
        want = se.v4 * (a * 2 * y0 * rows[i][1])
        checks.append((name, w == want))
    bad = [name for name, ok in checks if not ok]
    if bad:
        raise TorsionConsistencyError(
            f"coefficient system disagrees with the coframe: {', '.join(bad)}")
    return frame


def flow_invariants_symbolic(ring: Ring | None = None) -> dict[str, bool]:
    """Exact preservation identities for the constraint functions.

    Write G = bW - a y0^2 y11 and N = <y2, y2>, and clear denominators by
    y0 N, so y0 N dy_i/dt = S_i are polynomials.  The identities verified:

        y0 N d/dt (y12, y13)              = 0
        y0 N d/dt y21                     = -G y21   (same for y31)
        y0 N d/dt (<y2,y2> - <y1,y1>)     = 0
        y0 N d/dt (<y3,y3> - <y1,y1>)     = -2G (<y3,y3> - <y2,y2>)
        y0 N d/dt <y2,y3>                 = -2G <y2,y3>
        y0 N d/dt <y1,y2> = a y0^2 N y21 + b N (y12 y33 - y13 y32) - G <y1,y2>
        y0 N d/dt <y1,y3> = a y0^2 N y31 + b N (y13 y22 - y12 y23) - G <y1,y3>

    Every right side is a combination of the constraint functions, so the
    constraint set is invariant under the flow.
    """
    rg = ring if ring is not None else Ring(3)
    a = rg.parameter("a")
    b = rg.parameter("b")
    y0 = rg.parameter("y0", invertible=True)
    y1 = [rg.parameter(f"y1{j}") for j in range(4)]
    y2 = [rg.parameter(f"y2{j}") for j in range(4)]
    y3 = [rg.parameter(f"y3{j}") for j in range(4)]
    zero = rg.const(0)

    w = y2[2] * y3[3] - y2[3] * y3[2]
    n = _pair(y2, y2)
    g = b * w - a * y0 * y0 * y1[1]
    r2 = [zero, zero, b * y3[3], -(b * y3[2])]
    r3 = [zero, zero, -(b * y2[3]), b * y2[2]]
    s0 = y0 * g
    s1 = [zero, y0 * n * a * y0, zero, zero]
    s2 = [n * r2[j] - y2[j] * g for j in range(4)]
    s3 = [n * r3[j] - y3[j] * g for j in range(4)]

    p11, p22, p33 = _pair(y1, y1), _pair(y2, y2), _pair(y3, y3)
    checks = {
        "closure_y12_y13": s1[2] == zero and s1[3] == zero,
        "closure_y21": s2[1] == -(y2[1] * g),
        "closure_y31": s3[1] == -(y3[1] * g),
        "pairing_22_11": _pair(y2, s2) * 2 - _pair(y1, s1) * 2 == zero,
        "pairing_33_11": (_pair(y3, s3) * 2 - _pair(y1, s1) * 2
                          == (p33 - p22) * g * (-2)),
        "pairing_23": (_pair(s2, y3) + _pair(y2, s3)
                       == _pair(y2, y3) * g * (-2)),
        "pairing_12": (_pair(s1, y2) + _pair(y1, s2)
                       == a * y0 * y0 * n * y2[1]
                       + b * n * (y1[2] * y3[3] - y1[3] * y3[2])
                       - g * _pair(y1, y2)),
        "pairing_13": (_pair(s1, y3) + _pair(y1, s3)
                       == a * y0 * y0 * n * y3[1]
                       + b * n * (y1[3] * y2[2] - y1[2] * y2[3])
                       - g * _pair(y1, y3)),
        "y0_equation": s0 == y0 * (b * w - a * y0 * y0 * y1[1]),
    }
    bad = [name for name, ok in checks.items() if not ok]
    if bad:
        raise TorsionConsistencyError(
            f"flow preservation identities failed: {', '.join(bad)}")
    return checks
