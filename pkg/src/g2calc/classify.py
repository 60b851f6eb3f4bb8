"""Symbolic classification of closed and co-closed invariant structures.

The invariant ansatz is built with fully symbolic parameters (lam, mu, k,
the connection coefficient and the 3x4 coefficient matrix A), the relevant
exterior derivative is computed exactly, and its vanishing is recorded as
a set of t-free polynomial generators, split into the part without a
radial leg and the part with one.  The systems are linear when monomials
in the parameters are treated as atoms, so constraint sets are compared
by exact substitution both ways: each side's generators must vanish on a
triangular solution of the other side, modulo the span of the Lorentz
orthonormality relations satisfied by the rows of A.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F

from .linalg import solve
from .models import InvariantAnsatz, invariant_ansatz, lorentz_rows_residuals
from .scalars import Ring, ScalarExpr
from .structures import TorsionConsistencyError

A_NAMES = [[f"a{i}{j}" for j in range(4)] for i in range(1, 4)]


def symbolic_ansatz(ring: Ring | None = None, alpha: ScalarExpr | str = "constant",
                    frame=None) -> InvariantAnsatz:
    """Ansatz with symbolic (lam, mu, k, A); alpha is a named constant by
    default, or any supplied scalar expression in t."""
    rg = ring or Ring(d=3)
    lam = rg.parameter("lam", invertible=True)
    mu = rg.parameter("mu", invertible=True)
    k = rg.parameter("k", invertible=True)
    if isinstance(alpha, str):
        if alpha != "constant":
            raise ValueError("alpha must be 'constant' or a ScalarExpr")
        alpha = rg.parameter("alf")
    A = [[rg.monomial(1, {name: 1}) for name in row] for row in A_NAMES]
    return invariant_ansatz(lam, mu, k, alpha, A, ring=rg, build_g2=False,
                            check_lorentz=False, frame=frame)


@dataclass
class ConstraintSet:
    """t-free generators of a vanishing condition, split by radial leg."""
    static: list[ScalarExpr]
    radial: list[ScalarExpr]

    def all(self) -> list[ScalarExpr]:
        return self.static + self.radial

    def __str__(self):
        s = "; ".join(str(g) for g in self.static)
        r = "; ".join(str(g) for g in self.radial)
        return f"static: [{s}]  radial: [{r}]"


def _is_multiple(g: ScalarExpr, h: ScalarExpr) -> bool:
    """Whether g is a QuadNum multiple of h (both nonzero)."""
    key = next(iter(h.terms))
    cg = g.terms.get(key)
    if cg is None:
        return False
    q = cg / h.terms[key]
    return (g - h * g.ring.const(q)).is_zero


def _dedupe(gens: list[ScalarExpr]) -> list[ScalarExpr]:
    kept: list[ScalarExpr] = []
    for g in gens:
        if g.is_zero:
            continue
        if any(_is_multiple(g, h) for h in kept):
            continue
        kept.append(g)
    return kept


def constraints_from_form(dform, radial_index: int = 0) -> ConstraintSet:
    """Vanishing conditions of a form, as t-free generators."""
    static: list[ScalarExpr] = []
    radial: list[ScalarExpr] = []
    for I, c in sorted(dform.comps.items()):
        bucket = radial if radial_index in I else static
        for (k, m), piece in sorted(c.t_slices().items()):
            bucket.append(piece)
    return ConstraintSet(_dedupe(static), _dedupe(radial))


def derive_closed_constraints(ansatz: InvariantAnsatz) -> ConstraintSet:
    return constraints_from_form(ansatz.phi.d())


def derive_coclosed_constraints(ansatz: InvariantAnsatz) -> ConstraintSet:
    return constraints_from_form(ansatz.psi.d())


# ---------------------------------------------------------------------------
# Exact ideal membership with unit-monomial multipliers
# ---------------------------------------------------------------------------

def _multiplier_stages(ring: Ring) -> list[list[ScalarExpr]]:
    """Increasingly rich unit-ish multiplier sets for membership solving."""
    one = ring.one
    m1 = [one]
    for name in ("lam", "mu", "k"):
        for e in (1, -1):
            m1.append(ring.monomial(1, {name: e}))
    if "alf" in ring._params:
        m1.append(ring.monomial(1, {"alf": 1}))
    seen = {}
    m2 = []
    for a in m1:
        for b in m1:
            p = a * b
            key = next(iter(p.terms))
            if key not in seen:
                seen[key] = True
                m2.append(p)
    a_linear = [ring.monomial(1, {f"a{i}{j}": 1})
                for i in range(1, 4) for j in range(4)
                if f"a{i}{j}" in ring._params]
    m3 = list(m2)
    for a in m2:
        for b in a_linear:
            m3.append(a * b)
    return [m1, m2, m3]


def _solve_membership(target: ScalarExpr, cols: list[ScalarExpr]) -> bool:
    """Exact solve of target = sum_i c_i cols[i] after pruning columns that
    carry a monomial no other column or the target can cancel."""
    cols = [c for c in cols if not c.is_zero]
    while True:
        counts: dict = {}
        for c in cols:
            for key in c.terms:
                counts[key] = counts.get(key, 0) + 1
        t_keys = set(target.terms)
        drop = set()
        for i, c in enumerate(cols):
            if any(counts[key] == 1 and key not in t_keys for key in c.terms):
                drop.add(i)
        if not drop:
            break
        cols = [c for i, c in enumerate(cols) if i not in drop]
    if any(key not in {k for c in cols for k in c.terms} for key in target.terms):
        return False
    if not cols:
        return target.is_zero
    keys = sorted({k for e in cols for k in e.terms} | set(target.terms))
    index = {k: i for i, k in enumerate(keys)}

    def vec(e: ScalarExpr) -> list[F]:
        v = [F(0)] * (2 * len(keys))
        for k, c in e.terms.items():
            v[2 * index[k]] = c.a
            v[2 * index[k] + 1] = c.b
        return v

    rows = list(map(list, zip(*[vec(c) for c in cols])))
    return solve(rows, vec(target)) is not None


def in_span(target: ScalarExpr, gens: list[ScalarExpr]) -> bool:
    """Whether target lies in the span of the generators with coefficients
    drawn from rational multiples of unit-monomial (and row-entry) factors."""
    if target.is_zero:
        return True
    ring = target.ring
    for mults in _multiplier_stages(ring):
        cols = [g * m for g in gens for m in mults]
        if _solve_membership(target, cols):
            return True
    return False


@dataclass
class IdealComparison:
    equal: bool
    missing_forward: list[str]   # derived generators not vanishing on the reference solutions
    missing_backward: list[str]  # reference generators not vanishing on the derived solutions


def _p(ring: Ring, name: str, exp: int = 1) -> ScalarExpr:
    return ring.monomial(1, {name: exp})


def reference_closed_relations(ring: Ring) -> list[ScalarExpr]:
    """Pinned relation set for exact closure of the invariant 3-form,
    including the row-1 alignment convention."""
    lam, mu, k, alf = (_p(ring, n) for n in ("lam", "mu", "k", "alf"))
    c = ring.const
    return [
        mu - lam * c(F(2, 3)),
        _p(ring, "a22") - lam * _p(ring, "a33"),
        _p(ring, "a23") + lam * _p(ring, "a32"),
        alf,
        k + mu * _p(ring, "a30") * c(F(3, 2)),
        _p(ring, "a10"),
        _p(ring, "a12"),
        _p(ring, "a13"),
        _p(ring, "a11") - ring.one,
    ]


def reference_coclosed_relations(ring: Ring) -> list[ScalarExpr]:
    """Pinned relation set for exact coclosure of the invariant 3-form."""
    lam, mu, k, alf = (_p(ring, n) for n in ("lam", "mu", "k", "alf"))
    c = ring.const
    lam_inv = _p(ring, "lam", -1)
    return [
        _p(ring, "a20"),
        _p(ring, "a21"),
        _p(ring, "a22") - lam_inv * _p(ring, "a33") * c(F(3, 4)),
        _p(ring, "a23") + lam_inv * _p(ring, "a32") * c(F(3, 4)),
        mu - lam * _p(ring, "a11") - k * _p(ring, "a30") - alf * _p(ring, "a31"),
    ]


def closed_reference_solution(ring: Ring) -> dict[str, ScalarExpr]:
    """Triangular solution of the reference closed relations (free: lam,
    a20, a21, a30, a32, a33); a31 = 0 uses the row-1/row-3 orthogonality."""
    lam = _p(ring, "lam")
    c = ring.const
    return {
        "mu": lam * c(F(2, 3)),
        "alf": ring.zero,
        "k": -lam * _p(ring, "a30"),
        "a10": ring.zero, "a11": ring.one, "a12": ring.zero, "a13": ring.zero,
        "a22": lam * _p(ring, "a33"),
        "a23": -lam * _p(ring, "a32"),
        "a31": ring.zero,
    }


def closed_derived_solution(ring: Ring) -> dict[str, ScalarExpr]:
    """Triangular solution of the engine-derived closed constraints on the
    aligned branch a11 = +1 (row-1 norm fixes a11^2 = 1; the positive root
    is the alignment convention). Free: lam, k, alf, a20, a21, a32, a33."""
    lam = _p(ring, "lam")
    lam_inv = _p(ring, "lam", -1)
    c = ring.const
    return {
        "mu": lam * c(F(2, 3)),
        "a10": ring.zero, "a11": ring.one, "a12": ring.zero, "a13": ring.zero,
        "a30": -_p(ring, "k") * lam_inv,
        "a31": _p(ring, "alf") * lam_inv,
        "a22": lam * _p(ring, "a33"),
        "a23": -lam * _p(ring, "a32"),
    }


def coclosed_solution(ring: Ring) -> dict[str, ScalarExpr]:
    """Common triangular solution of both the derived and the reference
    coclosed constraints (the derived quadratic reduces to the linear
    reference relation modulo the row-1 unit-norm residual)."""
    lam_inv = _p(ring, "lam", -1)
    c = ring.const
    return {
        "a20": ring.zero,
        "a21": ring.zero,
        "a22": lam_inv * _p(ring, "a33") * c(F(3, 4)),
        "a23": -lam_inv * _p(ring, "a32") * c(F(3, 4)),
        "mu": (_p(ring, "lam") * _p(ring, "a11") + _p(ring, "k") * _p(ring, "a30")
               + _p(ring, "alf") * _p(ring, "a31")),
    }


def _row_norm_rules(ring: Ring) -> dict[str, ScalarExpr]:
    """Rewrite rules a_i1^2 -> 1 + a_i0^2 - a_i2^2 - a_i3^2 from the unit
    pseudo-norm of each row of A."""
    rules: dict[str, ScalarExpr] = {}
    for i in (1, 2, 3):
        if all(f"a{i}{j}" in ring._params for j in range(4)):
            rules[f"a{i}1"] = (ring.one + _p(ring, f"a{i}0", 2)
                               - _p(ring, f"a{i}2", 2) - _p(ring, f"a{i}3", 2))
    return rules


def lorentz_normal_form(expr: ScalarExpr) -> ScalarExpr:
    """Remainder of expr modulo the row pseudo-norm relations, eliminating
    all squares of the second-column entries of A."""
    ring = expr.ring
    for name, repl in _row_norm_rules(ring).items():
        while True:
            out = ring.zero
            rewrote = False
            for (p, k, m), c in expr.terms.items():
                exps = dict(p)
                e = exps.get(name, 0)
                if e >= 2:
                    exps[name] = e - 2
                    stripped = tuple(sorted((n, v) for n, v in exps.items() if v))
                    out = out + ScalarExpr(ring, {(stripped, k, m): c}) * repl
                    rewrote = True
                else:
                    out = out + ScalarExpr(ring, {(p, k, m): c})
            expr = out
            if not rewrote:
                break
    return expr


def reduces_on_solution(gens: list[ScalarExpr], solution: dict[str, ScalarExpr],
                        lorentz: list[ScalarExpr]) -> list[str]:
    """Generators that fail to vanish after substitution, modulo the span of
    the substituted Lorentz residuals. Returns the failures."""
    lorentz_sub = [lorentz_normal_form(g.substitute(solution)) for g in lorentz]
    lorentz_sub = [g for g in lorentz_sub if not g.is_zero]
    failures = []
    for g in gens:
        r = lorentz_normal_form(g.substitute(solution))
        if not in_span(r, lorentz_sub):
            failures.append(str(g))
    return failures


def compare_constraint_sets(derived: ConstraintSet, which: str,
                            ansatz: InvariantAnsatz) -> IdealComparison:
    """Substitution check both ways: derived generators vanish on the
    reference solution set, and reference generators vanish on the derived
    solution set, each modulo the Lorentz row relations."""
    ring = ansatz.ring
    lorentz = [g for g in lorentz_rows_residuals(ansatz.A, ring) if not g.is_zero]
    if which == "closed":
        reference = reference_closed_relations(ring)
        ref_sol = closed_reference_solution(ring)
        der_sol = closed_derived_solution(ring)
    elif which == "coclosed":
        reference = reference_coclosed_relations(ring)
        ref_sol = coclosed_solution(ring)
        der_sol = coclosed_solution(ring)
    else:
        raise ValueError("which must be 'closed' or 'coclosed'")
    gens = derived.all()
    fwd = reduces_on_solution(gens, ref_sol, lorentz)
    # self-check: the frozen derived solution must actually solve the
    # engine-derived constraints, otherwise the backward direction is vacuous
    stale = reduces_on_solution(gens, der_sol, lorentz)
    if stale:
        raise TorsionConsistencyError(
            f"frozen {which} solution no longer solves the derived constraints: {stale}")
    bwd = reduces_on_solution(reference, der_sol, lorentz)
    return IdealComparison(not fwd and not bwd, fwd, bwd)


def gauge_flip_preserves(cs: ConstraintSet, ansatz: InvariantAnsatz) -> bool:
    """Whether the sign flip of (k, a30) maps every generator back into the
    span of the original generator set."""
    ring = ansatz.ring
    flip = {"k": -_p(ring, "k"), "a30": -_p(ring, "a30")}
    gens = cs.all()
    return all(in_span(g.substitute(flip), gens) for g in gens)


# ---------------------------------------------------------------------------
# Exact samples of the two solution varieties
# ---------------------------------------------------------------------------

def random_closed_solution(seed: int) -> dict:
    """Exact rational parameter set satisfying every closed relation.

    One boost (hyperbolic pair on row 3's time component) and one rational
    rotation angle parameterize the variety; the ansatz built from the
    result has d(phi) = 0 exactly.
    """
    import random
    rng = random.Random(seed)
    m = F(rng.randint(1, 9), rng.randint(1, 9))
    sh, ch = (m - 1 / m) / 2, (m + 1 / m) / 2
    from .models import _pythagorean
    c_, s_ = _pythagorean(rng)
    lam = 1 / ch
    return {
        "lam": lam,
        "mu": 2 * lam / 3,
        "k": -lam * sh,
        "alpha": F(0),
        "A": [
            [F(0), F(1), F(0), F(0)],
            [F(0), F(0), c_, -s_],
            [sh, F(0), ch * s_, ch * c_],
        ],
    }


def random_coclosed_solution(seed: int) -> dict:
    """Exact rational parameter set satisfying every co-closed relation.

    Two boosts, a rotation, a sign and free (k, alpha) parameterize the
    variety; mu is then forced and resampled until positive.  The ansatz
    built from the result has d(psi) = 0 exactly.
    """
    import random
    rng = random.Random(seed)
    from .models import _pythagorean
    m1 = F(rng.randint(1, 9), rng.randint(1, 9))
    sh1, ch1 = (m1 - 1 / m1) / 2, (m1 + 1 / m1) / 2
    m2 = F(rng.randint(1, 9), rng.randint(1, 9))
    sg, rho = (m2 - 1 / m2) / 2, (m2 + 1 / m2) / 2
    eps = rng.choice((1, -1))
    c_, s_ = _pythagorean(rng)
    lam = 3 * rho / 4
    a30, a31 = eps * ch1 * sg, eps * sh1 * sg
    while True:
        k = F(rng.randint(-9, 9), rng.randint(1, 9))
        alf = F(rng.randint(-9, 9), rng.randint(1, 9))
        mu = lam * ch1 + k * a30 + alf * a31
        if mu > 0:
            break
    return {
        "lam": lam,
        "mu": mu,
        "k": k,
        "alpha": alf,
        "A": [
            [sh1, ch1, F(0), F(0)],
            [F(0), F(0), c_, -s_],
            [a30, a31, rho * s_, rho * c_],
        ],
    }


def evaluate_constraints(cs: ConstraintSet, values: dict) -> list[ScalarExpr]:
    """Substitute an exact parameter set (rationals or constant scalar
    expressions) into every generator."""
    ring = cs.all()[0].ring
    subs = {}
    for name, v in values.items():
        if isinstance(v, ScalarExpr):
            if v.ring.d != ring.d:
                raise ValueError("value from an incompatible scalar ring")
            subs[name] = ScalarExpr(ring, dict(v.terms))
        else:
            subs[name] = ring.const(v)
    return [g.substitute(subs) for g in cs.all()]


def ansatz_values(params: dict) -> dict:
    """Flatten a sampler dict into named scalar values for substitution."""
    out = {"lam": params["lam"], "mu": params["mu"], "k": params["k"],
           "alf": params["alpha"]}
    for i, row in enumerate(params["A"], start=1):
        for j, v in enumerate(row):
            out[f"a{i}{j}"] = v
    return out
