"""Closed/co-closed classification: derivation, comparison, samplers."""

from __future__ import annotations

from fractions import Fraction as F

import pytest

from g2calc.classify import (
    ansatz_values,
    compare_constraint_sets,
    derive_closed_constraints,
    derive_coclosed_constraints,
    evaluate_constraints,
    gauge_flip_preserves,
    random_closed_solution,
    random_coclosed_solution,
    reference_closed_relations,
    reference_coclosed_relations,
    symbolic_ansatz,
)
from g2calc.models import (
    bryant_salamon_parameters,
    gamma_family,
    invariant_ansatz,
    random_lorentz,
)
from g2calc.scalars import Ring


@pytest.fixture(scope="module")
def setup():
    ansatz = symbolic_ansatz()
    closed = derive_closed_constraints(ansatz)
    coclosed = derive_coclosed_constraints(ansatz)
    return ansatz, closed, coclosed


# ---------------------------------------------------------------------------
# Ideal comparison with the reference relation sets
# ---------------------------------------------------------------------------

def test_closed_constraints_match_reference(setup):
    ansatz, closed, _ = setup
    cmp = compare_constraint_sets(closed, "closed", ansatz)
    assert cmp.equal, (cmp.missing_forward, cmp.missing_backward)


def test_coclosed_constraints_match_reference(setup):
    ansatz, _, coclosed = setup
    cmp = compare_constraint_sets(coclosed, "coclosed", ansatz)
    assert cmp.equal, (cmp.missing_forward, cmp.missing_backward)


def test_gauge_flip_preserves_both_sets(setup):
    ansatz, closed, coclosed = setup
    assert gauge_flip_preserves(closed, ansatz)
    assert gauge_flip_preserves(coclosed, ansatz)


def test_constraint_split_counts(setup):
    _, closed, coclosed = setup
    assert (len(closed.static), len(closed.radial)) == (3, 8)
    assert (len(coclosed.static), len(coclosed.radial)) == (2, 5)


# ---------------------------------------------------------------------------
# Exact parameter sets
# ---------------------------------------------------------------------------

def test_torsion_free_parameters_satisfy_both_sets(setup):
    _, closed, coclosed = setup
    rg = Ring(d=3)
    p = bryant_salamon_parameters(rg)
    vals = {"lam": p["lam"], "mu": p["mu"], "k": p["k"], "alf": p["alpha"]}
    for i, row in enumerate(p["A"], start=1):
        for j, v in enumerate(row):
            vals[f"a{i}{j}"] = v
    for cs in (closed, coclosed):
        residuals = evaluate_constraints(cs, vals)
        assert all(r.is_zero for r in residuals)


def test_gamma_family_satisfies_coclosed_for_every_gamma(setup):
    """The family's parameters satisfy the static co-closed relations with
    a symbolic deformation parameter; closure fails."""
    _, closed, coclosed = setup
    rg = Ring(d=3)
    fam = gamma_family(rg)
    a = fam.deformed
    assert a.psi.d().is_zero
    assert not a.phi.d().is_zero


@pytest.mark.parametrize("seed", range(10))
def test_closed_sampler_soundness(seed):
    """Samples of the closed variety give d(phi) = 0 exactly and satisfy
    every derived closed relation; generically they violate co-closure."""
    ansatz = symbolic_ansatz()
    closed = derive_closed_constraints(ansatz)
    coclosed = derive_coclosed_constraints(ansatz)
    rg = Ring(d=3)
    p = random_closed_solution(seed)
    a = invariant_ansatz(**p, ring=rg, build_g2=False)
    assert a.phi.d().is_zero
    vals = ansatz_values(p)
    assert all(r.is_zero for r in evaluate_constraints(closed, vals))
    assert any(not r.is_zero for r in evaluate_constraints(coclosed, vals))


@pytest.mark.parametrize("seed", range(10))
def test_coclosed_sampler_soundness(seed):
    ansatz = symbolic_ansatz()
    coclosed = derive_coclosed_constraints(ansatz)
    rg = Ring(d=3)
    p = random_coclosed_solution(seed)
    a = invariant_ansatz(**p, ring=rg, build_g2=False)
    assert a.psi.d().is_zero
    vals = ansatz_values(p)
    assert all(r.is_zero for r in evaluate_constraints(coclosed, vals))


def gauge_image(params: dict) -> dict:
    """Flip the connection coefficient together with the timelike column of
    A (the curvature transformation of the connection sign flip)."""
    out = dict(params)
    out["k"] = -params["k"]
    out["A"] = [[-row[0]] + list(row[1:]) for row in params["A"]]
    return out


def test_gauge_image_of_samples_stays_on_variety():
    for seed in range(4):
        rg = Ring(d=3)
        p = gauge_image(random_closed_solution(seed))
        a = invariant_ansatz(**p, ring=rg, build_g2=False)
        assert a.phi.d().is_zero
        q = gauge_image(random_coclosed_solution(seed))
        b = invariant_ansatz(**q, ring=rg, build_g2=False)
        assert b.psi.d().is_zero


def test_random_lorentz_violates_both_sets(setup):
    _, closed, coclosed = setup
    violations = 0
    for seed in (3, 5, 8):
        p = {"lam": F(1), "mu": F(1), "k": F(1), "alpha": F(0),
             "A": random_lorentz(seed)[1:]}
        vals = ansatz_values(p)
        v1 = any(not r.is_zero for r in evaluate_constraints(closed, vals))
        v2 = any(not r.is_zero for r in evaluate_constraints(coclosed, vals))
        violations += v1 and v2
    assert violations == 3


def test_reference_relation_shapes():
    rg = Ring(d=3)
    for name in ("lam", "mu", "k"):
        rg.parameter(name, invertible=True)
    rg.parameter("alf")
    for i in range(1, 4):
        for j in range(4):
            rg.parameter(f"a{i}{j}")
    assert len(reference_closed_relations(rg)) == 9
    assert len(reference_coclosed_relations(rg)) == 5
