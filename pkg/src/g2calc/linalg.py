"""Exact linear algebra over the rationals.

Small dense systems only (the engine never needs more than a few dozen
rows), so plain fraction-pivoted Gauss-Jordan is both exact and fast
enough.  numpy stays on the numeric twin path.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]


def _as_matrix(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot column indices."""
    m = _as_matrix(rows)
    if not m:
        return [], []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def nullspace(rows) -> list[list[Fraction]]:
    """Basis of the right kernel, one vector per free column."""
    m = _as_matrix(rows)
    if not m:
        return []
    ncols = len(m[0])
    red, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(rows, rhs) -> list[Fraction] | None:
    """One exact solution of A x = b, or None when inconsistent.

    Free variables are set to zero.
    """
    m = _as_matrix(rows)
    b = [Fraction(x) for x in rhs]
    if not m:
        return [] if all(x == 0 for x in b) else None
    ncols = len(m[0])
    aug = [row + [bv] for row, bv in zip(m, b)]
    red, pivots = rref(aug)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[r][-1]
    return x


def rank(rows) -> int:
    _, pivots = rref(rows)
    return len(pivots)
