"""Coframes, differential forms, metrics and Hodge duals.

Everything here is frame-based: a Coframe fixes an ordered label set with
structure equations d(e^i) given once, and forms are sparse maps from
strictly increasing index tuples to scalar coefficients.  The exact Hodge
star is only available when the metric determinant is a unit monomial of
the scalar ring; anything else must go through the numeric twin path at
the bottom of this module.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .scalars import QuadNum, Ring, ScalarExpr

Idx = tuple[int, ...]


def _merge_indices(I: Idx, J: Idx) -> tuple[Idx, int] | None:
    """Merge two strictly increasing tuples, tracking the wedge sign.

    Returns None when an index repeats.
    """
    out: list[int] = []
    sign = 1
    i = j = 0
    while i < len(I) and j < len(J):
        a, b = I[i], J[j]
        if a == b:
            return None
        if a < b:
            out.append(a)
            i += 1
        else:
            out.append(b)
            j += 1
            if (len(I) - i) % 2:
                sign = -sign
    out.extend(I[i:])
    out.extend(J[j:])
    return tuple(out), sign


def _perm_sign(seq: Sequence[int]) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


class Coframe:
    """Ordered coframe with structure equations.

    labels: label strings in orientation order (volume is e^0 ^ ... ^ e^(n-1)
    up to the metric's orientation flag).
    radial: optional label bound to the scalar variable t; d of a scalar
    coefficient lands on that leg and the label itself is closed.
    mc_scale: bookkeeping constant recorded by Lie-group builders.
    """

    def __init__(self, labels: Sequence[str], ring: Ring,
                 radial: str | None = None,
                 mc_scale: Fraction | None = None,
                 coeff_coerce: Callable | None = None):
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate coframe labels")
        self.labels = tuple(labels)
        self.ring = ring
        self.n = len(self.labels)
        self.radial = radial
        if radial is not None and radial not in self.labels:
            raise ValueError(f"radial label {radial!r} not in frame")
        self.radial_index = self.labels.index(radial) if radial is not None else None
        self.mc_scale = mc_scale
        self._coerce = coeff_coerce or self._default_coerce
        self.d_rules: dict[int, FormExpr] = {}
        self._d_basis_cache: dict[Idx, FormExpr] = {}
        self._rules_set = False

    def _default_coerce(self, x):
        if isinstance(x, ScalarExpr):
            if x.ring is not self.ring:
                raise ValueError("coefficient from a different ring")
            return x
        if isinstance(x, (int, Fraction, QuadNum)):
            return self.ring.const(x)
        raise TypeError(f"cannot coerce {x!r} to a coefficient")

    def coerce(self, x):
        return self._coerce(x)

    @property
    def scalar_zero(self):
        return self._coerce(0)

    # -- form constructors ----------------------------------------------
    def zero_form(self, degree: int) -> "FormExpr":
        return FormExpr(self, degree, {})

    def form(self, degree: int, comps: Mapping[Idx, object]) -> "FormExpr":
        out: dict[Idx, object] = {}
        for idx, c in comps.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} has wrong degree")
            if len(set(idx)) != len(idx):
                raise ValueError(f"repeated index in {idx}")
            sidx = tuple(sorted(idx))
            sign = _perm_sign(idx)
            cc = self._coerce(c) if sign == 1 else self._coerce(c) * (-1)
            if sidx in out:
                out[sidx] = out[sidx] + cc
            else:
                out[sidx] = cc
        return FormExpr(self, degree, out)

    def one_form(self, label: str) -> "FormExpr":
        return self.basis((self.labels.index(label),))

    def basis(self, idx: Iterable[int]) -> "FormExpr":
        idx = tuple(idx)
        return self.form(len(idx), {idx: 1})

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    # -- structure equations ----------------------------------------------
    def set_d_rules(self, rules: Mapping[str, "FormExpr"]) -> None:
        """Install d(e^label) for every non-closed label and check d^2 = 0."""
        if self._rules_set:
            raise RuntimeError("d-rules already set")
        for lab, rule in rules.items():
            i = self.labels.index(lab)
            if rule.degree != 2:
                raise ValueError(f"d({lab}) must be a 2-form")
            if lab == self.radial and not rule.is_zero:
                raise ValueError("the radial label must be closed")
            self.d_rules[i] = rule
        self._rules_set = True
        for i in range(self.n):
            dd = self._d_rule(i).d()
            if not dd.is_zero:
                self._rules_set = False
                self.d_rules = {}
                raise ValueError(f"d^2(e^{self.labels[i]}) != 0: {dd}")

    def _d_rule(self, i: int) -> "FormExpr":
        rule = self.d_rules.get(i)
        if rule is None:
            return self.zero_form(2)
        return rule

    def d_basis(self, idx: Idx) -> "FormExpr":
        """d of the basis form e^idx via the Leibniz rule."""
        cached = self._d_basis_cache.get(idx)
        if cached is not None:
            return cached
        out = self.zero_form(len(idx) + 1)
        for p, i in enumerate(idx):
            rule = self._d_rule(i)
            if rule.is_zero:
                continue
            piece = self.basis(idx[:p]).wedge(rule).wedge(self.basis(idx[p + 1:]))
            out = out + piece if p % 2 == 0 else out - piece
        self._d_basis_cache[idx] = out
        return out


class FormExpr:
    """Sparse differential form over a Coframe.

    comps maps strictly increasing index tuples to scalar coefficients.
    Coefficients only need ring-style +, *, negation, deriv() and is_zero,
    so the trigonometric ring of the sine-cone model plugs in unchanged.
    """

    __slots__ = ("frame", "degree", "comps")

    def __init__(self, frame: Coframe, degree: int, comps: dict[Idx, object]):
        if degree < 0 or (degree > frame.n and comps):
            raise ValueError(f"bad form degree {degree}")
        self.frame = frame
        self.degree = degree
        self.comps = {k: v for k, v in comps.items() if not v.is_zero}

    # -- linear structure --------------------------------------------------
    def _check(self, other: "FormExpr"):
        if other.frame is not self.frame:
            raise ValueError("forms over different coframes")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "FormExpr") -> "FormExpr":
        if self.degree == 0 and not isinstance(other, FormExpr):
            other = self.frame.form(0, {(): other})
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            w = out.get(k)
            out[k] = v if w is None else w + v
        return FormExpr(self.frame, self.degree, out)

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + (-other)

    def __neg__(self) -> "FormExpr":
        return FormExpr(self.frame, self.degree, {k: -v for k, v in self.comps.items()})

    def __mul__(self, scalar) -> "FormExpr":
        c = self.frame.coerce(scalar)
        if c.is_zero:
            return self.frame.zero_form(self.degree)
        return FormExpr(self.frame, self.degree, {k: v * c for k, v in self.comps.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "FormExpr":
        c = self.frame.coerce(scalar)
        return FormExpr(self.frame, self.degree, {k: v / c for k, v in self.comps.items()})

    @property
    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other):
        if not isinstance(other, FormExpr):
            return NotImplemented
        if other.frame is not self.frame or other.degree != self.degree:
            return False
        return (self - other).is_zero

    def __hash__(self):
        return hash((self.degree, frozenset(self.comps.keys())))

    # -- multiplicative structure ------------------------------------------
    def wedge(self, other: "FormExpr") -> "FormExpr":
        if other.frame is not self.frame:
            raise ValueError("forms over different coframes")
        deg = self.degree + other.degree
        if deg > self.frame.n:
            return FormExpr(self.frame, deg, {})
        out: dict[Idx, object] = {}
        for I, a in self.comps.items():
            for J, b in other.comps.items():
                merged = _merge_indices(I, J)
                if merged is None:
                    continue
                K, sign = merged
                c = a * b if sign == 1 else -(a * b)
                w = out.get(K)
                out[K] = c if w is None else w + c
        return FormExpr(self.frame, deg, out)

    def d(self) -> "FormExpr":
        """Exterior derivative using the frame structure equations."""
        frame = self.frame
        out = frame.zero_form(self.degree + 1)
        for I, c in self.comps.items():
            dc = c.deriv()
            if not dc.is_zero:
                if frame.radial_index is None:
                    raise ValueError("t-dependent coefficient on a frame with no radial label")
                merged = _merge_indices((frame.radial_index,), I)
                if merged is not None:
                    K, sign = merged
                    v = dc if sign == 1 else -dc
                    out = out + FormExpr(frame, self.degree + 1, {K: v})
            dI = frame.d_basis(I)
            if not dI.is_zero:
                out = out + dI * c
        return out

    def contract(self, vector: Sequence) -> "FormExpr":
        """Interior product with the vector X = sum_i vector[i] E_i."""
        if self.degree == 0:
            raise ValueError("cannot contract a 0-form")
        frame = self.frame
        coeffs = [frame.coerce(v) for v in vector]
        out: dict[Idx, object] = {}
        for I, c in self.comps.items():
            for p, i in enumerate(I):
                v = coeffs[i]
                if v.is_zero:
                    continue
                K = I[:p] + I[p + 1:]
                term = c * v if p % 2 == 0 else -(c * v)
                w = out.get(K)
                out[K] = term if w is None else w + term
        return FormExpr(frame, self.degree - 1, out)

    # -- coefficient tools ---------------------------------------------------
    def map_coeffs(self, fn: Callable) -> "FormExpr":
        return FormExpr(self.frame, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def substitute(self, assignments: Mapping) -> "FormExpr":
        return self.map_coeffs(lambda c: c.substitute(assignments))

    def coefficient(self, idx: Iterable[int]):
        idx = tuple(idx)
        sidx = tuple(sorted(idx))
        c = self.comps.get(sidx)
        if c is None:
            return self.frame.scalar_zero
        return c if _perm_sign(idx) == 1 else -c

    def legs(self) -> set[int]:
        used: set[int] = set()
        for I in self.comps:
            used.update(I)
        return used

    def has_leg(self, i: int) -> bool:
        return any(i in I for I in self.comps)

    def evaluate(self, t: float, params: Mapping[str, float] | None = None) -> dict[Idx, float]:
        return {I: c.evaluate(t, params) for I, c in self.comps.items()}

    def __str__(self):
        if not self.comps:
            return "0"
        frame = self.frame
        bits = []
        for I in sorted(self.comps):
            name = "^".join(frame.labels[i] for i in I) if I else "1"
            bits.append(f"({self.comps[I]}) {name}")
        return "  +  ".join(bits)

    def __repr__(self):
        return f"FormExpr<deg {self.degree}>({self})"


class Metric:
    """Symmetric metric over a subset of the frame labels.

    on: index tuple the metric lives on (defaults to the whole frame); the
    Hodge star of forms supported on those legs is computed within them.
    orientation: +1 or -1 relative to the label-order volume form.
    """

    def __init__(self, frame: Coframe, mat: Sequence[Sequence], on: Sequence[int] | None = None,
                 orientation: int = 1):
        self.frame = frame
        self.on = tuple(on) if on is not None else tuple(range(frame.n))
        k = len(self.on)
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.orientation = orientation
        rows = [[frame.coerce(x) for x in row] for row in mat]
        if len(rows) != k or any(len(r) != k for r in rows):
            raise ValueError(f"metric must be {k}x{k}")
        for i in range(k):
            for j in range(i + 1, k):
                if not (rows[i][j] - rows[j][i]).is_zero:
                    raise ValueError("metric matrix must be symmetric")
        self.mat = rows
        self._det = None
        self._sqrt_det = None
        self._inv = None
        self._gram_cache: dict[tuple[Idx, Idx], object] = {}
        self._pos = {lab: p for p, lab in enumerate(self.on)}

    # -- determinant and inverse ---------------------------------------------
    def _minor_det(self, rows: tuple[int, ...], cols: tuple[int, ...], mat) -> object:
        if not rows:
            return self.frame.coerce(1)
        if len(rows) == 1:
            return mat[rows[0]][cols[0]]
        best_r = min(range(len(rows)),
                     key=lambda r: sum(0 if mat[rows[r]][c].is_zero else 1 for c in cols))
        total = self.frame.coerce(0)
        r = rows[best_r]
        sub_rows = rows[:best_r] + rows[best_r + 1:]
        for pos, c in enumerate(cols):
            a = mat[r][c]
            if a.is_zero:
                continue
            sub_cols = cols[:pos] + cols[pos + 1:]
            minor = self._minor_det(sub_rows, sub_cols, mat)
            term = a * minor
            if (best_r + pos) % 2:
                term = -term
            total = total + term
        return total

    def det(self):
        if self._det is None:
            k = len(self.on)
            self._det = self._minor_det(tuple(range(k)), tuple(range(k)), self.mat)
        return self._det

    def sqrt_det(self):
        if self._sqrt_det is None:
            self._sqrt_det = self.det().sqrt()
        return self._sqrt_det

    def inverse(self):
        """Adjugate inverse; requires the determinant to be a unit monomial."""
        if self._inv is None:
            k = len(self.on)
            det = self.det()
            try:
                det_inv = det.inverse()
            except (ValueError, AttributeError) as exc:
                raise ValueError(
                    "metric determinant is not a unit monomial; "
                    "use the numeric Hodge path") from exc
            inv = []
            for i in range(k):
                row = []
                for j in range(k):
                    rows = tuple(r for r in range(k) if r != j)
                    cols = tuple(c for c in range(k) if c != i)
                    cof = self._minor_det(rows, cols, self.mat)
                    if (i + j) % 2:
                        cof = -cof
                    row.append(cof * det_inv)
                inv.append(row)
            self._inv = inv
        return self._inv

    def gram(self, I: Idx, J: Idx):
        """Inner product <e^I, e^J> = det of the inverse-metric block."""
        key = (I, J)
        cached = self._gram_cache.get(key)
        if cached is not None:
            return cached
        inv = self.inverse()
        pos = self._pos
        k = len(I)
        sub = [[inv[pos[a]][pos[b]] for b in J] for a in I]
        if k == 0:
            out = self.frame.coerce(1)
        else:
            out = self._minor_det(tuple(range(k)), tuple(range(k)), sub)
        self._gram_cache[key] = out
        return out

    def vol(self) -> FormExpr:
        v = self.frame.form(len(self.on), {tuple(sorted(self.on)): self.sqrt_det()})
        return v if self.orientation == 1 else -v

    def evaluate(self, t: float, params: Mapping[str, float] | None = None) -> np.ndarray:
        k = len(self.on)
        g = np.zeros((k, k))
        for i in range(k):
            for j in range(k):
                g[i, j] = self.mat[i][j].evaluate(t, params)
        return g


def _complement_sign(J: Idx, on: Idx) -> tuple[Idx, int]:
    Jc = tuple(i for i in on if i not in J)
    order = {lab: p for p, lab in enumerate(on)}
    seq = [order[i] for i in J] + [order[i] for i in Jc]
    return Jc, _perm_sign(seq)


def _subsets(seq: Idx, k: int):
    from itertools import combinations
    return combinations(seq, k)


def hodge(form: FormExpr, metric: Metric) -> FormExpr:
    """Exact Hodge star within metric.on.

    star(e^I) = sqrt(det g) * sum_J <e^J, e^I> sign(J, J^c) e^(J^c),
    linear over coefficients, times the orientation.
    """
    frame = form.frame
    on = metric.on
    if not form.legs() <= set(on):
        raise ValueError("form has legs outside the metric support")
    k = form.degree
    n = len(on)
    sd = metric.sqrt_det()
    out = frame.zero_form(n - k)
    for I, c in form.comps.items():
        for J in _subsets(on, k):
            g = metric.gram(tuple(J), I)
            if g.is_zero:
                continue
            Jc, sign = _complement_sign(tuple(J), on)
            coeff = c * g * sd
            if sign * metric.orientation == -1:
                coeff = -coeff
            out = out + FormExpr(frame, n - k, {Jc: coeff})
    return out


def inner(a: FormExpr, b: FormExpr, metric: Metric):
    """Pointwise inner product <a, b> as a scalar."""
    top = a.wedge(hodge(b, metric))
    idx = tuple(sorted(metric.on))
    c = top.comps.get(idx)
    if c is None:
        return frame_zero(a)
    denom = metric.sqrt_det()
    val = c / denom
    return val if metric.orientation == 1 else -val


def frame_zero(a: FormExpr):
    return a.frame.scalar_zero


def norm_sq(a: FormExpr, metric: Metric):
    return inner(a, a, metric)


def pullback(form: FormExpr, M: Sequence[Sequence], target: Coframe | None = None) -> FormExpr:
    """Pull back along the linear map sending e^i to sum_j M[i][j] f^j."""
    tf = target or form.frame
    images = [tf.form(1, {(j,): M[i][j] for j in range(tf.n)}) for i in range(form.frame.n)]
    out = tf.zero_form(form.degree)
    for I, c in form.comps.items():
        w = None
        for i in I:
            w = images[i] if w is None else w.wedge(images[i])
        if w is None:
            w = tf.form(0, {(): 1})
        out = out + w * c
    return out


# -- numeric twin path -------------------------------------------------------

NumComps = dict[Idx, float]


def form_to_numeric(form: FormExpr, t: float, params: Mapping[str, float] | None = None) -> NumComps:
    return {I: c.evaluate(t, params) for I, c in form.comps.items()}


def wedge_numeric(a: NumComps, b: NumComps) -> NumComps:
    out: NumComps = {}
    for I, x in a.items():
        for J, y in b.items():
            merged = _merge_indices(I, J)
            if merged is None:
                continue
            K, sign = merged
            out[K] = out.get(K, 0.0) + sign * x * y
    return {k: v for k, v in out.items() if v != 0.0}


def contract_numeric(a: NumComps, vector: Sequence[float]) -> NumComps:
    out: NumComps = {}
    for I, c in a.items():
        for p, i in enumerate(I):
            v = vector[i]
            if v == 0.0:
                continue
            K = I[:p] + I[p + 1:]
            out[K] = out.get(K, 0.0) + (c * v if p % 2 == 0 else -c * v)
    return out


def hodge_numeric(a: NumComps, degree: int, g: np.ndarray, on: Sequence[int] | None = None,
                  orientation: int = 1) -> NumComps:
    n = g.shape[0]
    on = tuple(on) if on is not None else tuple(range(n))
    if len(on) != n:
        raise ValueError("metric size must match the index set")
    ginv = np.linalg.inv(g)
    sd = float(np.sqrt(np.linalg.det(g)))
    pos = {lab: p for p, lab in enumerate(on)}
    out: NumComps = {}
    for I, c in a.items():
        rows = [pos[i] for i in I]
        for J in _subsets(on, degree):
            cols = [pos[j] for j in J]
            sub = ginv[np.ix_(cols, rows)]
            gval = float(np.linalg.det(sub)) if degree else 1.0
            if abs(gval) < 1e-300:
                continue
            Jc, sign = _complement_sign(tuple(J), on)
            out[Jc] = out.get(Jc, 0.0) + orientation * sign * sd * gval * c
    return {k: v for k, v in out.items() if v != 0.0}


def norm_sq_numeric(a: NumComps, degree: int, g: np.ndarray, on: Sequence[int] | None = None,
                    orientation: int = 1) -> float:
    n = g.shape[0]
    on = tuple(on) if on is not None else tuple(range(n))
    star = hodge_numeric(a, degree, g, on, orientation)
    top = wedge_numeric(a, star)
    idx = tuple(sorted(on))
    sd = float(np.sqrt(np.linalg.det(g)))
    return orientation * top.get(idx, 0.0) / sd


def metric_from_phi_numeric(phi: NumComps, n: int = 7) -> np.ndarray:
    """Recover the metric of a positive G2 3-form by the standard bilinear.

    B_ij vol = (1/6) (E_i . phi) ^ (E_j . phi) ^ phi fixes g up to the
    conformal factor det(B)^(1/9); det(B) <= 0 means phi is not positive.
    """
    if n != 7:
        raise ValueError("G2 3-forms live on 7 labels")
    top = tuple(range(7))
    B = np.zeros((7, 7))
    for i in range(7):
        ei = [0.0] * 7
        ei[i] = 1.0
        pi = contract_numeric(phi, ei)
        for j in range(i, 7):
            ej = [0.0] * 7
            ej[j] = 1.0
            pj = contract_numeric(phi, ej)
            w = wedge_numeric(wedge_numeric(pi, pj), phi)
            B[i, j] = B[j, i] = w.get(top, 0.0) / 6.0
    det = np.linalg.det(B)
    if det <= 0:
        raise ValueError("not a positive G2 3-form at this sample")
    return B * det ** (-1.0 / 9.0)
