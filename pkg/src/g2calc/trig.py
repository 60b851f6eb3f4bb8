"""Exact trigonometric polynomial coefficients for interval frames.

An element is a finite sum  sum_q q_(a,b) * sin(t)^a * cos(t)^b  with
coefficients in Q(sqrt(d)).  The relation cos^2 = 1 - sin^2 is reduced
away on construction, so every element has a unique normal form whose
cosine power is 0 or 1; equality and is_zero are then exact dictionary
comparisons.  The class implements the coefficient protocol the exterior
engine expects (+, *, unary -, is_zero, deriv, evaluate), which lets a
Coframe with trigonometric structure constants reuse FormExpr unchanged.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

from .scalars import QuadNum

TrigKey = tuple[int, int]   # (sine power, cosine power); normalized cosine power is 0 or 1


class TrigPoly:
    """Polynomial in sin(t), cos(t) over Q(sqrt(d)), in reduced normal form."""

    __slots__ = ("terms", "d")

    def __init__(self, terms: dict[TrigKey, object] | None = None, d: int = 3):
        self.d = d
        out: dict[TrigKey, QuadNum] = {}
        stack = list(terms.items()) if terms else []
        while stack:
            (a, b), q = stack.pop()
            if a < 0 or b < 0:
                raise ValueError(f"negative trigonometric power {(a, b)}")
            q = self._coeff(q)
            if q.is_zero:
                continue
            if b >= 2:
                stack.append(((a, b - 2), q))
                stack.append(((a + 2, b - 2), -q))
                continue
            cur = out.get((a, b))
            tot = q if cur is None else cur + q
            if tot.is_zero:
                out.pop((a, b), None)
            else:
                out[(a, b)] = tot
        self.terms = out

    # -- coercion -----------------------------------------------------------
    def _coeff(self, x) -> QuadNum:
        if isinstance(x, QuadNum):
            if x.d != self.d:
                raise ValueError(f"mixed quadratic rings: d={self.d} vs d={x.d}")
            return x
        if isinstance(x, (int, Fraction)):
            return QuadNum(x, 0, self.d)
        raise TypeError(f"cannot use {x!r} as a trigonometric coefficient")

    def _other(self, x) -> "TrigPoly | None":
        if isinstance(x, TrigPoly):
            if x.d != self.d:
                raise ValueError(f"mixed quadratic rings: d={self.d} vs d={x.d}")
            return x
        if isinstance(x, (int, Fraction, QuadNum)):
            return TrigPoly({(0, 0): x}, self.d)
        return None

    # -- ring operations ------------------------------------------------------
    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            w = out.get(k)
            tot = v if w is None else w + v
            if tot.is_zero:
                out.pop(k, None)
            else:
                out[k] = tot
        res = TrigPoly(d=self.d)
        res.terms = out
        return res

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        res = TrigPoly(d=self.d)
        res.terms = {k: -v for k, v in self.terms.items()}
        return res

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        out: dict[TrigKey, QuadNum] = {}
        for (a1, b1), q1 in self.terms.items():
            for (a2, b2), q2 in o.terms.items():
                k = (a1 + a2, b1 + b2)
                q = q1 * q2
                w = out.get(k)
                out[k] = q if w is None else w + q
        return TrigPoly(out, self.d)

    __rmul__ = __mul__

    # -- predicates ------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.keys())))

    # -- calculus ---------------------------------------------------------------
    def deriv(self) -> "TrigPoly":
        """d/dt with sin' = cos and cos' = -sin, renormalized."""
        out: dict[TrigKey, QuadNum] = {}
        for (a, b), q in self.terms.items():
            if a:
                k = (a - 1, b + 1)
                w = out.get(k)
                v = q * a
                out[k] = v if w is None else w + v
            if b:
                k = (a + 1, b - 1)
                w = out.get(k)
                v = -(q * b)
                out[k] = v if w is None else w + v
        return TrigPoly(out, self.d)

    def evaluate(self, t: float, params=None) -> float:
        s, c = math.sin(t), math.cos(t)
        return sum(float(q) * s ** a * c ** b for (a, b), q in self.terms.items())

    def constant_term(self) -> QuadNum:
        """The exact value when every sine factor vanishes (t = 0)."""
        return self.terms.get((0, 0), QuadNum(0, 0, self.d))

    def __repr__(self):
        if not self.terms:
            return "TrigPoly(0)"
        bits = []
        for (a, b), q in sorted(self.terms.items()):
            mono = "*".join((["s^%d" % a] if a else []) + (["c"] if b else []))
            bits.append(f"({q!r})" + ("*" + mono if mono else ""))
        return "TrigPoly(" + " + ".join(bits) + ")"


def trig_const(x, d: int = 3) -> TrigPoly:
    return TrigPoly({(0, 0): x}, d)


def trig_sin(d: int = 3, power: int = 1) -> TrigPoly:
    return TrigPoly({(power, 0): 1}, d)


def trig_cos(d: int = 3, power: int = 1) -> TrigPoly:
    return TrigPoly({(0, power): 1}, d)


def trig_coerce(d: int = 3) -> Callable:
    """Coefficient coercion hook for a Coframe over the trigonometric ring."""
    def coerce(x):
        if isinstance(x, TrigPoly):
            if x.d != d:
                raise ValueError(f"mixed quadratic rings: d={d} vs d={x.d}")
            return x
        if isinstance(x, (int, Fraction, QuadNum)):
            return trig_const(x, d)
        raise TypeError(f"cannot coerce {x!r} to a trigonometric coefficient")
    return coerce
