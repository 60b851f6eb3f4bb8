"""Exact scalar arithmetic for the form engine.

Coefficients live in the real quadratic field Q(sqrt(d)), default d = 3.
A ScalarExpr is a finite sum of terms

    c * p1^e1 * ... * pr^er * t^k * log(t)^m

with c in Q(sqrt(d)), formal parameters p_i, integer k and m >= 0.
Parameters are registered on a Ring; exponents e_i may go negative only
for parameters flagged invertible.  Division is defined only by unit
monomials (a single term, no log factor, all parameter factors
invertible), which is exactly what the adapted coframes need: every
metric determinant we invert or take a square root of is such a monomial.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

RatLike = Union[int, Fraction]


def _frac_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a rational, or None if irrational."""
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


class QuadNum:
    """Element a + b*sqrt(d) of Q(sqrt(d)) with exact rational a, b.

    Mixing values built over different d is an error, not a coercion.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: RatLike = 0, b: RatLike = 0, d: int = 3):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    # -- helpers -------------------------------------------------------
    def _coerce(self, other) -> "QuadNum | None":
        if isinstance(other, QuadNum):
            if other.d != self.d:
                raise ValueError(f"mixed quadratic rings: d={self.d} vs d={other.d}")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadNum(other, 0, self.d)
        return None

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadNum(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadNum(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadNum(o.a - self.a, o.b - self.b, self.d)

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadNum(
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadNum":
        n = self.a * self.a - self.d * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("QuadNum inverse of zero")
        return QuadNum(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out = QuadNum(1, 0, self.d)
        for _ in range(abs(n)):
            out = out * base
        return out

    # -- predicates ----------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Exact sign of the real number a + b*sqrt(d)."""
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return (self.b > 0) - (self.b < 0)
        sa = 1 if self.a > 0 else -1
        sb = 1 if self.b > 0 else -1
        if sa == sb:
            return sa
        # a and b*sqrt(d) compete; compare a^2 against d*b^2
        lhs = self.a * self.a
        rhs = self.d * self.b * self.b
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except ValueError:
            return False
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def conjugate(self) -> "QuadNum":
        return QuadNum(self.a, -self.b, self.d)

    def sqrt(self) -> "QuadNum | None":
        """Exact square root inside Q(sqrt(d)), or None.

        Solves (x + y*sqrt(d))^2 = a + b*sqrt(d) over the rationals.
        """
        if self.sign() < 0:
            return None
        if self.b == 0:
            x = _frac_sqrt(self.a)
            if x is not None:
                return QuadNum(x, 0, self.d)
            y2 = self.a / self.d
            y = _frac_sqrt(y2)
            if y is not None:
                return QuadNum(0, y, self.d)
            return None
        disc = self.a * self.a - self.d * self.b * self.b
        s = _frac_sqrt(disc)
        if s is None:
            return None
        for x2 in ((self.a + s) / 2, (self.a - s) / 2):
            if x2 <= 0:
                continue
            x = _frac_sqrt(x2)
            if x is None:
                continue
            y = self.b / (2 * x)
            cand = QuadNum(x, y, self.d)
            if cand * cand == self:
                return cand if cand.sign() > 0 else -cand
        return None

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadNum({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"({self.a} + {self.b}*s)"


# A term key is (params, t_exp, log_pow) where params is a sorted tuple
# of (name, exponent) pairs with nonzero exponents.
TermKey = tuple[tuple[tuple[str, int], ...], int, int]


class Ring:
    """Configuration shared by a family of ScalarExpr values.

    Carries the quadratic field constant d and the parameter registry
    (name -> invertible flag).  Arithmetic between expressions of
    different rings is rejected.
    """

    def __init__(self, d: int = 3):
        if d <= 0:
            raise ValueError("d must be a positive square-free integer")
        self.d = d
        self._params: dict[str, bool] = {}

    # -- constructors --------------------------------------------------
    def quad(self, a: RatLike = 0, b: RatLike = 0) -> QuadNum:
        return QuadNum(a, b, self.d)

    def const(self, a: RatLike | QuadNum = 0, b: RatLike = 0) -> "ScalarExpr":
        if isinstance(a, QuadNum):
            if a.d != self.d:
                raise ValueError("QuadNum from a different ring")
            c = a
        else:
            c = QuadNum(a, b, self.d)
        if c.is_zero:
            return ScalarExpr(self, {})
        return ScalarExpr(self, {((), 0, 0): c})

    @property
    def zero(self) -> "ScalarExpr":
        return ScalarExpr(self, {})

    @property
    def one(self) -> "ScalarExpr":
        return self.const(1)

    @property
    def sqrt_d(self) -> "ScalarExpr":
        return self.const(0, 1)

    def t(self, k: int = 1) -> "ScalarExpr":
        return ScalarExpr(self, {((), k, 0): self.quad(1)})

    def log_t(self, m: int = 1) -> "ScalarExpr":
        if m < 0:
            raise ValueError("log power must be >= 0")
        return ScalarExpr(self, {((), 0, m): self.quad(1)})

    def parameter(self, name: str, invertible: bool = False) -> "ScalarExpr":
        """Register (or re-fetch) a formal parameter as a degree-1 monomial."""
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or name in ("t", "s"):
            raise ValueError(f"bad parameter name: {name!r}")
        known = self._params.get(name)
        if known is None:
            self._params[name] = invertible
        elif known != invertible:
            raise ValueError(f"parameter {name!r} re-registered with a different flag")
        return ScalarExpr(self, {(((name, 1),), 0, 0): self.quad(1)})

    def is_invertible(self, name: str) -> bool:
        return self._params.get(name, False)

    def monomial(self, coeff: QuadNum | RatLike, params: Mapping[str, int] | None = None,
                 t_exp: int = 0, log_pow: int = 0) -> "ScalarExpr":
        c = coeff if isinstance(coeff, QuadNum) else self.quad(coeff)
        if c.is_zero:
            return self.zero
        items = tuple(sorted((n, e) for n, e in (params or {}).items() if e != 0))
        for n, e in items:
            if n not in self._params:
                self._params[n] = False
            if e < 0 and not self._params[n]:
                raise ValueError(f"negative exponent on non-invertible parameter {n!r}")
        if log_pow < 0:
            raise ValueError("log power must be >= 0")
        return ScalarExpr(self, {(items, t_exp, log_pow): c})

    def parse(self, text: str) -> "ScalarExpr":
        return _parse_scalar(self, text)


class ScalarExpr:
    """Finite sum of monomials over a Ring.   Immutable by convention."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict[TermKey, QuadNum]):
        self.ring = ring
        self.terms = {k: v for k, v in terms.items() if not v.is_zero}

    # -- coercion ------------------------------------------------------
    def _coerce(self, other) -> "ScalarExpr | None":
        if isinstance(other, ScalarExpr):
            if other.ring is not self.ring:
                raise ValueError("ScalarExpr values from different rings")
            return other
        if isinstance(other, (int, Fraction, QuadNum)):
            return self.ring.const(other) if not isinstance(other, QuadNum) \
                else self.ring.const(other)
        return None

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            w = out.get(k)
            out[k] = v if w is None else w + v
        return ScalarExpr(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return ScalarExpr(self.ring, {k: -v for k, v in self.terms.items()})

    @staticmethod
    def _merge_params(p: tuple, q: tuple) -> tuple:
        d: dict[str, int] = {}
        for n, e in p:
            d[n] = d.get(n, 0) + e
        for n, e in q:
            d[n] = d.get(n, 0) + e
        return tuple(sorted((n, e) for n, e in d.items() if e != 0))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[TermKey, QuadNum] = {}
        for (p1, k1, m1), c1 in self.terms.items():
            for (p2, k2, m2), c2 in o.terms.items():
                key = (self._merge_params(p1, p2), k1 + k2, m1 + m2)
                c = c1 * c2
                w = out.get(key)
                out[key] = c if w is None else w + c
        return ScalarExpr(self.ring, out)

    __rmul__ = __mul__

    def as_unit_monomial(self) -> tuple[QuadNum, tuple, int] | None:
        """Return (coeff, params, t_exp) when this is a log-free single term
        whose parameter factors are all invertible; else None."""
        if len(self.terms) != 1:
            return None
        (params, k, m), c = next(iter(self.terms.items()))
        if m != 0:
            return None
        for n, _ in params:
            if not self.ring.is_invertible(n):
                return None
        return c, params, k

    def inverse(self) -> "ScalarExpr":
        um = self.as_unit_monomial()
        if um is None:
            raise ValueError("division defined only by unit monomials")
        c, params, k = um
        return ScalarExpr(
            self.ring,
            {(tuple((n, -e) for n, e in params), -k, 0): c.inverse()},
        )

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out = self.ring.one
        for _ in range(abs(n)):
            out = out * base
        return out

    def sqrt(self) -> "ScalarExpr":
        """Exact square root of a positive unit monomial with even exponents."""
        um = self.as_unit_monomial()
        if um is None:
            raise ValueError("sqrt defined only for unit monomials; "
                             "use the numeric path otherwise")
        c, params, k = um
        if k % 2 != 0 or any(e % 2 != 0 for _, e in params):
            raise ValueError("sqrt needs even exponents on t and parameters")
        r = c.sqrt()
        if r is None:
            raise ValueError(f"coefficient {c} has no square root in Q(sqrt({self.ring.d}))")
        return ScalarExpr(
            self.ring,
            {(tuple((n, e // 2) for n, e in params), k // 2, 0): r},
        )

    # -- calculus ------------------------------------------------------
    def deriv(self) -> "ScalarExpr":
        """d/dt, with d/dt (t^k log(t)^m) = k t^(k-1) log^m + m t^(k-1) log^(m-1)."""
        out: dict[TermKey, QuadNum] = {}
        for (p, k, m), c in self.terms.items():
            if k != 0:
                key = (p, k - 1, m)
                v = c * k
                w = out.get(key)
                out[key] = v if w is None else w + v
            if m != 0:
                key = (p, k - 1, m - 1)
                v = c * m
                w = out.get(key)
                out[key] = v if w is None else w + v
        return ScalarExpr(self.ring, out)

    def substitute(self, assignments: Mapping[str, "ScalarExpr | RatLike | QuadNum"]) -> "ScalarExpr":
        """Exact substitution of parameters by scalar expressions."""
        subs: dict[str, ScalarExpr] = {}
        for name, val in assignments.items():
            sv = self._coerce(val)
            if sv is None:
                raise TypeError(f"cannot substitute {val!r}")
            subs[name] = sv
        out = self.ring.zero
        for (p, k, m), c in self.terms.items():
            piece = ScalarExpr(self.ring, {((), k, m): c})
            keep: list[tuple[str, int]] = []
            for n, e in p:
                if n in subs:
                    piece = piece * subs[n] ** e
                else:
                    keep.append((n, e))
            if keep:
                piece = piece * ScalarExpr(self.ring, {(tuple(sorted(keep)), 0, 0): self.ring.quad(1)})
            out = out + piece
        return out

    # -- structure queries ----------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return not self.is_zero

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except ValueError:
            return False
        if o is None:
            return NotImplemented
        return (self - o).is_zero

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def constant_value(self) -> QuadNum | None:
        """The QuadNum value when the expression is a constant, else None."""
        if not self.terms:
            return self.ring.quad(0)
        if len(self.terms) == 1:
            (p, k, m), c = next(iter(self.terms.items()))
            if not p and k == 0 and m == 0:
                return c
        return None

    def parameters(self) -> set[str]:
        names: set[str] = set()
        for (p, _, _) in self.terms:
            for n, _ in p:
                names.add(n)
        return names

    def t_slices(self) -> dict[tuple[int, int], "ScalarExpr"]:
        """Split by (t-exponent, log-power), stripping the t-part.

        The expression vanishes identically in t exactly when every slice
        vanishes; each returned slice is t-free.
        """
        out: dict[tuple[int, int], dict] = {}
        for (p, k, m), c in self.terms.items():
            out.setdefault((k, m), {})[(p, 0, 0)] = c
        return {key: ScalarExpr(self.ring, terms) for key, terms in out.items()}

    def leading_exponent(self, limit: str = "infinity") -> tuple[int, int]:
        """(t-exponent, log-power) of the dominant term.

        Parameters are treated as generic nonzero constants.  At infinity
        the largest t-exponent wins, at zero the smallest; among equal
        t-exponents the larger log power dominates at both ends.
        Raises ValueError on the zero expression.
        """
        if not self.terms:
            raise ValueError("zero expression has no leading term")
        if limit == "infinity":
            k = max(key[1] for key in self.terms)
        elif limit == "zero":
            k = min(key[1] for key in self.terms)
        else:
            raise ValueError("limit must be 'infinity' or 'zero'")
        m = max(key[2] for key in self.terms if key[1] == k)
        return (k, m)

    # -- numerics --------------------------------------------------------
    def evaluate(self, t: float, params: Mapping[str, float] | None = None) -> float:
        params = params or {}
        total = 0.0
        for (p, k, m), c in self.terms.items():
            val = float(c)
            for n, e in p:
                if n not in params:
                    raise KeyError(f"no numeric value for parameter {n!r}")
                val *= params[n] ** e
            val *= t ** k
            if m:
                val *= math.log(t) ** m
            total += val
        return total

    # -- printing --------------------------------------------------------
    def _term_str(self, key: TermKey, c: QuadNum) -> str:
        p, k, m = key
        if c.b == 0:
            head = str(c.a)
        else:
            head = f"({c.a} + {c.b}*s)"
        parts = [head]
        for n, e in p:
            parts.append(f"{n}^{e}")
        if k != 0:
            parts.append(f"t^{k}")
        if m != 0:
            parts.append(f"log(t)^{m}")
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        keys = sorted(self.terms.keys())
        return " + ".join(self._term_str(k, self.terms[k]) for k in keys)

    def __repr__(self):
        return f"ScalarExpr({self})"


# -- parser ---------------------------------------------------------------

_FACTOR_RE = re.compile(r"^(t|log\(t\)|[A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")
_RAT_RE = re.compile(r"^-?\d+(?:/\d+)?$")


def _split_depth0(text: str, sep: str) -> list[str]:
    parts, depth, buf = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            parts.append("".join(buf))
            buf = []
            i += len(sep)
            continue
        buf.append(ch)
        i += 1
    parts.append("".join(buf))
    return parts


def _parse_coeff(ring: Ring, text: str) -> QuadNum:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1]
        a = Fraction(0)
        b = Fraction(0)
        for piece in _split_depth0(inner, "+"):
            piece = piece.strip()
            if not piece:
                raise ValueError(f"bad coefficient: {text!r}")
            if piece.endswith("*s"):
                b += Fraction(piece[:-2].strip())
            elif piece == "s":
                b += 1
            elif piece == "-s":
                b -= 1
            else:
                a += Fraction(piece)
        return ring.quad(a, b)
    if _RAT_RE.match(text):
        return ring.quad(Fraction(text))
    raise ValueError(f"bad coefficient: {text!r}")


def _parse_scalar(ring: Ring, text: str) -> ScalarExpr:
    """Parse the printed grammar, e.g. '(-3/2 + 1/3*s)*t^-3*log(t)^2*g^1'."""
    text = text.strip()
    if not text:
        raise ValueError("empty scalar expression")
    total = ring.zero
    for term_text in _split_depth0(text, "+"):
        term_text = term_text.strip()
        if not term_text:
            raise ValueError(f"empty term in {text!r}")
        pieces = [p.strip() for p in _split_depth0(term_text, "*")]
        coeff = _parse_coeff(ring, pieces[0])
        params: dict[str, int] = {}
        t_exp = 0
        log_pow = 0
        for fac in pieces[1:]:
            m = _FACTOR_RE.match(fac)
            if not m:
                raise ValueError(f"bad factor {fac!r}")
            name, exp_s = m.group(1), m.group(2)
            e = int(exp_s) if exp_s is not None else 1
            if name == "t":
                t_exp += e
            elif name == "log(t)":
                if e < 0:
                    raise ValueError("log power must be >= 0")
                log_pow += e
            else:
                if name == "s":
                    raise ValueError("use the coefficient slot for s")
                if e < 0 and not ring.is_invertible(name):
                    # registering through parse keeps invertibility explicit
                    raise ValueError(f"negative exponent on non-invertible parameter {name!r}")
                params[name] = params.get(name, 0) + e
        total = total + ring.monomial(coeff, params, t_exp, log_pow)
    return total
