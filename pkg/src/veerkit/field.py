"""Exact real algebraic number field arithmetic.

A field is Q(alpha) for alpha the unique root of an integer polynomial inside
an isolating rational interval; elements are rational-coefficient vectors in
the power basis.  Sign determination refines the isolating interval with exact
rational arithmetic, falling back to a gcd test that decides equality with
zero even when the minimal polynomial is not irreducible.

Elements additionally carry certified float bounds (outward-rounded through
every operation) so that most sign queries resolve without touching rational
arithmetic; the exact path is only the fallback.
"""

import math
from fractions import Fraction

_INF = math.inf


def _fdown(x):
    return math.nextafter(x, -_INF)


def _fup(x):
    return math.nextafter(x, _INF)


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_add(p, q):
    n = max(len(p), len(q))
    return _poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                       for i in range(n)])


def _poly_scale(p, c):
    return _poly_trim([x * c for x in p])


def _poly_mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _poly_trim(out)


def _poly_divmod(p, q):
    p = list(p)
    d = len(q) - 1
    lead = q[-1]
    quo = [Fraction(0)] * max(0, len(p) - d)
    while len(p) - 1 >= d and p:
        c = p[-1] / lead
        k = len(p) - 1 - d
        quo[k] = c
        for i in range(len(q)):
            p[k + i] -= c * q[i]
        _poly_trim(p)
        if not p:
            break
    return _poly_trim(quo), _poly_trim(p)


def _poly_gcd(p, q):
    p, q = list(p), list(q)
    while q:
        _, r = _poly_divmod(p, q)
        p, q = q, r
    if p:
        lead = p[-1]
        p = [x / lead for x in p]
    return p


def _poly_eval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


class NumberField:
    """Q(alpha), alpha the root of ``min_poly`` isolated by ``root_interval``."""

    def __init__(self, min_poly, root_interval):
        self.min_poly = [Fraction(int(c)) for c in min_poly]
        _poly_trim(self.min_poly)
        if len(self.min_poly) < 2:
            raise ValueError("minimal polynomial must have positive degree")
        lo, hi = Fraction(root_interval[0]), Fraction(root_interval[1])
        if not lo < hi:
            raise ValueError("root interval must be nondegenerate")
        if _poly_eval(self.min_poly, lo) == 0 or _poly_eval(self.min_poly, hi) == 0:
            raise ValueError("root interval endpoints must not be roots")
        if (_poly_eval(self.min_poly, lo) > 0) == (_poly_eval(self.min_poly, hi) > 0):
            raise ValueError("root interval shows no sign change")
        self._lo, self._hi = lo, hi
        self.degree = len(self.min_poly) - 1
        # pre-refine so float bounds are tight, then freeze float root bounds
        for _ in range(80):
            if self._hi - self._lo < Fraction(1, 10 ** 18):
                break
            self.refine_root()
        self.root_flo = _fdown(float(self._lo))
        self.root_fhi = _fup(float(self._hi))

    def refine_root(self):
        """One bisection step on the isolating interval."""
        mid = (self._lo + self._hi) / 2
        v = _poly_eval(self.min_poly, mid)
        if v == 0:
            # the root is exactly rational; pinch the interval around it
            eps = (self._hi - self._lo) / 4
            self._lo, self._hi = mid - eps, mid + eps
            lo_v = _poly_eval(self.min_poly, self._lo)
            if lo_v == 0 or (lo_v > 0) == (_poly_eval(self.min_poly, self._hi) > 0):
                self._lo, self._hi = mid, mid
            return
        if (v > 0) == (_poly_eval(self.min_poly, self._hi) > 0):
            self._hi = mid
        else:
            self._lo = mid

    def root_bounds(self):
        return self._lo, self._hi

    def element(self, coeffs):
        vec = [Fraction(c) for c in coeffs]
        if len(vec) > self.degree:
            raise ValueError("coefficient vector longer than the field degree")
        vec += [Fraction(0)] * (self.degree - len(vec))
        return FieldElement(self, vec)

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def gen(self):
        return self.element([0, 1])

    def from_rational(self, q):
        return self.element([Fraction(q)])

    def __eq__(self, other):
        return (isinstance(other, NumberField)
                and self.min_poly == other.min_poly
                and self._lo <= other._hi and other._lo <= self._hi)

    def __repr__(self):
        return f"NumberField({[str(c) for c in self.min_poly]})"

    def to_json_obj(self):
        return {"min_poly": [[c.numerator, c.denominator] for c in self.min_poly],
                "root_interval": [[self._lo.numerator, self._lo.denominator],
                                  [self._hi.numerator, self._hi.denominator]]}

    @classmethod
    def from_json_obj(cls, obj):
        poly = [Fraction(n, d) for n, d in obj["min_poly"]]
        lo = Fraction(*obj["root_interval"][0])
        hi = Fraction(*obj["root_interval"][1])
        return cls(poly, (lo, hi))


class FieldElement:
    """A rational-coefficient vector in the power basis of its field."""

    __slots__ = ("field", "vec", "_sign", "_flo", "_fhi")

    def __init__(self, field, vec, fbounds=None):
        self.field = field
        self.vec = tuple(vec)
        self._sign = None
        if fbounds is not None:
            self._flo, self._fhi = fbounds
        else:
            self._flo = None
            self._fhi = None

    def _bounds(self):
        """Certified float bounds, from outward-rounded Horner at the root bounds."""
        if self._flo is None:
            rlo, rhi = self.field.root_flo, self.field.root_fhi
            lo, hi = 0.0, 0.0
            for c in reversed(self.vec):
                cands = (lo * rlo, lo * rhi, hi * rlo, hi * rhi)
                lo, hi = _fdown(min(cands)), _fup(max(cands))
                cf = float(c)
                lo, hi = _fdown(lo + _fdown(cf)), _fup(hi + _fup(cf))
            self._flo, self._fhi = lo, hi
        return self._flo, self._fhi

    def _poly(self):
        return _poly_trim(list(self.vec))

    def is_rational(self):
        return all(c == 0 for c in self.vec[1:])

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.vec[0]

    # -- ring operations --

    def __add__(self, other):
        o = self._coerce(other)
        alo, ahi = self._bounds()
        blo, bhi = o._bounds()
        return FieldElement(self.field, [a + b for a, b in zip(self.vec, o.vec)],
                            (_fdown(alo + blo), _fup(ahi + bhi)))

    __radd__ = __add__

    def __neg__(self):
        fb = None
        if self._flo is not None:
            fb = (-self._fhi, -self._flo)
        return FieldElement(self.field, [-a for a in self.vec], fb)

    def __sub__(self, other):
        o = self._coerce(other)
        alo, ahi = self._bounds()
        blo, bhi = o._bounds()
        return FieldElement(self.field, [a - b for a, b in zip(self.vec, o.vec)],
                            (_fdown(alo - bhi), _fup(ahi - blo)))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        alo, ahi = self._bounds()
        blo, bhi = o._bounds()
        cands = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
        fb = (_fdown(min(cands)), _fup(max(cands)))
        if self.field.degree == 2:
            # alpha^2 = -(c0 + c1*alpha)/c2
            a, b = self.vec
            c, d = o.vec
            c0, c1, c2 = self.field.min_poly
            bd = b * d
            return FieldElement(self.field,
                                (a * c - bd * c0 / c2,
                                 a * d + b * c - bd * c1 / c2), fb)
        prod = _poly_mul(list(self.vec), list(o.vec))
        _, rem = _poly_divmod(prod, self.field.min_poly)
        rem += [Fraction(0)] * (self.field.degree - len(rem))
        return FieldElement(self.field, rem[:self.field.degree], fb)

    __rmul__ = __mul__

    def inverse(self):
        """Extended Euclid against the minimal polynomial."""
        if self.field.degree == 2:
            # solve (a + b*alpha)(x + y*alpha) = 1 with alpha^2 = -(c0 + c1*alpha)/c2
            a, b = self.vec
            c0, c1, c2 = self.field.min_poly
            p = -c1 / c2
            q = -c0 / c2
            # matrix [[a, b*q], [b, a + b*p]] applied to (x, y)
            det = a * (a + b * p) - b * b * q
            if det == 0:
                raise ZeroDivisionError("inverse of zero field element")
            return FieldElement(self.field, ((a + b * p) / det, -b / det))
        a = self._poly()
        if not a:
            raise ZeroDivisionError("inverse of zero field element")
        # invariants: r0 = s0*a mod minpoly, r1 = s1*a mod minpoly
        r0, r1 = list(self.field.min_poly), a
        s0, s1 = [], [Fraction(1)]
        while True:
            if len(r1) == 1:
                inv = _poly_scale(s1, 1 / r1[0])
                inv += [Fraction(0)] * (self.field.degree - len(inv))
                return FieldElement(self.field, inv[:self.field.degree])
            if not r1:
                raise ZeroDivisionError(
                    "element is a zero divisor (reducible modulus at this root)")
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_add(s0, _poly_scale(_poly_mul(q, s1), -1))

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return NotImplemented

    # -- sign determination --

    def interval(self):
        """Exact rational bounds from the current isolating interval."""
        lo, hi = self.field.root_bounds()
        box_lo, box_hi = Fraction(1), Fraction(1)
        acc_lo, acc_hi = Fraction(0), Fraction(0)
        # Horner with interval coefficients over [lo, hi]
        def iv_mul(alo, ahi, blo, bhi):
            cands = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return min(cands), max(cands)
        rlo, rhi = Fraction(0), Fraction(0)
        for c in reversed(self.vec):
            rlo, rhi = iv_mul(rlo, rhi, lo, hi)
            rlo, rhi = rlo + c, rhi + c
        return rlo, rhi

    def sign(self):
        """Exact sign; terminates for every element."""
        if self._sign is not None:
            return self._sign
        flo, fhi = self._bounds()
        if flo > 0.0:
            self._sign = 1
            return 1
        if fhi < 0.0:
            self._sign = -1
            return -1
        if all(c == 0 for c in self.vec):
            self._sign = 0
            return 0
        for _round in range(4):
            for _ in range(8):
                lo, hi = self.interval()
                if lo > 0:
                    self._sign = 1
                    return 1
                if hi < 0:
                    self._sign = -1
                    return -1
                self.field.refine_root()
            # the element may be zero: decide exactly via a gcd test
            g = _poly_gcd(self._poly(), list(self.field.min_poly))
            if len(g) > 1:
                rlo, rhi = self.field.root_bounds()
                glo, ghi = _poly_eval(g, rlo), _poly_eval(g, rhi)
                if glo == 0 or ghi == 0 or (glo > 0) != (ghi > 0):
                    self._sign = 0
                    return 0
        raise ArithmeticError("sign determination failed to converge")

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (ValueError, TypeError):
            return NotImplemented
        return (self - o).sign() == 0

    def __hash__(self):
        return hash(self.vec)

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._coerce(other)).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        flo, fhi = self._bounds()
        if fhi - flo < 1e-9 * (1.0 + abs(flo) + abs(fhi)):
            return 0.5 * (flo + fhi)
        lo, hi = self.float_bounds()
        return 0.5 * (lo + hi)

    def float_bounds(self, width=Fraction(1, 10 ** 17)):
        """Rational-certified float bounds, refined below ``width`` when possible."""
        for _ in range(128):
            lo, hi = self.interval()
            if hi - lo < width:
                break
            self.field.refine_root()
        return float(lo), float(hi)

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.vec]})"

    def to_json_obj(self):
        return [[c.numerator, c.denominator] for c in self.vec]
