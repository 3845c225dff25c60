"""Directed-rounded interval arithmetic and complex boxes.

Field operations round outward by one IEEE step around the round-to-nearest
result, which brackets the exact value.  Library transcendentals (log, atan2)
are not correctly rounded in general, so their results are padded by a few
extra steps; every consumer in this package treats the enclosure property as
the soundness root and nothing assumes tightness.
"""

import math

from .errors import VeerkitError

_INF = math.inf


def _down(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


_PAD = 4


def _down_pad(x):
    for _ in range(_PAD):
        x = math.nextafter(x, -_INF)
    return x


def _up_pad(x):
    for _ in range(_PAD):
        x = math.nextafter(x, _INF)
    return x


class RealInterval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        if not (lo <= hi) or math.isnan(lo) or math.isnan(hi):
            raise VeerkitError(f"invalid interval [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)

    @classmethod
    def exact(cls, x):
        return cls(float(x), float(x))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    # -- arithmetic --

    def __add__(self, other):
        o = _coerce(other)
        return RealInterval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return RealInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RealInterval(_down(min(cands)), _up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError("interval division by an interval containing zero")
        cands = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return RealInterval(_down(min(cands)), _up(max(cands)))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def square(self):
        if self.lo >= 0:
            return RealInterval(_down(self.lo * self.lo), _up(self.hi * self.hi))
        if self.hi <= 0:
            return RealInterval(_down(self.hi * self.hi), _up(self.lo * self.lo))
        m = max(-self.lo, self.hi)
        return RealInterval(0.0, _up(m * m))

    def sqrt(self):
        if self.lo < 0:
            raise VeerkitError("sqrt of an interval with negative part")
        return RealInterval(_down_pad(math.sqrt(self.lo)), _up_pad(math.sqrt(self.hi)))

    def log(self):
        if self.lo <= 0:
            raise VeerkitError("log of an interval touching zero")
        return RealInterval(_down_pad(math.log(self.lo)), _up_pad(math.log(self.hi)))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval(0.0, max(-self.lo, self.hi))

    # -- predicates --

    def contains(self, x):
        if isinstance(x, RealInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def strictly_contains(self, other):
        return self.lo < other.lo and other.hi < self.hi

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other):
        return RealInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def width(self):
        return self.hi - self.lo

    def mag(self):
        return max(abs(self.lo), abs(self.hi))

    def inflated(self, r):
        return RealInterval(_down(self.lo - r), _up(self.hi + r))

    def __eq__(self, other):
        return isinstance(other, RealInterval) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))

    # certain comparisons against scalars: true only when every point qualifies
    def __gt__(self, other):
        return self.lo > float(other)

    def __lt__(self, other):
        return self.hi < float(other)


def _coerce(x):
    if isinstance(x, RealInterval):
        return x
    if isinstance(x, (int, float)):
        return RealInterval(float(x), float(x))
    return NotImplemented


PI = RealInterval(_down(math.pi), _up(math.pi))
TWO_PI = PI * 2
HALF_PI = PI / 2


def atan2_interval(y, x):
    """Enclosure of atan2 over a box avoiding the branch cut.

    Valid when the box has y strictly positive, y strictly negative, or x
    strictly positive; corner evaluation is exact up to padding there.
    """
    if not (y.lo > 0 or y.hi < 0 or x.lo > 0):
        raise VeerkitError("atan2 over a box meeting the branch cut")
    corners = [math.atan2(yy, xx) for yy in (y.lo, y.hi) for xx in (x.lo, x.hi)]
    return RealInterval(_down_pad(min(corners)), _up_pad(max(corners)))


class ComplexBox:
    """Axis-aligned rectangle [re.lo, re.hi] x [im.lo, im.hi] in C."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re if isinstance(re, RealInterval) else RealInterval(float(re))
        self.im = im if isinstance(im, RealInterval) else RealInterval(float(im))

    @classmethod
    def exact(cls, z):
        z = complex(z)
        return cls(RealInterval.exact(z.real), RealInterval.exact(z.imag))

    @classmethod
    def from_center(cls, z, radius):
        z = complex(z)
        return cls(RealInterval(_down(z.real - radius), _up(z.real + radius)),
                   RealInterval(_down(z.imag - radius), _up(z.imag + radius)))

    @classmethod
    def from_endpoints(cls, re_lo, re_hi, im_lo, im_hi):
        return cls(RealInterval(re_lo, re_hi), RealInterval(im_lo, im_hi))

    def endpoints(self):
        return (self.re.lo, self.re.hi, self.im.lo, self.im.hi)

    def __repr__(self):
        return f"ComplexBox({self.re!r}, {self.im!r})"

    # -- arithmetic --

    def __add__(self, other):
        o = _coerce_box(other)
        return ComplexBox(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexBox(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_coerce_box(other))

    def __rsub__(self, other):
        return _coerce_box(other) + (-self)

    def __mul__(self, other):
        o = _coerce_box(other)
        return ComplexBox(self.re * o.re - self.im * o.im,
                          self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm_sq(self):
        return self.re.square() + self.im.square()

    def conjugate(self):
        return ComplexBox(self.re, -self.im)

    def __truediv__(self, other):
        o = _coerce_box(other)
        n = o.norm_sq()
        num = self * o.conjugate()
        return ComplexBox(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return _coerce_box(other) / self

    def __abs__(self):
        return self.norm_sq().sqrt()

    def log(self):
        """Principal log; the box must avoid the branch cut (-inf, 0]."""
        half = RealInterval(0.5)
        return ComplexBox(self.norm_sq().log() * half,
                          atan2_interval(self.im, self.re))

    def arg(self):
        return atan2_interval(self.im, self.re)

    # -- predicates --

    def contains(self, z):
        if isinstance(z, ComplexBox):
            return self.re.contains(z.re) and self.im.contains(z.im)
        z = complex(z)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def strictly_contains(self, other):
        return (self.re.strictly_contains(other.re)
                and self.im.strictly_contains(other.im))

    def mid(self):
        return complex(self.re.mid(), self.im.mid())

    def max_width(self):
        return max(self.re.width(), self.im.width())

    def inflated(self, r):
        return ComplexBox(self.re.inflated(r), self.im.inflated(r))

    def hull(self, other):
        return ComplexBox(self.re.hull(other.re), self.im.hull(other.im))

    def excludes_point(self, z):
        z = complex(z)
        return not (self.re.contains(z.real) and self.im.contains(z.imag))

    def excludes_real_axis(self):
        return self.im.lo > 0 or self.im.hi < 0

    def is_finite(self):
        return all(math.isfinite(v) for v in self.endpoints())

    def __eq__(self, other):
        return (isinstance(other, ComplexBox)
                and self.re == other.re and self.im == other.im)


def _coerce_box(x):
    if isinstance(x, ComplexBox):
        return x
    if isinstance(x, (int, float)):
        return ComplexBox(RealInterval.exact(float(x)), RealInterval.exact(0.0))
    if isinstance(x, complex):
        return ComplexBox.exact(x)
    return NotImplemented


# -- interval Lobachevsky function and Bloch-Wigner dilogarithm --

def _lob_coefficient_intervals():
    from .geometry import _LOB_COEFFS_EXACT
    # float(c) is the nearest double to the exact rational; one step outward brackets it
    return [RealInterval(_down(float(c)), _up(float(c))) for c in _LOB_COEFFS_EXACT]


_LOB_IV = None


def _lob_iv():
    global _LOB_IV
    if _LOB_IV is None:
        _LOB_IV = _lob_coefficient_intervals()
    return _LOB_IV


def lobachevsky_interval(theta):
    """Enclosure of the Lobachevsky function over a real interval."""
    # reduce modulo pi toward [-pi/2, pi/2]
    k = round(theta.mid() / math.pi)
    if k != 0:
        theta = theta - PI * k
    if theta.lo <= 0.0 <= theta.hi:
        m = max(-theta.lo, theta.hi)
        if m == 0.0:
            return RealInterval(0.0, 0.0)
        bound = lobachevsky_interval(RealInterval(m, m)).mag()
        bound = _up(bound + 1e-300)
        return RealInterval(-bound, bound)
    if theta.hi < 0.0:
        return -lobachevsky_interval(-theta)
    # theta strictly positive now
    acc = theta - theta * (theta * 2).log()
    t2 = theta.square()
    power = theta
    coeffs = _lob_iv()
    for c in coeffs:
        power = power * t2
        acc = acc + c * power
    # geometric tail bound: c_n <= 2 / (n (2n+1) pi^{2n})
    n = len(coeffs) + 1
    ratio = (theta.hi * theta.hi) / (math.pi * math.pi)
    if ratio >= 1.0:
        raise VeerkitError("Lobachevsky series out of range")
    tail = 2.0 * theta.hi * ratio ** n / (n * (2 * n + 1) * (1.0 - ratio))
    tail = _up_pad(tail)
    return acc + RealInterval(-tail, tail)


def bloch_wigner_interval(box):
    """Enclosure of D(z) over a complex box not meeting {0, 1} or the real axis."""
    if box.im.lo > 0:
        a1 = box.arg()
        a2 = (1 / (1 - box)).arg()
        a3 = ((box - 1) / box).arg()
        return (lobachevsky_interval(a1) + lobachevsky_interval(a2)
                + lobachevsky_interval(a3))
    if box.im.hi < 0:
        return -bloch_wigner_interval(box.conjugate())
    raise VeerkitError("volume enclosure requires a box off the real axis")


def volume_interval(boxes):
    total = RealInterval(0.0, 0.0)
    for b in boxes:
        total = total + bloch_wigner_interval(b)
    return total
