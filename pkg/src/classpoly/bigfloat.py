"""Arbitrary-precision real and complex floating-point numbers.

Every value carries its precision in bits.  Binary operations require
both operands to have the same precision; the result has that precision
too.  The backend is MPFR/MPC through gmpy2, which rounds every basic
operation (+, -, *, /, sqrt, exp) correctly, i.e. within half an ulp of
the exact result (per component for complex values).

Multiplication cost depends on GMP's integer multiplication, which
switches to an FFT algorithm only for operands of several hundred
thousand bits.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import gmpy2

MIN_PREC = 53


class BigFloatError(ArithmeticError):
    """Base class for errors raised by this module."""


class PrecisionMismatchError(BigFloatError, ValueError):
    pass


class NonFiniteError(BigFloatError):
    """A NaN or infinity was produced by the backend."""


class AGMConvergenceError(BigFloatError):
    pass


def check_prec(bits) -> int:
    if isinstance(bits, bool) or int(bits) != bits:
        raise TypeError(f"precision must be an integer, got {bits!r}")
    bits = int(bits)
    if bits < MIN_PREC:
        raise ValueError(f"precision must be at least {MIN_PREC} bits, got {bits}")
    return bits


_contexts: dict[int, gmpy2.context] = {}


def context(prec: int) -> gmpy2.context:
    ctx = _contexts.get(prec)
    if ctx is None:
        ctx = gmpy2.context(precision=prec, allow_complex=False)
        _contexts[prec] = ctx
    return ctx


def _same(a, b):
    if a.prec != b.prec:
        raise PrecisionMismatchError(f"operands have precision {a.prec} and {b.prec}")
    return a.prec


def _finite_c(v):
    if not (gmpy2.is_finite(v.real) and gmpy2.is_finite(v.imag)):
        raise NonFiniteError(f"non-finite value {v}")
    return v


class BigReal:
    __slots__ = ("value", "prec")

    def __init__(self, value, prec: int):
        # value is assumed to be an mpfr already rounded to prec
        self.value = value
        self.prec = prec

    @classmethod
    def from_value(cls, x, prec: int) -> "BigReal":
        prec = check_prec(prec)
        ctx = context(prec)
        if isinstance(x, BigReal):
            x = x.value
        if isinstance(x, Fraction):
            v = ctx.div(gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator))
        else:
            v = gmpy2.mpfr(x, prec)
        if not gmpy2.is_finite(v):
            raise NonFiniteError(f"non-finite input {x!r}")
        return cls(v, prec)

    def _coerce(self, other):
        if isinstance(other, BigReal):
            _same(self, other)
            return other.value
        if isinstance(other, (int, Fraction)):
            return BigReal.from_value(other, self.prec).value
        if isinstance(other, float):
            return gmpy2.mpfr(other, self.prec)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigReal(context(self.prec).add(self.value, o), self.prec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigReal(context(self.prec).sub(self.value, o), self.prec)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigReal(context(self.prec).sub(o, self.value), self.prec)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigReal(context(self.prec).mul(self.value, o), self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if gmpy2.is_zero(o):
            raise ZeroDivisionError("division by zero")
        return BigReal(context(self.prec).div(self.value, o), self.prec)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if gmpy2.is_zero(self.value):
            raise ZeroDivisionError("division by zero")
        return BigReal(context(self.prec).div(o, self.value), self.prec)

    def __neg__(self):
        return BigReal(context(self.prec).minus(self.value), self.prec)

    def __abs__(self):
        return BigReal(context(self.prec).abs(self.value), self.prec)

    def __float__(self):
        return float(self.value)

    def _cmp_value(self, other):
        if isinstance(other, BigReal):
            return other.value
        return other

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        if isinstance(other, BigReal):
            return self.prec == other.prec and self.value == other.value
        if isinstance(other, (int, float, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.prec))

    def __repr__(self):
        return f"BigReal({gmpy2.mpfr(self.value, 64)!s}, prec={self.prec})"

    def sqrt(self) -> "BigReal":
        if self.value < 0:
            raise ValueError("square root of a negative real")
        return BigReal(context(self.prec).sqrt(self.value), self.prec)

    def log(self) -> "BigReal":
        if self.value <= 0:
            raise ValueError("logarithm of a non-positive real")
        return BigReal(context(self.prec).log(self.value), self.prec)

    def exp(self) -> "BigReal":
        v = context(self.prec).exp(self.value)
        if not gmpy2.is_finite(v):
            raise NonFiniteError("exponent overflow")
        return BigReal(v, self.prec)

    def with_prec(self, prec: int) -> "BigReal":
        return BigReal(gmpy2.mpfr(self.value, check_prec(prec)), prec)

    def as_fraction(self) -> Fraction:
        num, den = self.value.as_integer_ratio()
        return Fraction(int(num), int(den))

    def ceil(self) -> int:
        return math.ceil(self.as_fraction())

    def floor(self) -> int:
        return math.floor(self.as_fraction())

    def is_zero(self) -> bool:
        return gmpy2.is_zero(self.value)

    def exponent(self) -> int:
        """Binary exponent e with 2^(e-1) <= |x| < 2^e."""
        if gmpy2.is_zero(self.value):
            raise ValueError("zero has no exponent")
        return gmpy2.frexp(self.value)[0]


class BigComplex:
    """Complex number whose real and imaginary parts share one precision."""

    __slots__ = ("value", "prec")

    def __init__(self, value, prec: int):
        self.value = value
        self.prec = prec

    @classmethod
    def from_value(cls, z, prec: int) -> "BigComplex":
        prec = check_prec(prec)
        if isinstance(z, BigComplex):
            z = z.value
        elif isinstance(z, BigReal):
            z = z.value
        elif isinstance(z, Fraction):
            z = BigReal.from_value(z, prec).value
        elif isinstance(z, tuple):
            re, im = (BigReal.from_value(t, prec).value for t in z)
            return cls(_finite_c(gmpy2.mpc(re, im, precision=prec)), prec)
        return cls(_finite_c(gmpy2.mpc(z, precision=prec)), prec)

    @classmethod
    def from_parts(cls, re: BigReal, im: BigReal) -> "BigComplex":
        prec = _same(re, im)
        return cls(gmpy2.mpc(re.value, im.value, precision=prec), prec)

    @classmethod
    def zero(cls, prec: int) -> "BigComplex":
        return cls(gmpy2.mpc(0, precision=prec), prec)

    @classmethod
    def one(cls, prec: int) -> "BigComplex":
        return cls(gmpy2.mpc(1, precision=prec), prec)

    @property
    def re(self) -> BigReal:
        return BigReal(self.value.real, self.prec)

    @property
    def im(self) -> BigReal:
        return BigReal(self.value.imag, self.prec)

    def _coerce(self, other):
        if isinstance(other, BigComplex):
            _same(self, other)
            return other.value
        if isinstance(other, BigReal):
            _same(self, other)
            return other.value
        if isinstance(other, int):
            return other
        if isinstance(other, (float, complex, Fraction)):
            return BigComplex.from_value(other, self.prec).value
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigComplex(context(self.prec).add(self.value, o), self.prec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigComplex(context(self.prec).sub(self.value, o), self.prec)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigComplex(context(self.prec).sub(o, self.value), self.prec)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return BigComplex(context(self.prec).mul(self.value, o), self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o == 0:
            raise ZeroDivisionError("division by zero")
        return BigComplex(_finite_c(context(self.prec).div(self.value, o)), self.prec)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.value == 0:
            raise ZeroDivisionError("division by zero")
        return BigComplex(_finite_c(context(self.prec).div(o, self.value)), self.prec)

    def __neg__(self):
        return BigComplex(context(self.prec).minus(self.value), self.prec)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return BigComplex.one(self.prec) / (self ** -n)
        # square-and-multiply keeps the error growth logarithmic in n
        ctx = context(self.prec)
        result = gmpy2.mpc(1, precision=self.prec)
        base = self.value
        while n:
            if n & 1:
                result = ctx.mul(result, base)
            n >>= 1
            if n:
                base = ctx.square(base)
        return BigComplex(result, self.prec)

    def __abs__(self) -> BigReal:
        return BigReal(context(self.prec).abs(self.value), self.prec)

    def __complex__(self):
        return complex(self.value)

    def __eq__(self, other):
        if isinstance(other, BigComplex):
            return self.prec == other.prec and self.value == other.value
        if isinstance(other, (int, float, complex)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.prec))

    def __repr__(self):
        return f"BigComplex({complex(self.value)!r}, prec={self.prec})"

    def conj(self) -> "BigComplex":
        ctx = context(self.prec)
        return BigComplex(gmpy2.mpc(self.value.real, ctx.minus(self.value.imag), precision=self.prec), self.prec)

    def norm(self) -> BigReal:
        """Squared modulus."""
        return BigReal(context(self.prec).norm(self.value), self.prec)

    def mul_2exp(self, k: int) -> "BigComplex":
        return BigComplex(context(self.prec).mul_2exp(self.value, k), self.prec)

    def with_prec(self, prec: int) -> "BigComplex":
        prec = check_prec(prec)
        return BigComplex(gmpy2.mpc(self.value, precision=prec), prec)

    def is_zero(self) -> bool:
        return self.value == 0

    def magnitude_exponent(self) -> int:
        """Binary exponent of max(|re|, |im|); very negative for zero."""
        re, im = self.value.real, self.value.imag
        e = -(1 << 62)
        if not gmpy2.is_zero(re):
            e = gmpy2.frexp(re)[0]
        if not gmpy2.is_zero(im):
            e = max(e, gmpy2.frexp(im)[0])
        return e


def _coerce_pair(a: BigComplex, b: BigComplex) -> int:
    return _same(a, b)


def add(a: BigComplex, b: BigComplex) -> BigComplex:
    _coerce_pair(a, b)
    return a + b


def sub(a: BigComplex, b: BigComplex) -> BigComplex:
    _coerce_pair(a, b)
    return a - b


def mul(a: BigComplex, b: BigComplex) -> BigComplex:
    _coerce_pair(a, b)
    return a * b


def div(a: BigComplex, b: BigComplex) -> BigComplex:
    _coerce_pair(a, b)
    return a / b


def csqrt(a: BigComplex) -> BigComplex:
    """Principal square root: non-negative real part, and non-negative
    imaginary part when the real part is zero."""
    v = a.value
    if gmpy2.is_zero(v.imag):
        # a -0 imaginary part would put the result on the wrong side of the cut
        v = gmpy2.mpc(v.real, 0, precision=a.prec)
    return BigComplex(context(a.prec).sqrt(v), a.prec)


def cexp(a: BigComplex) -> BigComplex:
    """exp(re) * (cos(im) + i sin(im)).

    MPFR reduces trigonometric arguments exactly whatever their size, so
    the only restriction is the exponent range (about 2^30 in magnitude).
    """
    v = context(a.prec).exp(a.value)
    if not (gmpy2.is_finite(v.real) and gmpy2.is_finite(v.imag)):
        raise NonFiniteError(f"exp overflow for argument with real part {float(a.value.real):.6g}")
    return BigComplex(v, a.prec)


def clog(a: BigComplex) -> BigComplex:
    if a.is_zero():
        raise ValueError("logarithm of zero")
    return BigComplex(context(a.prec).log(a.value), a.prec)


_pi_cache: dict[int, BigReal] = {}
_pi_lock = threading.Lock()


def pi_const(prec: int) -> BigReal:
    """pi correctly rounded to prec bits, cached per precision."""
    prec = check_prec(prec)
    cached = _pi_cache.get(prec)
    if cached is not None:
        return cached
    with _pi_lock:
        cached = _pi_cache.get(prec)
        if cached is None:
            cached = BigReal(context(prec).const_pi(), prec)
            _pi_cache[prec] = cached
    return cached


def euler_gamma(prec: int) -> BigReal:
    return BigReal(context(check_prec(prec)).const_euler(), prec)


def log2_const(prec: int) -> BigReal:
    return BigReal(context(check_prec(prec)).const_log2(), prec)


def i_unit(prec: int) -> BigComplex:
    return BigComplex(gmpy2.mpc(0, 1, precision=prec), prec)


def agm_max_iterations(prec: int) -> int:
    return 4 * math.ceil(math.log2(prec)) + 64


def agm(a: BigComplex, b: BigComplex) -> BigComplex:
    """Arithmetic-geometric mean with the "right" square-root choice.

    At each step the geometric mean g is chosen so that |a' - g| <= |a' + g|
    with a' = (a + b)/2, ties going to the root with Im(g/a') > 0 and then
    to non-negative real part.  With these choices agm(theta00^2, theta01^2) = 1
    on the usual fundamental domain.
    """
    prec = _same(a, b)
    if a.is_zero() or b.is_zero():
        raise ValueError("agm arguments must be nonzero")
    ctx = context(prec)
    x, y = a.value, b.value
    tol_exp = -prec + 4
    for _ in range(agm_max_iterations(prec)):
        diff = ctx.sub(x, y)
        if diff == 0 or ctx.abs(diff) <= ctx.mul_2exp(ctx.abs(x), tol_exp):
            return BigComplex(x, prec)
        am = ctx.mul_2exp(ctx.add(x, y), -1)
        g = ctx.sqrt(ctx.mul(x, y))
        d_minus = ctx.norm(ctx.sub(am, g))
        d_plus = ctx.norm(ctx.add(am, g))
        if d_minus > d_plus:
            g = ctx.minus(g)
        elif d_minus == d_plus:
            ratio = ctx.div(g, am) if am != 0 else g
            if ratio.imag < 0 or (ratio.imag == 0 and g.real < 0):
                g = ctx.minus(g)
        x, y = am, g
    raise AGMConvergenceError(
        f"agm did not converge in {agm_max_iterations(prec)} iterations at {prec} bits"
    )


def ulp_distance(x: BigReal, ref: BigReal) -> float:
    """|x - ref| measured in ulps of ref at x's precision."""
    if ref.is_zero():
        return 0.0 if x.is_zero() else math.inf
    ctx = context(x.prec + 64)
    d = ctx.abs(ctx.sub(x.value, ref.value))
    return float(ctx.mul_2exp(d, x.prec - ref.exponent()))
