"""Dense polynomials with multiprecision complex coefficients.

Multiplication goes through a radix-2 FFT above a small degree cutoff.
Building a polynomial from its roots uses a balanced product tree, and
evaluation in many points walks the matching remainder tree, where each
division is a Newton inversion of the reversed divisor followed by two
multiplications.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import gmpy2

from .bigfloat import BigComplex, PrecisionMismatchError, context, pi_const

SCHOOLBOOK_CUTOFF = 16


class PolynomialError(ValueError):
    pass


class RoundingError(ArithmeticError):
    """A coefficient is too far from an integer; precision was too low."""

    def __init__(self, degree: int, distance: float, kind: str = "real"):
        self.degree = degree
        self.distance = distance
        self.kind = kind
        super().__init__(
            f"insufficient precision: coefficient of X^{degree} is {distance:.3g} away "
            f"from an integer ({kind} part)" if kind != "magnitude" else
            f"insufficient precision: coefficient of X^{degree} exceeds the usable range by "
            f"a factor {distance:.3g}"
        )


class FloatPoly:
    """Polynomial sum(coeffs[k] X^k) with BigComplex coefficients."""

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs: Sequence[BigComplex], prec: int):
        coeffs = list(coeffs)
        for c in coeffs:
            if c.prec != prec:
                raise PrecisionMismatchError(f"coefficient at {c.prec} bits in a {prec}-bit polynomial")
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        if not coeffs:
            coeffs = [BigComplex.zero(prec)]
        self.coeffs = tuple(coeffs)
        self.prec = prec

    @classmethod
    def from_values(cls, values: Iterable, prec: int) -> "FloatPoly":
        return cls([BigComplex.from_value(v, prec) for v in values], prec)

    @classmethod
    def _raw(cls, values, prec: int) -> "FloatPoly":
        return cls([BigComplex(v, prec) for v in values], prec)

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0].is_zero():
            return -1
        return len(self.coeffs) - 1

    def raw(self) -> list:
        return [c.value for c in self.coeffs]

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other: "FloatPoly") -> "FloatPoly":
        _same_prec(self, other)
        ctx = context(self.prec)
        a, b = self.raw(), other.raw()
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, v in enumerate(b):
            out[k] = ctx.add(out[k], v)
        return FloatPoly._raw(out, self.prec)

    def __sub__(self, other: "FloatPoly") -> "FloatPoly":
        return self + (-other)

    def __neg__(self) -> "FloatPoly":
        ctx = context(self.prec)
        return FloatPoly._raw([ctx.minus(v) for v in self.raw()], self.prec)

    def __mul__(self, other: "FloatPoly") -> "FloatPoly":
        return fft_mul(self, other)

    def __call__(self, x: BigComplex) -> BigComplex:
        return horner(self, x)

    def __repr__(self):
        head = ", ".join(repr(complex(c)) for c in self.coeffs[:4])
        more = ", ..." if len(self.coeffs) > 4 else ""
        return f"FloatPoly([{head}{more}], prec={self.prec})"

    def with_prec(self, prec: int) -> "FloatPoly":
        return FloatPoly([c.with_prec(prec) for c in self.coeffs], prec)

    def max_abs(self) -> float:
        return max(abs(complex(c)) for c in self.coeffs)

    def is_monic(self, tol_bits: Optional[int] = None) -> bool:
        tol_bits = self.prec // 2 if tol_bits is None else tol_bits
        lead = self.coeffs[-1] - 1
        return lead.is_zero() or lead.magnitude_exponent() <= -tol_bits


def _same_prec(f: FloatPoly, g: FloatPoly) -> int:
    if f.prec != g.prec:
        raise PrecisionMismatchError(f"polynomials have precision {f.prec} and {g.prec}")
    return f.prec


def horner(f: FloatPoly, x: BigComplex) -> BigComplex:
    if x.prec != f.prec:
        raise PrecisionMismatchError(f"point at {x.prec} bits, polynomial at {f.prec}")
    ctx = context(f.prec)
    acc = f.coeffs[-1].value
    xv = x.value
    for c in reversed(f.coeffs[:-1]):
        acc = ctx.add(ctx.mul(acc, xv), c.value)
    return BigComplex(acc, f.prec)


def schoolbook_mul(f: FloatPoly, g: FloatPoly) -> FloatPoly:
    prec = _same_prec(f, g)
    return FloatPoly._raw(_schoolbook(f.raw(), g.raw(), context(prec), prec), prec)


def _schoolbook(a: list, b: list, ctx, prec: int) -> list:
    out = [gmpy2.mpc(0, precision=prec)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
    return out


# Roots of unity: computed once per (log2 size, precision) with 32 extra
# bits, the primitive root by exp and the others by successive products.
_roots_cache: dict[tuple[int, int], list] = {}
_roots_lock = threading.Lock()


def roots_of_unity(log_size: int, prec: int) -> list:
    """[w^0, ..., w^(n/2 - 1)] for w = exp(2 pi i / n), n = 2^log_size."""
    key = (log_size, prec)
    table = _roots_cache.get(key)
    if table is not None:
        return table
    with _roots_lock:
        table = _roots_cache.get(key)
        if table is None:
            n = 1 << log_size
            wprec = prec + 32 + log_size
            ctx = context(wprec)
            if n == 1:
                table = [gmpy2.mpc(1, precision=prec)]
            else:
                angle = ctx.div(ctx.mul_2exp(pi_const(wprec).value, 1), n)
                w = ctx.exp(gmpy2.mpc(0, angle, precision=wprec))
                powers = [gmpy2.mpc(1, precision=wprec)]
                for _ in range(n // 2 - 1):
                    powers.append(ctx.mul(powers[-1], w))
                table = [gmpy2.mpc(p, precision=prec) for p in powers]
            _roots_cache[key] = table
    return table


def _fft(values: list, log_size: int, prec: int, inverse: bool = False) -> list:
    n = 1 << log_size
    ctx = context(prec)
    a = list(values) + [gmpy2.mpc(0, precision=prec)] * (n - len(values))
    # bit-reversal permutation
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            a[i], a[j] = a[j], a[i]
    roots = roots_of_unity(log_size, prec)
    if inverse:
        ctx_neg = context(prec)
        roots = [gmpy2.mpc(r.real, ctx_neg.minus(r.imag), precision=prec) for r in roots]
    length = 2
    while length <= n:
        half = length // 2
        stride = n // length
        tw = roots[::stride][:half]
        for start in range(0, n, length):
            for k in range(half):
                u = a[start + k]
                v = ctx.mul(a[start + k + half], tw[k]) if k else a[start + k + half]
                a[start + k] = ctx.add(u, v)
                a[start + k + half] = ctx.sub(u, v)
        length <<= 1
    if inverse:
        a = [ctx.mul_2exp(x, -log_size) for x in a]
    return a


def fft_mul(f: FloatPoly, g: FloatPoly, cutoff: int = SCHOOLBOOK_CUTOFF) -> FloatPoly:
    """Product of f and g; schoolbook when either degree is below cutoff."""
    prec = _same_prec(f, g)
    a, b = f.raw(), g.raw()
    if min(len(a), len(b)) - 1 < cutoff:
        return FloatPoly._raw(_schoolbook(a, b, context(prec), prec), prec)
    out_len = len(a) + len(b) - 1
    log_size = max(1, (out_len - 1).bit_length())
    ctx = context(prec)
    fa = _fft(a, log_size, prec)
    fb = _fft(b, log_size, prec)
    prod = [ctx.mul(x, y) for x, y in zip(fa, fb)]
    return FloatPoly._raw(_fft(prod, log_size, prec, inverse=True)[:out_len], prec)


def linear(root: BigComplex) -> FloatPoly:
    """X - root."""
    return FloatPoly([-root, BigComplex.one(root.prec)], root.prec)


@dataclass
class ProductTree:
    """levels[k][i] = product of the X - x_j for the i-th block of 2^k roots."""

    levels: list[list[FloatPoly]]
    h: int

    @property
    def root(self) -> FloatPoly:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def _force_monic(p: FloatPoly) -> FloatPoly:
    coeffs = list(p.coeffs)
    coeffs[-1] = BigComplex.one(p.prec)
    return FloatPoly(coeffs, p.prec)


def poly_from_roots(roots: Sequence[BigComplex]) -> ProductTree:
    """Product tree over the roots; the root node is prod(X - x_i)."""
    h = len(roots)
    if h < 1:
        raise PolynomialError("need at least one root")
    prec = roots[0].prec
    t = (h - 1).bit_length()
    one = FloatPoly([BigComplex.one(prec)], prec)
    level = [linear(x) for x in roots] + [one] * ((1 << t) - h)
    levels = [level]
    for _ in range(t):
        prev = levels[-1]
        level = []
        for i in range(0, len(prev), 2):
            left, right = prev[i], prev[i + 1]
            if right.degree == 0:
                level.append(left)
            else:
                # every node is monic; pin the leading coefficient exactly
                level.append(_force_monic(fft_mul(left, right)))
        levels.append(level)
    return ProductTree(levels, h)


def from_roots(roots: Sequence[BigComplex]) -> FloatPoly:
    return poly_from_roots(roots).root


def reverse(f: FloatPoly, length: Optional[int] = None) -> FloatPoly:
    length = len(f.coeffs) if length is None else length
    coeffs = list(f.coeffs[:length]) + [BigComplex.zero(f.prec)] * (length - len(f.coeffs))
    return FloatPoly(coeffs[::-1], f.prec)


def truncate(f: FloatPoly, n: int) -> FloatPoly:
    return FloatPoly(f.coeffs[:n], f.prec)


def series_inverse(f: FloatPoly, n: int) -> FloatPoly:
    """g with f g = 1 mod X^n by Newton iteration g <- g (2 - f g); f[0] = 1."""
    prec = f.prec
    if not (f.coeffs[0] - 1).is_zero():
        raise PolynomialError("series inversion here needs constant coefficient 1")
    g = FloatPoly([BigComplex.one(prec)], prec)
    k = 1
    two = FloatPoly([BigComplex.from_value(2, prec)], prec)
    while k < n:
        k = min(2 * k, n)
        e = truncate(fft_mul(truncate(f, k), g), k)
        g = truncate(fft_mul(g, two - e), k)
    return g


def poly_divrem(f: FloatPoly, g: FloatPoly) -> tuple[FloatPoly, FloatPoly]:
    """Quotient and remainder of f by a monic g via a reversed-series inverse."""
    prec = _same_prec(f, g)
    if not g.is_monic():
        raise PolynomialError("divisor must be monic")
    m, n = f.degree, g.degree
    if n < 0:
        raise ZeroDivisionError("division by the zero polynomial")
    if m < n:
        return FloatPoly([BigComplex.zero(prec)], prec), f
    g = _force_monic(g)
    qlen = m - n + 1
    inv = series_inverse(reverse(g), qlen)
    q_rev = truncate(fft_mul(truncate(reverse(f), qlen), inv), qlen)
    q = reverse(q_rev, qlen)
    if n == 0:
        return q, FloatPoly([BigComplex.zero(prec)], prec)
    qg = fft_mul(q, g)
    ctx = context(prec)
    r = [ctx.sub(f.coeffs[k].value, qg.coeffs[k].value) if k < len(qg) else f.coeffs[k].value
         for k in range(n)]
    return q, FloatPoly._raw(r, prec)


def schoolbook_divrem(f: FloatPoly, g: FloatPoly) -> tuple[FloatPoly, FloatPoly]:
    """Long division by a monic polynomial (oracle for poly_divrem)."""
    prec = _same_prec(f, g)
    ctx = context(prec)
    r = f.raw()
    gc = g.raw()
    n = len(gc) - 1
    if len(r) - 1 < n:
        return FloatPoly([BigComplex.zero(prec)], prec), f
    q = [gmpy2.mpc(0, precision=prec)] * (len(r) - n)
    for k in range(len(r) - 1, n - 1, -1):
        c = r[k]
        q[k - n] = c
        for i in range(n + 1):
            r[k - n + i] = ctx.sub(r[k - n + i], ctx.mul(c, gc[i]))
    return FloatPoly._raw(q, prec), FloatPoly._raw(r[:n] or [0], prec)


def poly_mod(f: FloatPoly, g: FloatPoly) -> FloatPoly:
    return poly_divrem(f, g)[1]


def _coefficient_growth_bits(points: Sequence[BigComplex]) -> int:
    # coefficients of prod(X - x_i) are bounded by prod(1 + |x_i|)
    return math.ceil(sum(math.log2(1 + abs(complex(x))) for x in points))


def multi_eval(f: FloatPoly, points: Sequence[BigComplex], guard_bits: Optional[int] = None) -> list[BigComplex]:
    """f(x_i) for all points through the remainder tree of their product tree.

    The tree is built with extra working precision (by default enough to
    absorb the coefficient growth of prod(X - x_i)); results are rounded
    back to f's precision.
    """
    if not points:
        return []
    prec = f.prec
    for x in points:
        if x.prec != prec:
            raise PrecisionMismatchError(f"point at {x.prec} bits, polynomial at {prec}")
    if guard_bits is None:
        guard_bits = 16 + _coefficient_growth_bits(points)
    wprec = prec + guard_bits
    fw = f.with_prec(wprec) if guard_bits else f
    pts = [x.with_prec(wprec) for x in points] if guard_bits else list(points)
    tree = poly_from_roots(pts)
    rem = [poly_mod(fw, tree.root)]
    for k in range(tree.depth - 1, -1, -1):
        nodes = tree.levels[k]
        nxt = []
        for i, node in enumerate(nodes):
            parent = rem[i // 2]
            if node.degree <= 0:
                nxt.append(parent)
            else:
                nxt.append(poly_mod(parent, node))
        rem = nxt
    return [rem[i].coeffs[0].with_prec(prec) for i in range(len(points))]


def multi_eval_chunked(f: FloatPoly, points: Sequence[BigComplex], chunks: int) -> list[BigComplex]:
    """multi_eval over consecutive chunks of points (bounds tree memory)."""
    if chunks < 1:
        raise ValueError("chunks must be positive")
    size = max(1, math.ceil(len(points) / chunks))
    out: list[BigComplex] = []
    for start in range(0, len(points), size):
        out.extend(multi_eval(f, points[start : start + size]))
    return out


@dataclass(frozen=True)
class RoundedPolynomial:
    coeffs: tuple[int, ...]
    worst_fraction: float
    worst_imag: float


def round_to_integers(f: FloatPoly, frac_threshold: float = 0.25, imag_rel_threshold: float = 2.0**-16,
                      min_fraction_bits: int = 8) -> RoundedPolynomial:
    """Round every coefficient to the nearest integer, or raise RoundingError.

    A coefficient is accepted when its real part is within frac_threshold of
    an integer and its imaginary part is below imag_rel_threshold * max(1, |c|).
    The largest coefficient must stay min_fraction_bits + log2(degree) bits
    below 2^prec, otherwise the fractional parts are meaningless.
    """
    if not f.is_monic(tol_bits=8):
        raise RoundingError(f.degree, abs(complex(f.coeffs[-1]) - 1), "leading")
    # a coefficient at or above 2^prec carries no fractional bits, so its
    # distance to an integer says nothing; demand some headroom
    headroom = min_fraction_bits + max(1, f.degree).bit_length()
    top = max(c.magnitude_exponent() for c in f.coeffs)
    if top > f.prec - headroom:
        k = max(range(len(f.coeffs)), key=lambda i: f.coeffs[i].magnitude_exponent())
        raise RoundingError(k, 2.0 ** (top - f.prec + headroom), "magnitude")
    out = []
    worst_frac = 0.0
    worst_imag = 0.0
    for k, c in enumerate(f.coeffs):
        re, im = c.value.real, c.value.imag
        num, den = re.as_integer_ratio()
        exact = Fraction(int(num), int(den))
        n = round(exact)
        frac = float(abs(exact - n))
        scale = max(1.0, abs(complex(c)))
        imag = abs(float(im)) / scale
        if frac > frac_threshold:
            raise RoundingError(k, frac, "real")
        if imag > imag_rel_threshold:
            raise RoundingError(k, imag, "imaginary")
        worst_frac = max(worst_frac, frac)
        worst_imag = max(worst_imag, imag)
        out.append(n)
    return RoundedPolynomial(tuple(out), worst_frac, worst_imag)
