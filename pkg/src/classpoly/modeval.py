"""Evaluation of the Dedekind eta function and of j at CM points.

Strategies:

* sparse series: move the argument into the fundamental domain, sum
  Euler's pentagonal series for eta there, and undo the move with the
  eta transformation law; j = ((f1^24 + 16) / f1^8)^3 with
  f1(z) = eta(z/2) / eta(z).
* naive series: Horner evaluation of the truncated q-expansion of j,
  whose integer coefficients are computed once from E4^3 / Delta.
* AGM: k'(tau) by Newton iteration on tau = i agm(1, k') / agm(1, k),
  then j from lambda = k'^2; eta as a twelfth root of
  lambda (1 - lambda) (theta00^2)^6 / 16 with theta00^2 = 1 / agm(1, k').

Internally every strategy works with a few guard bits and rounds its
result to the requested precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .bigfloat import (
    BigComplex,
    BigReal,
    agm,
    cexp,
    check_prec,
    csqrt,
    i_unit,
    pi_const,
)
from .classgroup import S, T, T_INV, QuadForm, reduce_with_word
from .polyops import FloatPoly

GUARD_BITS = 24
INIT_PREC = 256
AGM_IM_THRESHOLD = 5
NAIVE_TERM_CAP = 512
NEWTON_MAX_STEPS = 40

_SQRT3_HALF = math.sqrt(3) / 2


class DomainError(ValueError):
    """Argument outside the region where a truncation bound is valid."""


class NewtonDivergenceError(ArithmeticError):
    pass


class BranchSelectionError(ArithmeticError):
    pass


class TermCapError(ValueError):
    pass


@dataclass(frozen=True)
class TauPoint:
    """Root tau = (-B + sqrt(D)) / (2A) of a positive definite form."""

    form: QuadForm
    tau: BigComplex

    @property
    def prec(self) -> int:
        return self.tau.prec

    @property
    def D(self) -> int:
        return self.form.discriminant


def tau_point(form: QuadForm, prec: int) -> TauPoint:
    prec = check_prec(prec)
    A, B, C = form
    D = B * B - 4 * A * C
    if A <= 0 or D >= 0:
        raise DomainError(f"{form} is not positive definite")
    im = BigReal.from_value(-D, prec).sqrt() / (2 * A)
    re = BigReal.from_value(-B, prec) / (2 * A)
    return TauPoint(form, BigComplex.from_parts(re, im))


def in_fundamental_domain(z: BigComplex, slack: float = 0.0) -> bool:
    """Membership in F: |z| > 1 and -1/2 <= Re z < 1/2, or |z| = 1 and
    -1/2 <= Re z <= 0.  slack > 0 widens the test for rounded points."""
    x = complex(z)
    re, norm = x.real, abs(x) ** 2
    if x.imag <= 0:
        return False
    if slack:
        return -0.5 - slack <= re <= 0.5 + slack and norm >= 1 - slack
    if not (-0.5 <= re < 0.5):
        return False
    return norm > 1 or (norm == 1 and re <= 0)


def in_fundamental_domain_exact(form: QuadForm) -> bool:
    """The same predicate decided on the form: its root lies in F iff it is reduced."""
    return form.is_reduced()


def reduce_argument(tp: TauPoint) -> tuple[BigComplex, tuple[str, ...]]:
    """Point of F equivalent to tau, and the S/T word that maps tau there.

    Works on the integer form, so the reduced point is recomputed exactly
    from its own form rather than accumulated through floating point.
    """
    red, word = reduce_with_word(tp.form)
    return tau_point(red, tp.prec).tau, word


def reduce_point(z: BigComplex) -> tuple[BigComplex, tuple[str, ...]]:
    """Floating-point reduction of an arbitrary point of the upper half plane."""
    prec = z.prec
    if not z.im > 0:
        raise DomainError("point must lie in the upper half plane")
    word = []
    for _ in range(10000):
        k = (z.re + Fraction(1, 2)).floor()
        if k:
            z = z - k
            word.extend([T_INV] * k if k > 0 else [T] * (-k))
        if float(z.norm()) < 1 - 2.0 ** (-prec + 8):
            z = -BigComplex.one(prec) / z
            word.append(S)
            continue
        return z, tuple(word)
    raise DomainError("reduction did not terminate")


# --- Dedekind eta by the pentagonal series -----------------------------------

def pentagonal_exponents(nu: int) -> tuple[int, int]:
    return nu * (3 * nu - 1) // 2, nu * (3 * nu + 1) // 2


def truncation_exponent(prec: int, im_z: float = _SQRT3_HALF) -> int:
    """Smallest exponent N with |q|^N <= 2^-(prec+8) for Im z >= im_z."""
    return math.ceil((prec + 8) * math.log(2) / (2 * math.pi * im_z)) + 1


def eta_sparse(z: BigComplex, prec: Optional[int] = None, terms: Optional[int] = None) -> BigComplex:
    """eta(z) = q^(1/24) (1 + sum (-1)^nu (q^(nu(3nu-1)/2) + q^(nu(3nu+1)/2))).

    z must lie in F so that |q| <= exp(-pi sqrt 3).  The q-powers are
    produced four multiplications per nu.  ``terms`` overrides the number
    of nu values summed.
    """
    out_prec = z.prec if prec is None else prec
    if not in_fundamental_domain(z, slack=2.0 ** -20):
        raise DomainError(f"eta_sparse needs z in the fundamental domain, got {complex(z)}")
    wprec = out_prec + GUARD_BITS
    zw = z.with_prec(wprec)
    arg = (i_unit(wprec) * pi_const(wprec)).mul_2exp(1) * zw
    q = cexp(arg)
    q24 = cexp(arg * BigComplex.from_value(1, wprec) / 24)
    limit = truncation_exponent(wprec, max(float(z.im), _SQRT3_HALF))
    total = pentagonal_sum(q, limit, terms)
    return (q24 * total).with_prec(out_prec)


def pentagonal_sum(q: BigComplex, limit: int, terms: Optional[int] = None) -> BigComplex:
    prec = q.prec
    q2 = q * q
    q_nu = q            # q^nu
    q_odd = q           # q^(2nu - 1)
    q_a = q             # q^(nu(3nu-1)/2)
    q_b = q2            # q^(nu(3nu+1)/2)
    total = BigComplex.one(prec) - q_a - q_b
    nu = 1
    while True:
        nu += 1
        if terms is not None:
            if nu > terms:
                break
        elif nu * (3 * nu - 1) // 2 > limit:
            break
        q_nu = q_nu * q
        q_odd = q_odd * q2
        q_a = q_b * q_odd
        q_b = q_a * q_nu
        if nu % 2:
            total = total - q_a - q_b
        else:
            total = total + q_a + q_b
    return total


def eta_product(z: BigComplex, factors: int) -> BigComplex:
    """q^(1/24) prod_{nu <= factors} (1 - q^nu); slow, used as an oracle."""
    prec = z.prec
    arg = (i_unit(prec) * pi_const(prec)).mul_2exp(1) * z
    q = cexp(arg)
    result = cexp(arg * BigComplex.from_value(1, prec) / 24)
    qn = BigComplex.one(prec)
    for _ in range(factors):
        qn = qn * q
        result = result * (1 - qn)
    return result


@dataclass(frozen=True)
class EtaMultiplier:
    """eta(z_end) = exp(2 pi i root24 / 24) * halfpower * eta(tau_start)."""

    root24: int
    halfpower: BigComplex

    def value(self) -> BigComplex:
        prec = self.halfpower.prec
        angle = (i_unit(prec) * pi_const(prec)) * BigComplex.from_value(self.root24, prec) / 12
        return cexp(angle) * self.halfpower


def eta_multiplier(word: tuple[str, ...], tau_start: BigComplex) -> EtaMultiplier:
    """Compose eta(tau + 1) = e^(i pi/12) eta(tau) and eta(-1/tau) = sqrt(-i tau) eta(tau)."""
    prec = tau_start.prec
    tau = tau_start
    root24 = 0
    half = BigComplex.one(prec)
    minus_i = -i_unit(prec)
    for letter in word:
        if letter == T:
            root24 += 1
            tau = tau + 1
        elif letter == T_INV:
            root24 -= 1
            tau = tau - 1
        elif letter == S:
            half = half * csqrt(minus_i * tau)
            tau = -BigComplex.one(prec) / tau
        else:
            raise ValueError(f"unknown generator {letter!r}")
    return EtaMultiplier(root24 % 24, half)


def eta_at(tp: TauPoint) -> BigComplex:
    """eta(tau) via reduction to F, the pentagonal series and the multiplier."""
    prec = tp.prec
    wprec = prec + GUARD_BITS
    tw = TauPoint(tp.form, tp.tau.with_prec(wprec))
    z, word = reduce_argument(tw)
    eta_z = eta_sparse(z, wprec)
    if not word:
        return eta_z.with_prec(prec)
    m = eta_multiplier(word, tw.tau).value()
    return (eta_z / m).with_prec(prec)


def eta_at_point(z: BigComplex) -> BigComplex:
    """eta at an arbitrary point of the upper half plane (numeric reduction)."""
    prec = z.prec
    wprec = prec + GUARD_BITS
    zw = z.with_prec(wprec)
    red, word = reduce_point(zw)
    eta_z = eta_sparse(red, wprec)
    if not word:
        return eta_z.with_prec(prec)
    return (eta_z / eta_multiplier(word, zw).value()).with_prec(prec)


def half_form(form: QuadForm) -> QuadForm:
    """Form whose root is tau/2 when tau is the root of form."""
    A, B, C = form
    return QuadForm(4 * A, 2 * B, C)


def j_from_f1(f1: BigComplex) -> BigComplex:
    f8 = f1 ** 8
    f24 = f8 * f8 * f8
    return ((f24 + 16) / f8) ** 3


def j_from_eta(tp: TauPoint) -> BigComplex:
    """j(tau) = ((f1^24 + 16) / f1^8)^3, f1 = eta(tau/2) / eta(tau)."""
    prec = tp.prec
    wprec = prec + GUARD_BITS
    tau = tp.tau.with_prec(wprec)
    eta_tau = eta_at(TauPoint(tp.form, tau))
    eta_half = eta_at(TauPoint(half_form(tp.form), tau.mul_2exp(-1)))
    return j_from_f1(eta_half / eta_tau).with_prec(prec)


# --- naive q-expansion of j ---------------------------------------------------

def _series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for k, y in enumerate(b[: n - i]):
                out[i + k] += x * y
    return out


@lru_cache(maxsize=None)
def j_coefficients(count: int = NAIVE_TERM_CAP + 2) -> tuple[int, ...]:
    """Integers c_{-1}, c_0, c_1, ... of j = sum c_nu q^nu (count of them).

    j q = E4^3 / prod(1 - q^n)^24, with E4 = 1 + 240 sum sigma_3(n) q^n and
    the product taken from the pentagonal series.
    """
    n = count
    euler = [0] * n
    euler[0] = 1
    nu = 1
    while True:
        a, b = pentagonal_exponents(nu)
        if a >= n:
            break
        sign = -1 if nu % 2 else 1
        euler[a] += sign
        if b < n:
            euler[b] += sign
        nu += 1
    p2 = _series_mul(euler, euler, n)
    p4 = _series_mul(p2, p2, n)
    p8 = _series_mul(p4, p4, n)
    p16 = _series_mul(p8, p8, n)
    p24 = _series_mul(p16, p8, n)
    sigma3 = [0] * n
    for d in range(1, n):
        d3 = d ** 3
        for m in range(d, n, d):
            sigma3[m] += d3
    e4 = [1] + [240 * sigma3[k] for k in range(1, n)]
    e4_cubed = _series_mul(_series_mul(e4, e4, n), e4, n)
    # divide by p24 (constant term 1)
    out = [0] * n
    for k in range(n):
        acc = e4_cubed[k]
        for i in range(1, k + 1):
            if p24[i]:
                acc -= p24[i] * out[k - i]
        out[k] = acc
    return tuple(out)


def coefficient_bound_log(nu: int) -> float:
    """log of e^(4 pi sqrt nu) / (sqrt 2 nu^(3/4)), an upper bound for c_nu."""
    return 4 * math.pi * math.sqrt(nu) - 0.5 * math.log(2) - 0.75 * math.log(nu)


def naive_terms_needed(prec: int, im_z: float) -> int:
    """Number of positive-index terms N with the tail below 2^-(prec+8)
    relative to |q|^-1."""
    log_q = -2 * math.pi * im_z
    target = -(prec + 8) * math.log(2) - log_q  # tail <= 2^-(prec+8) |q|^-1
    nu = 1
    while True:
        # tail beyond nu is dominated by a geometric series of ratio < 1/2 here
        term = coefficient_bound_log(nu + 1) + (nu + 1) * log_q
        if term + math.log(2) < target and coefficient_bound_log(nu + 2) - coefficient_bound_log(nu + 1) + log_q < -math.log(2):
            return nu
        nu += 1
        if nu > 100000:
            raise TermCapError("term search did not terminate")


def naive_j_series(z: BigComplex, terms: Optional[int] = None, cap: int = NAIVE_TERM_CAP) -> BigComplex:
    """j(z) = q^-1 + sum_{nu=0}^{terms} c_nu q^nu by Horner's scheme, z in F."""
    prec = z.prec
    if not in_fundamental_domain(z, slack=2.0 ** -20):
        raise DomainError(f"naive_j_series needs z in the fundamental domain, got {complex(z)}")
    if terms is None:
        terms = naive_terms_needed(prec + GUARD_BITS, float(z.im))
    if terms > cap:
        raise TermCapError(f"{terms} terms needed at {prec} bits, cap is {cap}")
    coeffs = j_coefficients(max(cap, terms) + 2)
    wprec = prec + GUARD_BITS
    zw = z.with_prec(wprec)
    q = cexp((i_unit(wprec) * pi_const(wprec)).mul_2exp(1) * zw)
    # polynomial part sum_{nu=0}^{terms} c_nu q^nu, coefficient of q^nu is coeffs[nu + 1]
    acc = BigComplex.from_value(coeffs[terms + 1], wprec)
    for nu in range(terms - 1, -1, -1):
        acc = acc * q + coeffs[nu + 1]
    return (acc + BigComplex.one(wprec) / q).with_prec(prec)


# --- AGM and Newton ----------------------------------------------------------

def _nome(tau: BigComplex) -> BigComplex:
    """q = exp(i pi tau)."""
    prec = tau.prec
    return cexp(i_unit(prec) * pi_const(prec) * tau)


def theta_constants(tau: BigComplex) -> tuple[BigComplex, BigComplex, BigComplex]:
    """(theta2, theta3, theta4) at tau with nome q = exp(i pi tau)."""
    prec = tau.prec
    q = _nome(tau)
    im = max(float(tau.im), 0.1)
    # |q|^(n^2) <= 2^-(prec+8)
    nmax = math.isqrt(math.ceil((prec + 8) * math.log(2) / (math.pi * im))) + 2
    one = BigComplex.one(prec)
    t3 = one
    t4 = one
    qn2 = one
    q_odd = q  # q^(2n-1)
    q2 = q * q
    for n in range(1, nmax + 1):
        qn2 = qn2 * q_odd  # q^(n^2)
        q_odd = q_odd * q2
        term = qn2.mul_2exp(1)
        t3 = t3 + term
        t4 = t4 - term if n % 2 else t4 + term
    # theta2 = 2 q^(1/4) sum_{n>=0} q^(n(n+1))
    q14 = cexp(i_unit(prec) * pi_const(prec) * tau / 4)
    s = one
    qnn = one
    q_even = q2  # q^(2n)
    for n in range(1, nmax + 1):
        qnn = qnn * q_even
        q_even = q_even * q2
        s = s + qnn
    t2 = (q14 * s).mul_2exp(1)
    return t2, t3, t4


def kprime_series(tau: BigComplex) -> BigComplex:
    """k'(tau) = theta4^2 / theta3^2 from the theta series."""
    _, t3, t4 = theta_constants(tau)
    return (t4 * t4) / (t3 * t3)


def lambda_from_kprime(kp: BigComplex) -> BigComplex:
    return kp * kp


def j_from_lambda(lam: BigComplex) -> BigComplex:
    """256 (1 - lambda + lambda^2)^3 / (lambda (1 - lambda))^2."""
    num = (1 - lam + lam * lam) ** 3
    den = lam * (1 - lam)
    return num.mul_2exp(8) / (den * den)


def _agm_guard(im_tau: float) -> int:
    # 1 - k'^2 = k^2 ~ 16 |q| loses about pi Im(tau) / ln 2 bits
    return GUARD_BITS + 8 + 2 * math.ceil(math.pi * im_tau / math.log(2))


def _shift_to_strip(tau: BigComplex) -> tuple[BigComplex, int]:
    n = math.floor(float(tau.re) + 0.5)
    return (tau - n if n else tau), n


def _newton_schedule(target: int, start: int = INIT_PREC) -> list[int]:
    precs = []
    p = target
    while p > start:
        precs.append(p)
        p = (p + 1) // 2 + 8
    precs.reverse()
    return precs + [target]


def tau_from_kprime(kp: BigComplex) -> BigComplex:
    """i agm(1, k') / agm(1, k) with k = sqrt(1 - k'^2)."""
    prec = kp.prec
    one = BigComplex.one(prec)
    k = csqrt(one - kp * kp)
    return i_unit(prec) * agm(one, kp) / agm(one, k)


def kprime_newton(tp: TauPoint, max_steps: int = NEWTON_MAX_STEPS) -> BigComplex:
    """k'(tau) by Newton iteration on tau(k') = i agm(1, k') / agm(1, k).

    The start value comes from a 256-bit theta series; precision doubles
    each step.  Points with Im(tau) above 5 are evaluated by the theta
    series directly.  Integer translations use k'(tau + 1) = 1 / k'(tau).
    """
    prec = tp.prec
    tau0, shift = _shift_to_strip(tp.tau)
    if float(tau0.norm()) < 1 - 2.0 ** -20:
        raise DomainError(f"kprime_newton needs |tau| >= 1 after translation, got {complex(tp.tau)}")
    im = float(tau0.im)
    wprec = prec + _agm_guard(min(im, AGM_IM_THRESHOLD))
    if im > AGM_IM_THRESHOLD:
        kp = kprime_series(tau0.with_prec(wprec))
    else:
        kp = _kprime_newton_core(tau0.with_prec(wprec), max_steps)
    if shift % 2:
        kp = BigComplex.one(wprec) / kp
    return kp.with_prec(prec)


def _kprime_newton_core(tau: BigComplex, max_steps: int) -> BigComplex:
    target = tau.prec
    start = min(INIT_PREC, target)
    kp = kprime_series(tau.with_prec(start))
    steps = 0
    for p in _newton_schedule(target, start):
        kp = kp.with_prec(p)
        t = tau.with_prec(p)
        one = BigComplex.one(p)
        while True:
            steps += 1
            if steps > max_steps:
                raise NewtonDivergenceError(f"k' Newton iteration diverged at tau = {complex(tau)}")
            k = csqrt(one - kp * kp)
            a1 = agm(one, kp)
            a2 = agm(one, k)
            resid = i_unit(p) * a1 / a2 - t
            # dk'/dtau = -i pi k' (1 - k'^2) / (2 agm(1, k')^2)
            deriv = -(i_unit(p) * pi_const(p)) * kp * (one - kp * kp) / (a1 * a1).mul_2exp(1)
            step = resid * deriv
            kp = kp - step
            if step.is_zero() or step.magnitude_exponent() - kp.magnitude_exponent() < -(p // 2) - 4 or p < target:
                break
        if abs(complex(resid)) > 1e-3:
            raise NewtonDivergenceError(f"k' Newton iteration diverged at tau = {complex(tau)}")
    return kp


def j_agm(tp: TauPoint) -> BigComplex:
    """j from lambda = k'^2 with k' from the AGM Newton iteration; points
    above the imaginary-part threshold use the sparse eta series."""
    if float(tp.tau.im) > AGM_IM_THRESHOLD:
        return j_from_eta(tp)
    prec = tp.prec
    wprec = prec + _agm_guard(float(tp.tau.im))
    kp = kprime_newton(TauPoint(tp.form, tp.tau.with_prec(wprec)))
    return j_from_lambda(lambda_from_kprime(kp)).with_prec(prec)


def eta_agm(tp: TauPoint) -> BigComplex:
    """eta(tau) from theta00^2 = 1 / agm(1, k') and
    eta^12 = lambda (1 - lambda) (theta00^2)^6 / 16.

    The twelfth-root branch is picked with a 256-bit eta_sparse value and
    refined by Newton's method on x^12 - eta^12.
    """
    prec = tp.prec
    tau0, shift = _shift_to_strip(tp.tau)
    if float(tau0.norm()) < 1 - 2.0 ** -20:
        raise DomainError(f"eta_agm needs |tau| >= 1 after translation, got {complex(tp.tau)}")
    if float(tau0.im) > AGM_IM_THRESHOLD:
        return eta_at(tp)
    wprec = prec + _agm_guard(float(tau0.im))
    tw = tau0.with_prec(wprec)
    kp = kprime_newton(TauPoint(tp.form, tw))
    one = BigComplex.one(wprec)
    lam = kp * kp
    theta2 = one / agm(one, kp)
    target = (lam * (one - lam) * theta2 ** 6).mul_2exp(-4)
    low = min(INIT_PREC, wprec)
    guess = eta_sparse(tau0.with_prec(low), low)
    x = guess
    for p in _newton_schedule(wprec, low):
        x = x.with_prec(p)
        tgt = target.with_prec(p)
        x11 = x ** 11
        x = x - (x11 * x - tgt) / (x11 * 12)
    x = x - (x ** 12 - target) / (x ** 11 * 12)
    rel = abs(complex(x.with_prec(low) - guess)) / abs(complex(guess))
    if rel > 0.1:
        raise BranchSelectionError(f"twelfth-root branch mismatch at tau = {complex(tp.tau)}")
    if shift:
        x = x * _root24(shift, wprec)
    return x.with_prec(prec)


def _root24(k: int, prec: int) -> BigComplex:
    """exp(2 pi i k / 24)."""
    return cexp(i_unit(prec) * pi_const(prec) * BigComplex.from_value(k, prec) / 12)


# --- eta as a polynomial in q (multipoint evaluation) --------------------------

def eta_series_poly(degree: int, prec: int) -> FloatPoly:
    """1 + sum (-1)^nu (X^(nu(3nu-1)/2) + X^(nu(3nu+1)/2)) truncated at degree."""
    coeffs = [0] * (degree + 1)
    coeffs[0] = 1
    nu = 1
    while True:
        a, b = pentagonal_exponents(nu)
        if a > degree:
            break
        sign = -1 if nu % 2 else 1
        coeffs[a] = sign
        if b <= degree:
            coeffs[b] = sign
        nu += 1
    return FloatPoly.from_values(coeffs, prec)


def q_of(z: BigComplex) -> BigComplex:
    """q = exp(2 pi i z)."""
    prec = z.prec
    return cexp((i_unit(prec) * pi_const(prec)).mul_2exp(1) * z)


def q24_of(z: BigComplex) -> BigComplex:
    prec = z.prec
    return cexp((i_unit(prec) * pi_const(prec)).mul_2exp(1) * z / 24)
