"""Checking a class polynomial modulo CM primes.

For a prime p with 4p = U^2 + |D| V^2, H_D splits into distinct linear
factors over F_p and each root is the j-invariant of a curve whose trace
is +U or -U.  A candidate polynomial is rejected when it does not split,
or when a root gives a curve (and twists) with the wrong group order.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from ..classgroup import check_discriminant, is_prime, sqrt_mod_p

DEFAULT_MIN_BITS = 32
DEFAULT_TRIALS = 8
SEARCH_CAP = 1 << 22


class CMPrimeSearchError(RuntimeError):
    pass


class Verdict(enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CMPrime:
    p: int
    U: int
    V: int

    def check(self, D: int) -> bool:
        return 4 * self.p == self.U ** 2 + (-D) * self.V ** 2 and D % self.p != 0


# --- CM prime search ---------------------------------------------------------------

@lru_cache(maxsize=4096)
def find_cm_prime(D: int, min_bits: int = DEFAULT_MIN_BITS, start: Optional[int] = None,
                  cap: int = SEARCH_CAP) -> CMPrime:
    """Smallest prime p >= max(2^min_bits, start) with 4p = U^2 + |D| V^2, V >= 1, p not dividing D."""
    check_discriminant(D)
    if min_bits < 2:
        raise ValueError("min_bits must be at least 2")
    lo = max(1 << min_bits, start or 0)
    d = -D
    width = 1024
    scanned = 0
    while scanned < cap:
        hi = lo + width
        best = None
        V = 1
        while d * V * V < 4 * hi:
            rest_lo = 4 * lo - d * V * V
            rest_hi = 4 * hi - d * V * V
            U = 0 if rest_lo <= 0 else math.isqrt(rest_lo - 1) + 1
            if (U - D * V) % 2:
                U += 1
            while U * U < rest_hi:
                n = U * U + d * V * V
                p = n // 4
                if n % 4 == 0 and (best is None or p < best.p) and p >= lo and D % p and is_prime(p):
                    best = CMPrime(p, U, V)
                U += 2
            V += 1
        if best is not None:
            return best
        scanned += width
        lo = hi
        width *= 2
    raise CMPrimeSearchError(f"no CM prime for D={D} within {cap} integers of 2^{min_bits}")


def find_cm_primes(D: int, count: int, min_bits: int = DEFAULT_MIN_BITS) -> list[CMPrime]:
    out = []
    start = None
    while len(out) < count:
        cp = find_cm_prime(D, min_bits, start)
        out.append(cp)
        start = cp.p + 1
    return out


# --- F_p[X] arithmetic (ascending coefficient lists) --------------------------------

def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def pmod(f: Sequence[int], p: int) -> list[int]:
    return _trim([c % p for c in f])


def poly_divmod_p(f: list[int], g: list[int], p: int) -> tuple[list[int], list[int]]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(f)
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    q = [0] * max(0, len(r) - dg)
    for k in range(len(r) - 1, dg - 1, -1):
        c = r[k] * inv % p
        if c:
            q[k - dg] = c
            for i in range(dg + 1):
                r[k - dg + i] = (r[k - dg + i] - c * g[i]) % p
    return _trim(q), _trim(r[:dg])


def poly_mulmod_p(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return poly_divmod_p([c % p for c in prod], m, p)[1]


def poly_powmod_p(base: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = poly_divmod_p(base, m, p)[1]
    while e:
        if e & 1:
            result = poly_mulmod_p(result, base, m, p)
        e >>= 1
        if e:
            base = poly_mulmod_p(base, base, m, p)
    return result


def poly_gcd_p(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, poly_divmod_p(a, b, p)[1]
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def poly_sub_p(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def derivative_p(f: list[int], p: int) -> list[int]:
    return _trim([(k * f[k]) % p for k in range(1, len(f))])


def find_roots_p(f: list[int], p: int, rng: random.Random) -> list[int]:
    """All roots of a squarefree, completely split monic f by random-shift gcds."""
    f = _trim(list(f))
    if len(f) <= 1:
        return []
    if len(f) == 2:
        return [(-f[0]) * pow(f[1], -1, p) % p]
    if p < 64:
        return [x for x in range(p) if sum(c * pow(x, k, p) for k, c in enumerate(f)) % p == 0]
    half = (p - 1) // 2
    while True:
        a = rng.randrange(p)
        g = poly_powmod_p([a, 1], half, f, p)
        g = poly_gcd_p(f, poly_sub_p(g, [1], p), p)
        if 1 < len(g) < len(f):
            q = poly_divmod_p(f, g, p)[0]
            return find_roots_p(g, p, rng) + find_roots_p(q, p, rng)


# --- elliptic curves y^2 = x^3 + a x + b over F_p ------------------------------------

def _ec_add(P, Q, a: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def ec_mul(k: int, P, a: int, p: int):
    result = None
    addend = P
    while k > 0:
        if k & 1:
            result = _ec_add(result, addend, a, p)
        addend = _ec_add(addend, addend, a, p)
        k >>= 1
    return result


def random_point(a: int, b: int, p: int, rng: random.Random):
    while True:
        x = rng.randrange(p)
        rhs = (x * x * x + a * x + b) % p
        if rhs == 0:
            return x, 0
        y = sqrt_mod_p(rhs, p, rng)
        if y is not None:
            return x, y if rng.random() < 0.5 else (-y) % p


def curve_from_j(j: int, p: int) -> tuple[int, int]:
    """y^2 = x^3 + 3k x + 2k with k = j / (1728 - j); requires j not in {0, 1728}."""
    k = j * pow(1728 - j, -1, p) % p
    return 3 * k % p, 2 * k % p


def _orders_match(a: int, b: int, p: int, U: int, trials: int, rng: random.Random) -> bool:
    """All sampled points are killed by p + 1 - U, or all by p + 1 + U."""
    candidates = [p + 1 - U, p + 1 + U]
    for _ in range(trials):
        P = random_point(a, b, p, rng)
        candidates = [n for n in candidates if ec_mul(n, P, a, p) is None]
        if not candidates:
            return False
    return True


def _coset_generator(p: int, order: int, rng: random.Random) -> int:
    """g generating F_p^* / (F_p^*)^order (order divides p - 1)."""
    primes = [q for q in (2, 3) if order % q == 0]
    while True:
        g = rng.randrange(2, p)
        if all(pow(g, (p - 1) // q, p) != 1 for q in primes):
            return g


def _special_twists(j: int, p: int, rng: random.Random) -> list[tuple[int, int]]:
    """All twists of the curve with j = 0 (y^2 = x^3 + b) or j = 1728 (y^2 = x^3 + a x)."""
    if j == 0:
        order = 6 if p % 3 == 1 else 2
    else:
        order = 4 if p % 4 == 1 else 2
    g = _coset_generator(p, order, rng)
    reps = [pow(g, i, p) for i in range(order)]
    return [(0, c) for c in reps] if j == 0 else [(c, 0) for c in reps]


def root_consistent(r: int, prime: CMPrime, trials: int, rng: random.Random) -> bool:
    p, U = prime.p, prime.U
    if r % p in (0, 1728 % p):
        return any(_orders_match(a, b, p, U, trials, rng) for a, b in _special_twists(r % p, p, rng))
    a, b = curve_from_j(r, p)
    return _orders_match(a, b, p, U, trials, rng)


def verify_mod_p(coeffs: Sequence[int], prime: CMPrime, trials: int = DEFAULT_TRIALS,
                 rng: Optional[random.Random] = None) -> Verdict:
    """Check that coeffs (ascending, monic) splits mod p into j-invariants of trace +-U.

    Non-squarefree reductions are inconclusive (the caller should try another
    prime), as is ``trials == 0``.
    """
    rng = rng or random.Random(0)
    p = prime.p
    if trials <= 0:
        return Verdict.INCONCLUSIVE
    f = pmod(coeffs, p)
    if len(f) != len(coeffs) or f[-1] != 1:
        return Verdict.INCONCLUSIVE
    if len(f) == 1:
        return Verdict.INCONSISTENT
    if len(poly_gcd_p(f, derivative_p(f, p), p)) > 1:
        return Verdict.INCONCLUSIVE
    xp = poly_powmod_p([0, 1], p, f, p)
    if poly_sub_p(xp, poly_divmod_p([0, 1], f, p)[1], p):
        return Verdict.INCONSISTENT
    for r in find_roots_p(f, p, rng):
        if not root_consistent(r, prime, trials, rng):
            return Verdict.INCONSISTENT
    return Verdict.CONSISTENT


@dataclass(frozen=True)
class VerificationResult:
    prime: CMPrime
    verdict: Verdict


def verify_polynomial(D: int, coeffs: Sequence[int], count: int = 3, trials: int = DEFAULT_TRIALS,
                      seed: int = 0, min_bits: int = DEFAULT_MIN_BITS, max_primes: int = 20) -> list[VerificationResult]:
    """Run verify_mod_p on ``count`` CM primes, skipping inconclusive ones.

    Stops early at the first inconsistent prime.
    """
    rng = random.Random(seed)
    results = []
    passed = 0
    start = None
    for _ in range(max_primes):
        if passed >= count:
            break
        cp = find_cm_prime(D, min_bits, start)
        start = cp.p + 1
        verdict = verify_mod_p(coeffs, cp, trials, rng)
        results.append(VerificationResult(cp, verdict))
        if verdict is Verdict.INCONSISTENT:
            break
        if verdict is Verdict.CONSISTENT:
            passed += 1
    return results


def all_consistent(results: Sequence[VerificationResult], count: int) -> bool:
    ok = [r for r in results if r.verdict is Verdict.CONSISTENT]
    return len(ok) >= count and all(r.verdict is not Verdict.INCONSISTENT for r in results)
