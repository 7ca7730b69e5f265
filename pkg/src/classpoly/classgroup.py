"""Binary quadratic forms and class group enumeration for D < 0.

Three enumerators return the same canonical list of reduced primitive
forms [A, B, C] (sorted by A, then B):

* :func:`enumerate_naive` loops over A and B.
* :func:`enumerate_factored` loops over A in factored form and solves
  B^2 = D (mod 4A) prime power by prime power, recombining with a CRT tree.
* :func:`enumerate_prime_generated` closes the group generated by prime
  forms of norm at most 6 log^2 |D| (natural log).  Its completeness
  depends on GRH.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import gmpy2


class FormError(ValueError):
    pass


class DiscriminantError(ValueError):
    pass


class GeneratorBoundError(RuntimeError):
    """The GRH generator bound produced a subgroup smaller than expected."""


def check_discriminant(D: int) -> int:
    if isinstance(D, bool) or not isinstance(D, int):
        raise DiscriminantError(f"discriminant must be an integer, got {D!r}")
    if D >= 0 or D % 4 not in (0, 1):
        raise DiscriminantError(f"{D} is not a negative discriminant (D < 0, D = 0 or 1 mod 4)")
    return D


class QuadForm(NamedTuple):
    A: int
    B: int
    C: int

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.A, self.B), self.C) == 1

    def is_reduced(self) -> bool:
        A, B, C = self
        if not (abs(B) <= A <= C):
            return False
        if (abs(B) == A or A == C) and B < 0:
            return False
        return True

    def __str__(self):
        return f"[{self.A},{self.B},{self.C}]"


def form_from_AB(A: int, B: int, D: int) -> QuadForm:
    num = B * B - D
    if num % (4 * A):
        raise FormError(f"no form [{A},{B},*] of discriminant {D}")
    return QuadForm(A, B, num // (4 * A))


def principal_form(D: int) -> QuadForm:
    check_discriminant(D)
    if D % 4 == 0:
        return QuadForm(1, 0, -D // 4)
    return QuadForm(1, 1, (1 - D) // 4)


# Words in the generators S: z -> -1/z, T: z -> z + 1, and T^-1.
S, T, T_INV = "S", "T", "T^-1"


def _validate(f: QuadForm, primitive: bool = True) -> None:
    A, B, C = f
    if A <= 0:
        raise FormError(f"form {f} must have A > 0")
    if B * B - 4 * A * C >= 0:
        raise FormError(f"form {f} is not positive definite")
    if primitive and not f.is_primitive():
        raise FormError(f"form {f} is not primitive")


def _reduce(A: int, B: int, C: int) -> tuple[int, int, int]:
    """Reduce a positive definite form; no transformation word recorded."""
    while True:
        if not (-A < B <= A):
            k = (A - B) // (2 * A)
            B, C = B + 2 * A * k, A * k * k + B * k + C
        if A > C or (A == C and B < 0):
            A, B, C = C, -B, A
            continue
        return A, B, C


def reduce_with_word(f: QuadForm) -> tuple[QuadForm, tuple[str, ...]]:
    """Reduce any positive definite form, returning the word that moves its
    root tau = (-B + sqrt(D)) / (2A) into the fundamental domain."""
    _validate(f, primitive=False)
    A, B, C = f
    word: list[str] = []
    while True:
        if not (-A < B <= A):
            # tau -> tau + k turns [A, B, C] into [A, B - 2Ak, ...]
            k = _shift_amount(A, B)
            B, C = B - 2 * A * k, A * k * k - B * k + C
            word.extend([T] * k if k > 0 else [T_INV] * (-k))
        if A > C or (A == C and B < 0):
            # tau -> -1/tau turns [A, B, C] into [C, -B, A]
            A, B, C = C, -B, A
            word.append(S)
            continue
        return QuadForm(A, B, C), tuple(word)


def _shift_amount(A: int, B: int) -> int:
    """The k with B - 2Ak in (-A, A]."""
    return -((A - B) // (2 * A))


def reduce_form(f: QuadForm) -> tuple[QuadForm, tuple[str, ...]]:
    """Reduced form equivalent to a primitive positive definite form, with
    the S/T word mapping its root into the fundamental domain."""
    _validate(f)
    return reduce_with_word(f)


def reduced(f: QuadForm) -> QuadForm:
    return QuadForm(*_reduce(*f))


def inverse(f: QuadForm) -> QuadForm:
    return reduced(QuadForm(f.A, -f.B, f.C))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    g, x, y = gmpy2.gcdext(a, b)
    return int(g), int(x), int(y)


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Reduced representative of the Gauss composition of two classes."""
    D = f.discriminant
    if g.discriminant != D:
        raise FormError(f"discriminants differ: {D} vs {g.discriminant}")
    _validate(f)
    _validate(g)
    a1, b1, _ = f
    a2, b2, _ = g
    e = (b1 + b2) // 2
    g1, u1, v1 = _xgcd(a1, a2)
    d, x, w = _xgcd(g1, e)
    u, v = x * u1, x * v1
    A3 = a1 * a2 // (d * d)
    B3 = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + D) // 2) // d
    B3 %= 2 * A3
    C3 = (B3 * B3 - D) // (4 * A3)
    return QuadForm(*_reduce(A3, B3, C3))


def power(f: QuadForm, n: int) -> QuadForm:
    result = principal_form(f.discriminant)
    base = reduced(f)
    if n < 0:
        base, n = inverse(base), -n
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


@dataclass(frozen=True)
class ClassGroupList:
    D: int
    forms: tuple[QuadForm, ...]

    @property
    def h(self) -> int:
        return len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __len__(self):
        return len(self.forms)

    def dump(self) -> str:
        lines = [f"{self.D} {self.h}"]
        lines.extend(f"{f.A} {f.B} {f.C}" for f in self.forms)
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "ClassGroupList":
        rows = [line.split() for line in text.strip().splitlines()]
        D, h = int(rows[0][0]), int(rows[0][1])
        forms = tuple(QuadForm(*map(int, r)) for r in rows[1:])
        if len(forms) != h:
            raise ValueError(f"header says h={h} but {len(forms)} forms follow")
        return cls(D, forms)


def _canonical(D: int, forms: Iterable[QuadForm]) -> ClassGroupList:
    return ClassGroupList(D, tuple(sorted(set(forms))))


def max_A(D: int) -> int:
    """Largest integer A with A <= sqrt(|D|/3)."""
    return math.isqrt(-D // 3)


def enumerate_naive(D: int) -> ClassGroupList:
    check_discriminant(D)
    forms = []
    parity = D & 1
    for A in range(1, max_A(D) + 1):
        four_a = 4 * A
        for B in range(parity, A + 1, 2):
            num = B * B - D
            if num % four_a:
                continue
            C = num // four_a
            if C < A or math.gcd(math.gcd(A, B), C) != 1:
                continue
            forms.append(QuadForm(A, B, C))
            if 0 < B < A < C:
                forms.append(QuadForm(A, -B, C))
    return _canonical(D, forms)


def sieve_primes(limit: int) -> list[int]:
    """Primes up to limit by the sieve of Eratosthenes."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return [i for i, v in enumerate(flags) if v]


def is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n))


_rng = random.Random(0)


def seed(value: int) -> None:
    """Reseed the generator used by Cipolla's algorithm."""
    _rng.seed(value)


def sqrt_mod_p(d: int, p: int, rng: Optional[random.Random] = None) -> Optional[int]:
    """Smaller square root of d modulo an odd prime p, or None.

    Cipolla's algorithm: pick a with a^2 - d a non-residue and compute
    (a + w)^((p+1)/2) in F_p[w]/(w^2 - (a^2 - d)).
    """
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    d %= p
    if d == 0:
        return 0
    if pow(d, (p - 1) // 2, p) != 1:
        return None
    rng = rng or _rng
    while True:
        a = rng.randrange(p)
        w2 = (a * a - d) % p
        if w2 == 0:
            r = a
            break
        if pow(w2, (p - 1) // 2, p) == p - 1:
            r = _cipolla_power(a, w2, (p + 1) // 2, p)
            break
    return min(r, p - r)


def _cipolla_power(a: int, w2: int, n: int, p: int) -> int:
    # (x0 + x1 w)(y0 + y1 w) = x0 y0 + x1 y1 w2 + (x0 y1 + x1 y0) w
    r0, r1 = 1, 0
    b0, b1 = a, 1
    while n:
        if n & 1:
            r0, r1 = (r0 * b0 + r1 * b1 * w2) % p, (r0 * b1 + r1 * b0) % p
        n >>= 1
        if n:
            b0, b1 = (b0 * b0 + b1 * b1 * w2) % p, (2 * b0 * b1) % p
    return r0


def lift_root(r: int, d: int, p: int, e: int) -> Optional[int]:
    """A root of x^2 = d (mod p^e) lifted from a root r modulo p.

    For odd p with p not dividing d this is Hensel lifting.  For p = 2
    the roots modulo 8 decide: an odd d has roots modulo 2^e (e >= 3)
    exactly when d = 1 (mod 8); the root is then lifted bit by bit.
    Returns None when no root exists.
    """
    q = p ** e
    d %= q
    if e == 1:
        return r % p if (r * r - d) % p == 0 else None
    if p == 2:
        if d % 2 == 0:
            roots = sqrt_mod_prime_power(d, 2, e)
            return roots[0] if roots else None
        if e == 2:
            return 1 if d % 4 == 1 else None
        if d % 8 != 1:
            return None
        x, k = 1, 3
        while k < e:
            # x^2 = d mod 2^k; x or x + 2^(k-1) works mod 2^(k+1)
            if (x * x - d) % (1 << (k + 1)):
                x += 1 << (k - 1)
            k += 1
        return x % q
    if (r * r - d) % p:
        return None
    if d % p == 0:
        roots = sqrt_mod_prime_power(d, p, e)
        return roots[0] if roots else None
    x, mod = r % p, p
    for _ in range(1, e):
        mod *= p
        # x <- x - (x^2 - d) / (2x) mod p^k
        x = (x - (x * x - d) * pow(2 * x, -1, mod)) % mod
    return x


def sqrt_mod_prime_power(d: int, p: int, e: int, rng: Optional[random.Random] = None) -> list[int]:
    """All roots of x^2 = d (mod p^e), sorted."""
    q = p ** e
    d %= q
    if d == 0:
        step = p ** ((e + 1) // 2)
        return list(range(0, q, step))
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    if v % 2:
        return []
    k = v // 2
    rest = e - v
    # x = p^k y with y^2 = d' (mod p^(e-2k)) and p not dividing y
    base = _unit_roots(d, p, rest, rng)
    if not base:
        return []
    pk = p ** k
    mod_y = p ** rest
    roots = set()
    # y is only determined modulo p^(e-2k); x = p^k y modulo p^e
    for y in base:
        for t in range(pk):
            roots.add((pk * (y + t * mod_y)) % q)
    return sorted(roots)


def _unit_roots(d: int, p: int, e: int, rng) -> list[int]:
    """Roots of y^2 = d mod p^e where p does not divide d."""
    q = p ** e
    if p == 2:
        d %= q
        if e == 1:
            return [1]
        if e == 2:
            return [1, 3] if d % 4 == 1 else []
        if d % 8 != 1:
            return []
        x = lift_root(1, d, 2, e)
        return sorted({x, q - x, (x + q // 2) % q, (q // 2 - x) % q})
    r = sqrt_mod_p(d, p, rng)
    if r is None:
        return []
    x = lift_root(r, d, p, e)
    return sorted({x, (q - x) % q})


def crt_tree(residues: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Combine x = r_i (mod m_i) over a balanced tree of moduli.

    Returns (x, M) with 0 <= x < M = prod m_i.
    """
    if not residues:
        return 0, 1
    nodes = [(r % m, m) for r, m in residues]
    while len(nodes) > 1:
        merged = []
        for i in range(0, len(nodes) - 1, 2):
            merged.append(_crt_pair(nodes[i], nodes[i + 1]))
        if len(nodes) % 2:
            merged.append(nodes[-1])
        nodes = merged
    return nodes[0]


def _crt_pair(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    r1, m1 = a
    r2, m2 = b
    if math.gcd(m1, m2) != 1:
        raise ValueError(f"moduli {m1} and {m2} are not coprime")
    m = m1 * m2
    t = ((r2 - r1) * pow(m1, -1, m2)) % m2
    return (r1 + m1 * t) % m, m


def _factored_range(primes: list[int], limit: int):
    """Yield (A, [(p, e), ...]) for 1 <= A <= limit, one multiplication each."""
    yield 1, []
    stack = [(1, 0, [])]
    while stack:
        n, start, fac = stack.pop()
        for i in range(start, len(primes)):
            p = primes[i]
            m = n * p
            if m > limit:
                break
            e = 1
            while m <= limit:
                f = fac + [(p, e)]
                yield m, f
                stack.append((m, i + 1, f))
                m *= p
                e += 1


def enumerate_factored(D: int, rng: Optional[random.Random] = None) -> ClassGroupList:
    check_discriminant(D)
    limit = max_A(D)
    primes = sieve_primes(limit)
    root_cache: dict[tuple[int, int], list[int]] = {}

    def roots_mod(p, e):
        key = (p, e)
        if key not in root_cache:
            root_cache[key] = sqrt_mod_prime_power(D, p, e, rng)
        return root_cache[key]

    forms = []
    for A, fac in _factored_range(primes, limit):
        # B^2 = D (mod 4A); the power of 2 is taken separately
        e2 = 2
        parts = []
        for p, e in fac:
            if p == 2:
                e2 += e
            else:
                parts.append((p, e))
        pieces = [(roots_mod(2, e2), 1 << e2)]
        for p, e in parts:
            pieces.append((roots_mod(p, e), p ** e))
        if any(not roots for roots, _ in pieces):
            continue
        two_a = 2 * A
        candidates = set()
        for combo in _combinations(pieces):
            x, _ = crt_tree(combo)
            b = x % two_a
            if b > A:
                b -= two_a
            candidates.add(b)
        for B in candidates:
            C = (B * B - D) // (4 * A)
            if C < A:
                continue
            if B < 0 and (-B == A or A == C):
                continue
            if math.gcd(math.gcd(A, B), C) != 1:
                continue
            forms.append(QuadForm(A, B, C))
    return _canonical(D, forms)


def _combinations(pieces):
    combos = [[]]
    for roots, m in pieces:
        combos = [c + [(r, m)] for c in combos for r in roots]
    return combos


def generator_bound(D: int) -> int:
    """Largest prime norm used by the GRH generating set, 6 log^2 |D|."""
    return max(2, math.floor(6 * math.log(-D) ** 2))


def prime_forms(D: int, bound: Optional[int] = None) -> list[QuadForm]:
    """Reduced primitive forms [p, b, c] for primes p <= bound."""
    check_discriminant(D)
    bound = generator_bound(D) if bound is None else bound
    out = []
    for p in sieve_primes(bound):
        if p == 2:
            cands = [b for b in range(0, 4) if (b * b - D) % 8 == 0]
        else:
            r = sqrt_mod_p(D, p)
            if r is None:
                continue
            # b = r mod p with b = D mod 2
            b = r if (r - D) % 2 == 0 else r + p
            cands = [b]
        for b in cands:
            f = QuadForm(p, b, (b * b - D) // (4 * p))
            if f.is_primitive():
                out.append(reduced(f))
                break
    return out


def enumerate_prime_generated(D: int, expected_h: Optional[int] = None) -> ClassGroupList:
    """Class group generated by small prime forms (complete under GRH).

    If expected_h is given and the closure comes out smaller, a
    GeneratorBoundError is raised instead of returning a truncated list.
    """
    check_discriminant(D)
    identity = principal_form(D)
    elements = [identity]
    seen = {identity}
    for g in prime_forms(D):
        if g in seen:
            continue
        # smallest e with g^e in the current subgroup
        powers = [identity]
        x = g
        while x not in seen:
            powers.append(x)
            x = compose(x, g)
        fresh = []
        for elt in elements:
            for pw in powers[1:]:
                y = compose(elt, pw)
                if y not in seen:
                    seen.add(y)
                    fresh.append(y)
        elements.extend(fresh)
    if expected_h is not None and len(elements) != expected_h:
        raise GeneratorBoundError(
            f"GRH generator bound insufficient for D={D}: got {len(elements)} of {expected_h} classes"
        )
    return _canonical(D, elements)


ENUMERATORS = {
    "naive": enumerate_naive,
    "factored": enumerate_factored,
    "prime": enumerate_prime_generated,
}


def class_group(D: int, method: str = "factored") -> ClassGroupList:
    try:
        fn = ENUMERATORS[method]
    except KeyError:
        raise ValueError(f"unknown enumeration method {method!r}") from None
    return fn(D)


def class_number_bound(D: int) -> float:
    """2 N (log N + gamma) + 1 with N = sqrt(|D|/3)."""
    N = math.sqrt(-D / 3)
    return 2 * N * (math.log(N) + 0.5772156649015329) + 1
