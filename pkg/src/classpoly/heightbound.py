"""Height bounds for the Hilbert class polynomial and precision selection.

Heights are natural logarithms of the largest coefficient modulus;
conversion to bits only happens in :class:`HeightBound.bits`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .bigfloat import BigReal, MIN_PREC, euler_gamma, log2_const, pi_const
from .classgroup import ClassGroupList, check_discriminant

# 30 significant digits; recomputed from their definitions in the tests.
C1 = "5.44139809270265355178223477293"    # sqrt(3) * pi
C2 = "18.5873025546971490332660888287"   # 4 gamma c1 + 2 c5
C3 = "17.4421542841757159441262112889"   # c1 c6 + 2 gamma c5
C4 = "11.5941891519779331557482960431"   # c1 (gamma + 1) + c5
C5 = "3.01193084120198469129907812602"   # log(2 k2)
C6 = "2.56645198898796463589776351802"   # 2 k3 + 2 log 2 + 2 gamma^2
K1 = "2114.56624994520450204190268451"   # 744 + sum of the c_nu bound times |q|^nu
K2 = "10.1633047572306611816487194986"   # 1 + k1 exp(-pi sqrt 3)
K3 = "0.256900890126318334213273501196"  # (log^2 3 - log 2) / 2

_EXTRA_BITS = 64
_BASE_PREC = 128


class BoundMode(enum.Enum):
    PROVEN = "proven"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class HeightBound:
    natural_log_height: BigReal
    bits: int
    mode: BoundMode

    @classmethod
    def from_nats(cls, nats: BigReal, mode: BoundMode) -> "HeightBound":
        bits = 0 if nats <= 0 else (nats / log2_const(nats.prec)).ceil()
        return cls(nats, bits, mode)

    @property
    def nats(self) -> float:
        return float(self.natural_log_height)


@dataclass(frozen=True)
class PrecisionPolicy:
    safety_factor: Fraction = Fraction(101, 100)
    guard_bits: int = 32

    def __post_init__(self):
        object.__setattr__(self, "safety_factor", Fraction(self.safety_factor).limit_denominator(10**6))
        if self.safety_factor < 1:
            raise ValueError("safety factor must be at least 1")
        if self.guard_bits < 0:
            raise ValueError("guard bits must be non-negative")


def _prec_for(D: int) -> int:
    return _BASE_PREC + _EXTRA_BITS + (-D).bit_length()


def proven_bound(D: int, h: int) -> HeightBound:
    """c5 h + c1 N (log^2 N + 4 gamma log N + c6 + (log N + gamma + 1)/N),
    N = sqrt(|D|/3).  Evaluated with 64 extra bits and rounded upwards."""
    check_discriminant(D)
    if h < 1:
        raise ValueError("class number must be positive")
    prec = _prec_for(D)
    c1 = BigReal.from_value(C1, prec)
    c5 = BigReal.from_value(C5, prec)
    c6 = BigReal.from_value(C6, prec)
    gamma = euler_gamma(prec)
    N = (BigReal.from_value(-D, prec) / 3).sqrt()
    L = N.log()
    inner = L * L + 4 * gamma * L + c6 + (L + gamma + 1) / N
    value = c5 * h + c1 * N * inner
    return HeightBound.from_nats(_round_up(value, _BASE_PREC), BoundMode.PROVEN)


def asymptotic_bound(D: int) -> float:
    """c1 N log^2 N + c2 N log N + c3 N + c1 log N + c4 (no h needed)."""
    N = math.sqrt(-D / 3)
    L = math.log(N)
    c1, c2, c3, c4 = (float(c) for c in (C1, C2, C3, C4))
    return c1 * N * L * L + c2 * N * L + c3 * N + c1 * L + c4


def _round_up(x: BigReal, prec: int) -> BigReal:
    ctx = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    return BigReal(ctx.plus(x.value), prec)


def heuristic_estimate(D: int, forms: ClassGroupList) -> HeightBound:
    """pi sqrt|D| * sum(1/A) over the reduced forms."""
    check_discriminant(D)
    prec = _prec_for(D)
    inv_sum = sum((Fraction(1, f.A) for f in forms), Fraction(0))
    value = pi_const(prec) * BigReal.from_value(-D, prec).sqrt() * BigReal.from_value(inv_sum, prec)
    return HeightBound.from_nats(_round_up(value, _BASE_PREC), BoundMode.HEURISTIC)


def working_precision(bound: HeightBound, policy: PrecisionPolicy = PrecisionPolicy()) -> int:
    """ceil(bits * safety_factor) + guard_bits, at least 53."""
    scaled = Fraction(bound.bits) * policy.safety_factor
    bits = math.ceil(scaled) + policy.guard_bits
    return max(MIN_PREC, bits)


def bits_from_nats(nats: float) -> int:
    return math.ceil(nats / math.log(2))


def default_precision(D: int, forms: ClassGroupList, policy: PrecisionPolicy = PrecisionPolicy()) -> int:
    """Precision from max(proven bound, heuristic estimate) under policy."""
    proven = proven_bound(D, forms.h)
    heur = heuristic_estimate(D, forms)
    chosen = proven if proven.natural_log_height >= heur.natural_log_height else heur
    return working_precision(chosen, policy)
