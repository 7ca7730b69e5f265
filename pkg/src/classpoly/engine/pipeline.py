"""End-to-end computation of H_D: class group, precision, conjugates, tree, rounding."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..bigfloat import BigComplex, BigReal
from ..classgroup import ClassGroupList, QuadForm, check_discriminant, class_group, reduce_with_word
from ..heightbound import (
    HeightBound,
    PrecisionPolicy,
    heuristic_estimate,
    proven_bound,
    working_precision,
)
from .. import modeval
from ..polyops import RoundingError, multi_eval, poly_from_roots, round_to_integers

log = logging.getLogger(__name__)

STRATEGIES = ("sparse", "multipoint", "agm")
PHASES = ("class group", "q-powers", "eta table", "conjugates", "tree", "rounding")
PRECISION_GROWTH = 1.25
DEFAULT_RETRIES = 3


class PipelineError(RuntimeError):
    pass


class RetriesExhaustedError(PipelineError):
    """Rounding kept failing after all precision increases."""

    def __init__(self, D: int, precision: int, cause: RoundingError):
        self.D = D
        self.precision = precision
        self.cause = cause
        self.worst_distance = cause.distance
        super().__init__(
            f"D={D}: rounding failed at {precision} bits (worst distance {cause.distance:.3g} "
            f"at X^{cause.degree}); the height estimate was too optimistic"
        )


class HeightBoundViolation(PipelineError):
    pass


@dataclass(frozen=True)
class ClassPolynomial:
    D: int
    h: int
    coeffs: tuple[int, ...]  # coeffs[k] multiplies X^k; coeffs[h] == 1
    used_precision: int
    measured_height_nats: BigReal
    strategy: str

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_text(self) -> str:
        lines = [f"{self.D} {self.h}"]
        lines.extend(str(c) for c in reversed(self.coeffs))
        return "\n".join(lines) + "\n"

    def to_structured(self, verified: Optional[bool] = None) -> dict:
        return {
            "D": self.D,
            "h": self.h,
            "precision_bits": self.used_precision,
            "strategy": self.strategy,
            "coefficients": [str(c) for c in reversed(self.coeffs)],
            "height_nats": float(self.measured_height_nats),
            "verified": verified,
        }

    def pretty(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            mag = abs(c)
            body = mono if (mag == 1 and k) else (f"{mag}{mono}" if not k else f"{mag}*{mono}")
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


@dataclass
class RunReport:
    D: int
    h: int
    strategy: str
    precision: int = 0
    timings: dict = field(default_factory=lambda: {p: 0.0 for p in PHASES})
    attempts: int = 0
    proven_bound_nats: float = 0.0
    heuristic_nats: float = 0.0
    measured_height_nats: float = 0.0
    constant_term_nats: float = 0.0

    @property
    def total(self) -> float:
        return sum(self.timings.values())

    def add(self, phase: str, seconds: float) -> None:
        self.timings[phase] = self.timings.get(phase, 0.0) + seconds


class _Timer:
    def __init__(self, report: RunReport, phase: str):
        self.report, self.phase = report, phase

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.report.add(self.phase, time.perf_counter() - self.start)
        return False


def measured_height(coeffs: Sequence[int], prec: int = 128) -> BigReal:
    """log max |c_k| in nats (0 for a polynomial with unit coefficients)."""
    big = max(abs(c) for c in coeffs)
    if big <= 1:
        return BigReal.from_value(0, prec)
    return BigReal.from_value(big, prec).log()


# --- conjugate strategies ------------------------------------------------------

def _representatives(forms: Sequence[QuadForm]) -> tuple[list[QuadForm], dict]:
    """Forms to evaluate and a map from every form to (representative, conjugate?).

    [A, -B, C] has root -conj(tau) of [A, B, C], hence conjugate j-value.
    """
    present = set(forms)
    reps = []
    source = {}
    for f in forms:
        mirror = QuadForm(f.A, -f.B, f.C)
        if f.B < 0 and mirror in present:
            source[f] = (mirror, True)
        else:
            reps.append(f)
            source[f] = (f, False)
    return reps, source


def _expand(forms: Sequence[QuadForm], reps_values: dict, source: dict) -> list[BigComplex]:
    out = []
    for f in forms:
        rep, conj = source[f]
        v = reps_values[rep]
        out.append(v.conj() if conj else v)
    return out


@dataclass
class _EtaPlan:
    """Reduced evaluation points and the multipliers tying them to tau and tau/2."""

    points: dict  # reduced form -> z in F
    links: dict   # rep -> ((red_tau, None), (red_half, multiplier value))


def _plan_eta(reps: Sequence[QuadForm], prec: int) -> _EtaPlan:
    points = {}
    links = {}
    for f in reps:
        tp = modeval.tau_point(f, prec)
        red_tau, word = reduce_with_word(f)
        m_tau = modeval.eta_multiplier(word, tp.tau).value() if word else None
        half = modeval.half_form(f)
        red_half, word_half = reduce_with_word(half)
        half_tau = tp.tau.mul_2exp(-1)
        m_half = modeval.eta_multiplier(word_half, half_tau).value() if word_half else None
        for red in (red_tau, red_half):
            if red not in points:
                points[red] = modeval.tau_point(red, prec).tau
        links[f] = ((red_tau, m_tau), (red_half, m_half))
    return _EtaPlan(points, links)


def _j_from_table(plan: _EtaPlan, eta: dict) -> dict:
    out = {}
    for f, ((rt, mt), (rh, mh)) in plan.links.items():
        e_tau = eta[rt] if mt is None else eta[rt] / mt
        e_half = eta[rh] if mh is None else eta[rh] / mh
        out[f] = modeval.j_from_f1(e_half / e_tau)
    return out


def _q_powers(points: dict, report: RunReport) -> dict:
    with _Timer(report, "q-powers"):
        return {red: (modeval.q_of(z), modeval.q24_of(z)) for red, z in points.items()}


def conjugate_strategy_sparse(forms: Sequence[QuadForm], prec: int, report: Optional[RunReport] = None) -> list[BigComplex]:
    """j(tau_i) from a table of eta values, each summed by the pentagonal series."""
    report = report or RunReport(0, len(forms), "sparse")
    wprec = prec + modeval.GUARD_BITS
    reps, source = _representatives(forms)
    plan = _plan_eta(reps, wprec)
    qs = _q_powers(plan.points, report)
    with _Timer(report, "eta table"):
        eta = {}
        for red, (q, q24) in qs.items():
            limit = modeval.truncation_exponent(wprec, max(float(plan.points[red].im), modeval._SQRT3_HALF))
            eta[red] = q24 * modeval.pentagonal_sum(q, limit)
    with _Timer(report, "conjugates"):
        values = _j_from_table(plan, eta)
        return [v.with_prec(prec) for v in _expand(forms, values, source)]


def conjugate_strategy_multipoint(
    forms: Sequence[QuadForm], prec: int, report: Optional[RunReport] = None, chunks: Optional[int] = None
) -> list[BigComplex]:
    """The truncated pentagonal series as one polynomial in q, evaluated at
    every q_i by a remainder tree.  With ``chunks`` the points are sorted by
    |q| and each chunk gets its own, shorter truncation."""
    report = report or RunReport(0, len(forms), "multipoint")
    wprec = prec + modeval.GUARD_BITS
    reps, source = _representatives(forms)
    plan = _plan_eta(reps, wprec)
    qs = _q_powers(plan.points, report)
    with _Timer(report, "eta table"):
        keys = sorted(qs, key=lambda red: float(plan.points[red].im))
        groups = _chunk(keys, chunks or 1)
        eta = {}
        for group in groups:
            im = max(float(plan.points[group[0]].im), modeval._SQRT3_HALF)
            degree = _pentagonal_degree(modeval.truncation_exponent(wprec, im))
            series = modeval.eta_series_poly(degree, wprec)
            values = multi_eval(series, [qs[k][0] for k in group])
            for k, v in zip(group, values):
                eta[k] = qs[k][1] * v
    with _Timer(report, "conjugates"):
        values = _j_from_table(plan, eta)
        return [v.with_prec(prec) for v in _expand(forms, values, source)]


def _pentagonal_degree(limit: int) -> int:
    """Largest pentagonal exponent kept by the sparse summation for this limit."""
    nu, top = 1, 2
    while True:
        a, b = modeval.pentagonal_exponents(nu + 1)
        if a > limit:
            return top
        top = b
        nu += 1


def _chunk(items: list, k: int) -> list[list]:
    k = max(1, min(k, len(items)))
    size = math.ceil(len(items) / k)
    return [items[i : i + size] for i in range(0, len(items), size)]


def conjugate_strategy_agm(forms: Sequence[QuadForm], prec: int, report: Optional[RunReport] = None) -> list[BigComplex]:
    """j(tau_i) from lambda = k'^2, k' by AGM/Newton; high points use the eta series."""
    report = report or RunReport(0, len(forms), "agm")
    reps, source = _representatives(forms)
    with _Timer(report, "eta table"):
        values = {f: modeval.j_agm(modeval.tau_point(f, prec)) for f in reps}
    with _Timer(report, "conjugates"):
        return _expand(forms, values, source)


def conjugates(strategy: str, forms: Sequence[QuadForm], prec: int,
               report: Optional[RunReport] = None, chunks: Optional[int] = None) -> list[BigComplex]:
    if strategy == "sparse":
        return conjugate_strategy_sparse(forms, prec, report)
    if strategy == "multipoint":
        return conjugate_strategy_multipoint(forms, prec, report, chunks)
    if strategy == "agm":
        return conjugate_strategy_agm(forms, prec, report)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


# --- pipeline --------------------------------------------------------------------

def compute_class_polynomial(
    D: int,
    strategy: str = "sparse",
    enumeration: str = "factored",
    policy: PrecisionPolicy = PrecisionPolicy(),
    precision: Optional[int] = None,
    retries: int = DEFAULT_RETRIES,
    chunks: Optional[int] = None,
) -> tuple[ClassPolynomial, RunReport]:
    """H_D with exact integer coefficients, and a timing report.

    Precision defaults to the larger of the proven bound and the heuristic
    estimate under ``policy``.  A rounding failure multiplies the precision
    by 1.25 and repeats the evaluation, at most ``retries`` times.
    """
    check_discriminant(D)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    report = RunReport(D, 0, strategy)
    with _Timer(report, "class group"):
        group: ClassGroupList = class_group(D, enumeration)
    h = group.h
    report.h = h
    proven = proven_bound(D, h)
    heur = heuristic_estimate(D, group)
    report.proven_bound_nats = proven.nats
    report.heuristic_nats = heur.nats
    if precision is None:
        chosen: HeightBound = proven if proven.natural_log_height >= heur.natural_log_height else heur
        precision = working_precision(chosen, policy)
    prec = max(53, int(precision))
    forms = list(group.forms)
    for attempt in range(retries + 1):
        report.attempts = attempt + 1
        report.precision = prec
        try:
            roots = conjugates(strategy, forms, prec, report, chunks)
            with _Timer(report, "tree"):
                poly = poly_from_roots(roots).root
            with _Timer(report, "rounding"):
                rounded = round_to_integers(poly)
            break
        except RoundingError as err:
            if attempt == retries:
                raise RetriesExhaustedError(D, prec, err) from err
            log.warning("D=%d: %s; retrying at %d bits", D, err, math.ceil(prec * PRECISION_GROWTH))
            prec = math.ceil(prec * PRECISION_GROWTH)
    coeffs = rounded.coeffs
    height = measured_height(coeffs)
    if height > proven.natural_log_height:
        raise HeightBoundViolation(
            f"D={D}: measured height {float(height):.6g} nats exceeds the proven bound {proven.nats:.6g}"
        )
    report.measured_height_nats = float(height)
    report.constant_term_nats = math.log(abs(coeffs[0])) if coeffs[0] else 0.0
    result = ClassPolynomial(D, h, tuple(coeffs), prec, height, strategy)
    return result, report


def conjugate_values(D: int, prec: int, strategy: str, enumeration: str = "factored") -> dict:
    """j at every reduced form of discriminant D, keyed by form."""
    forms = list(class_group(D, enumeration).forms)
    return dict(zip(forms, conjugates(strategy, forms, prec)))
