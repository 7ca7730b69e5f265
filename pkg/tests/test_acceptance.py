"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import random
import time

import pytest

from classpoly.bigfloat import BigComplex
from classpoly.classgroup import (
    class_group,
    crt_tree,
    enumerate_factored,
    enumerate_naive,
    enumerate_prime_generated,
    sieve_primes,
    sqrt_mod_p,
)
from classpoly.engine.pipeline import STRATEGIES, compute_class_polynomial, conjugates
from classpoly.engine.verify import Verdict, find_cm_primes, verify_mod_p
from classpoly.heightbound import default_precision, proven_bound
from classpoly.modeval import naive_j_series, reduce_argument, tau_point
from classpoly.polyops import (
    FloatPoly,
    fft_mul,
    horner,
    multi_eval,
    poly_divrem,
    poly_from_roots,
    schoolbook_divrem,
    schoolbook_mul,
)

from conftest import KNOWN

REGRESSION = sorted(KNOWN) + [-71, -455, -1999]
PRIME_BITS = 32


@pytest.fixture
def report(capsys):
    """Print one verdict line per criterion, outside pytest's capture."""

    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return emit


def _regression_polys():
    return {D: compute_class_polynomial(D)[0].coeffs for D in REGRESSION}


def test_known_class_polynomials(report):
    failures = []
    runs = 0
    t0 = time.perf_counter()
    for D, expected in KNOWN.items():
        base = default_precision(D, class_group(D))
        seen = set()
        for prec in (base, base + 64, 2 * base):
            for strategy in STRATEGIES:
                H, _ = compute_class_polynomial(D, strategy, precision=prec)
                seen.add(H.coeffs)
                runs += 1
        if seen != {tuple(expected)}:
            failures.append(f"D={D}: {len(seen)} distinct results")
            continue
        primes = find_cm_primes(D, 3, PRIME_BITS)
        rng = random.Random(D)
        verdicts = [verify_mod_p(expected, cp, 8, rng) for cp in primes]
        if any(v is not Verdict.CONSISTENT for v in verdicts):
            failures.append(f"D={D}: verification {[v.value for v in verdicts]}")
    elapsed = time.perf_counter() - t0
    report("known class polynomials", not failures,
           f"{len(KNOWN)} discriminants, {runs} runs (3 precisions x 3 strategies), "
           f"each verified mod 3 CM primes; {elapsed:.1f}s" + (f"; {failures}" if failures else ""))


def test_enumerator_equivalence(report):
    rng = random.Random(2024)
    Ds = []
    while len(Ds) < 200:
        D = -rng.randrange(3, 10**6 + 1)
        if D % 4 in (0, 1):
            Ds.append(D)
    t0 = time.perf_counter()
    bad = []
    for D in Ds:
        a = enumerate_naive(D)
        if not (a == enumerate_factored(D) == enumerate_prime_generated(D, expected_h=a.h)):
            bad.append(D)
    elapsed = time.perf_counter() - t0
    report("enumerator equivalence", not bad and elapsed < 120,
           f"200 random D in [-10^6, -3], {len(bad)} mismatches, {elapsed:.1f}s (limit 120s)")


def _conformance_set():
    rng = random.Random(7)
    chosen = {}
    # a seeded spread of discriminants, plus a scan for class numbers near 100
    while len(chosen) < 50:
        D = -rng.randrange(3, 12000)
        if D % 4 in (0, 1) and D not in chosen:
            h = class_group(D).h
            if h <= 110:
                chosen[D] = h
    D = -20000
    while sum(1 for h in chosen.values() if h >= 90) < 5:
        D -= 1
        if D % 4 in (0, 1):
            h = class_group(D).h
            if 90 <= h <= 110:
                chosen[D] = h
    return chosen


def test_height_bound_conformance(report):
    chosen = _conformance_set()
    violations = []
    worst = 0.0
    t0 = time.perf_counter()
    for i, (D, h) in enumerate(sorted(chosen.items())):
        strategy = ("sparse", "agm")[i % 2]
        H, rep = compute_class_polynomial(D, strategy)
        bound = proven_bound(D, H.h).nats
        measured = float(H.measured_height_nats)
        worst = max(worst, measured / bound)
        if measured > bound:
            violations.append(D)
    elapsed = time.perf_counter() - t0
    report("height bound conformance", len(chosen) >= 50 and not violations,
           f"{len(chosen)} discriminants, h up to {max(chosen.values())}, {len(violations)} violations, "
           f"max measured/bound {worst:.3f}, {elapsed:.1f}s")


def test_cross_strategy_agreement(report):
    worst = {}
    bad = []
    for prec in (256, 1024):
        tol = 2.0 ** (-prec + 32)
        worst_prec = -math.inf
        for D in REGRESSION:
            forms = list(class_group(D).forms)
            sparse = conjugates("sparse", forms, prec)
            agm = conjugates("agm", forms, prec)
            for f, s, a in zip(forms, sparse, agm):
                z, _ = reduce_argument(tau_point(f, prec))
                n = naive_j_series(z)
                scale = max(1.0, float(abs(s)))
                for other in (a, n):
                    err = float(abs(other - s)) / scale
                    if err > tol:
                        bad.append((prec, D, str(f)))
                    if err:
                        worst_prec = max(worst_prec, math.log2(err) + prec)
        worst[prec] = worst_prec
    report("cross-strategy agreement", not bad,
           f"sparse vs naive series vs AGM over {len(REGRESSION)} discriminants; worst error "
           + ", ".join(f"2^({w:.1f}-{p})" for p, w in worst.items()) + " against 2^(32-prec)"
           + (f"; failures {bad[:5]}" if bad else ""))


def _rand_poly(rng, n, prec):
    return FloatPoly.from_values([complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)], prec)


def _max_rel(f, g):
    zero = BigComplex.zero(f.prec)
    n = max(len(f), len(g))
    get = lambda p, k: p.coeffs[k] if k < len(p) else zero
    return max(abs(complex(get(f, k) - get(g, k))) for k in range(n)) / max(abs(complex(c)) for c in g.coeffs)


def test_oracle_equivalences(report):
    rng = random.Random(99)
    failures = {}

    def fail(name):
        failures[name] = failures.get(name, 0) + 1

    for _ in range(40):  # fft_mul vs schoolbook, 256 bits, relative 2^-240
        f, g = _rand_poly(rng, rng.randrange(1, 150), 256), _rand_poly(rng, rng.randrange(1, 150), 256)
        if _max_rel(fft_mul(f, g, cutoff=1), schoolbook_mul(f, g)) > 2.0 ** -240:
            fail("fft_mul")
    for _ in range(10):  # multi_eval vs Horner, unit-disc points, 2^-200
        f = _rand_poly(rng, rng.randrange(2, 200), 256)
        pts = [BigComplex.from_value(complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)), 256)
               for _ in range(rng.randrange(1, 40))]
        for x, v in zip(pts, multi_eval(f, pts)):
            ref = horner(f, x)
            if abs(complex(v - ref)) > 2.0 ** -200 * max(1.0, abs(complex(ref))):
                fail("multi_eval")
    for _ in range(20):  # poly_divrem vs long division, 2^-200
        m, n = rng.randrange(1, 120), rng.randrange(1, 60)
        f = _rand_poly(rng, m + 1, 256)
        g = FloatPoly(list(_rand_poly(rng, n, 256).coeffs) + [BigComplex.one(256)], 256)
        q1, r1 = poly_divrem(f, g)
        q2, r2 = schoolbook_divrem(f, g)
        if m >= n and _max_rel(q1, q2) > 2.0 ** -200 * max(1.0, f.max_abs()):
            fail("poly_divrem")
    for _ in range(300):  # crt_tree vs exhaustive scan, exact
        moduli = []
        while len(moduli) < rng.randrange(1, 5):
            m = rng.randrange(2, 50)
            if all(math.gcd(m, k) == 1 for k in moduli):
                moduli.append(m)
        residues = [(rng.randrange(m), m) for m in moduli]
        M = math.prod(moduli)
        exp = next(x for x in range(M) if all(x % m == r for r, m in residues))
        if crt_tree(residues) != (exp, M):
            fail("crt_tree")
    checked = 0
    for p in rng.sample([p for p in sieve_primes(10**4) if p > 2], 40) + [3, 9973]:
        roots = {}
        for x in range(p):
            roots.setdefault(x * x % p, min(x, p - x))
        for d in range(p):
            checked += 1
            if sqrt_mod_p(d, p, rng) != roots.get(d):
                fail("sqrt_mod_p")
    report("oracle equivalences", not failures,
           f"fft_mul 40, multi_eval 10, poly_divrem 20, crt_tree 300, sqrt_mod_p {checked} cases; "
           f"failures {failures or 0}")


def test_negative_control(report):
    polys = _regression_polys()
    rng = random.Random(31337)
    worst = 1.0
    summary = []
    for D, coeffs in polys.items():
        primes = find_cm_primes(D, 3, PRIME_BITS)
        rejected = 0
        for _ in range(100):
            c = list(coeffs)
            k = rng.randrange(len(c) - 1)
            c[k] += rng.choice([-1, 1]) * rng.randrange(1, 101)
            verdicts = [verify_mod_p(c, cp, 8, rng) for cp in primes]
            if all(v is Verdict.INCONSISTENT for v in verdicts):
                rejected += 1
        worst = min(worst, rejected / 100)
        summary.append(rejected)
    report("negative control", worst >= 0.99,
           f"{len(polys)} polynomials x 100 single-coefficient mutations, rejected on all 3 primes: "
           f"min {worst:.0%} (per polynomial {summary})")


def test_product_tree_scaling(report):
    rng = random.Random(0)
    sizes = (64, 128, 256, 512)
    times = []
    for h in sizes:
        roots = [BigComplex.from_value(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), 128) for _ in range(h)]
        best = math.inf
        for _ in range(3):
            t = time.perf_counter()
            poly_from_roots(roots)
            best = min(best, time.perf_counter() - t)
        times.append(best)
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(1 < r < 4 for r in ratios)
    report("product tree scaling", ok,
           "h " + "/".join(map(str, sizes)) + " at 128 bits: "
           + ", ".join(f"{t * 1000:.1f}ms" for t in times)
           + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios) + " (each must be < 4)")
