import cmath
import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from classpoly.bigfloat import BigComplex, csqrt
from classpoly.classgroup import S, T, T_INV, QuadForm, class_group
from classpoly.modeval import (
    AGM_IM_THRESHOLD,
    DomainError,
    TauPoint,
    TermCapError,
    eta_agm,
    eta_at,
    eta_at_point,
    eta_multiplier,
    eta_product,
    eta_series_poly,
    eta_sparse,
    in_fundamental_domain,
    j_agm,
    j_coefficients,
    j_from_eta,
    j_from_lambda,
    kprime_newton,
    kprime_series,
    naive_j_series,
    pentagonal_exponents,
    reduce_argument,
    reduce_point,
    tau_from_kprime,
    tau_point,
    truncation_exponent,
)

from conftest import log2_rel_err, to_mp

ETA_I = 0.768225422326056659002594179  # Gamma(1/4) / (2 pi^(3/4))


def bc(z, prec=256):
    return BigComplex.from_value(z, prec)


def eta_double(z, factors=60):
    """Product formula in double precision: q^(1/24) prod (1 - q^n)."""
    q = cmath.exp(2j * math.pi * z)
    out = cmath.exp(2j * math.pi * z / 24)
    for n in range(1, factors + 1):
        out *= 1 - q ** n
    return out


def random_f_points(seed, count, prec=256, top=3.0):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        x = rng.uniform(-0.5, 0.5)
        y = rng.uniform(math.sqrt(1 - x * x), top)
        out.append(bc(complex(x, y), prec))
    return out


# --- argument reduction ----------------------------------------------------------

def test_reduce_argument_examples():
    z, word = reduce_argument(tau_point(QuadForm(1, 0, 1), 128))
    assert complex(z) == 1j and word == ()
    z, word = reduce_argument(tau_point(QuadForm(1, -2, 2), 128))  # tau = 1 + i
    assert complex(z) == 1j and word == (T_INV,)
    z, word = reduce_argument(tau_point(QuadForm(2, 3, 4), 128))
    assert z == tau_point(QuadForm(2, -1, 3), 128).tau
    assert in_fundamental_domain(z)


def test_tau_point_and_domain_checks():
    tp = tau_point(QuadForm(2, 1, 3), 128)
    assert abs(complex(tp.tau) - complex(-0.25, math.sqrt(23) / 4)) < 1e-15
    assert tp.D == -23 and tp.prec == 128
    with pytest.raises(DomainError):
        tau_point(QuadForm(1, 3, 1), 128)
    assert in_fundamental_domain(bc(complex(-0.5, math.sqrt(3) / 2)))
    assert not in_fundamental_domain(bc(complex(0.5, 2)))
    assert not in_fundamental_domain(bc(0.3j))


@settings(max_examples=60, deadline=None)
@given(st.floats(-20, 20), st.floats(0.05, 5))
def test_numeric_reduction_lands_in_domain(x, y):
    z, word = reduce_point(bc(complex(x, y), 128))
    assert in_fundamental_domain(z, slack=1e-30)
    w = bc(complex(x, y), 128)
    for letter in word:
        w = w + 1 if letter == T else (w - 1 if letter == T_INV else -BigComplex.one(128) / w)
    assert abs(complex(w - z)) < 1e-25


# --- sparse eta ------------------------------------------------------------------

def test_pentagonal_exponent_schedule():
    assert [pentagonal_exponents(n) for n in range(1, 5)] == [(1, 2), (5, 7), (12, 15), (22, 26)]


def test_eta_at_i_and_2i_against_product_formula():
    assert abs(eta_double(1j) - ETA_I) < 1e-15
    v = eta_sparse(bc(1j))
    assert abs(complex(v) - eta_double(1j)) < 1e-15
    assert abs(complex(v) - 0.76822542232605665) < 1e-15
    v2 = eta_sparse(bc(2j))
    assert abs(complex(v2) - ETA_I / 2 ** 0.375) < 1e-15
    assert str(complex(v2).real).startswith("0.592382781")


def test_eta_at_i_high_precision():
    mpmath.mp.prec = 1100
    ref = mpmath.gamma(mpmath.mpf(1) / 4) / (2 * mpmath.pi ** (mpmath.mpf(3) / 4))
    assert log2_rel_err(eta_sparse(bc(1j, 1024)), ref) < -1010


def test_eta_sparse_rejects_points_outside_domain():
    with pytest.raises(DomainError):
        eta_sparse(bc(0.5j))
    with pytest.raises(DomainError):
        eta_sparse(bc(complex(0.7, 1)))


def test_eta_product_matches_pentagonal_series_on_random_points():
    for z in random_f_points(1, 50):
        a = eta_sparse(z)
        b = eta_product(z, 80)
        assert float(abs(a - b)) < 2.0 ** -240


def test_truncation_is_already_sufficient():
    for prec in (256, 1024):
        for z in random_f_points(2, 10, prec, top=1.2):
            limit = truncation_exponent(prec + 24, float(z.im))
            nu = 1
            while pentagonal_exponents(nu + 1)[0] <= limit:
                nu += 1
            a = eta_sparse(z)
            b = eta_sparse(z, terms=2 * nu)
            assert float(abs(a - b)) < 2.0 ** (-prec + 4) * float(abs(b))


def test_truncation_exponent_bound():
    # the worst case Im z = sqrt(3)/2 needs at most this exponent
    assert truncation_exponent(256) == math.ceil(264 * math.log(2) / (math.pi * math.sqrt(3))) + 1


# --- multiplier ------------------------------------------------------------------

def test_eta_multiplier_generator_laws():
    m = eta_multiplier((T,), bc(1j))
    assert m.root24 == 1 and complex(m.halfpower) == 1
    assert abs(complex(m.value()) - cmath.exp(1j * math.pi / 12)) < 1e-15
    m = eta_multiplier((S,), bc(1j))
    assert m.root24 == 0 and abs(complex(m.halfpower) - 1) < 1e-30
    m = eta_multiplier((S,), bc(2j))
    assert abs(complex(m.halfpower) - math.sqrt(2)) < 1e-15
    # eta(i/2) = sqrt 2 * eta(2i)
    lhs = eta_at_point(bc(0.5j))
    assert abs(complex(lhs) - math.sqrt(2) * complex(eta_sparse(bc(2j)))) < 1e-15
    m = eta_multiplier((T_INV, T_INV), bc(1j))
    assert m.root24 == 22
    with pytest.raises(ValueError):
        eta_multiplier(("U",), bc(1j))


def test_eta_at_translation_example():
    v = eta_at(tau_point(QuadForm(1, -2, 2), 256))  # tau = 1 + i
    ref = cmath.exp(1j * math.pi / 12) * ETA_I
    assert abs(complex(v) - ref) < 1e-15


@pytest.mark.parametrize("form", [QuadForm(2, 1, 3), QuadForm(6, 1, 1), QuadForm(3, 2, 5), QuadForm(7, -13, 11), QuadForm(1, 0, 9)])
def test_eta_at_matches_mpmath(form):
    mpmath.mp.prec = 700
    tp = tau_point(form, 640)
    assert log2_rel_err(eta_at(tp), mpmath.eta(to_mp(tp.tau))) < -620


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.9, 4))
def test_translation_law_both_strategies(x, y):
    if x * x + y * y < 1:
        return
    z = bc(complex(x, y))
    shift = cmath.exp(1j * math.pi / 12)
    base = complex(eta_sparse(z))
    assert abs(complex(eta_at_point(z + 1)) - shift * base) < 1e-14
    tp = TauPoint(QuadForm(1, 0, 1), z + 1)
    assert abs(complex(eta_agm(tp)) - shift * base) < 1e-14


# --- j ---------------------------------------------------------------------------

def test_j_classical_values():
    assert abs(complex(j_from_eta(tau_point(QuadForm(1, 0, 1), 256))) - 1728) < 1e-60
    zero = j_from_eta(tau_point(QuadForm(1, 1, 1), 256))
    assert float(abs(zero)) < 2.0 ** (-256 + 20)
    j163 = j_from_eta(tau_point(QuadForm(1, 1, 41), 256))
    assert round(complex(j163).real) == -262537412640768000
    assert abs(complex(j163).imag) < 1e-40
    j16 = j_from_eta(tau_point(QuadForm(1, 0, 4), 256))
    assert abs(complex(j16) - 66 ** 3) < 1e-50


def test_j_coefficients():
    c = j_coefficients(8)
    assert c[:6] == (1, 744, 196884, 21493760, 864299970, 20245856256)
    big = j_coefficients()
    assert len(big) == 514 and big[:8] == j_coefficients(8)


def test_j_coefficients_respect_growth_bound():
    c = j_coefficients()
    for nu in (1, 10, 100, 500):
        bound = math.exp(4 * math.pi * math.sqrt(nu)) / (math.sqrt(2) * nu ** 0.75)
        assert c[nu + 1] <= bound
        assert c[nu + 1] > bound / 2


def test_naive_series():
    z = bc(2j)
    assert abs(complex(naive_j_series(z)) - 287496) < 1e-60
    assert abs(complex(naive_j_series(bc(1j))) - 1728) < 1e-60
    with pytest.raises(TermCapError):
        naive_j_series(bc(complex(-0.5, math.sqrt(3) / 2), 8192))
    with pytest.raises(TermCapError):
        naive_j_series(z, terms=600)
    with pytest.raises(DomainError):
        naive_j_series(bc(0.5j))


def test_strategies_agree_at_random_cm_points():
    rng = random.Random(8)
    for _ in range(20):
        D = -rng.randrange(3, 20000)
        if D % 4 not in (0, 1):
            continue
        form = rng.choice(class_group(D).forms)
        tp = tau_point(form, 256)
        js = j_from_eta(tp)
        # 1 - lambda cancels about pi Im(tau) / ln 2 bits, so plug in with guard bits
        wide = TauPoint(form, tp.tau.with_prec(256 + 64))
        lam_j = j_from_lambda(kprime_newton(wide) ** 2).with_prec(256)
        assert float(abs(lam_j - js)) <= 2.0 ** (-256 + 24) * max(1.0, float(abs(js)))
        assert float(abs(j_agm(tp) - js)) <= 2.0 ** (-256 + 24) * max(1.0, float(abs(js)))
        z, _ = reduce_argument(tp)
        assert float(abs(naive_j_series(z) - js)) <= 2.0 ** (-256 + 32) * max(1.0, float(abs(js)))


# --- AGM -------------------------------------------------------------------------

def test_kprime_at_i():
    v = kprime_newton(tau_point(QuadForm(1, 0, 1), 512))
    assert float(abs(v - csqrt(bc(0.5, 512)))) < 2.0 ** -500


def test_kprime_inverts_the_agm_quotient():
    for z in random_f_points(3, 10, 384):
        kp = kprime_newton(TauPoint(QuadForm(1, 0, 1), z))
        assert float(abs(tau_from_kprime(kp) - z)) < 2.0 ** -360


def test_kprime_matches_theta_oracle():
    mpmath.mp.prec = 300
    for z in random_f_points(4, 8, 256):
        q = mpmath.exp(1j * mpmath.pi * to_mp(z))
        ref = (mpmath.jtheta(4, 0, q) / mpmath.jtheta(3, 0, q)) ** 2
        assert log2_rel_err(kprime_newton(TauPoint(QuadForm(1, 0, 1), z)), ref) < -245


def test_lambda_translation_laws():
    # with lambda = k'^2: lambda(tau + 1) = 1 / lambda(tau); for k^2 = 1 - lambda the
    # familiar law k^2 -> k^2 / (k^2 - 1) holds
    for z in random_f_points(5, 6, 128):
        lam = complex(kprime_newton(TauPoint(QuadForm(1, 0, 1), z))) ** 2
        lam1 = complex(kprime_newton(TauPoint(QuadForm(1, 0, 1), z + 1))) ** 2
        assert abs(lam1 - 1 / lam) < 1e-12 * abs(lam1)
        q1 = cmath.exp(1j * math.pi * (complex(z) + 1))
        k2 = complex(mpmath.jtheta(2, 0, q1) ** 2 / mpmath.jtheta(3, 0, q1) ** 2) ** 2
        k2_0 = 1 - lam
        assert abs(k2 - k2_0 / (k2_0 - 1)) < 1e-10 * abs(k2)


def test_lambda_under_inversion():
    for z in random_f_points(6, 8, 192, top=2.0):
        lam = kprime_newton(TauPoint(QuadForm(1, 0, 1), z)) ** 2
        w = -BigComplex.one(192) / z
        lam_inv = kprime_series(w) ** 2
        assert float(abs(lam_inv - (1 - lam))) < 2.0 ** -170


def test_kprime_rejects_inside_unit_disc():
    with pytest.raises(DomainError):
        kprime_newton(TauPoint(QuadForm(1, 0, 1), bc(0.5j)))


def test_eta_agm_matches_sparse():
    for prec in (256, 1024):
        tp = tau_point(QuadForm(1, 0, 1), prec)
        assert float(abs(eta_agm(tp) - eta_at(tp))) <= 2.0 ** (-prec + 24)
        for form in class_group(-23).forms:
            tp = tau_point(form, prec)
            a, b = eta_agm(tp), eta_at(tp)
            assert float(abs(a - b)) <= 2.0 ** (-prec + 24) * float(abs(b))


def test_eta_agm_high_point_routes_to_series():
    tp = tau_point(QuadForm(1, 0, 6400), 256)  # tau = 40 i
    assert float(tp.tau.im) > AGM_IM_THRESHOLD
    assert eta_agm(tp) == eta_at(tp)
    assert float(abs(j_agm(tp) - j_from_eta(tp))) == 0.0


def test_eta_series_poly():
    p = eta_series_poly(15, 64)
    assert [round(complex(c).real) for c in p.coeffs] == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0, -1]
