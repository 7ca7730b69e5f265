import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from classpoly.classgroup import (
    S,
    T,
    T_INV,
    ClassGroupList,
    DiscriminantError,
    FormError,
    GeneratorBoundError,
    QuadForm,
    check_discriminant,
    class_group,
    class_number_bound,
    compose,
    crt_tree,
    enumerate_factored,
    enumerate_naive,
    enumerate_prime_generated,
    generator_bound,
    inverse,
    is_prime,
    lift_root,
    power,
    principal_form,
    prime_forms,
    reduce_form,
    reduce_with_word,
    sieve_primes,
    sqrt_mod_p,
    sqrt_mod_prime_power,
)

# class numbers of small discriminants, from the reduced-form count by hand
SMALL_H = {-3: 1, -4: 1, -7: 1, -8: 1, -11: 1, -12: 1, -15: 2, -16: 1, -19: 1, -20: 2,
           -23: 3, -24: 2, -27: 1, -28: 1, -31: 3, -35: 2, -39: 4, -47: 5, -56: 4,
           -71: 7, -163: 1, -455: 20}


def discriminants(lo=-10**6):
    return st.integers(min_value=lo, max_value=-3).filter(lambda d: d % 4 in (0, 1))


def test_check_discriminant():
    assert check_discriminant(-23) == -23
    for bad in (-10, -2, 0, 5, 1):
        with pytest.raises(DiscriminantError):
            check_discriminant(bad)


def test_principal_form():
    assert principal_form(-4) == QuadForm(1, 0, 1)
    assert principal_form(-23) == QuadForm(1, 1, 6)


def test_reduce_examples():
    assert reduce_form(QuadForm(2, 3, 4)) == (QuadForm(2, -1, 3), (T,))
    red, word = reduce_form(QuadForm(6, 1, 1))
    assert red == QuadForm(1, 1, 6)
    assert word[0] == S
    assert reduce_form(QuadForm(1, 1, 6)) == (QuadForm(1, 1, 6), ())


def test_reduce_rejects_bad_forms():
    with pytest.raises(FormError):
        reduce_form(QuadForm(2, 2, 2))  # not primitive
    with pytest.raises(FormError):
        reduce_form(QuadForm(1, 3, 1))  # indefinite
    with pytest.raises(FormError):
        reduce_form(QuadForm(-1, 0, -1))
    # non-primitive forms are fine for the word version
    assert reduce_with_word(QuadForm(4, 2, 6))[0].is_reduced()


def _apply(word, A, B, C):
    for letter in word:
        if letter == T:
            B, C = B - 2 * A, A - B + C
        elif letter == T_INV:
            B, C = B + 2 * A, A + B + C
        else:
            A, B, C = C, -B, A
    return A, B, C


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 500), st.integers(-2000, 2000), st.integers(1, 500))
def test_reduction_word_reproduces_form(A, B, C):
    if B * B - 4 * A * C >= 0:
        return
    red, word = reduce_with_word(QuadForm(A, B, C))
    assert red.is_reduced()
    assert red.discriminant == B * B - 4 * A * C
    assert QuadForm(*_apply(word, A, B, C)) == red


def test_compose_identity_and_inverse():
    D = -455
    e = principal_form(D)
    for f in enumerate_naive(D):
        assert compose(f, e) == f
        assert compose(f, inverse(f)) == e


@settings(max_examples=40, deadline=None)
@given(discriminants(-20000), st.data())
def test_composition_is_a_group_law(D, data):
    forms = enumerate_naive(D).forms
    f, g, k = (data.draw(st.sampled_from(forms)) for _ in range(3))
    assert compose(f, g) == compose(g, f)
    assert compose(compose(f, g), k) == compose(f, compose(g, k))
    assert power(f, len(forms)) == principal_form(D)


def test_compose_example():
    assert compose(QuadForm(2, 1, 3), QuadForm(2, 1, 3)) == QuadForm(2, -1, 3)


def test_known_class_numbers():
    for D, h in SMALL_H.items():
        assert enumerate_naive(D).h == h, D
        assert enumerate_factored(D).h == h, D
        assert enumerate_prime_generated(D).h == h, D


def test_class_number_bound_holds():
    for D in (-3, -4, -455, -1999, -10007, -99999):
        assert enumerate_factored(D).h <= class_number_bound(D)


def test_enumerators_agree_on_seeded_sample():
    rng = random.Random(11)
    for _ in range(25):
        D = -rng.randrange(3, 10**5)
        if D % 4 not in (0, 1):
            continue
        a = enumerate_naive(D)
        assert a == enumerate_factored(D) == enumerate_prime_generated(D, expected_h=a.h)


def test_all_forms_reduced_primitive_and_distinct():
    g = enumerate_factored(-3 * 5 * 7 * 11 * 4)
    assert len(set(g.forms)) == g.h
    for f in g:
        assert f.is_reduced() and f.is_primitive() and f.discriminant == g.D


def test_prime_generated_detects_incomplete_closure():
    with pytest.raises(GeneratorBoundError):
        enumerate_prime_generated(-455, expected_h=21)


def test_generator_bound_and_prime_forms():
    assert generator_bound(-23) == math.floor(6 * math.log(23) ** 2)
    for f in prime_forms(-455):
        assert is_prime(f.A) or f.is_reduced()
        assert f.discriminant == -455


def test_dump_load_round_trip():
    g = class_group(-71)
    text = g.dump()
    assert text.splitlines()[0] == "-71 7"
    assert ClassGroupList.load(text) == g
    with pytest.raises(ValueError):
        ClassGroupList.load("-71 8\n1 1 18\n")
    with pytest.raises(ValueError):
        class_group(-71, "bogus")


def test_sieve_and_primality():
    primes = sieve_primes(1000)
    assert primes[:5] == [2, 3, 5, 7, 11]
    assert primes == [n for n in range(1000) if is_prime(n)]


def test_sqrt_mod_p_against_exhaustive_search():
    rng = random.Random(5)
    primes = [p for p in sieve_primes(10**4) if p > 2]
    for p in rng.sample(primes, 60) + [3, 5, 7, 9973]:
        squares = {}
        for x in range(p):
            squares.setdefault(x * x % p, x)
        for d in range(p) if p < 200 else rng.sample(range(p), 200):
            r = sqrt_mod_p(d, p, rng)
            if d in squares:
                assert r == min(squares[d], (p - squares[d]) % p), (d, p)
            else:
                assert r is None


def test_sqrt_mod_p_rejects_non_primes():
    for n in (2, 9, 15, 1):
        with pytest.raises(ValueError):
            sqrt_mod_p(1, n)


@pytest.mark.parametrize("p,e", [(2, 1), (2, 2), (2, 3), (2, 6), (3, 4), (5, 3), (7, 2), (13, 2)])
def test_sqrt_mod_prime_power_against_exhaustive_search(p, e):
    q = p ** e
    for d in range(q):
        expected = sorted(x for x in range(q) if (x * x - d) % q == 0)
        assert sqrt_mod_prime_power(d, p, e, random.Random(0)) == expected, (d, p, e)


def test_lift_root():
    x = lift_root(3, 2, 7, 5)
    assert (x * x - 2) % 7 ** 5 == 0


def test_crt_tree_against_exhaustive_scan():
    rng = random.Random(3)
    for _ in range(200):
        k = rng.randrange(1, 5)
        moduli = []
        while len(moduli) < k:
            m = rng.randrange(2, 40)
            if all(math.gcd(m, n) == 1 for n in moduli):
                moduli.append(m)
        residues = [(rng.randrange(m), m) for m in moduli]
        M = math.prod(moduli)
        expected = next(x for x in range(M) if all(x % m == r for r, m in residues))
        assert crt_tree(residues) == (expected, M)
    assert crt_tree([]) == (0, 1)
    with pytest.raises(ValueError):
        crt_tree([(1, 4), (1, 6)])
