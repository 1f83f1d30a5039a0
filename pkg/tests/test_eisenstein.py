import random
from fractions import Fraction as Fr

import pytest

from _bruteforce import brute_probability
from cmtheta.eisenstein import DensityError, EisensteinData
from cmtheta.lattices import CosetM, all_cosets_M, q_M
from cmtheta.nfield import QuadElem, is_totally_positive, primes_above
from cmtheta.qseries import LogLinear

MU0 = CosetM(0, 0, 0, 0, 5)


def F(a, b=0):
    return QuadElem(Fr(a), Fr(b), 5)


@pytest.fixture(scope="module")
def E(cm):
    return EisensteinData(cm)


def test_bad_primes(E):
    assert tuple(E.bad) == (2, 5)


@pytest.mark.parametrize("seed", range(4))
def test_recursive_density_matches_enumeration(E, seed):
    rng = random.Random(seed)
    cos = all_cosets_M(5)
    checked = 0
    while checked < 5:
        mu, ell = rng.choice(cos), rng.choice((2, 5))
        mdl = E.model(mu, ell)
        c = mdl.constant(F(Fr(rng.randint(1, 40), 8), Fr(rng.randint(-40, 40), 40)))
        if c is None:
            continue
        kmax = 3 if ell == 2 else 2
        K1, K2 = rng.randint(0, kmax), rng.randint(0, kmax)
        parity = rng.choice((None, 0, 1)) if ell == 2 else None
        assert mdl.probability(c, K1, K2, parity) == brute_probability(mdl, c, K1, K2, parity)
        checked += 1


def test_density_precision_guard(E):
    mdl = E.model(MU0, 5)
    with pytest.raises(DensityError):
        mdl.probability((0, 0), mdl.P, 0)


def test_parity_only_at_two(E):
    mdl = E.model(MU0, 5)
    with pytest.raises(ValueError):
        mdl.probability((0, 0), 1, 1, parity=0)


def test_good_primes_follow_closed_form(E):
    for m in (1, 2):
        for t in E.ts_of_trace(Fr(m), MU0):
            for ell in (3, 7, 11):
                expected = Fr(1)
                for p in primes_above(ell, 5):
                    expected *= E.whittaker_generic(t, p)[0]
                assert E.local_value(t, MU0, ell) == expected


@pytest.mark.parametrize("k, coeff, prime", [
    (-2, Fr(-64, 5), 2), (-1, Fr(-32, 5), 5), (0, Fr(-64, 5), 2), (1, Fr(-96, 5), 5), (2, Fr(-64, 5), 2),
])
def test_frozen_trace_two_coefficients(E, k, coeff, prime):
    assert E.coeff_a(F(1, Fr(k, 5)), MU0) == LogLinear.log(prime, coeff)


def test_odd_trace_coefficients_vanish_at_zero_coset(E):
    for m in (Fr(1, 2), Fr(3, 2)):
        assert all(not E.coeff_a(t, MU0) for t in E.ts_of_trace(m, MU0))


def test_two_adic_values_and_parity_split(E):
    t = F(1, Fr(-1, 5))
    assert E.local_value(t, MU0, 2) == Fr(8, 5)
    assert E.density_trace(t, MU0, 2, [6, 7, 8]) == [2, 2, 2]
    assert (E.local_value(t, MU0, 2, parity=0), E.local_value(t, MU0, 2, parity=1)) == (Fr(8, 5), 0)
    t = F(1, Fr(1, 5))
    assert E.local_value(t, MU0, 2) == Fr(24, 5)
    assert E.density_trace(t, MU0, 2, [6, 7, 8]) == [6, 6, 6]
    assert (E.local_value(t, MU0, 2, parity=0), E.local_value(t, MU0, 2, parity=1)) == (Fr(16, 5), Fr(8, 5))
    mu = CosetM(0, 0, 0, Fr(1, 20), 5)
    t = F(Fr(79, 80), Fr(-33, 80))
    assert E.local_value(t, mu, 2) == Fr(2, 5)
    assert (E.local_value(t, mu, 2, parity=0), E.local_value(t, mu, 2, parity=1)) == (Fr(1, 5), Fr(1, 5))


def test_parity_classes_sum_to_total(E):
    for t in E.ts_of_trace(Fr(2), MU0)[:4]:
        whole = E.local_value(t, MU0, 2)
        assert E.local_value(t, MU0, 2, 0) + E.local_value(t, MU0, 2, 1) == whole


def test_five_adic_density_values(E):
    mdl = E.model(MU0, 5)
    c = mdl.constant(F(1))
    got = [mdl.probability(c, k, k) for k in (1, 2, 3, 4)]
    assert got == [Fr(1, 5), Fr(2, 125), Fr(2, 3125), Fr(2, 78125)]


@pytest.mark.parametrize("mu, t", [
    (CosetM(0, 0, Fr(1, 4), Fr(1, 2), 5), F(Fr(21, 16), Fr(-39, 80))),
    (CosetM(0, 0, Fr(1, 2), Fr(1, 4), 5), F(Fr(15, 16), Fr(-21, 80))),
])
def test_three_point_diff_gives_zero(E, mu, t):
    assert len(E.diff_set(t)) == 3
    assert not E.coeff_a(t, mu)


def test_diff_sets_have_odd_size(E):
    for m in (1, 2, 3):
        for t in E.ts_of_trace(Fr(m), MU0):
            if is_totally_positive(t):
                assert len(E.diff_set(t)) % 2 == 1


def test_coefficients_invariant_under_negation(E):
    rng = random.Random(5)
    for mu in rng.sample(all_cosets_M(5), 3):
        m = Fr(2) + q_M(*mu.as_tuple(), 5) % 1
        for t in E.ts_of_trace(m, mu)[:3]:
            assert E.coeff_a(t, mu) == E.coeff_a(t, -mu)


def test_non_positive_t_rejected(E):
    with pytest.raises(ValueError):
        E.diff_set(F(-1))
    assert not E.coeff_a(F(-1), MU0)
