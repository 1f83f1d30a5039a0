"""Randomized invariants over the exact arithmetic layers."""

from fractions import Fraction as Fr

from hypothesis import given, settings
from hypothesis import strategies as st

from _bruteforce import brute_probability
from cmtheta.eisenstein import EisensteinData
from cmtheta.engine import default_config
from cmtheta.lattices import CosetM, all_cosets_M, combine, fiber_decompose, q_M
from cmtheta.nfield import CMField, QuadElem, is_totally_positive
from cmtheta.qseries import FourierSeries, LogLinear

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
quad = st.builds(lambda a, b: QuadElem(a, b, 5), small, small)
nonzero_quad = quad.filter(bool)
primes = st.sampled_from([2, 3, 5, 7, 11])


@given(quad, quad, quad)
def test_field_ring_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x


@given(quad, nonzero_quad)
def test_field_division(x, y):
    assert (x / y) * y == x
    assert (y * y.conj()).b == 0 and y.norm() == (y * y.conj()).a


@given(nonzero_quad, nonzero_quad)
def test_norm_is_multiplicative(x, y):
    assert (x * y).norm() == x.norm() * y.norm()


@given(nonzero_quad)
def test_total_positivity_matches_embeddings(x):
    a, b = float(x.a), float(x.b) * 5 ** 0.5
    if abs(abs(a) - abs(b)) > 1e-9:
        assert is_totally_positive(x) == (a + b > 0 and a - b > 0)


@given(st.lists(st.tuples(primes, small), max_size=4), st.lists(st.tuples(primes, small), max_size=4), small)
def test_loglinear_is_a_vector_space(u, v, k):
    a = sum((LogLinear.log(p, c) for p, c in u), LogLinear())
    b = sum((LogLinear.log(p, c) for p, c in v), LogLinear())
    assert (a + b).scale(k) == a.scale(k) + b.scale(k)
    assert a - a == LogLinear()
    assert abs(float(a + b) - float(a) - float(b)) < 1e-9


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), min_size=1, max_size=6),
       st.integers(-3, 3))
def test_series_inverse(tail, lead_exp):
    coeffs = {Fr(lead_exp, 8): Fr(1)}
    coeffs.update({Fr(lead_exp, 8) + Fr(n + 1, 8): c for n, c in enumerate(tail)})
    f = FourierSeries(coeffs, Fr(lead_exp, 8) + 2)
    assert (f * f.inverse()).coeffs == {Fr(0): 1}


cosets = st.sampled_from(all_cosets_M(5))


@given(cosets)
def test_coset_negation(mu):
    assert -(-mu) == mu
    assert (q_M(*mu.as_tuple(), 5) - q_M(*(-mu).as_tuple(), 5)).denominator == 1


@given(st.sampled_from(range(64)))
def test_fibers_recombine(i):
    from cmtheta.lattices import MU_TABLE
    mu = MU_TABLE[i]
    fib = fiber_decompose(mu, 5)
    assert len(fib) == 10
    assert all(combine(mu0, mu1) == mu for mu0, mu1 in fib)


_E = EisensteinData(default_config().cm)


@settings(max_examples=25, deadline=None)
@given(cosets, st.sampled_from([2, 5]), st.integers(1, 40), st.integers(-40, 40),
       st.integers(0, 2), st.integers(0, 2), st.sampled_from([None, 0, 1]))
def test_density_matches_enumeration(mu, ell, a, b, K1, K2, parity):
    mdl = _E.model(mu, ell)
    c = mdl.constant(QuadElem(Fr(a, 8), Fr(b, 40), 5))
    if c is None:
        return
    if ell != 2:
        parity = None
    assert mdl.probability(c, K1, K2, parity) == brute_probability(mdl, c, K1, K2, parity)


@given(st.builds(lambda a, b: (a, b), small, small))
def test_cm_field_inverse(uv):
    fld = CMField(5, QuadElem(Fr(-5, 2), Fr(-1, 2), 5))
    x = fld.elem(QuadElem(uv[0], 1, 5), QuadElem(uv[1], 0, 5))
    assert x * x.inverse() == fld.elem(QuadElem(1, 0, 5))
    assert x.conj().conj() == x
