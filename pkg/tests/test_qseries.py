from fractions import Fraction as Fr

import pytest

from cmtheta.qseries import FourierSeries, LogLinear, build_uvw, classical_theta, theta0_series


def test_loglinear_algebra():
    a = LogLinear.log(2, 3) + LogLinear(Fr(1, 2))
    b = LogLinear.log(2, -3) + LogLinear.symbol("x")
    s = a + b
    assert s.terms == {} and s.c0 == Fr(1, 2) and s.symbols == {"x": 1}
    assert (a - a) == LogLinear()
    assert a.scale(2) == LogLinear.log(2, 6) + 1
    with pytest.raises(ValueError):
        _ = LogLinear.log(2) * LogLinear.log(3)


def test_loglinear_float_and_symbols():
    v = LogLinear.log(5, Fr(-16, 5))
    assert abs(float(v) + 16 / 5 * 1.6094379124341003) < 1e-14
    with pytest.raises(ValueError):
        LogLinear.symbol("a0").to_float()
    assert LogLinear.symbol("a0", 2).substitute({"a0": LogLinear(3)}) == LogLinear(6)


def test_series_product_and_inverse():
    th = classical_theta("theta", 4)
    inv = th.inverse()
    prod = th * inv
    assert prod[0] == 1
    assert all(c == 0 for e, c in prod.coeffs.items() if e != 0)


def test_jacobi_triple_product_square():
    # theta(q)^2 counts representations as sums of two squares: r2(1) = 4, r2(2) = 4, r2(3) = 0
    th = classical_theta("theta", 4)
    sq = th * th
    assert [sq[Fr(n, 2)] for n in range(4)] == [1, 4, 4, 0]


def test_uvw_leading_terms():
    u, v, w = build_uvw(3)
    assert u.leading() == (0, 1)
    assert v.leading() == (Fr(1, 2), -2)
    assert w.leading() == (Fr(-1, 8), 1)


def test_theta0_coset_series():
    s = theta0_series(Fr(1, 20), 5, 2)
    assert s.leading() == (Fr(1, 40), 1)
    z = theta0_series(0, 5, 11)
    assert z[0] == 1 and z[10] == 2


def test_serialize_round_trip():
    s = FourierSeries({Fr(1, 8): LogLinear.log(3, Fr(2, 5)), Fr(1): LogLinear(-1)}, 2)
    back = FourierSeries.deserialize(s.serialize(), 2)
    assert back == s
