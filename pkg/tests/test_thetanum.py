import random

import mpmath
import pytest

from cmtheta.checks import random_h2, random_siegel
from cmtheta.geometry import EVEN_QUADRUPLES, SiegelPoint, cm_point, phi_char_inverse, phi_point
from cmtheta.thetanum import (PrecisionError, SingularPointError, hilbert_theta, pet_norm,
                              rosenhain_from_thetas, rosenhain_numeric, siegel_theta)



@pytest.fixture(autouse=True)
def high_precision():
    with mpmath.workprec(200):
        yield


ODD = [(1, 0, 1, 0), (0, 1, 0, 1), (1, 1, 1, 0), (1, 1, 0, 1), (1, 0, 1, 1), (0, 1, 1, 1)]


def test_odd_characteristics_vanish():
    tau = random_siegel(random.Random(3))
    for q in ODD:
        assert abs(siegel_theta(q, tau).value) < 1e-25


def test_diagonal_factorization():
    t1, t2 = mpmath.mpc(0.2, 0.9), mpmath.mpc(-0.1, 1.3)
    s = siegel_theta((0, 0, 0, 0), SiegelPoint(t1, t2, mpmath.mpc(0))).value
    j = mpmath.jtheta(3, 0, mpmath.exp(1j * mpmath.pi * t1)) * mpmath.jtheta(3, 0, mpmath.exp(1j * mpmath.pi * t2))
    assert abs(s - j) < 1e-25


def test_pullback_matches_hilbert_theta_up_to_sign():
    z = random_h2(random.Random(4))
    tau = phi_point(z, 5)
    for q in EVEN_QUADRUPLES:
        s = siegel_theta(q, tau).value
        h = hilbert_theta(*phi_char_inverse(q, 5), z).value
        assert min(abs(s - h), abs(s + h)) < 1e-25


def test_tail_bound_is_reported():
    tau = random_siegel(random.Random(5))
    v = siegel_theta((0, 0, 0, 0), tau, eps=mpmath.mpf("1e-40"))
    assert v.tail_bound < 1e-40 and v.radius >= 1


def test_radius_cap_raises():
    tau = SiegelPoint(mpmath.mpc(0, 1e-4), mpmath.mpc(0, 1e-4), mpmath.mpc(0))
    with pytest.raises(PrecisionError):
        siegel_theta((0, 0, 0, 0), tau)


def test_rosenhain_at_the_cm_point_are_units(cm):
    # frozen oracle: for the fifth-cyclotomic point the invariants have absolute values 1, 1/phi, phi
    _, tau, _, _ = cm_point(cm)
    lam = rosenhain_numeric(tau)
    phi = (1 + mpmath.sqrt(5)) / 2
    assert abs(abs(lam[0]) - 1) < 1e-30
    assert abs(abs(lam[1]) - 1 / phi) < 1e-30
    assert abs(abs(lam[2]) - phi) < 1e-30


def test_singular_denominator():
    with pytest.raises(SingularPointError):
        rosenhain_from_thetas([1, 1, 1, 0, 1, 1])


def test_petersson_norm_scaling():
    tau = SiegelPoint(mpmath.mpc(0, 1), mpmath.mpc(0, 2), mpmath.mpc(0))
    n = pet_norm(mpmath.mpf(1), tau)
    assert abs(n - 4 * mpmath.pi * mpmath.exp(-mpmath.euler) * 2) < 1e-30
