import random
from fractions import Fraction as Fr

import mpmath
import pytest

from cmtheta.checks import random_h2, random_siegel, random_sl2
from cmtheta.geometry import (EVEN_QUADRUPLES, DomainError, SiegelPoint, bilinear_V, char_reps, cm_point,
                              is_even_hilbert, is_even_quadruple, is_symplectic, norm_identity, phi_char,
                              phi_char_inverse, phi_matrix, phi_point, quad_V, sl2_act, sp4_act, xi_inv,
                              xi_map)
from cmtheta.nfield import QuadElem


def test_xi_is_isotropic_and_inverts():
    rng = random.Random(0)
    with mpmath.workprec(100):
        for _ in range(50):
            tau = random_siegel(rng)
            z = xi_map(tau)
            assert abs(quad_V(z)) < 1e-25
            assert abs(bilinear_V(z, z.conj()) + 4 * tau.det_imag()) < 1e-25
            back = xi_inv(z)
            assert abs(back.t12 - tau.t12) < 1e-25


def test_phi_is_equivariant_and_symplectic():
    rng = random.Random(1)
    with mpmath.workprec(100):
        for _ in range(10):
            g = random_sl2(rng, 5)
            m = phi_matrix(g)
            assert is_symplectic(m)
            z = random_h2(rng)
            a = phi_point(sl2_act(g, z), 5)
            b = sp4_act(m, phi_point(z, 5))
            assert abs(a.t1 - b.t1) + abs(a.t2 - b.t2) + abs(a.t12 - b.t12) < 1e-20


def test_phi_matrix_rejects_non_sl2():
    two = QuadElem(2, 0, 5)
    one, zero = QuadElem(1, 0, 5), QuadElem(0, 0, 5)
    with pytest.raises(DomainError):
        phi_matrix(((two, zero), (zero, one)))


def test_phi_point_lands_in_siegel_space():
    z = (mpmath.mpc(0.1, 1.0), mpmath.mpc(-0.3, 0.6))
    assert phi_point(z, 5).half_space() == 1


def test_characteristics_bijection_preserves_parity():
    seen = {}
    for x in char_reps(5):
        for y in char_reps(5):
            seen[phi_char(x, y)] = is_even_hilbert(x, y)
    assert len(seen) == 16
    assert all(is_even_quadruple(q) == ev for q, ev in seen.items())
    assert sum(seen.values()) == len(EVEN_QUADRUPLES) == 10
    for q in EVEN_QUADRUPLES:
        assert phi_char(*phi_char_inverse(q, 5)) == q


@pytest.mark.parametrize("conv", ["ratio", "lattice"])
def test_cm_point_satisfies_kappa_identity(cm, conv):
    from dataclasses import replace
    c = replace(cm, point_convention=conv)
    with mpmath.workprec(200):
        z, tau, kv, expected = cm_point(c)
        assert abs(kv - expected) < 1e-40
        assert tau.half_space() == 1


def test_cm_input_validation_warns_on_xi_sign(cm):
    with pytest.warns(UserWarning):
        notes = cm.validate()
    assert any("upper half" in n for n in notes)


def test_norm_identity_ratio_is_four(cm):
    lhs, rhs = norm_identity(cm)
    assert abs(rhs / lhs - 4) < 1e-30
