"""Direct numerical evaluation of genus-two and Hilbert theta constants with certified truncation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .geometry import SiegelPoint, _R_numeric
from .lattices import e2_basis
from .nfield import QuadElem

DEFAULT_PREC = 200
DEFAULT_EPS = mpmath.mpf("1e-30")


class PrecisionError(ArithmeticError):
    pass


class SingularPointError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ThetaValue:
    value: mpmath.mpc
    char: tuple
    tail_bound: mpmath.mpf
    radius: int


def _min_eigenvalue(Y) -> mpmath.mpf:
    a, b, c = Y[0, 0], Y[0, 1], Y[1, 1]
    tr, det = a + c, a * c - b * b
    if det <= 0 or a <= 0:
        raise ValueError("imaginary part is not positive definite")
    return (tr - mpmath.sqrt((a - c) ** 2 + 4 * b * b)) / 2


def _tail(lam, R: int) -> mpmath.mpf:
    """Bound for the sum of exp(-pi lam |v|^2) over shifted Z^2 points outside the box |m_i| <= R."""
    T = R + mpmath.mpf(1) / 2
    outer = 2 * mpmath.exp(-mpmath.pi * lam * T * T) / (1 - mpmath.exp(-2 * mpmath.pi * lam * T))
    full = 2 + 1 / mpmath.sqrt(lam)
    return 2 * outer * full


def _radius(lam, eps, max_radius=400) -> tuple[int, mpmath.mpf]:
    for R in range(1, max_radius + 1):
        t = _tail(lam, R)
        if t < eps:
            return R, t
    raise PrecisionError(f"tail bound {eps} not reached within radius {max_radius}")


def _gaussian_sum(Y, X, shift, linear, eps, radius=None):
    """sum over m in Z^2 of exp(pi i v (X + iY) v^t + 2 pi i v . linear), v = m + shift."""
    lam = _min_eigenvalue(Y)
    if radius is None:
        R, tail = _radius(lam, eps)
    else:
        R, tail = radius, _tail(lam, radius)
    total = mpmath.mpc(0)
    two_pi_i = 2j * mpmath.pi
    for m1 in range(-R, R + 1):
        v1 = m1 + shift[0]
        for m2 in range(-R, R + 1):
            v2 = m2 + shift[1]
            quad_re = X[0, 0] * v1 * v1 + 2 * X[0, 1] * v1 * v2 + X[1, 1] * v2 * v2
            quad_im = Y[0, 0] * v1 * v1 + 2 * Y[0, 1] * v1 * v2 + Y[1, 1] * v2 * v2
            phase = quad_re / 2 + v1 * linear[0] + v2 * linear[1]
            total += mpmath.exp(-mpmath.pi * quad_im + two_pi_i * phase)
    return total, tail, R


def _re_im(tau: SiegelPoint):
    m = tau.matrix()
    X = mpmath.matrix([[mpmath.re(m[i, j]) for j in range(2)] for i in range(2)])
    Y = mpmath.matrix([[mpmath.im(m[i, j]) for j in range(2)] for i in range(2)])
    return X, Y


def siegel_theta(char, tau: SiegelPoint, eps=DEFAULT_EPS, prec=DEFAULT_PREC, radius=None) -> ThetaValue:
    x1, x2, y1, y2 = char
    with mpmath.workprec(prec):
        X, Y = _re_im(tau)
        half = mpmath.mpf(1) / 2
        value, tail, R = _gaussian_sum(Y, X, (x1 * half, x2 * half), (y1 * half, y2 * half),
                                       mpmath.mpf(eps), radius)
    return ThetaValue(value, tuple(char), tail, R)


def hilbert_theta(x: QuadElem, y: QuadElem, z, eps=DEFAULT_EPS, prec=DEFAULT_PREC) -> ThetaValue:
    """Sum over u in O_F of exp(pi i tr((u + x/2)^2 z + (u + x/2) y / sqrt D))."""
    D = int(x.d)
    e2 = e2_basis(D)
    with mpmath.workprec(prec):
        R = _R_numeric(D)  # rows: (sigma_j(1), sigma_j(e2))
        z1, z2 = z
        Y = R.T * mpmath.diag([mpmath.im(z1), mpmath.im(z2)]) * R
        X = R.T * mpmath.diag([mpmath.re(z1), mpmath.re(z2)]) * R
        # coordinates of x/2 in the basis (1, e2)
        x2c = x.b / e2.b
        x1c = x.a - x2c * e2.a
        shift = (mpmath.mpf(x1c.numerator) / (2 * x1c.denominator), mpmath.mpf(x2c.numerator) / (2 * x2c.denominator))
        # linear term: tr(w y / sqrt D) / 2 with w = w1 + w2 e2, as a dot product
        isd = QuadElem(0, Fraction(1, D), D)
        l1 = (y * isd).trace() / 2
        l2 = (e2 * y * isd).trace() / 2
        linear = (mpmath.mpf(l1.numerator) / l1.denominator, mpmath.mpf(l2.numerator) / l2.denominator)
        value, tail, radius = _gaussian_sum(Y, X, shift, linear, mpmath.mpf(eps))
    return ThetaValue(value, (x, y), tail, radius)


def rosenhain_thetas(tau: SiegelPoint, eps=DEFAULT_EPS, prec=DEFAULT_PREC) -> list[ThetaValue]:
    from .weilrep import ROSENHAIN_SEXTUPLE
    return [siegel_theta(c, tau, eps, prec) for c in ROSENHAIN_SEXTUPLE]


def rosenhain_from_thetas(thetas) -> tuple:
    from .weilrep import ROSENHAIN_RATIOS
    vals = [t.value if isinstance(t, ThetaValue) else t for t in thetas]
    tol = mpmath.mpf(10) ** (-20)
    out = []
    for k in (1, 2, 3):
        (a, b), (c, d) = ROSENHAIN_RATIOS[k]
        den = vals[c] ** 2 * vals[d] ** 2
        if abs(den) < tol:
            raise SingularPointError(f"denominator theta vanishes for lambda_{k}")
        out.append(-vals[a] ** 2 * vals[b] ** 2 / den)
    return tuple(out)


def rosenhain_numeric(tau: SiegelPoint, eps=DEFAULT_EPS, prec=DEFAULT_PREC) -> tuple:
    with mpmath.workprec(prec):
        return rosenhain_from_thetas(rosenhain_thetas(tau, eps, prec))


def pet_norm(value, tau: SiegelPoint, weight=Fraction(1, 2), prec=DEFAULT_PREC) -> mpmath.mpf:
    """|value|^2 (4 pi e^(-gamma) det Im tau)^(2 weight)."""
    v = value.value if isinstance(value, ThetaValue) else value
    with mpmath.workprec(prec):
        w = mpmath.mpf(Fraction(weight).numerator) / Fraction(weight).denominator
        factor = 4 * mpmath.pi * mpmath.exp(-mpmath.euler) * tau.det_imag()
        return abs(v) ** 2 * factor ** (2 * w)
