"""Siegel points, the projective model of the orthogonal side, the Hilbert embedding and CM points."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

import mpmath

from .lattices import e2_basis, lattice_beta
from .nfield import CMElem, CMField, QuadElem
from .qseries import LogLinear


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class SiegelPoint:
    t1: mpmath.mpc
    t2: mpmath.mpc
    t12: mpmath.mpc

    def matrix(self) -> mpmath.matrix:
        return mpmath.matrix([[self.t1, self.t12], [self.t12, self.t2]])

    def det(self):
        return self.t1 * self.t2 - self.t12 * self.t12

    def imag_matrix(self) -> mpmath.matrix:
        return mpmath.matrix([[mpmath.im(self.t1), mpmath.im(self.t12)],
                              [mpmath.im(self.t12), mpmath.im(self.t2)]])

    def det_imag(self):
        y = self.imag_matrix()
        return y[0, 0] * y[1, 1] - y[0, 1] * y[1, 0]

    def half_space(self) -> int:
        """+1 for positive definite imaginary part, -1 for negative definite, 0 otherwise."""
        y = self.imag_matrix()
        if self.det_imag() <= 0:
            return 0
        return 1 if y[0, 0] > 0 else -1

    @classmethod
    def from_matrix(cls, m) -> "SiegelPoint":
        if abs(m[0, 1] - m[1, 0]) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
            raise DomainError("matrix is not symmetric")
        return cls(mpmath.mpc(m[0, 0]), mpmath.mpc(m[1, 1]), mpmath.mpc(m[0, 1]))


@dataclass(frozen=True)
class DCoord:
    """Projective point [a, b, c, d, r] of the complexified space."""

    a: mpmath.mpc
    b: mpmath.mpc
    c: mpmath.mpc
    d: mpmath.mpc
    r: mpmath.mpc

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d, self.r)

    def conj(self) -> "DCoord":
        return DCoord(*(mpmath.conj(x) for x in self.as_tuple()))


def quad_V(z) -> mpmath.mpc:
    a, b, c, d, r = z.as_tuple() if isinstance(z, DCoord) else z
    return 2 * r * r - 2 * a * b - 2 * c * d


def bilinear_V(z, w) -> mpmath.mpc:
    """The symmetric form with bilinear_V(z, z) = quad_V(z)."""
    a, b, c, d, r = z.as_tuple()
    a2, b2, c2, d2, r2 = w.as_tuple()
    return 2 * r * r2 - (a * b2 + a2 * b) - (c * d2 + c2 * d)


def xi_map(tau: SiegelPoint) -> DCoord:
    if tau.det_imag() == 0:
        raise DomainError("imaginary part is singular")
    return DCoord(-tau.det(), mpmath.mpc(1), tau.t1, tau.t2, tau.t12)


def xi_inv(z: DCoord) -> SiegelPoint:
    if z.b == 0:
        raise DomainError("b coordinate vanishes")
    return SiegelPoint(z.c / z.b, z.d / z.b, z.r / z.b)


# ---------------------------------------------------------------------------
# the Hilbert embedding


def basis_matrix(D: int) -> list[list[QuadElem]]:
    """R = [[e1, e2], [sigma e1, sigma e2]] over F."""
    e1 = QuadElem(1, 0, D)
    e2 = e2_basis(D)
    return [[e1, e2], [e1.conj(), e2.conj()]]


def _R_numeric(D: int):
    R = basis_matrix(D)
    return mpmath.matrix([[x.embeddings()[0] for x in row] for row in R])


def phi_point(z, D: int) -> SiegelPoint:
    z1, z2 = z
    R = _R_numeric(D)
    m = R.T * mpmath.diag([z1, z2]) * R
    return SiegelPoint(mpmath.mpc(m[0, 0]), mpmath.mpc(m[1, 1]), mpmath.mpc(m[0, 1]))


def _qmat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), QuadElem(0, 0, A[0][0].d)) for j in range(m)]
            for i in range(n)]


def _qmat_T(A):
    return [list(col) for col in zip(*A)]


def _qmat_inv2(A):
    a, b = A[0]
    c, d = A[1]
    det = a * d - b * c
    return [[d / det, -b / det], [-c / det, a / det]]


def phi_matrix(gamma) -> list[list[Fraction]]:
    """diag(R^t, R^-1) gamma* diag((R^t)^-1, R) as an exact rational 4x4 matrix."""
    (a, b), (c, d) = gamma
    D = int(a.d)
    if a * d - b * c != QuadElem(1, 0, D):
        raise DomainError("gamma is not in SL2(F)")
    R = basis_matrix(D)
    Rt = _qmat_T(R)
    Ri = _qmat_inv2(R)
    Rti = _qmat_inv2(Rt)
    zero = QuadElem(0, 0, D)

    def diag(x):
        return [[x, zero], [zero, x.conj()]]

    blocks = [[_qmat_mul(_qmat_mul(Rt, diag(a)), Rti), _qmat_mul(_qmat_mul(Rt, diag(b)), R)],
              [_qmat_mul(_qmat_mul(Ri, diag(c)), Rti), _qmat_mul(_qmat_mul(Ri, diag(d)), R)]]
    out = [[None] * 4 for _ in range(4)]
    for bi, bj, i, j in product(range(2), range(2), range(2), range(2)):
        x = blocks[bi][bj][i][j]
        if not x.is_rational():
            raise AssertionError("phi(gamma) has irrational entries")
        out[2 * bi + i][2 * bj + j] = x.a
    return out


def is_symplectic(m) -> bool:
    J = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    mt = [list(r) for r in zip(*m)]

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(4)) for j in range(4)] for i in range(4)]

    return mul(mul(mt, J), m) == J


def sp4_act(m, tau: SiegelPoint) -> SiegelPoint:
    M = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in m])
    A, B = M[0:2, 0:2], M[0:2, 2:4]
    C, Dm = M[2:4, 0:2], M[2:4, 2:4]
    t = tau.matrix()
    out = (A * t + B) * mpmath.inverse(C * t + Dm)
    return SiegelPoint(mpmath.mpc(out[0, 0]), mpmath.mpc(out[1, 1]), mpmath.mpc((out[0, 1] + out[1, 0]) / 2))


def sl2_act(gamma, z):
    (a, b), (c, d) = gamma
    out = []
    for k, zk in enumerate(z):
        ak, bk, ck, dk = (x.embeddings()[k] for x in (a, b, c, d))
        out.append((ak * zk + bk) / (ck * zk + dk))
    return tuple(out)


def phi_char(x: QuadElem, y: QuadElem) -> tuple[int, int, int, int]:
    """(x1, x2, y1, y2) mod 2 with x = x1 e1 + x2 e2 and y_i = tr(e_i y / sqrt D)."""
    D = int(x.d)
    e2 = e2_basis(D)
    # solve x = x1 + x2 e2
    x2 = x.b / e2.b
    x1 = x.a - x2 * e2.a
    isd = QuadElem(0, Fraction(1, D), D)
    y1 = (y * isd).trace()
    y2 = (e2 * y * isd).trace()
    vals = (x1, x2, y1, y2)
    if any(v.denominator != 1 for v in vals):
        raise DomainError("characteristic entries must be integral")
    return tuple(int(v) % 2 for v in vals)


def char_reps(D: int) -> list[QuadElem]:
    """Representatives of O_F / 2 O_F."""
    e2 = e2_basis(D)
    return [QuadElem(i, 0, D) + e2 * j for i in (0, 1) for j in (0, 1)]


def phi_char_inverse(quad: tuple[int, int, int, int], D: int) -> tuple[QuadElem, QuadElem]:
    for x in char_reps(D):
        for y in char_reps(D):
            if phi_char(x, y) == tuple(quad):
                return x, y
    raise DomainError(f"no preimage for {quad}")


def is_even_quadruple(q) -> bool:
    x1, x2, y1, y2 = q
    return (x1 * y1 + x2 * y2) % 2 == 0


def is_even_hilbert(x: QuadElem, y: QuadElem) -> bool:
    D = int(x.d)
    return (x * y * QuadElem(0, Fraction(1, D), D)).trace() % 2 == 0


EVEN_QUADRUPLES = tuple(q for q in product((0, 1), repeat=4) if is_even_quadruple(q))


# ---------------------------------------------------------------------------
# CM input and CM points


@dataclass
class CMInput:
    D: int
    delta: QuadElem
    alpha: CMElem
    beta: CMElem
    xi: CMElem
    omega_E: int = 2
    cT: int = 1
    lambda0_chi: Fraction | None = None
    a0_overrides: Mapping[str, LogLinear] = field(default_factory=dict)
    point_convention: str = "ratio"
    kappa_beta: str = "scaled"
    trace_field: str = "Ftilde"
    level_structure: tuple | None = None

    def __post_init__(self):
        self.field: CMField = self.alpha.field
        if self.point_convention not in ("ratio", "lattice"):
            raise ValueError("point_convention must be 'ratio' or 'lattice'")
        if self.kappa_beta not in ("scaled", "literal"):
            raise ValueError("kappa_beta must be 'scaled' or 'literal'")
        if self.trace_field not in ("F", "Ftilde"):
            raise ValueError("trace_field must be 'F' or 'Ftilde'")

    @property
    def C_E(self) -> Fraction | None:
        if self.lambda0_chi is None:
            return None
        return Fraction(4, self.omega_E) * self.cT / self.lambda0_chi

    @property
    def multiplicity(self) -> Fraction:
        return Fraction(4, self.omega_E) * self.cT

    def lattice_beta(self) -> CMElem:
        return lattice_beta(self.beta) if self.kappa_beta == "scaled" else self.beta

    def validate(self) -> list[str]:
        """Check the stated invariants; returns warnings, raises on hard violations."""
        notes = []
        if self.xi.u:
            raise ValueError("xi must be purely imaginary")
        ratio = self.beta / self.alpha
        z = ratio.sigma()
        if not (mpmath.im(z[0]) > 0 and mpmath.im(z[1]) > 0):
            raise DomainError("Sigma(beta/alpha) is not in the product of upper half planes")
        norm = self.xi * (self.alpha.conj() * self.beta - self.alpha * self.beta.conj())
        if norm != self.field.elem(1):
            raise ValueError("normalization xi (conj(alpha) beta - alpha conj(beta)) = 1 fails")
        xs = self.xi.sigma()
        if not (mpmath.im(xs[0]) > 0 and mpmath.im(xs[1]) > 0):
            notes.append("Sigma(xi) is not in the upper half planes; the normalization forces this sign")
        if self.cT != 1:
            notes.append("|C(T)| != 1: the oracle evaluates one orbit point only")
        for msg in notes:
            warnings.warn(msg, stacklevel=2)
        return notes


def cm_point(cm: CMInput):
    """The point z in H^2, its Siegel image and the kappa check value.

    Returns (z, tau, kappa_value, expected) where kappa_value is kappa applied
    to Xi(phi(z)) and expected = (1 - D) sigma1(beta') sigma2(beta') for the
    pair (alpha', beta') with z = Sigma(beta'/alpha').
    """
    if cm.point_convention == "ratio":
        a_p, b_p = cm.alpha, cm.beta
    else:
        # the lattice O_F z + 1/sqrt(D) O_F is a multiple of a for z = -alpha/beta
        a_p, b_p = cm.beta, -cm.alpha
    z = (b_p / a_p).sigma()
    if not (mpmath.im(z[0]) > 0 and mpmath.im(z[1]) > 0):
        raise DomainError("CM point is not in the product of upper half planes")
    D = cm.D
    tau = phi_point(z, D)
    R = _R_numeric(D)
    e = [[R[0, 0], R[0, 1]], [R[1, 0], R[1, 1]]]  # e[j][i] = sigma_{j+1}(e_{i+1})
    lam_prime = (e[0][1] * e[1][0] - e[0][0] * e[1][1]) * z[0]
    lam = (e[0][0] * e[1][1] - e[0][1] * e[1][0]) * z[1]
    s1a, s2a = a_p.sigma()
    s1b, s2b = b_p.sigma()
    kappa_value = -tau.det() * s1a * s2a + s1a * s2b * lam_prime + s1b * s2a * lam + s1b * s2b
    expected = (1 - D) * s1b * s2b
    return z, tau, kappa_value, expected


def _power_basis_data(field: CMField):
    """Scale k and integer minimal polynomial of theta = k sqrt(Delta)."""
    p, q = field.delta.a, field.delta.b
    if q == 0:
        raise DomainError("Delta must be irrational")
    c2, c0 = -2 * p, p * p - q * q * field.D
    k = 1
    while (c2 * k * k).denominator != 1 or (c0 * k ** 4).denominator != 1:
        k += 1
    return k, [1, 0, int(c2 * k * k), 0, int(c0 * k ** 4)]


def _power_coords(x: CMElem, k: int) -> list[Fraction]:
    p, q = x.field.delta.a, x.field.delta.b
    u0, u1, v0, v1 = x.u.a, x.u.b, x.v.a, x.v.b
    # sqrt(D) = (theta0^2 - p) / q with theta0 = sqrt(Delta) = theta / k
    c = [u0 - u1 * p / q, v0 - v1 * p / q, u1 / q, v1 / q]
    return [ci / Fraction(k) ** i for i, ci in enumerate(c)]


def _det(rows) -> Fraction:
    import sympy
    return Fraction(str(sympy.Matrix(rows).det()))


def ideal_norm(basis: list[CMElem]) -> Fraction:
    """Absolute norm of the Z-module spanned by four elements of E, relative to O_E."""
    from sympy import Poly, symbols
    from sympy.polys.numberfields.basis import round_two

    field = basis[0].field
    k, coeffs = _power_basis_data(field)
    x = symbols("x")
    zk, _ = round_two(Poly(list(coeffs), x, domain="ZZ"))
    m = zk.matrix.to_Matrix()
    den = int(zk.denom)
    ok_rows = [[Fraction(int(m[i, j]), den) for i in range(4)] for j in range(4)]
    rows = [_power_coords(b, k) for b in basis]
    return abs(_det(rows) / _det(ok_rows))


def norm_identity(cm: CMInput):
    """Both sides of the norm identity for a = O_F alpha + O_F beta' with beta' the lattice beta.

    Returns (sqrt(Dt) N(a), 4 (alpha conj(beta') - conj(alpha) beta')(its sigma-conjugate)) as
    floating point numbers; they agree up to sign when the input is consistent.
    """
    field = cm.field
    b0 = cm.lattice_beta()
    e2 = field.elem(e2_basis(cm.D))
    na = ideal_norm([cm.alpha, cm.alpha * e2, b0, b0 * e2])
    x = cm.alpha * b0.conj() - cm.alpha.conj() * b0
    s1, s2 = x.sigma()
    rhs = 4 * s1 * s2
    lhs = mpmath.sqrt(mpmath.mpf(field.Dtilde.numerator) / field.Dtilde.denominator) * mpmath.mpf(na.numerator) / na.denominator
    return lhs, mpmath.re(rhs)
