"""The lattices L in V, M in W0 and L0 in V0, their discriminant groups and fibers.

Coordinates: V has vectors (a, b, c, d, r) with Q = 2r^2 - 2ab - 2cd; W0 has
(a, b, r, s) with Q = 2r^2 - 2ab - 2D s^2; V0 has t with Q = 2D t^2. The
orthogonal splitting V = V0 + W0 sends (t; a, b, r, s) to
(a, b, D(s - t), s + t, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_form

from .nfield import CMElem, CMField, QuadElem, ReflexElem

HALF = Fraction(1, 2)


def _m1(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


@dataclass(frozen=True, order=True)
class CosetL:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    r: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "r"):
            object.__setattr__(self, name, _m1(getattr(self, name)))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d, self.r)

    def __neg__(self):
        return CosetL(*(-x for x in self.as_tuple()))

    def __add__(self, other):
        return CosetL(*(x + y for x, y in zip(self.as_tuple(), other.as_tuple())))


@dataclass(frozen=True, order=True)
class CosetM:
    a: Fraction
    b: Fraction
    r: Fraction
    s: Fraction
    D: int

    def __post_init__(self):
        for name in ("a", "b", "r", "s"):
            object.__setattr__(self, name, _m1(getattr(self, name)))

    def as_tuple(self):
        return (self.a, self.b, self.r, self.s)

    def __neg__(self):
        return CosetM(-self.a, -self.b, -self.r, -self.s, self.D)

    def key(self) -> str:
        return "(" + ",".join(str(x) for x in self.as_tuple()) + ")"


@dataclass(frozen=True, order=True)
class CosetL0:
    t: Fraction
    D: int

    def __post_init__(self):
        object.__setattr__(self, "t", _m1(self.t))


def q_L(a, b, c, d, r) -> Fraction:
    return 2 * r * r - 2 * a * b - 2 * c * d


def q_M(a, b, r, s, D) -> Fraction:
    return 2 * r * r - 2 * a * b - 2 * D * s * s


def qval(mu) -> Fraction:
    """Quadratic form value of a discriminant-group element, reduced to [0, 1)."""
    if isinstance(mu, CosetL):
        return _m1(q_L(*mu.as_tuple()))
    if isinstance(mu, CosetM):
        return _m1(q_M(*mu.as_tuple(), mu.D))
    if isinstance(mu, CosetL0):
        return _m1(2 * mu.D * mu.t * mu.t)
    raise TypeError(f"not a coset: {mu!r}")


# label order of the 64 elements of L'/L used by the input-form tables
_MU_ROWS = """
0 0 0 0 0|0 0 0 1/2 0|0 0 1/2 0 0|0 0 1/2 1/2 1/2
0 1/2 0 0 0|0 1/2 0 1/2 0|0 1/2 1/2 0 0|0 1/2 1/2 1/2 1/2
1/2 0 0 0 0|1/2 0 0 1/2 0|1/2 0 1/2 0 0|1/2 0 1/2 1/2 1/2
1/2 1/2 0 0 1/2|1/2 1/2 0 1/2 1/2|1/2 1/2 1/2 0 1/2|1/2 1/2 1/2 1/2 0
0 0 1/2 1/2 1/4|0 0 1/2 1/2 3/4|0 1/2 1/2 1/2 1/4|0 1/2 1/2 1/2 3/4
1/2 0 1/2 1/2 1/4|1/2 0 1/2 1/2 3/4|1/2 1/2 0 0 1/4|1/2 1/2 0 0 3/4
1/2 1/2 0 1/2 1/4|1/2 1/2 0 1/2 3/4|1/2 1/2 1/2 0 1/4|1/2 1/2 1/2 0 3/4
0 0 0 0 1/2|0 0 0 1/2 1/2|0 0 1/2 0 1/2|0 0 1/2 1/2 0
0 1/2 0 0 1/2|0 1/2 0 1/2 1/2|0 1/2 1/2 0 1/2|0 1/2 1/2 1/2 0
1/2 0 0 0 1/2|1/2 0 0 1/2 1/2|1/2 0 1/2 0 1/2|1/2 0 1/2 1/2 0
1/2 1/2 0 0 0|1/2 1/2 0 1/2 0|1/2 1/2 1/2 0 0|1/2 1/2 1/2 1/2 1/2
0 0 0 0 1/4|0 0 0 0 3/4|0 0 0 1/2 1/4|0 0 0 1/2 3/4
0 0 1/2 0 1/4|0 0 1/2 0 3/4|0 1/2 0 0 1/4|0 1/2 0 0 3/4
0 1/2 0 1/2 1/4|0 1/2 0 1/2 3/4|0 1/2 1/2 0 1/4|0 1/2 1/2 0 3/4
1/2 0 0 0 1/4|1/2 0 0 0 3/4|1/2 0 0 1/2 1/4|1/2 0 0 1/2 3/4
1/2 0 1/2 0 1/4|1/2 0 1/2 0 3/4|1/2 1/2 1/2 1/2 1/4|1/2 1/2 1/2 1/2 3/4
"""

MU_TABLE: tuple[CosetL, ...] = tuple(
    CosetL(*(Fraction(x) for x in cell.split()))
    for row in _MU_ROWS.strip().splitlines()
    for cell in row.split("|")
)
MU_INDEX: dict[CosetL, int] = {mu: i + 1 for i, mu in enumerate(MU_TABLE)}


def mu(i: int) -> CosetL:
    """The coset with table label i (1-based)."""
    return MU_TABLE[i - 1]


def all_cosets_M(D: int) -> list[CosetM]:
    quarters = [Fraction(k, 4) for k in range(4)]
    ss = [Fraction(k, 4 * D) for k in range(4 * D)]
    return [CosetM(a, b, r, s, D) for a in (0, HALF) for b in (0, HALF) for r in quarters for s in ss]


def all_cosets_L0(D: int) -> list[CosetL0]:
    return [CosetL0(Fraction(k, 4 * D), D) for k in range(4 * D)]


def combine(mu0: CosetL0, mu1: CosetM) -> CosetL | None:
    """Image in L'/L of mu0 + mu1, or None when the sum is not in L'."""
    D = mu1.D
    c = D * (mu1.s - mu0.t)
    d = mu1.s + mu0.t
    if (2 * c).denominator != 1 or (2 * d).denominator != 1:
        return None
    if (2 * mu1.a).denominator != 1 or (2 * mu1.b).denominator != 1 or (4 * mu1.r).denominator != 1:
        return None
    return CosetL(mu1.a, mu1.b, c, d, mu1.r)


@lru_cache(maxsize=None)
def _all_fibers(D: int) -> dict[CosetL, tuple[tuple[CosetL0, CosetM], ...]]:
    buckets: dict[CosetL, list] = {m: [] for m in MU_TABLE}
    l0 = all_cosets_L0(D)
    for mu1 in all_cosets_M(D):
        for mu0 in l0:
            image = combine(mu0, mu1)
            if image is not None:
                buckets[image].append((mu0, mu1))
    return {k: tuple(sorted(v)) for k, v in buckets.items()}


def fiber_decompose(mu_L: CosetL, D: int) -> list[tuple[CosetL0, CosetM]]:
    """All (mu0, mu1) in L0'/L0 x M'/M with mu0 + mu1 in L' mapping to mu_L."""
    if D < 2:
        raise ValueError("D must be at least 2")
    return list(_all_fibers(D)[mu_L])


def embedding_matrix(D: int) -> Matrix:
    """Rows: images of the bases of L0 (t) and M (a, b, r, s) in L coordinates."""
    return Matrix([
        [0, 0, -D, 1, 0],
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 0, 0, 1],
        [0, 0, D, 1, 0],
    ])


def lattice_index(D: int) -> int:
    snf = smith_normal_form(embedding_matrix(D), domain=ZZ)
    return abs(math.prod(int(snf[i, i]) for i in range(5)))


def gram_matrices(D: int) -> tuple[Matrix, Matrix, Matrix]:
    """Gram matrices of the bilinear forms Q(x + y) - Q(x) - Q(y) on L, L0 and M."""
    L = Matrix([[0, -2, 0, 0, 0], [-2, 0, 0, 0, 0], [0, 0, 0, -2, 0], [0, 0, -2, 0, 0], [0, 0, 0, 0, 4]])
    L0 = Matrix([[4 * D]])
    M = Matrix([[0, -2, 0, 0], [-2, 0, 0, 0], [0, 0, 4, 0], [0, 0, 0, -4 * D]])
    return L, L0, M


def discriminant_orders(D: int) -> tuple[int, int, int]:
    """(|L'/L|, |L0'/L0|, |M'/M|) as absolute Gram determinants."""
    return tuple(abs(int(g.det())) for g in gram_matrices(D))


# ---------------------------------------------------------------------------
# the isometry from W0 to the reflex field


def kappa_isometry(alpha: CMElem, beta: CMElem, A) -> ReflexElem:
    """kappa(A) = a N(alpha) + s1(alpha)s2(beta)(r - s sqrtD) + s1(beta)s2(alpha)(r + s sqrtD) + b N(beta)."""
    if not alpha:
        raise ValueError("alpha must be nonzero")
    field = alpha.field
    a, b, r, s = (Fraction(x) for x in A)
    s1a, s2a = alpha.sigma1_K(), alpha.sigma2_K()
    s1b, s2b = beta.sigma1_K(), beta.sigma2_K()
    lam = QuadElem(r, s, field.D)
    return (s1a * s2a) * QuadElem(a, 0, field.D) + (s1a * s2b) * lam.conj() \
        + (s1b * s2a) * lam + (s1b * s2b) * QuadElem(b, 0, field.D)


def reflex_norm_form(alpha: CMElem, beta: CMElem, A) -> QuadElem:
    """kappa(A) * conj(kappa(A)) / sqrt(Dtilde), an element of the real reflex field."""
    k = kappa_isometry(alpha, beta, A)
    nk = (k * k.conj()).to_real_reflex()
    return nk / QuadElem(0, 1, nk.d)


W0_BASIS = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))


def q_W0(A, D: int) -> Fraction:
    a, b, r, s = (Fraction(x) for x in A)
    return q_M(a, b, r, s, D)


class ReflexForm:
    """The real-reflex-valued quadratic form q on W0 with tr q = Q_W0.

    q(A) = scale * kappa(A) conj(kappa(A)) / sqrt(Dtilde); the rational
    ``scale`` is fixed by the trace condition and checked on every basis pair.
    """

    def __init__(self, alpha: CMElem, beta: CMElem):
        field = alpha.field
        self.field = field
        self.alpha, self.beta = alpha, beta
        self.D = field.D
        self.d = field.Dtilde
        raw = [[None] * 4 for _ in range(4)]
        for i in range(4):
            raw[i][i] = reflex_norm_form(alpha, beta, W0_BASIS[i])
        for i in range(4):
            for j in range(i + 1, 4):
                v = tuple(x + y for x, y in zip(W0_BASIS[i], W0_BASIS[j]))
                raw[i][j] = raw[j][i] = (reflex_norm_form(alpha, beta, v) - raw[i][i] - raw[j][j]) * HALF
        ratios = set()
        for i in range(4):
            for j in range(i, 4):
                target = _gram_W0(self.D)[i][j]
                tr = raw[i][j].trace()
                if tr:
                    ratios.add(target / tr)
                elif target:
                    raise ValueError("kappa is not a similitude onto the trace form")
        if len(ratios) != 1:
            raise ValueError("kappa is not a similitude onto the trace form")
        self.scale = ratios.pop()
        self.gram = [[raw[i][j] * self.scale for j in range(4)] for i in range(4)]

    def __call__(self, A) -> QuadElem:
        A = [Fraction(x) for x in A]
        out = QuadElem(0, 0, self.d)
        for i in range(4):
            if A[i]:
                out = out + self.gram[i][i] * (A[i] * A[i])
                for j in range(i + 1, 4):
                    if A[j]:
                        out = out + self.gram[i][j] * (2 * A[i] * A[j])
        return out


def _gram_W0(D: int):
    """Gram matrix of Q_W0 with Q(x) = sum G_ij x_i x_j."""
    return [[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 2, 0], [0, 0, 0, -2 * D]]


def _z_basis(rows) -> tuple[Matrix, int]:
    """Integral HNF basis of the Z-span of rational rows, with the common denominator."""
    den = math.lcm(*(x.denominator for row in rows for x in row))
    m = Matrix([[int(x * den) for x in row] for row in rows])
    h = hermite_normal_form(m.T).T
    return h, den


def _covolume(rows) -> Fraction:
    h, den = _z_basis(rows)
    if h.rows != h.cols:
        raise ValueError("module is not of full rank")
    return Fraction(abs(int(h.det())), den ** h.rows)


def _span_elems(field: CMField, rows) -> list[ReflexElem]:
    h, den = _z_basis(rows)
    return [_from_coords(field, [Fraction(int(x), den) for x in h.row(i)]) for i in range(h.rows)]


def _from_coords(field: CMField, c) -> ReflexElem:
    q0, fa, fb, q3 = c
    f = QuadElem(fa, fb, field.D)
    return ReflexElem(QuadElem(q0, 0, field.D), f, f.conj(), QuadElem(q3, 0, field.D), field)


def e2_basis(D: int) -> QuadElem:
    """Second element of the fixed Z-basis (1, e2) of O_F."""
    if D % 4 == 1:
        return QuadElem(HALF, -HALF, D)
    return QuadElem(0, -HALF, D)


def ideal_basis(alpha: CMElem, beta: CMElem) -> list[CMElem]:
    """Z-basis of O_F alpha + (1/sqrt D) O_F beta."""
    D = alpha.field.D
    e2 = e2_basis(D)
    isd = QuadElem(0, Fraction(1, D), D)
    return [alpha, alpha * e2, beta * isd, beta * (e2 * isd)]


def _type_norm(x: CMElem) -> ReflexElem:
    return x.sigma1_K() * x.sigma2_K()


def type_norm_module(alpha: CMElem, beta: CMElem) -> list[ReflexElem]:
    """Z-basis of the span of the type norms of a = O_F alpha + (1/sqrt D) O_F beta.

    Type norms are quadratic, so the span is generated by the norms of a
    Z-basis together with their polarizations.
    """
    basis = ideal_basis(alpha, beta)
    norms = [_type_norm(x) for x in basis]
    norms += [_type_norm(x + y) for i, x in enumerate(basis) for y in basis[i + 1:]]
    return _span_elems(alpha.field, [list(z.rational_coords()) for z in norms])


def lattice_beta(beta: CMElem) -> CMElem:
    """Generator of the second summand of a = O_F alpha + (1/sqrt D) O_F beta."""
    D = beta.field.D
    return beta * QuadElem(0, Fraction(1, D), D)


def kappa_index(alpha: CMElem, beta: CMElem, kappa_beta: CMElem | None = None) -> Fraction:
    """Index of kappa_{alpha, kappa_beta}(M) in the type-norm span of a.

    ``kappa_beta`` defaults to the generator beta / sqrt D of the second summand.
    """
    kb = lattice_beta(beta) if kappa_beta is None else kappa_beta
    kappa_rows = [list(kappa_isometry(alpha, kb, v).rational_coords()) for v in W0_BASIS]
    target = [list(z.rational_coords()) for z in type_norm_module(alpha, beta)]
    return _covolume(kappa_rows) / _covolume(target)


def coset_support(form: ReflexForm, mu1: CosetM):
    """Offset and step of the sqrt(Dtilde)-coefficient of q on mu1 + M."""
    base = list(mu1.as_tuple())
    q0 = form(base)
    gens = []
    for i in range(4):
        e = [Fraction(0)] * 4
        e[i] = Fraction(1)
        shifted = [x + y for x, y in zip(base, e)]
        gens.append((form(shifted) - q0).b)
        gens.append(form(e).b * 2)
    for i, j in product(range(4), repeat=2):
        if i < j:
            gens.append(form.gram[i][j].b * 2)
    step = _rational_gcd([g for g in gens if g])
    return q0.b, step


def _rational_gcd(xs) -> Fraction:
    den = math.lcm(*(x.denominator for x in xs))
    g = math.gcd(*(int(x * den) for x in xs))
    return Fraction(g, den)
