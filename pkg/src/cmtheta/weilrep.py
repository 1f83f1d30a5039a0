"""The Weil representation on the 64-dimensional group ring of L'/L and the input form tables."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lattices import MU_INDEX, MU_TABLE, CosetL, CosetM, _all_fibers, qval
from .qseries import FourierSeries, build_uvw, theta0_series

N = 64

# One line per even quadruple: u/U = +-u, v/V = +-v, w = w, '.' = 0, components 1..64.
F_TABLES = """\
1111 uuuUuuuUuuuUUUUu............vvvVvvvVvvvVVVVvww..................
0110 uuUuuuUuuuUuUUuU............vvVvvvVvvvVvVVvV..ww................
1001 uUuuuUuuuUuuUuUU............vVvvvVvvvVvvVvVV....ww..............
0011 uuuUuuuUUUUuuuuU............vvvVvvvVVVVvvvvV......ww............
0010 uuUuuuUuUUuuuuUu............vvVvvvVvVVvVvvVv........ww..........
0001 uUuuuUuuUuUUuUuu............vVvvvVvvVvVVvVvv..........ww........
1100 uuuUUUUuuuuUuuuU............vvvVVVVvvvvVvvvV............ww......
0100 uuUuUUuUuuUuuuUu............vvVvVVvVvvVvvvVv..............ww....
1000 uUuuUuUUuUuuuUuu............vVvvVvVVvVvvvVvv................ww..
0000 uUUUUuuuUuuuUuuu............vVVVVvvvVvvvVvvv..................ww"""
F_TABLES_SHA256 = "748cf0b9b0fc65f60741a6186e91fec236d2603fb2a2b4e408d00f23e5492a74"
F_TABLES_VERSION = 1

ROSENHAIN = {
    1: ((-1, (0, 0, 1, 0)), (-1, (0, 1, 1, 0)), (1, (0, 0, 1, 1)), (1, (1, 0, 0, 1))),
    2: ((-1, (1, 0, 0, 0)), (-1, (0, 1, 1, 0)), (1, (1, 1, 0, 0)), (1, (1, 0, 0, 1))),
    3: ((-1, (0, 0, 1, 0)), (-1, (1, 0, 0, 0)), (1, (0, 0, 1, 1)), (1, (1, 1, 0, 0))),
}

# characteristics entering lambda_k = -theta_a^2 theta_b^2 / (theta_c^2 theta_d^2)
ROSENHAIN_SEXTUPLE = ((0, 0, 1, 0), (1, 0, 0, 0), (0, 1, 1, 0), (0, 0, 1, 1), (1, 1, 0, 0), (1, 0, 0, 1))
ROSENHAIN_RATIOS = {1: ((0, 2), (3, 5)), 2: ((1, 2), (4, 5)), 3: ((0, 1), (3, 4))}


class TableError(ValueError):
    pass


def _parse_tables() -> dict[tuple[int, ...], str]:
    digest = hashlib.sha256(F_TABLES.encode()).hexdigest()
    if digest != F_TABLES_SHA256:
        raise TableError("embedded table checksum mismatch")
    out = {}
    for line in F_TABLES.splitlines():
        key, body = line.split()
        if len(body) != N:
            raise TableError(f"row {key} has {len(body)} entries")
        out[tuple(int(ch) for ch in key)] = body
    return out


TABLES = _parse_tables()


# ---------------------------------------------------------------------------
# exact matrices over Q(zeta_8)


class CycloMatrix:
    """A square matrix over Q(zeta_8), zeta = e(1/8), as scale * sum_k coeffs[k] zeta^k."""

    __slots__ = ("coeffs", "scale")

    def __init__(self, coeffs: np.ndarray, scale=Fraction(1)):
        self.coeffs = np.asarray(coeffs, dtype=object if coeffs.dtype == object else np.int64)
        self.scale = Fraction(scale)
        self._normalize()

    def _normalize(self):
        g = int(np.gcd.reduce(np.abs(self.coeffs).ravel().astype(object))) if self.coeffs.size else 0
        if g == 0:
            self.scale = Fraction(0)
            return
        self.coeffs = self.coeffs // g
        self.scale *= g
        first = self.coeffs.ravel()[np.flatnonzero(self.coeffs.ravel())[0]]
        if first < 0:
            self.coeffs = -self.coeffs
            self.scale = -self.scale

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def identity(cls, n=N) -> "CycloMatrix":
        c = np.zeros((4, n, n), dtype=np.int64)
        c[0] = np.eye(n, dtype=np.int64)
        return cls(c)

    @classmethod
    def from_exponents(cls, exps: np.ndarray, scale=Fraction(1)) -> "CycloMatrix":
        """Matrix whose (i, j) entry is zeta^exps[i, j], or 0 where exps is negative."""
        n = exps.shape[0]
        c = np.zeros((4, n, n), dtype=np.int64)
        mask = exps >= 0
        e = np.where(mask, exps % 8, 0)
        sign = np.where(e >= 4, -1, 1)
        for k in range(4):
            c[k] = np.where(mask & (e % 4 == k), sign, 0)
        return cls(c, scale)

    def __matmul__(self, other: "CycloMatrix") -> "CycloMatrix":
        big = max(np.abs(self.coeffs).max(initial=0), np.abs(other.coeffs).max(initial=0))
        dtype = object if big * self.n >= 2 ** 30 else np.int64
        a, b = self.coeffs.astype(dtype), other.coeffs.astype(dtype)
        out = np.zeros((4, self.n, other.n), dtype=dtype)
        for i in range(4):
            for j in range(4):
                prod = a[i] @ b[j]
                k = i + j
                if k >= 4:
                    out[k - 4] -= prod
                else:
                    out[k] += prod
        return CycloMatrix(out, self.scale * other.scale)

    def __pow__(self, k: int) -> "CycloMatrix":
        result, base = CycloMatrix.identity(self.n), self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def conj_transpose(self) -> "CycloMatrix":
        # conj(zeta^k) = zeta^-k = -zeta^(4-k) for k = 1..3
        c = np.empty_like(self.coeffs)
        c[0] = self.coeffs[0].T
        for k in range(1, 4):
            c[4 - k] = -self.coeffs[k].T
        return CycloMatrix(c, self.scale)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycloMatrix):
            return NotImplemented
        return self.scale == other.scale and np.array_equal(self.coeffs, other.coeffs)

    def entry(self, i: int, j: int) -> tuple[Fraction, ...]:
        return tuple(self.scale * int(self.coeffs[k, i, j]) for k in range(4))

    def to_complex(self) -> np.ndarray:
        z = np.exp(2j * np.pi / 8)
        return float(self.scale) * sum(self.coeffs[k].astype(float) * z ** k for k in range(4))

    def first_difference(self, other: "CycloMatrix"):
        """(i, j) of the first differing entry, or None."""
        for i in range(self.n):
            for j in range(self.n):
                if self.entry(i, j) != other.entry(i, j):
                    return i, j
        return None


def _eighths(x: Fraction) -> int:
    v = x * 8
    if v.denominator != 1:
        raise ArithmeticError(f"{x} is not in (1/8)Z")
    return int(v)


def pairing(mu: CosetL, nu: CosetL) -> Fraction:
    """The bilinear form on L'/L with values mod 1."""
    return (qval(mu + nu) - qval(mu) - qval(nu)) % 1


@lru_cache(maxsize=None)
def rho_T() -> CycloMatrix:
    exps = np.full((N, N), -1, dtype=np.int64)
    for i, m in enumerate(MU_TABLE):
        exps[i, i] = _eighths(qval(m) % 1)
    return CycloMatrix.from_exponents(exps)


@lru_cache(maxsize=None)
def rho_S() -> CycloMatrix:
    """Column mu holds the image of phi_mu: entry (nu, mu) = e(-1/8) e(-(mu, nu)) / 8."""
    exps = np.empty((N, N), dtype=np.int64)
    for j, m in enumerate(MU_TABLE):
        for i, n in enumerate(MU_TABLE):
            exps[i, j] = (-1 - _eighths(pairing(m, n))) % 8
    return CycloMatrix.from_exponents(exps, Fraction(1, 8))


@dataclass
class RelationReport:
    ok: bool
    failures: list[str]


def verify_mp2_relations() -> RelationReport:
    S, T = rho_S(), rho_T()
    I = CycloMatrix.identity()
    failures = []
    S2 = S @ S
    checks = {
        "S S^H = I": (S @ S.conj_transpose(), I),
        "S^8 = I": (S2 @ S2 @ S2 @ S2, I),
        "(S T)^3 = S^2": ((S @ T) ** 3, S2),
    }
    for name, (lhs, rhs) in checks.items():
        if lhs != rhs:
            failures.append(f"{name} fails at entry {lhs.first_difference(rhs)}")
    # S^2 sends phi_mu to a multiple of phi_{-mu}
    for j, m in enumerate(MU_TABLE):
        target = MU_INDEX[-m] - 1
        col = [i for i in range(N) if any(S2.entry(i, j))]
        if col != [target]:
            failures.append(f"S^2 column {j + 1} supported on {col}, expected {target}")
            break
    return RelationReport(not failures, failures)


# ---------------------------------------------------------------------------
# vector-valued forms


@dataclass
class SLVector:
    components: list[FourierSeries]

    def __post_init__(self):
        if len(self.components) != N:
            raise ValueError("an SLVector has 64 components")

    def __getitem__(self, i: int) -> FourierSeries:
        """Component at table index i (1-based)."""
        return self.components[i - 1]

    def __add__(self, other: "SLVector") -> "SLVector":
        return SLVector([a + b for a, b in zip(self.components, other.components)])

    def scale(self, k) -> "SLVector":
        return SLVector([c.scale(k) for c in self.components])

    @property
    def trunc(self):
        return min(c.trunc for c in self.components)

    @classmethod
    def zero(cls, trunc=3) -> "SLVector":
        return cls([FourierSeries({}, trunc) for _ in range(N)])


def check_quadruple(quad) -> tuple[int, ...]:
    quad = tuple(int(x) for x in quad)
    if quad not in TABLES:
        raise ValueError(f"{quad} is not an even characteristic")
    return quad


def table_symbols(quad) -> str:
    return TABLES[check_quadruple(quad)]


@lru_cache(maxsize=16)
def _uvw(trunc: Fraction):
    return build_uvw(trunc)


def load_f(quad, trunc=3) -> SLVector:
    body = table_symbols(quad)
    u, v, w = _uvw(Fraction(trunc))
    series = {"u": u, "U": -u, "v": v, "V": -v, "w": w}
    zero = FourierSeries({}, trunc)
    return SLVector([series.get(ch, zero) for ch in body])


def epsilon(quad, i: int) -> int:
    """The sign of component i (one of 1, 5, 9, 13) relative to u."""
    ch = table_symbols(quad)[i - 1]
    if ch not in "uU":
        raise ValueError(f"component {i} is not a multiple of u")
    return 1 if ch == "u" else -1


@dataclass
class ExponentReport:
    ok: bool
    problems: list[str]
    negative: list[tuple[int, Fraction]]


def validate_exponents(f: SLVector) -> ExponentReport:
    problems, negative = [], []
    for i, comp in enumerate(f.components, start=1):
        q = qval(MU_TABLE[i - 1])
        for e in comp.exponents():
            if (e + q).denominator != 1:
                problems.append(f"component {i}: exponent {e} with Q = {q}")
            if e < 0:
                negative.append((i, e))
    neg_exps = {e for _, e in negative}
    if negative and (neg_exps != {Fraction(-1, 8)} or len(negative) != 2
                     or any(qval(MU_TABLE[i - 1]) != Fraction(1, 8) for i, _ in negative)):
        problems.append(f"unexpected principal part {negative}")
    return ExponentReport(not problems, problems, negative)


def rosenhain_inputs(k: int, trunc=3) -> SLVector:
    if k not in ROSENHAIN:
        raise ValueError("k must be 1, 2 or 3")
    out = SLVector.zero(trunc)
    for sign, quad in ROSENHAIN[k]:
        out = out + load_f(quad, trunc).scale(sign)
    return out


def rosenhain_symbols(k: int) -> dict[int, dict[str, int]]:
    """Per component, the integer combination of u, v, w in the k-th Rosenhain input."""
    out: dict[int, dict[str, int]] = {}
    for sign, quad in ROSENHAIN[k]:
        for i, ch in enumerate(table_symbols(quad), start=1):
            if ch == ".":
                continue
            name, s = ch.lower(), (1 if ch.islower() else -1)
            slot = out.setdefault(i, {})
            slot[name] = slot.get(name, 0) + sign * s
    return {i: {n: c for n, c in d.items() if c} for i, d in out.items() if any(d.values())}


def build_hilbert_input(f: SLVector, D: int) -> dict[CosetM, FourierSeries]:
    """Contract f against the rank-one theta: for each coset mu1, sum f_mu * theta_mu0 over fiber pairs."""
    out: dict[CosetM, FourierSeries] = {}
    fibers = _all_fibers(D)
    for i, comp in enumerate(f.components):
        if not comp:
            continue
        for mu0, mu1 in fibers[MU_TABLE[i]]:
            term = comp * theta0_series(mu0.t, D, comp.trunc + Fraction(1, 8))
            out[mu1] = out[mu1] + term if mu1 in out else term
    return out


def dump_tables(trunc=2) -> str:
    """All ten tables in the series serialization, for diffing."""
    chunks = [f"# version {F_TABLES_VERSION} sha256 {F_TABLES_SHA256}"]
    for quad in TABLES:
        f = load_f(quad, trunc)
        for i, comp in enumerate(f.components, start=1):
            if comp:
                chunks.append(f"## f{''.join(map(str, quad))} component {i} mu {MU_TABLE[i - 1].as_tuple()}")
                chunks.append(comp.serialize())
    return "\n".join(chunks)


def head_constant(f: SLVector) -> dict[int, Fraction]:
    """Constant terms of components 1..16 (the q^0 coefficients)."""
    return {i: Fraction(f[i][0]) for i in range(1, 17) if f[i][0]}


def lcm_denominator(f: SLVector) -> int:
    return math.lcm(*(c.denom for c in f.components))
