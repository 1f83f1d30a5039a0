"""Exact arithmetic in real quadratic fields, quartic CM fields and their reflex.

Elements are immutable. A real quadratic field is identified by the positive
rational ``d`` with the field equal to Q(sqrt d); ``d`` need not be squarefree
or a fundamental discriminant, which matters for the reflex real field whose
natural generator is the square root of N(Delta).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from sympy import factorint, isprime


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vp_rational(x: Fraction, p: int) -> int:
    x = _frac(x)
    return vp(x.numerator, p) - vp(x.denominator, p)


def squarefree_part(d: Fraction) -> tuple[int, Fraction]:
    """Write a positive rational d as f^2 * d0 with d0 a squarefree integer."""
    d = _frac(d)
    if d <= 0:
        raise ValueError("expected a positive rational")
    num = d.numerator * d.denominator
    d0 = 1
    f_int = 1
    for p, e in factorint(num).items():
        if e % 2:
            d0 *= p
        f_int *= p ** (e // 2)
    return d0, Fraction(f_int, d.denominator)


class QuadElem:
    """a + b*sqrt(d) with rational a, b."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d=5):
        self.a = _frac(a)
        self.b = _frac(b)
        self.d = _frac(d)

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise TypeError(f"field mismatch: sqrt({self.d}) vs sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElem(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElem(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElem(self.a * o.a + self.d * self.b * o.b,
                        self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadElem(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElem(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if not isinstance(other, QuadElem):
            return NotImplemented
        return (self.a, self.b, self.d) == (other.a, other.b, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __repr__(self):
        return f"QuadElem({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        return format_quad(self)

    def conj(self) -> "QuadElem":
        return QuadElem(self.a, -self.b, self.d)

    def trace(self) -> Fraction:
        return 2 * self.a

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def is_rational(self) -> bool:
        return self.b == 0

    def embeddings(self, prec: int | None = None):
        """Images under sqrt(d) -> +sqrt(d) and -sqrt(d), as mpf."""
        with mpmath.workprec(prec or mpmath.mp.prec):
            r = mpmath.sqrt(mpmath.mpf(self.d.numerator) / self.d.denominator)
            a = mpmath.mpf(self.a.numerator) / self.a.denominator
            b = mpmath.mpf(self.b.numerator) / self.b.denominator
            return a + b * r, a - b * r

    def __float__(self):
        return float(self.embeddings(64)[0])


def _sign_of(a: Fraction, b: Fraction, d: Fraction) -> int:
    """Exact sign of a + b*sqrt(d)."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # opposite signs: compare a^2 with d b^2
    diff = a * a - d * b * b
    if diff == 0:
        return 0
    return (1 if a > 0 else -1) if diff > 0 else (1 if b > 0 else -1)


def signs(x: QuadElem) -> tuple[int, int]:
    return _sign_of(x.a, x.b, x.d), _sign_of(x.a, -x.b, x.d)


def is_totally_positive(x: QuadElem) -> bool:
    return signs(x) == (1, 1)


def is_totally_negative(x: QuadElem) -> bool:
    return signs(x) == (-1, -1)


_QUAD_RE = re.compile(
    r"^\s*(?P<a>[+-]?\s*\d+(?:/\d+)?)?\s*"
    r"(?:(?P<sign>[+-])\s*(?P<b>\d+(?:/\d+)?)?\s*\*?\s*sqrt\s*(?P<d>\d+(?:/\d+)?|D)?)?\s*$"
)


def parse_quad(text: str, d) -> QuadElem:
    """Parse strings such as ``"1/2 + 3/4 sqrtD"``, ``"-5/2 - 1/2 sqrt5"`` or ``"sqrtD"``."""
    s = text.strip().strip('"').strip()
    if s.startswith("sqrt"):
        s = "0 + " + s
    elif s.startswith(("+sqrt", "-sqrt")):
        s = "0 " + s
    m = _QUAD_RE.match(s)
    if not m or (m.group("a") is None and m.group("sign") is None):
        raise ValueError(f"cannot parse field element {text!r}")
    a = Fraction(m.group("a").replace(" ", "")) if m.group("a") else Fraction(0)
    b = Fraction(0)
    if m.group("sign"):
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("sign") == "-":
            b = -b
        tag = m.group("d")
        if tag not in (None, "D") and Fraction(tag) != _frac(d):
            raise ValueError(f"element {text!r} is not in Q(sqrt {d})")
    return QuadElem(a, b, d)


def format_quad(x: QuadElem) -> str:
    if x.b == 0:
        return str(x.a)
    sign = "+" if x.b > 0 else "-"
    return f"{x.a} {sign} {abs(x.b)} sqrt{x.d}"


# ---------------------------------------------------------------------------
# rational primes in a quadratic field


@dataclass(frozen=True)
class QuadraticOrderData:
    """Maximal order of Q(sqrt d): basis (1, omega), omega^2 = tr*omega - nm."""

    d: Fraction
    d0: int
    f: Fraction
    tr: int
    nm: int

    @property
    def fundamental_disc(self) -> int:
        return self.d0 if self.d0 % 4 == 1 else 4 * self.d0

    def coords(self, x: QuadElem) -> tuple[Fraction, Fraction]:
        """Coordinates (m, n) with x = m + n*omega."""
        bb = x.b * self.f  # x = a + bb*sqrt(d0)
        if self.d0 % 4 == 1:
            return x.a - bb, 2 * bb
        return x.a, bb

    def from_coords(self, m, n) -> QuadElem:
        m, n = _frac(m), _frac(n)
        if self.d0 % 4 == 1:
            return QuadElem(m + n / 2, n / 2 / self.f, self.d)
        return QuadElem(m, n / self.f, self.d)

    def omega(self) -> QuadElem:
        return self.from_coords(0, 1)

    def is_integral(self, x: QuadElem) -> bool:
        m, n = self.coords(x)
        return m.denominator == 1 and n.denominator == 1


@lru_cache(maxsize=None)
def order_data(d) -> QuadraticOrderData:
    d = _frac(d)
    d0, f = squarefree_part(d)
    if d0 == 1:
        raise ValueError(f"{d} is a rational square")
    if d0 % 4 == 1:
        return QuadraticOrderData(d, d0, f, 1, (1 - d0) // 4)
    return QuadraticOrderData(d, d0, f, 0, -d0)


def kronecker_kind(p: int, fund_disc: int) -> str:
    if fund_disc % p == 0:
        return "ramified"
    if p == 2:
        return "split" if fund_disc % 8 == 1 else "inert"
    return "split" if pow(fund_disc % p, (p - 1) // 2, p) == 1 else "inert"


@dataclass(frozen=True)
class PrimeSplit:
    prime: int
    kind: str
    ord: int = 0


def splitting_type(p: int, field_disc) -> PrimeSplit:
    """Decomposition of the rational prime p in Q(sqrt field_disc)."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    od = order_data(field_disc)
    return PrimeSplit(p, kronecker_kind(p, od.fundamental_disc))


def _hensel_root(tr: int, nm: int, p: int, prec: int) -> int:
    """A root of X^2 - tr X + nm modulo p^prec, lifted from a simple root mod p."""
    mod = p ** prec
    for r in range(p):
        if (r * r - tr * r + nm) % p == 0 and (2 * r - tr) % p:
            break
    else:
        raise ValueError("no simple root")
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        m = p ** k
        fr = (r * r - tr * r + nm) % m
        dfr = (2 * r - tr) % m
        r = (r - fr * pow(dfr, -1, m)) % m
    return r % mod


class QuadPrime:
    """A prime ideal of the maximal order of Q(sqrt d) lying over ell."""

    def __init__(self, d, ell: int, kind: str, index: int = 0):
        self.od = order_data(d)
        self.d = self.od.d
        self.ell = ell
        self.kind = kind
        self.index = index
        self.e = 2 if kind == "ramified" else 1
        self.f = 2 if kind == "inert" else 1
        self.norm = ell ** self.f
        self._roots: dict[int, int] = {}

    def __repr__(self):
        tag = f"{self.ell}" + (f"_{self.index}" if self.kind == "split" else "")
        return f"QuadPrime({tag}, {self.kind}, d={self.d})"

    def __eq__(self, other):
        return isinstance(other, QuadPrime) and (self.d, self.ell, self.index) == (other.d, other.ell, other.index)

    def __hash__(self):
        return hash((self.d, self.ell, self.index))

    @property
    def label(self) -> str:
        return f"{self.ell}" if self.kind != "split" else f"{self.ell}.{self.index}"

    def root(self, prec: int) -> int:
        """The image of omega in Z_ell / ell^prec for split primes."""
        if prec not in self._roots:
            r = _hensel_root(self.od.tr, self.od.nm, self.ell, prec)
            if self.index == 1:
                r = (self.od.tr - r) % self.ell ** prec
            self._roots[prec] = r
        return self._roots[prec]

    def _int_ord(self, m: int, n: int) -> int:
        ell = self.ell
        if self.kind == "inert":
            return min(vp(m, ell) if m else 10 ** 9, vp(n, ell) if n else 10 ** 9)
        nrm = m * m + self.od.tr * m * n + self.od.nm * n * n
        v = vp(nrm, ell)
        if self.kind == "ramified":
            return v
        prec = v + 1
        val = (m + n * self.root(prec)) % ell ** prec
        return vp(val, ell) if val else prec

    def ord(self, x: QuadElem) -> int | float:
        if not x:
            return math.inf
        m, n = self.od.coords(x)
        den = math.lcm(m.denominator, n.denominator)
        shift = self.e * vp(den, self.ell) if den > 1 else 0
        return self._int_ord(int(m * den), int(n * den)) - shift

    def uniformizer(self) -> QuadElem:
        od = self.od
        if self.kind != "ramified":
            return QuadElem(self.ell, 0, self.d)
        w = od.omega()
        # some element of small shape has valuation exactly one
        for cand in (w, w - 1, w + 1, w - 2, w + 2):
            if self.ord(cand) == 1:
                return cand
        raise AssertionError("no uniformizer found")

    def unit_part(self, x: QuadElem) -> tuple[int, QuadElem]:
        v = self.ord(x)
        pi = self.uniformizer()
        return v, x * pi ** (-v) if v else x

    def residue(self, u: QuadElem):
        """Residue class of a p-integral element: int mod ell, or (m, n) mod ell for inert primes."""
        m, n = self.od.coords(u)
        ell = self.ell
        if m.denominator % ell == 0 or n.denominator % ell == 0:
            # integral at this prime but with denominators divisible by ell
            # only when the other prime above ell contributes; clear via a
            # congruent element
            return self.residue(self.reduce_integral(u, 1))
        mi = m.numerator * pow(m.denominator, -1, ell) % ell
        ni = n.numerator * pow(n.denominator, -1, ell) % ell
        if self.kind == "inert":
            return (mi, ni)
        if self.kind == "split":
            return (mi + ni * self.root(1)) % ell
        # ramified: omega is congruent to the double root mod the prime
        r = next(r for r in range(ell) if (r * r - self.od.tr * r + self.od.nm) % ell == 0)
        return (mi + ni * r) % ell

    def reduce_integral(self, x: QuadElem, k: int) -> QuadElem:
        """An ell-integral element congruent to x modulo p^k (x integral at p)."""
        if self.ord(x) < 0:
            raise ValueError("element is not integral at this prime")
        if self.kind != "split":
            raise ValueError("denominators divisible by ell only occur for split primes")
        # x = y / ell^j with y integral; at this prime y is divisible by ell^j
        m, n = self.od.coords(x)
        den = math.lcm(m.denominator, n.denominator)
        j = vp(den, self.ell)
        rest = den // self.ell ** j
        prec = k + j + 2
        mod = self.ell ** prec
        val = (int(m * den) + int(n * den) * self.root(prec)) % mod
        val = val // self.ell ** j * pow(rest, -1, self.ell ** (prec - j)) % self.ell ** (prec - j)
        return QuadElem(val, 0, self.d)

    def residue_is_square(self, u: QuadElem) -> bool:
        """Quadratic character of the residue of a unit (odd residue characteristic)."""
        ell = self.ell
        r = self.residue(u)
        if self.kind == "inert":
            m, n = r
            nrm = (m * m + self.od.tr * m * n + self.od.nm * n * n) % ell
            return pow(nrm, (ell - 1) // 2, ell) == 1
        if r % ell == 0:
            raise ValueError("not a unit")
        return pow(r, (ell - 1) // 2, ell) == 1


def primes_above(ell: int, d) -> list[QuadPrime]:
    kind = splitting_type(ell, d).kind
    if kind == "split":
        return [QuadPrime(d, ell, kind, 0), QuadPrime(d, ell, kind, 1)]
    return [QuadPrime(d, ell, kind, 0)]


def integral_reps(prime: QuadPrime, level: int) -> list[QuadElem]:
    """Representatives of O / p^level (possibly redundant for ramified primes)."""
    d, ell = prime.d, prime.ell
    if prime.kind == "split":
        return [QuadElem(m, 0, d) for m in range(ell ** level)]
    od = prime.od
    if prime.kind == "inert":
        rng = range(ell ** level)
        return [od.from_coords(m, n) for m in rng for n in rng]
    rng = range(ell ** ((level + 1) // 2))
    return [od.from_coords(m, n) for m in rng for n in rng]


@lru_cache(maxsize=None)
def _square_classes(prime: QuadPrime, target: int) -> tuple[int, frozenset]:
    """Classes mod 2^N (coordinates) of unit squares modulo p^target, for a non-split prime above 2."""
    N = -(-target // prime.e)
    mod = 2 ** N
    od = prime.od
    fuzz = [(m, n) for m in range(mod) for n in range(mod)
            if prime.ord(od.from_coords(m, n)) >= target]
    out = set()
    for w in integral_reps(prime, prime.e + 1):
        if prime.ord(w) != 0:
            continue
        m, n = od.coords(w * w)
        m, n = int(m) % mod, int(n) % mod
        out.update(((m + x) % mod, (n + y) % mod) for x, y in fuzz)
    return N, frozenset(out)


def _is_square_mod(u: QuadElem, prime: QuadPrime, target: int) -> bool:
    """Whether the 2-adic unit u is congruent to a unit square modulo p^target."""
    if prime.kind == "split":
        # the completion is Q_2 and target is at most 3
        v = int(prime.reduce_integral(u, 3).a) % 8
        return v % 2 ** target == 1
    N, classes = _square_classes(prime, target)
    mod = 2 ** N
    m, n = prime.od.coords(u)
    key = (m.numerator * pow(m.denominator, -1, mod) % mod, n.numerator * pow(n.denominator, -1, mod) % mod)
    return key in classes


def is_local_square(x: QuadElem, prime: QuadPrime) -> bool:
    """Whether the nonzero element x is a square in the completion at prime."""
    v, u = prime.unit_part(x)
    if v % 2:
        return False
    if prime.ell != 2:
        return prime.residue_is_square(u)
    # u is a square iff u = w^2 mod 4*pi
    return _is_square_mod(u, prime, 2 * prime.e + 1)


def local_unramified_unit(u: QuadElem, prime: QuadPrime) -> bool:
    """For a 2-adic unit u: whether adjoining sqrt(u) gives an unramified extension."""
    return _is_square_mod(u, prime, 2 * prime.e)


def relative_splitting(prime: QuadPrime, delta: QuadElem) -> str:
    """Splitting of the prime of Q(sqrt d) in the extension by sqrt(delta)."""
    v, u = prime.unit_part(delta)
    if v % 2:
        return "ramified"
    if prime.ell != 2:
        return "split" if prime.residue_is_square(u) else "inert"
    if is_local_square(u, prime):
        return "split"
    return "inert" if local_unramified_unit(u, prime) else "ramified"


def hilbert_symbol(a: QuadElem, b: QuadElem, prime: QuadPrime) -> int:
    """Local Hilbert symbol (a, b) at a finite prime of a real quadratic field."""
    if not a or not b:
        raise ValueError("Hilbert symbol of zero")
    if prime.ell != 2:
        va, ua = prime.unit_part(a)
        vb, ub = prime.unit_part(b)
        # tame symbol: (-1)^{va vb} ua^vb / ub^va reduced and tested for squareness
        sign = -1 if (va * vb) % 2 and (prime.norm - 1) // 2 % 2 else 1
        unit = (ua ** vb) * (ub ** (-va))
        sq = prime.residue_is_square(unit)
        return sign * (1 if sq else -1)
    # residue characteristic 2: search for a point on a x^2 + b y^2 = z^2
    pi = prime.uniformizer()

    def normalize(x):
        v, _ = prime.unit_part(x)
        return x * pi ** (-(v - v % 2))

    a, b = normalize(a), normalize(b)
    if is_local_square(a, prime) or is_local_square(b, prime):
        return 1
    level = 2 * prime.e + 3
    reps = integral_reps(prime, level)
    for y in reps:
        for x, yy in ((QuadElem(1, 0, prime.d), y), (y * pi, QuadElem(1, 0, prime.d))):
            val = a * x * x + b * yy * yy
            if val and is_local_square(val, prime):
                return 1
    return -1


def real_hilbert_symbol(a: QuadElem, b: QuadElem, which: int) -> int:
    sa, sb = signs(a)[which], signs(b)[which]
    return -1 if sa < 0 and sb < 0 else 1


# ---------------------------------------------------------------------------
# counting ideals of given relative norm


def rho_ideal(valuations: dict) -> int:
    """Number of integral ideals of the quadratic extension with prescribed relative norm.

    ``valuations`` maps a key to ``(kind, ord)`` where kind is the splitting of
    that prime in the extension.
    """
    out = 1
    for kind, order in valuations.values():
        if order < 0:
            return 0
        if kind == "split":
            out *= order + 1
        elif kind == "inert":
            out *= (1 + (-1) ** order) // 2
        elif kind != "ramified":
            raise ValueError(f"unknown splitting kind {kind!r}")
    return out


# ---------------------------------------------------------------------------
# trace enumeration


@dataclass(frozen=True)
class TraceSupport:
    """The sqrt(d)-coefficient of t is restricted to offset + step*Z."""

    offset: Fraction = Fraction(0)
    step: Fraction = Fraction(1)


def enumerate_trace_t(m, support: TraceSupport | None, disc) -> list[QuadElem]:
    """All totally positive t = m/2 + s*sqrt(disc) with s in the support class."""
    m = _frac(m)
    disc = _frac(disc)
    support = support or TraceSupport()
    if m <= 0:
        return []
    half = m / 2
    step = support.step
    # |s| < m / (2 sqrt disc)  <=>  s^2 * disc < half^2
    bound = math.isqrt(int(half * half / (disc * step * step)) + 1) + 1
    k0 = math.floor(-support.offset / step)
    out = []
    for k in range(k0 - bound - 1, k0 + bound + 2):
        s = support.offset + k * step
        if s * s * disc < half * half:
            out.append(QuadElem(half, s, disc))
    return out


# ---------------------------------------------------------------------------
# CM fields and the reflex algebra


class CMField:
    """E = F(sqrt Delta) with F = Q(sqrt D) and Delta totally negative.

    The CM type is fixed by Im sigma_i(sqrt Delta) > 0 where sigma_1 restricts
    to sqrt D -> +sqrt D and sigma_2 to sqrt D -> -sqrt D.
    """

    def __init__(self, D: int, delta: QuadElem):
        self.D = D
        if delta.d != D:
            raise TypeError("Delta must lie in Q(sqrt D)")
        if not is_totally_negative(delta):
            raise ValueError("Delta must be totally negative")
        self.delta = delta
        self.delta_conj = delta.conj()
        self.Dtilde = delta.norm()
        self.Ft = order_data(self.Dtilde)
        # (sqrt Delta + sqrt Delta')^2 = tr Delta + 2 sqrt(Delta) sqrt(Delta'), and the
        # product of the two square roots is -sqrt(Dtilde) under the CM type
        self.delta_tilde = QuadElem(delta.trace(), -2, self.Dtilde)

    def elem(self, u, v=0) -> "CMElem":
        u = u if isinstance(u, QuadElem) else QuadElem(u, 0, self.D)
        v = v if isinstance(v, QuadElem) else QuadElem(v, 0, self.D)
        return CMElem(u, v, self)

    def F(self, a=0, b=0) -> QuadElem:
        return QuadElem(a, b, self.D)

    def Ft_elem(self, a=0, b=0) -> QuadElem:
        return QuadElem(a, b, self.Dtilde)

    def sqrt_delta_images(self, prec=None):
        d1, d2 = self.delta.embeddings(prec)
        with mpmath.workprec(prec or mpmath.mp.prec):
            return mpmath.mpc(0, mpmath.sqrt(-d1)), mpmath.mpc(0, mpmath.sqrt(-d2))

    def disc_E(self) -> Fraction:
        return Fraction(self.D) ** 2 * self.Dtilde


class CMElem:
    """u + v*sqrt(Delta) with u, v in F."""

    __slots__ = ("u", "v", "field")

    def __init__(self, u: QuadElem, v: QuadElem, field: CMField):
        self.u, self.v, self.field = u, v, field

    def _coerce(self, other):
        if isinstance(other, CMElem):
            return other
        if isinstance(other, (int, Fraction, QuadElem)):
            return self.field.elem(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return CMElem(self.u + o.u, self.v + o.v, self.field)

    __radd__ = __add__

    def __neg__(self):
        return CMElem(-self.u, -self.v, self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        dl = self.field.delta
        return CMElem(self.u * o.u + dl * self.v * o.v, self.u * o.v + self.v * o.u, self.field)

    __rmul__ = __mul__

    def conj(self) -> "CMElem":
        return CMElem(self.u, -self.v, self.field)

    def rel_norm(self) -> QuadElem:
        return self.u * self.u - self.field.delta * self.v * self.v

    def inverse(self) -> "CMElem":
        n = self.rel_norm()
        if not n:
            raise ZeroDivisionError("inverse of zero")
        return CMElem(self.u / n, -self.v / n, self.field)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __eq__(self, other):
        if not isinstance(other, CMElem):
            return NotImplemented
        return self.u == other.u and self.v == other.v

    def __hash__(self):
        return hash((self.u, self.v))

    def __bool__(self):
        return bool(self.u) or bool(self.v)

    def __repr__(self):
        return f"CMElem({format_quad(self.u)}, {format_quad(self.v)})"

    def abs_norm(self) -> Fraction:
        return self.rel_norm().norm()

    def sigma(self, prec=None):
        """(sigma_1(z), sigma_2(z)) as complex numbers."""
        s1, s2 = self.field.sqrt_delta_images(prec)
        u1, u2 = self.u.embeddings(prec)
        v1, v2 = self.v.embeddings(prec)
        return u1 + v1 * s1, u2 + v2 * s2

    def sigma1_K(self) -> "ReflexElem":
        return ReflexElem(self.u, self.v, self.field.F(), self.field.F(), self.field)

    def sigma2_K(self) -> "ReflexElem":
        return ReflexElem(self.u.conj(), self.field.F(), self.v.conj(), self.field.F(), self.field)


class ReflexElem:
    """c0 + c1 X + c2 Y + c3 XY in F[X, Y]/(X^2 - Delta, Y^2 - Delta').

    X and Y stand for sigma_1(sqrt Delta) and sigma_2(sqrt Delta); F sits inside
    through its first real embedding. Elements of the reflex field have the
    shape q0 + f X + f' Y + q3 XY with rational q0, q3.
    """

    __slots__ = ("c", "field")

    def __init__(self, c0, c1, c2, c3, field: CMField):
        self.c = (c0, c1, c2, c3)
        self.field = field

    @classmethod
    def from_F(cls, x: QuadElem, field: CMField) -> "ReflexElem":
        z = field.F()
        return cls(x, z, z, z, field)

    def __add__(self, other):
        if isinstance(other, QuadElem):
            other = ReflexElem.from_F(other, self.field)
        return ReflexElem(*(x + y for x, y in zip(self.c, other.c)), self.field)

    def __sub__(self, other):
        if isinstance(other, QuadElem):
            other = ReflexElem.from_F(other, self.field)
        return ReflexElem(*(x - y for x, y in zip(self.c, other.c)), self.field)

    def __neg__(self):
        return ReflexElem(*(-x for x in self.c), self.field)

    def __mul__(self, other):
        if isinstance(other, (QuadElem, int, Fraction)):
            return ReflexElem(*(x * other for x in self.c), self.field)
        a0, a1, a2, a3 = self.c
        b0, b1, b2, b3 = other.c
        dl, dc = self.field.delta, self.field.delta_conj
        c0 = a0 * b0 + dl * a1 * b1 + dc * a2 * b2 + dl * dc * a3 * b3
        c1 = a0 * b1 + a1 * b0 + dc * (a2 * b3 + a3 * b2)
        c2 = a0 * b2 + a2 * b0 + dl * (a1 * b3 + a3 * b1)
        c3 = a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1
        return ReflexElem(c0, c1, c2, c3, self.field)

    __rmul__ = __mul__

    def conj(self) -> "ReflexElem":
        c0, c1, c2, c3 = self.c
        return ReflexElem(c0, -c1, -c2, c3, self.field)

    def swap_sigma(self) -> "ReflexElem":
        """The automorphism fixing F and Y and negating X."""
        c0, c1, c2, c3 = self.c
        return ReflexElem(c0, -c1, c2, -c3, self.field)

    def __eq__(self, other):
        return isinstance(other, ReflexElem) and self.c == other.c

    def __bool__(self):
        return any(bool(x) for x in self.c)

    def __repr__(self):
        return "ReflexElem(" + ", ".join(format_quad(x) for x in self.c) + ")"

    def in_reflex(self) -> bool:
        c0, c1, c2, c3 = self.c
        return c0.is_rational() and c3.is_rational() and c2 == c1.conj()

    def rational_coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Coordinates (q0, f_a, f_b, q3) of an element q0 + fX + f'Y + q3 XY."""
        if not self.in_reflex():
            raise ValueError("element is not in the reflex field")
        c0, c1, _, c3 = self.c
        return c0.a, c1.a, c1.b, c3.a

    def to_real_reflex(self) -> QuadElem:
        """View an element q0 + q3 XY as q0 - q3 sqrt(Dtilde)."""
        c0, c1, c2, c3 = self.c
        if c1 or c2 or not c0.is_rational() or not c3.is_rational():
            raise ValueError("element is not in the real reflex field")
        return QuadElem(c0.a, -c3.a, self.field.Dtilde)

    def value(self, prec=None):
        """Complex value under the fixed embedding."""
        s1, s2 = self.field.sqrt_delta_images(prec)
        vals = [x.embeddings(prec)[0] for x in self.c]
        return vals[0] + vals[1] * s1 + vals[2] * s2 + vals[3] * s1 * s2
