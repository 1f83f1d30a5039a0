"""Truncated q-series with rational exponents and log-linear coefficients."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class LogLinear:
    """c0 + sum_p c_p log p + sum_s c_s [s].

    The bracketed symbols are formal placeholders for quantities the engine
    does not compute (constant terms of Eisenstein series); they let callers
    separate the part of a result that depends on them.
    """

    __slots__ = ("c0", "terms", "symbols")

    def __init__(self, c0=0, terms: Mapping[int, Fraction] | None = None,
                 symbols: Mapping[str, Fraction] | None = None):
        self.c0 = _frac(c0)
        self.terms = {p: _frac(c) for p, c in (terms or {}).items() if c}
        self.symbols = {s: _frac(c) for s, c in (symbols or {}).items() if c}

    @classmethod
    def log(cls, p: int, coeff=1) -> "LogLinear":
        return cls(0, {p: coeff})

    @classmethod
    def symbol(cls, name: str, coeff=1) -> "LogLinear":
        return cls(0, None, {name: coeff})

    def _merge(self, other: "LogLinear", sign: int) -> "LogLinear":
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = terms.get(p, 0) + sign * c
        syms = dict(self.symbols)
        for s, c in other.symbols.items():
            syms[s] = syms.get(s, 0) + sign * c
        return LogLinear(self.c0 + sign * other.c0, terms, syms)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogLinear(other)
        if not isinstance(other, LogLinear):
            return NotImplemented
        return self._merge(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogLinear(other)
        return self._merge(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k) -> "LogLinear":
        k = _frac(k)
        return LogLinear(self.c0 * k, {p: c * k for p, c in self.terms.items()},
                         {s: c * k for s, c in self.symbols.items()})

    def is_rational(self) -> bool:
        return not self.terms and not self.symbols

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, LogLinear):
            if other.is_rational():
                return self.scale(other.c0)
            if self.is_rational():
                return other.scale(self.c0)
            raise ValueError("product of two transcendental log-linear values")
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogLinear(other)
        if not isinstance(other, LogLinear):
            return NotImplemented
        return (self.c0, self.terms, self.symbols) == (other.c0, other.terms, other.symbols)

    def __hash__(self):
        return hash((self.c0, tuple(sorted(self.terms.items())), tuple(sorted(self.symbols.items()))))

    def __bool__(self):
        return bool(self.c0) or bool(self.terms) or bool(self.symbols)

    def symbolic_part(self) -> "LogLinear":
        return LogLinear(0, None, self.symbols)

    def without_symbols(self) -> "LogLinear":
        return LogLinear(self.c0, self.terms)

    def substitute(self, values: Mapping[str, "LogLinear"]) -> "LogLinear":
        out = LogLinear(self.c0, self.terms)
        for s, c in self.symbols.items():
            out = out + (values[s] * c if s in values else LogLinear.symbol(s, c))
        return out

    def to_float(self, prec: int = 53, symbols: Mapping[str, float] | None = None) -> float:
        if self.symbols and not symbols:
            raise ValueError(f"unresolved symbols: {sorted(self.symbols)}")
        with mpmath.workprec(prec):
            total = mpmath.mpf(self.c0.numerator) / self.c0.denominator
            for p in sorted(self.terms):
                c = self.terms[p]
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.log(p)
            for s, c in sorted(self.symbols.items()):
                total += mpmath.mpf(c.numerator) / c.denominator * symbols[s]
            return total

    def __float__(self):
        return float(self.to_float())

    def __repr__(self):
        return f"LogLinear({self})"

    def __str__(self):
        parts = []
        if self.c0 or not (self.terms or self.symbols):
            parts.append(str(self.c0))
        parts += [f"{c}*log({p})" for p, c in sorted(self.terms.items())]
        parts += [f"{c}*[{s}]" for s, c in sorted(self.symbols.items())]
        return " + ".join(parts)

    def serialize(self) -> str:
        logs = ",".join(f"{p}:{c}" for p, c in sorted(self.terms.items()))
        return f"{self.c0}\t{logs}"


def as_loglinear(c) -> LogLinear:
    return c if isinstance(c, LogLinear) else LogLinear(c)


class FourierSeries:
    """sum_e c_e q^e over exponents e in (1/denom)Z with e < trunc."""

    __slots__ = ("denom", "coeffs", "trunc")

    def __init__(self, coeffs: Mapping | None = None, trunc=3, denom: int | None = None):
        self.trunc = _frac(trunc)
        clean = {}
        for e, c in (coeffs or {}).items():
            e = _frac(e)
            if e < self.trunc and c:
                clean[e] = c
        self.coeffs = clean
        need = math.lcm(1, *(e.denominator for e in clean))
        self.denom = math.lcm(denom or 1, need)

    @classmethod
    def monomial(cls, exponent, coeff=1, trunc=3) -> "FourierSeries":
        return cls({_frac(exponent): _frac(coeff) if not isinstance(coeff, LogLinear) else coeff}, trunc)

    def __repr__(self):
        head = ", ".join(f"{c}q^{e}" for e, c in sorted(self.coeffs.items())[:6])
        return f"FourierSeries({head}{', ...' if len(self.coeffs) > 6 else ''}; trunc={self.trunc})"

    def __getitem__(self, e):
        return self.coeffs.get(_frac(e), 0)

    def exponents(self) -> list[Fraction]:
        return sorted(self.coeffs)

    def leading(self) -> tuple[Fraction, object]:
        e = min(self.coeffs)
        return e, self.coeffs[e]

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        t = min(self.trunc, other.trunc)
        a = {e: c for e, c in self.coeffs.items() if e < t}
        b = {e: c for e, c in other.coeffs.items() if e < t}
        return a == b

    def __add__(self, other):
        if not isinstance(other, FourierSeries):
            other = FourierSeries({0: other}, self.trunc)
        trunc = min(self.trunc, other.trunc)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return FourierSeries(out, trunc, math.lcm(self.denom, other.denom))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "FourierSeries":
        return FourierSeries({e: c * k for e, c in self.coeffs.items()}, self.trunc, self.denom)

    def shift(self, exponent) -> "FourierSeries":
        exponent = _frac(exponent)
        return FourierSeries({e + exponent: c for e, c in self.coeffs.items()},
                             self.trunc + exponent, self.denom)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, LogLinear)):
            return self.scale(other)
        if not isinstance(other, FourierSeries):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            lo = min(self.trunc, other.trunc)
            return FourierSeries({}, lo)
        # the product is known below the smaller of trunc_f + min(g), trunc_g + min(f)
        trunc = min(self.trunc + min(other.coeffs), other.trunc + min(self.coeffs))
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e < trunc:
                    v = c1 * c2
                    out[e] = out[e] + v if e in out else v
        return FourierSeries(out, trunc, math.lcm(self.denom, other.denom))

    __rmul__ = __mul__

    def inverse(self) -> "FourierSeries":
        """Reciprocal of a series with rational coefficients and nonzero leading term."""
        e0, c0 = self.leading()
        c0 = _frac(c0)
        step = Fraction(1, self.denom)
        rel = self.trunc - e0  # relative precision of the normalized series
        n_terms = math.ceil(rel / step)
        g = [Fraction(0)] * n_terms
        for e, c in self.coeffs.items():
            g[int((e - e0) / step)] = _frac(c) / c0
        h = [Fraction(0)] * n_terms
        h[0] = Fraction(1)
        for n in range(1, n_terms):
            h[n] = -sum(g[k] * h[n - k] for k in range(1, n + 1) if g[k])
        coeffs = {-e0 + n * step: h[n] / c0 for n in range(n_terms) if h[n]}
        return FourierSeries(coeffs, -e0 + rel, self.denom)

    def map_exponents_mod1(self) -> set[Fraction]:
        return {e - math.floor(e) for e in self.coeffs}

    def serialize(self) -> str:
        return "\n".join(f"{e}\t{as_loglinear(c).serialize()}" for e, c in sorted(self.coeffs.items()))

    @classmethod
    def deserialize(cls, text: str, trunc) -> "FourierSeries":
        coeffs = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            e, c0, logs = (line.split("\t") + [""])[:3]
            terms = {}
            if logs:
                for item in logs.split(","):
                    p, c = item.split(":")
                    terms[int(p)] = Fraction(c)
            coeffs[Fraction(e)] = LogLinear(Fraction(c0), terms)
        return cls(coeffs, trunc)


def constant_term(f: FourierSeries) -> LogLinear:
    return as_loglinear(f[0])


def _int_range_for(bound: Fraction) -> Iterable[int]:
    n = math.isqrt(int(bound)) + 2
    return range(-n, n + 1)


def classical_theta(kind: str, trunc=3) -> FourierSeries:
    """The one-variable thetas in q = e(tau).

    ``"theta"``: sum q^{n^2/2}; ``"theta_tilde"``: sum (-1)^n q^{n^2/2};
    ``"theta_tilde2"``: sum q^{(n+1/2)^2/2}.
    """
    trunc = _frac(trunc)
    coeffs: dict[Fraction, Fraction] = {}
    for n in _int_range_for(2 * trunc):
        if kind == "theta":
            e, c = Fraction(n * n, 2), 1
        elif kind == "theta_tilde":
            e, c = Fraction(n * n, 2), (-1) ** (n % 2)
        elif kind == "theta_tilde2":
            e, c = Fraction((2 * n + 1) ** 2, 8), 1
        else:
            raise ValueError(f"unknown theta kind {kind!r}")
        if e < trunc:
            coeffs[e] = coeffs.get(e, 0) + c
    return FourierSeries(coeffs, trunc, 8 if kind == "theta_tilde2" else 2)


def build_uvw(trunc=3) -> tuple[FourierSeries, FourierSeries, FourierSeries]:
    """The three weight -1/2 building blocks of the input forms."""
    trunc = _frac(trunc)
    margin = trunc + 1
    inv = classical_theta("theta", margin).inverse()
    inv_t = classical_theta("theta_tilde", margin).inverse()
    half = Fraction(1, 2)
    u = (inv + inv_t).scale(half)
    v = (inv - inv_t).scale(half)
    w = classical_theta("theta_tilde2", margin + Fraction(1, 8)).inverse().scale(2)
    return (FourierSeries(u.coeffs, trunc, 2), FourierSeries(v.coeffs, trunc, 2),
            FourierSeries(w.coeffs, trunc, 8))


def theta0_series(t_coset, D: int, trunc=3) -> FourierSeries:
    """Theta series sum_{t in mu0 + Z} q^{2 D t^2} of a coset of the rank-one lattice."""
    mu0 = _frac(t_coset) % 1
    trunc = _frac(trunc)
    coeffs: dict[Fraction, Fraction] = {}
    bound = math.isqrt(int(trunc / (2 * D)) + 1) + 2
    for n in range(-bound, bound + 1):
        t = mu0 + n
        e = 2 * D * t * t
        if e < trunc:
            coeffs[e] = coeffs.get(e, 0) + 1
    return FourierSeries(coeffs, trunc, 8 * D)
