"""Fourier coefficients of the central derivative of the incoherent Hilbert Eisenstein series.

Local factors at primes of the real reflex field are either the closed forms
for unramified odd primes where the lattice is a unimodular norm form, or
brute-force representation densities of the coset mu1 + M computed by lifting
solutions level by level.  The additive character is the standard one,
psi_Q composed with the trace, so the density filtration at p is p^k times the
inverse different.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from sympy import factorint

from .geometry import CMInput
from .lattices import CosetM, ReflexForm, all_cosets_M, q_M
from .nfield import (QuadElem, QuadPrime, TraceSupport, enumerate_trace_t, hilbert_symbol,
                     is_totally_positive, order_data, primes_above, relative_splitting, vp)
from .qseries import FourierSeries, LogLinear


class DensityError(ArithmeticError):
    """A local count failed to stabilize; ``trace`` holds (k, value) pairs."""

    def __init__(self, msg, trace=()):
        super().__init__(f"{msg}; trace={list(trace)}")
        self.trace = list(trace)


class MissingA0Error(LookupError):
    pass


@dataclass(frozen=True)
class DiffSet:
    primes: tuple[QuadPrime, ...]
    symbols: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.primes)


@dataclass(frozen=True)
class TwoAdicCase:
    case: str
    kinds_Ft: str
    kinds_E: tuple[str, ...]


def _prime_factors(x: Fraction) -> set[int]:
    out = set()
    for n in (abs(x.numerator), x.denominator):
        if n > 1:
            out |= set(factorint(n))
    return out


def _quad_primes(x: QuadElem) -> set[int]:
    if not x:
        return set()
    out = _prime_factors(x.norm())
    out |= _prime_factors(Fraction(math.lcm(x.a.denominator, x.b.denominator)))
    return out


# ---------------------------------------------------------------------------
# polynomial model of q on a coset, reduced at a rational prime


class _LocalModel:
    """f(y) = ell^h (q(mu1 + y) - t) on Z_ell^4, written in two congruence coordinates.

    ``h`` makes the non-constant part integral.  The coordinates (c1, c2) are
    chosen so that ord_p(f) >= T for the primes p above ell becomes a pair of
    congruences c1 = 0 mod ell^K1, c2 = 0 mod ell^K2.  Each coordinate is then
    divided by the exact power ell^gamma_i of its non-constant part, which keeps
    the Jacobian of the lifted system as large as possible for the Hensel step.
    """

    def __init__(self, form: ReflexForm, mu1: CosetM, ell: int):
        self.ell = ell
        self.od = order_data(form.d)
        self.primes = primes_above(ell, form.d)
        self.kind = self.primes[0].kind
        self.mu1 = mu1
        G = form.gram
        mu = [Fraction(x) for x in mu1.as_tuple()]
        lin = [sum((G[i][j] * (2 * mu[j]) for j in range(4)), QuadElem(0, 0, form.d)) for i in range(4)]
        quad = {(i, j): (G[i][j] * (1 if i == j else 2)) for i in range(4) for j in range(i, 4)}
        self.q_mu = form(mu)
        den_exp = 0
        for c in lin + list(quad.values()):
            m, n = self.od.coords(c)
            den_exp = max(den_exp, vp(m.denominator, ell) if m else 0, vp(n.denominator, ell) if n else 0)
        self.h = den_exp
        self.P = max(8, int(30 * math.log(2) / math.log(ell)))
        self.M = ell ** self.P
        self._coord_setup()
        lin_c = [self._to_coords(c) for c in lin]
        quad_c = {k: self._to_coords(v) for k, v in quad.items()}
        # one polynomial (linear, quadratic) per congruence coordinate
        self.polys = [([c[i] for c in lin_c], {k: c[i] for k, c in quad_c.items() if c[i]}) for i in range(2)]
        self.digits = np.array(list(product(range(ell), repeat=4)), dtype=np.int64)

    def _int_mod(self, x: Fraction) -> int:
        if x.denominator % self.ell == 0:
            raise ValueError("coefficient is not integral after scaling")
        return x.numerator * pow(x.denominator, -1, self.M) % self.M

    def _coord_setup(self):
        ell, M, od = self.ell, self.M, self.od
        if self.kind == "inert":
            self.cmat = ((1, 0), (0, 1))
        elif self.kind == "ramified":
            r = next(r for r in range(ell * ell) if vp(r * r - od.tr * r + od.nm, ell) == 1)
            self.cmat = ((1, r), (0, 1))  # f = (A + r B) + B (omega - r)
        else:
            rho = self.primes[0].root(self.P)
            self.cmat = ((1, rho), (1, (od.tr - rho) % M))

    def _to_coords(self, x: QuadElem) -> tuple[int, int]:
        m, n = self.od.coords(x * self.ell ** self.h)
        A, B = self._int_mod(m), self._int_mod(n)
        (a1, b1), (a2, b2) = self.cmat
        return (a1 * A + b1 * B) % self.M, (a2 * A + b2 * B) % self.M

    def constant(self, t: QuadElem) -> tuple[int, int] | None:
        """Constant term in congruence coordinates, or None if it is not ell-integral."""
        m, n = self.od.coords((self.q_mu - t) * self.ell ** self.h)
        if m.denominator % self.ell == 0 or n.denominator % self.ell == 0:
            return None
        return self._to_coords((self.q_mu - t))

    def targets(self, ords: dict[int, int]) -> tuple[int, int]:
        """Coordinate exponents (K1, K2) for the conditions ord_p(f) >= ords[index of p]."""
        if self.kind == "inert":
            T = max(0, ords[0])
            return T, T
        if self.kind == "ramified":
            T = max(0, ords[0])
            return (T + 1) // 2, T // 2
        return max(0, ords[0]), max(0, ords[1])

    # recursive counting --------------------------------------------------

    def _residues(self, lin, quad, mod_ell: bool = True) -> np.ndarray:
        """Values of the non-constant part at every digit vector, reduced mod ell."""
        ell, Y = self.ell, self.digits
        v = np.zeros(len(Y), dtype=np.int64)
        for i in range(4):
            if lin[i] % ell:
                v += (lin[i] % ell) * Y[:, i]
        for (i, j), co in quad.items():
            if co % ell:
                v += (co % ell) * Y[:, i] * Y[:, j]
        return v % ell

    def _gradient_rows(self, lin, quad, y0) -> list[int]:
        ell = self.ell
        g = [lin[i] for i in range(4)]
        for (i, j), co in quad.items():
            if i == j:
                g[i] += 2 * co * y0[i]
            else:
                g[i] += co * y0[j]
                g[j] += co * y0[i]
        return [x % ell for x in g]

    def _rank_ok(self, rows: list[list[int]]) -> bool:
        ell = self.ell
        if len(rows) == 1:
            return any(rows[0])
        r1, r2 = rows
        return any((r1[i] * r2[j] - r1[j] * r2[i]) % ell for i in range(4) for j in range(i + 1, 4))

    def _node(self, coords, parity=None) -> Fraction:
        """Measure of y in Z_ell^4 on which every (const, lin, quad, prec, K) coordinate vanishes mod ell^K."""
        ell = self.ell
        active = []
        for const, lin, quad, prec, K in coords:
            if K <= 0:
                continue
            vals = [vp(x % ell ** prec, ell) if x % ell ** prec else prec for x in list(lin) + list(quad.values())]
            g = min(vals, default=prec)
            if K <= g:
                if const % ell ** K:
                    return Fraction(0)
                continue
            if const % ell ** g:
                return Fraction(0)
            e = ell ** g
            active.append((const // e, [x // e for x in lin], {k: v // e for k, v in quad.items()}, prec - g, K - g))
        Y = self.digits
        if parity is not None:
            mask = Y.sum(axis=1) % 2 == parity
        else:
            mask = np.ones(len(Y), dtype=bool)
        if not active:
            return Fraction(int(mask.sum()), ell ** 4)
        for const, lin, quad, _, _ in active:
            mask &= (self._residues(lin, quad) + const) % ell == 0
        total = Fraction(0)
        hensel = Fraction(1, ell ** (4 + sum(K - 1 for *_, K in active)))
        for y0 in Y[mask]:
            y0 = [int(v) for v in y0]
            rows = [self._gradient_rows(lin, quad, y0) for _, lin, quad, _, _ in active]
            if self._rank_ok(rows):
                total += hensel
                continue
            # substitute y = y0 + ell y' and recurse
            child = []
            for const, lin, quad, prec, K in active:
                val = const + sum(lin[i] * y0[i] for i in range(4)) + sum(co * y0[i] * y0[j] for (i, j), co in quad.items())
                grad = [lin[i] for i in range(4)]
                for (i, j), co in quad.items():
                    if i == j:
                        grad[i] += 2 * co * y0[i]
                    else:
                        grad[i] += co * y0[j]
                        grad[j] += co * y0[i]
                mod = ell ** prec
                child.append((val % mod, [ell * x % mod for x in grad],
                              {k: ell * ell * v % mod for k, v in quad.items()}, prec, K))
            total += self._node(child) / ell ** 4
        return total

    def probability(self, const, K1: int, K2: int, parity: int | None = None) -> Fraction:
        """Measure of y in Z_ell^4 with c1(y) = 0 mod ell^K1 and c2(y) = 0 mod ell^K2."""
        if parity is not None and self.ell != 2:
            raise ValueError("parity classes are defined at 2 only")
        if max(K1, K2) > self.P - 2:
            raise DensityError(f"required precision {max(K1, K2)} exceeds working precision {self.P}")
        coords = [(const[i], self.polys[i][0], self.polys[i][1], self.P, K)
                  for i, K in enumerate((K1, K2))]
        return self._node(coords, parity)


# ---------------------------------------------------------------------------
# the engine


class EisensteinData:
    """Everything needed to evaluate a(t, phi_mu1) for one CM input."""

    def __init__(self, cm: CMInput):
        self.cm = cm
        self.field = cm.field
        self.form = ReflexForm(cm.alpha, cm.lattice_beta())
        self.d = self.form.d
        self.od = order_data(self.d)
        self.delta_t = self.field.delta_tilde
        self.scale = self.form.scale
        self.sqrt_d = QuadElem(0, 1, self.d)
        self.bad = self._bad_primes()
        self._models: dict = {}
        self._cache: dict = {}

    def _bad_primes(self) -> tuple[int, ...]:
        bad = {2} | _prime_factors(Fraction(self.cm.D)) | _prime_factors(Fraction(self.od.fundamental_disc))
        bad |= _prime_factors(self.delta_t.norm())
        bad |= _prime_factors(Fraction(self.scale))
        for row in self.form.gram:
            for g in row:
                bad |= _quad_primes(g)
        return tuple(sorted(bad))

    def model(self, mu1: CosetM, ell: int) -> _LocalModel:
        key = (mu1, ell)
        if key not in self._models:
            self._models[key] = _LocalModel(self.form, mu1, ell)
        return self._models[key]

    # global data -----------------------------------------------------------

    def norm_target(self, t: QuadElem) -> QuadElem:
        """t sqrt(Dt) / scale: t is a value of q iff this is a relative norm."""
        return t * self.sqrt_d / self.scale

    def candidate_primes(self, t: QuadElem) -> list[int]:
        return sorted(set(self.bad) | _quad_primes(t))

    def diff_set(self, t: QuadElem) -> DiffSet:
        if not is_totally_positive(t):
            raise ValueError("t must be totally positive")
        a = self.norm_target(t)
        out, symbols = [], {}
        for ell in self.candidate_primes(t):
            for p in primes_above(ell, self.d):
                s = hilbert_symbol(a, self.delta_t, p)
                symbols[p] = s
                if s == -1:
                    out.append(p)
        if len(out) % 2 == 0:
            raise ArithmeticError(f"even Diff set {out} for t = {t}: Hilbert reciprocity violated")
        return DiffSet(tuple(out), symbols)

    def split_kind(self, p: QuadPrime) -> str:
        return relative_splitting(p, self.delta_t)

    def local_L(self, p: QuadPrime) -> Fraction:
        kind = self.split_kind(p)
        if kind == "ramified":
            return Fraction(1)
        chi = 1 if kind == "split" else -1
        return 1 / (1 - Fraction(chi, p.norm))

    def different_ord(self, p: QuadPrime) -> int:
        return vp(self.od.fundamental_disc, p.ell) if p.kind == "ramified" else 0

    # generic primes ---------------------------------------------------------

    def whittaker_generic(self, t: QuadElem, p: QuadPrime) -> tuple[Fraction, Fraction]:
        """(value, derivative coefficient of log N(p)) for a good prime."""
        if p.ell in self.bad:
            raise ValueError(f"{p} needs the density path")
        kind = self.split_kind(p)
        n = p.ord(self.norm_target(t))
        if n < 0:
            return Fraction(0), Fraction(0)
        if kind == "split":
            return Fraction(1 + n), Fraction(0)
        if kind == "inert":
            if n % 2 == 0:
                return Fraction(1), Fraction(0)
            return Fraction(0), Fraction(1 + n, 2)
        raise ValueError(f"{p} ramifies in the extension and must use the density path")

    # density path -----------------------------------------------------------

    def _ords(self, mdl: _LocalModel, k_by_prime: list[int]) -> dict[int, int]:
        """Targets for ord_p(f) from targets for ord_p(q - t) relative to p^k times the inverse different."""
        return {i: k - self.different_ord(p) + p.e * mdl.h for i, (p, k) in enumerate(zip(mdl.primes, k_by_prime))}

    def density_trace(self, t: QuadElem, mu1: CosetM, ell: int, ks, parity=None) -> list[Fraction]:
        """N(ell^k) Prob(q - t in ell^k times the inverse different) for each k in ks."""
        mdl = self.model(mu1, ell)
        const = mdl.constant(t)
        out = []
        for k in ks:
            if const is None:
                out.append(Fraction(0))
                continue
            K1, K2 = mdl.targets(self._ords(mdl, [p.e * k for p in mdl.primes]))
            out.append(Fraction(ell) ** (2 * k) * mdl.probability(const, K1, K2, parity))
        return out

    def local_value(self, t: QuadElem, mu1: CosetM, ell: int, parity=None, max_k=16) -> Fraction:
        """Normalized local value at ell (product over the primes above ell) by stabilized counting."""
        mdl = self.model(mu1, ell)
        if mdl.constant(t) is None:
            return Fraction(0)
        depth = max((max(0, p.ord(t)) + p.e - 1) // p.e for p in mdl.primes)
        k0 = max(1, depth + mdl.h + 1)
        trace = []
        k = k0
        while k <= max_k:
            vals = self.density_trace(t, mu1, ell, [k, k + 1, k + 2], parity)
            trace += list(zip([k, k + 1, k + 2], vals))
            if vals[0] == vals[1] == vals[2]:
                L = math.prod((self.local_L(p) for p in mdl.primes), start=Fraction(1))
                return vals[0] * L
            k += 1
        raise DensityError(f"local density at {ell} did not stabilize for t = {t}", trace)

    def local_derivative(self, t: QuadElem, mu1: CosetM, p0: QuadPrime, parity=None, max_k=40) -> Fraction:
        """Coefficient of log N(p0) in the derivative at p0 (times the values at the other primes above ell)."""
        ell = p0.ell
        mdl = self.model(mu1, ell)
        const = mdl.constant(t)
        if const is None:
            return Fraction(0)
        idx = mdl.primes.index(p0)
        others = [i for i in range(len(mdl.primes)) if i != idx]
        total = Fraction(0)
        for k in range(0, max_k):
            if others:
                V = self._joint_limit(t, mdl, const, idx, k, parity)
            else:
                ords = self._ords(mdl, [k])
                V = mdl.probability(const, *mdl.targets(ords), parity)
            if V == 0:
                L = math.prod((self.local_L(p) for p in mdl.primes), start=Fraction(1))
                return total * L
            total += Fraction(p0.norm) ** k * V
        raise DensityError(f"derivative sum at {p0} did not terminate for t = {t}")

    def _joint_limit(self, t, mdl, const, idx, k, parity, max_k=16) -> Fraction:
        other = 1 - idx
        p_other = mdl.primes[other]
        trace = []
        prev = None
        depth = max(0, p_other.ord(t)) + mdl.h + 1
        for k2 in range(depth, max_k):
            ks = [0, 0]
            ks[idx], ks[other] = k, k2
            val = Fraction(p_other.norm) ** k2 * mdl.probability(const, *mdl.targets(self._ords(mdl, ks)), parity)
            trace.append((k2, val))
            if prev is not None and val == prev[0] == prev[1]:
                return val
            prev = (val, prev[0] if prev else None)
        raise DensityError("joint density did not stabilize", trace)

    # coefficients -----------------------------------------------------------

    def in_support(self, t: QuadElem, mu1: CosetM) -> bool:
        """Trace congruence: tr t must agree with Q_M(mu1) modulo 1."""
        return (t.trace() - q_M(*mu1.as_tuple(), mu1.D)).denominator == 1

    def coeff_a(self, t: QuadElem, mu1: CosetM) -> LogLinear:
        key = (mu1, t)
        if key in self._cache:
            return self._cache[key]
        val = self._coeff_a(t, mu1)
        self._cache[key] = val
        return val

    def _coeff_a(self, t: QuadElem, mu1: CosetM) -> LogLinear:
        if not is_totally_positive(t) or not self.in_support(t, mu1):
            return LogLinear()
        # a value outside the coset's value set at a bad prime kills everything
        for ell in self.bad:
            if self.model(mu1, ell).constant(t) is None:
                return LogLinear()
        diff = self.diff_set(t)
        if len(diff) > 1:
            return LogLinear()
        p0 = diff.primes[0]
        coeff = Fraction(-4)
        done_ells = set()
        if p0.ell in self.bad:
            coeff *= self.local_derivative(t, mu1, p0)
            done_ells.add(p0.ell)
        else:
            coeff *= self.whittaker_generic(t, p0)[1]
        if coeff == 0:
            return LogLinear()
        for ell in self.candidate_primes(t):
            if ell in done_ells:
                continue
            if ell in self.bad:
                coeff *= self.local_value(t, mu1, ell)
            else:
                for p in primes_above(ell, self.d):
                    if p != p0:
                        coeff *= self.whittaker_generic(t, p)[0]
            if coeff == 0:
                return LogLinear()
        return LogLinear.log(p0.ell, coeff * p0.f)

    def a0_symbol(self, mu1: CosetM) -> LogLinear:
        name = a0_name(mu1)
        if name in self.cm.a0_overrides:
            return LogLinear() + self.cm.a0_overrides[name]
        return LogLinear.symbol(name)

    def support(self, mu1: CosetM) -> TraceSupport:
        from .lattices import coset_support
        off, step = coset_support(self.form, mu1)
        if not step:
            raise ValueError("degenerate support")
        return TraceSupport(off % step, step)

    def ts_of_trace(self, m: Fraction, mu1: CosetM) -> list[QuadElem]:
        if self.cm.trace_field == "F":
            if order_data(self.cm.D).d0 != self.od.d0:
                raise ValueError("trace_field = F requires F and the real reflex field to coincide")
        return enumerate_trace_t(m, self.support(mu1), self.d)

    def coefficient(self, m: Fraction, mu1: CosetM) -> LogLinear:
        """a_m = sum over t with tr t = m of a(t, mu1); the constant term is the a0 symbol."""
        m = Fraction(m)
        if m == 0:
            return self.a0_symbol(mu1)
        out = LogLinear()
        for t in self.ts_of_trace(m, mu1):
            out = out + self.coeff_a(t, mu1)
        return out

    def family(self, mu1: CosetM, trunc) -> FourierSeries:
        trunc = Fraction(trunc)
        base = q_M(*mu1.as_tuple(), mu1.D) % 1
        coeffs = {}
        if base == 0:
            coeffs[Fraction(0)] = self.a0_symbol(mu1)
        m = base if base else Fraction(1)
        while m < trunc:
            c = self.coefficient(m, mu1)
            if c:
                coeffs[m] = c
            m += 1
        return FourierSeries(coeffs, trunc)

    def two_adic_case(self) -> TwoAdicCase:
        ps = primes_above(2, self.d)
        kinds = tuple(self.split_kind(p) for p in ps)
        if ps[0].kind == "split" and all(k == "split" for k in kinds):
            case = "I"
        elif ps[0].kind == "split" and sorted(kinds) == ["inert", "split"]:
            case = "II"
        elif ps[0].kind == "inert" and kinds == ("split",):
            case = "III"
        else:
            case = "other"
        return TwoAdicCase(case, ps[0].kind, kinds)


def a0_name(mu1: CosetM) -> str:
    """Symbol name of the constant term, shared by mu1 and -mu1."""
    a = min(mu1.key(), (-mu1).key())
    return f"a0[{a}]"


_DATA: dict[int, tuple[CMInput, EisensteinData]] = {}


def eisenstein_data(cm: CMInput) -> EisensteinData:
    """Per-input cache; the input object is kept alive alongside its data."""
    hit = _DATA.get(id(cm))
    if hit is None or hit[0] is not cm:
        hit = (cm, EisensteinData(cm))
        _DATA[id(cm)] = hit
    return hit[1]


def diff_set(t: QuadElem, cm: CMInput) -> DiffSet:
    return eisenstein_data(cm).diff_set(t)


def whittaker_generic(t: QuadElem, p: QuadPrime, cm: CMInput):
    return eisenstein_data(cm).whittaker_generic(t, p)


def whittaker_two(t: QuadElem, mu1: CosetM, cm: CMInput, parity: int | None = None) -> Fraction:
    return eisenstein_data(cm).local_value(t, mu1, 2, parity)


def coeff_a(t: QuadElem, mu1: CosetM, cm: CMInput) -> LogLinear:
    return eisenstein_data(cm).coeff_a(t, mu1)


def eisenstein_family(mu1: CosetM, trunc, cm: CMInput) -> FourierSeries:
    return eisenstein_data(cm).family(mu1, trunc)


def cosets(cm: CMInput) -> list[CosetM]:
    return all_cosets_M(cm.D)
