"""Self-contained property checks behind ``cmtheta --mode verify`` and the dump report."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator

import mpmath

from .geometry import (EVEN_QUADRUPLES, SiegelPoint, bilinear_V, char_reps, is_even_hilbert,
                       is_even_quadruple, is_symplectic, phi_char, phi_char_inverse, phi_matrix, phi_point,
                       quad_V, sl2_act, sp4_act, xi_map)
from .lattices import (MU_TABLE, all_cosets_L0, all_cosets_M, combine, discriminant_orders, e2_basis,
                       fiber_decompose, lattice_index, qval)
from .nfield import QuadElem
from .qseries import build_uvw
from .thetanum import hilbert_theta, siegel_theta
from .weilrep import TABLES, dump_tables, load_f, table_symbols, validate_exponents, verify_mp2_relations

# leading coefficients of the three building blocks, keyed by exponent offset
U_LEADING = (1, 4, 14, 40, 100, 232, 504)
V_LEADING = (-2, -8, -24, -64, -154, -344)
W_LEADING = (1, -1, 1, -2, 3, -4, 5, -7)

Check = tuple[str, bool, str]


def check_uvw() -> Check:
    u, v, w = build_uvw(8)
    want = {}
    want.update({("u", Fraction(n)): c for n, c in enumerate(U_LEADING)})
    want.update({("v", Fraction(2 * n + 1, 2)): c for n, c in enumerate(V_LEADING)})
    want.update({("w", Fraction(8 * n - 1, 8)): c for n, c in enumerate(W_LEADING)})
    series = {"u": u, "v": v, "w": w}
    bad = [(k, e, c, series[k][e]) for (k, e), c in want.items() if series[k][e] != c]
    return "uvw series", not bad, "all listed coefficients match" if not bad else f"mismatches {bad}"


def check_weil() -> Check:
    rep = verify_mp2_relations()
    return "Weil relations", rep.ok, "unitary, S^8 = I, (ST)^3 = S^2" if rep.ok else "; ".join(rep.failures)


def check_tables() -> Check:
    problems = []
    for quad in TABLES:
        body = table_symbols(quad)
        ws = [i for i, ch in enumerate(body, start=1) if ch == "w"]
        if len(ws) != 2 or any(qval(MU_TABLE[i - 1]) != Fraction(1, 8) for i in ws):
            problems.append(f"{quad}: w components at {ws}")
        rep = validate_exponents(load_f(quad, 3))
        if not rep.ok:
            problems += [f"{quad}: {p}" for p in rep.problems]
    return "table exponents", not problems, f"{len(TABLES)} tables consistent" if not problems else "; ".join(problems)


def random_siegel(rng: random.Random) -> SiegelPoint:
    a, b, c = (rng.uniform(-1, 1) for _ in range(3))
    y11, y12, y22 = a * a + 0.3, a * b, b * b + c * c + 0.3
    x = [rng.uniform(-1, 1) for _ in range(3)]
    return SiegelPoint(mpmath.mpc(x[0], y11), mpmath.mpc(x[1], y22), mpmath.mpc(x[2], y12))


def random_h2(rng: random.Random):
    return tuple(mpmath.mpc(rng.uniform(-1, 1), rng.uniform(0.5, 1.5)) for _ in range(2))


def random_sl2(rng: random.Random, D: int):
    """A word in elementary matrices over O_F."""
    e2 = e2_basis(D)
    one, zero = QuadElem(1, 0, D), QuadElem(0, 0, D)
    g = ((one, zero), (zero, one))
    for _ in range(3):
        x = QuadElem(rng.randint(-2, 2), 0, D) + e2 * rng.randint(-2, 2)
        y = QuadElem(rng.randint(-2, 2), 0, D) + e2 * rng.randint(-2, 2)
        for m in (((one, x), (zero, one)), ((one, zero), (y, one))):
            (a, b), (c, d) = g
            (p, q), (r, s) = m
            g = ((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s))
    return g


def check_geometry(n_iso=1000, n_equiv=50, D=5, seed=1) -> Check:
    rng = random.Random(seed)
    worst_iso = worst_b = mpmath.mpf(0)
    with mpmath.workprec(120):
        for _ in range(n_iso):
            tau = random_siegel(rng)
            z = xi_map(tau)
            worst_iso = max(worst_iso, abs(quad_V(z)))
            worst_b = max(worst_b, abs(bilinear_V(z, z.conj()) + 4 * tau.det_imag()))
        worst_eq = mpmath.mpf(0)
        for _ in range(n_equiv):
            g = random_sl2(rng, D)
            m = phi_matrix(g)
            if not is_symplectic(m):
                return "geometry", False, f"phi(gamma) not symplectic for {g}"
            z = random_h2(rng)
            lhs = phi_point(sl2_act(g, z), D)
            rhs = sp4_act(m, phi_point(z, D))
            worst_eq = max(worst_eq, *(abs(a - b) for a, b in
                                       ((lhs.t1, rhs.t1), (lhs.t2, rhs.t2), (lhs.t12, rhs.t12))))
    images = {}
    for x, y in product(char_reps(D), repeat=2):
        images[phi_char(x, y)] = is_even_hilbert(x, y)
    bij = len(images) == 16 and all(is_even_quadruple(q) == ev for q, ev in images.items())
    ok = worst_iso < 1e-12 and worst_b < 1e-12 and worst_eq < 1e-10 and bij
    detail = (f"isotropy {float(worst_iso):.1e}, B(Xi, conj) {float(worst_b):.1e}, "
              f"equivariance {float(worst_eq):.1e}, characteristic bijection {'ok' if bij else 'broken'}")
    return "geometry", ok, detail


def check_theta(n_points=20, D=5, seed=2) -> Check:
    rng = random.Random(seed)
    worst_odd = worst_pull = worst_diag = mpmath.mpf(0)
    with mpmath.workprec(120):
        eps = mpmath.mpf(10) ** -25
        for _ in range(3):
            tau = random_siegel(rng)
            for q in product((0, 1), repeat=4):
                if not is_even_quadruple(q):
                    worst_odd = max(worst_odd, abs(siegel_theta(q, tau, eps, 120).value))
        pairs = {q: phi_char_inverse(q, D) for q in EVEN_QUADRUPLES}
        for _ in range(n_points):
            z = random_h2(rng)
            tau = phi_point(z, D)
            for q, (x, y) in pairs.items():
                s = siegel_theta(q, tau, eps, 120).value
                h = hilbert_theta(x, y, z, eps, 120).value
                worst_pull = max(worst_pull, min(abs(s - h), abs(s + h)))
        for _ in range(5):
            t1, t2 = random_h2(rng)
            s = siegel_theta((0, 0, 0, 0), SiegelPoint(t1, t2, mpmath.mpc(0)), eps, 120).value
            prod_ = mpmath.jtheta(3, 0, mpmath.exp(1j * mpmath.pi * t1)) * mpmath.jtheta(3, 0, mpmath.exp(1j * mpmath.pi * t2))
            worst_diag = max(worst_diag, abs(s - prod_))
    ok = worst_odd < 1e-12 and worst_pull < 1e-10 and worst_diag < 1e-12
    detail = (f"odd {float(worst_odd):.1e}, pullback {float(worst_pull):.1e}, "
              f"diagonal {float(worst_diag):.1e}")
    return "theta identities", ok, detail


def check_lattices(D=5) -> Check:
    problems = []
    idx = lattice_index(D)
    if idx != 2 * D:
        problems.append(f"index {idx} != {2 * D}")
    # brute-force fibers straight from the coset lists
    counts = {mu: 0 for mu in MU_TABLE}
    for mu0 in all_cosets_L0(D):
        for mu1 in all_cosets_M(D):
            mu = combine(mu0, mu1)
            if mu is not None:
                counts[mu] += 1
    sizes = set(counts.values())
    if sizes != {2 * D}:
        problems.append(f"fiber sizes {sorted(sizes)}")
    if any(len(fiber_decompose(mu, D)) != counts[mu] for mu in MU_TABLE):
        problems.append("fiber_decompose disagrees with brute force")
    nL, nL0, nM = discriminant_orders(D)
    if nL * idx ** 2 != nL0 * nM:
        problems.append(f"{nL} * {idx}^2 != {nL0} * {nM}")
    return f"lattices D={D}", not problems, "index, fibers and discriminant orders consistent" if not problems else "; ".join(problems)


CHECKS: tuple[Callable[[], Check], ...] = (check_uvw, check_weil, check_tables, check_geometry,
                                           check_theta, check_lattices)


def run_checks() -> Iterator[Check]:
    for fn in CHECKS:
        try:
            yield fn()
        except Exception as exc:  # a crashing check is a failed check
            yield fn.__name__, False, f"{type(exc).__name__}: {exc}"


def dump_report(trunc=2) -> str:
    u, v, w = build_uvw(trunc)
    lines = ["# building blocks"]
    for name, s in (("u", u), ("v", v), ("w", w)):
        lines.append(f"{name}: " + ", ".join(f"{c} q^{e}" for e, c in sorted(s.coeffs.items())))
    lines.append("# input-form tables")
    lines.append(dump_tables(trunc))
    return "\n".join(lines)
