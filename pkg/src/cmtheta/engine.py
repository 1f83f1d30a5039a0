"""Assembly of the CM-value formulas, calibration against the numerical oracle, config parsing and the CLI."""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import mpmath

from .eisenstein import MissingA0Error, a0_name, eisenstein_data
from .geometry import EVEN_QUADRUPLES, CMInput, cm_point
from .lattices import MU_TABLE, CosetM, q_M
from .nfield import CMField, QuadElem, format_quad, parse_quad
from .qseries import FourierSeries, LogLinear
from .thetanum import pet_norm, rosenhain_numeric, siegel_theta
from .weilrep import (ROSENHAIN, ROSENHAIN_SEXTUPLE, SLVector, build_hilbert_input, check_quadruple,
                      epsilon, load_f, rosenhain_inputs, table_symbols)

HALF = Fraction(1, 2)
PRINCIPAL = Fraction(1, 8)
DEFAULT_TRUNC = Fraction(1, 4)
HEAD_LABELS = (1, 5, 9, 13)

# signs of each sextuple member in log|lambda_k|, columns i1..i6
LAMBDA_SIGNS = {
    1: (-1, 0, -1, 1, 0, 1),
    2: (0, -1, -1, 0, 1, 1),
    3: (-1, -1, 0, 1, 1, 0),
}


class ConfigError(ValueError):
    """Malformed configuration; ``key`` and ``line`` locate the problem."""

    def __init__(self, msg: str, key: str | None = None, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + msg)
        self.key = key
        self.line = line


class CalibrationError(ArithmeticError):
    pass


@dataclass
class FormulaResult:
    quantity: str
    loglinear: LogLinear
    float_value: float | None
    oracle_value: float | None = None
    abs_diff: float | None = None
    calibrated: bool = False
    ct_route: LogLinear | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def route_discrepancy(self) -> LogLinear | None:
        if self.ct_route is None:
            return None
        return self.ct_route - self.loglinear

    def rel_diff(self) -> float | None:
        if self.abs_diff is None or not self.oracle_value:
            return None
        return self.abs_diff / abs(self.oracle_value)

    def csv_row(self) -> list[str]:
        def fmt(x):
            return "" if x is None else f"{x:.15g}"
        return [self.quantity, str(self.loglinear), fmt(self.float_value), fmt(self.oracle_value),
                fmt(self.abs_diff)]


@dataclass
class RunConfig:
    cm: CMInput
    trunc: Fraction = DEFAULT_TRUNC
    precision_bits: int = 200
    mode: str = "lambda"
    calibration_char: tuple[int, ...] | None = None
    tolerance: float = 1e-4
    csv_path: str | None = None


# ---------------------------------------------------------------------------
# quantity names


def quad_label(quad) -> str:
    return "".join(str(int(x)) for x in quad)


def parse_char(text: str) -> tuple[int, ...]:
    digits = re.sub(r"[\s,()]", "", text)
    if not re.fullmatch(r"[01]{4}", digits):
        raise ValueError(f"characteristic {text!r} is not four binary digits")
    return check_quadruple(tuple(int(c) for c in digits))


# ---------------------------------------------------------------------------
# the two formula routes


def _e_coefficient(cm: CMInput, m: Fraction, mu1: CosetM) -> LogLinear:
    """Coefficient of q^m in the Eisenstein family of mu1 (0 off the exponent class)."""
    if (m - q_M(*mu1.as_tuple(), mu1.D)).denominator != 1:
        return LogLinear()
    return eisenstein_data(cm).coefficient(m, mu1)


def ct_pairing(f: SLVector, cm: CMInput, trunc=DEFAULT_TRUNC) -> LogLinear:
    """Constant term of sum over mu and fiber pairs of f_mu * theta_mu0 * E_mu1.

    Unknown Eisenstein constant terms appear as symbols unless overridden in ``cm``.
    """
    trunc = Fraction(trunc)
    total = LogLinear()
    hilbert = build_hilbert_input(f, cm.D)
    for mu1 in sorted(hilbert, key=CosetM.key):
        h = hilbert[mu1]
        for e in sorted(h.coeffs):
            if e > 0:
                continue
            if -e >= trunc:
                raise ValueError(f"truncation {trunc} too small for the principal part q^{e}")
            c = h.coeffs[e]
            if c:
                total = total + _e_coefficient(cm, -e, mu1) * c
    return _resolve(total, cm)


def _resolve(value: LogLinear, cm: CMInput) -> LogLinear:
    if not cm.a0_overrides:
        return value
    return value.substitute({k: LogLinear() + v for k, v in cm.a0_overrides.items()})


def principal_labels(quad) -> list[int]:
    """The two labels carrying the q^(-1/8) term."""
    return [i for i, ch in enumerate(table_symbols(quad), start=1) if ch == "w"]


def _principal_terms(quad, cm: CMInput) -> LogLinear:
    """The delta and delta-prime sums for both principal labels."""
    D = cm.D
    data = eisenstein_data(cm)
    total = LogLinear()
    for label in principal_labels(quad):
        mu = MU_TABLE[label - 1]
        if mu.d != 0:
            continue
        if mu.c == 0:
            mu1 = CosetM(mu.a, mu.b, mu.r, Fraction(0), D)
            total = total + data.coefficient(PRINCIPAL, mu1)
        elif mu.c == HALF:
            mu1 = CosetM(mu.a, mu.b, mu.r, Fraction(1, 4 * D), D)
            total = total + data.coefficient(PRINCIPAL - Fraction(1, 8 * D), mu1).scale(2)
    return total


def _head_terms(quad, cm: CMInput) -> LogLinear:
    total = LogLinear()
    data = eisenstein_data(cm)
    for label in HEAD_LABELS:
        mu = MU_TABLE[label - 1]
        mu1 = CosetM(mu.a, mu.b, mu.r, Fraction(0), cm.D)
        total = total + data.a0_symbol(mu1).scale(epsilon(quad, label))
    return total


def tabulated_theta(quad, cm: CMInput) -> LogLinear:
    """The closed bookkeeping: head constant terms plus the principal-part sums (without C_E)."""
    quad = check_quadruple(quad)
    return _resolve(_head_terms(quad, cm) + _principal_terms(quad, cm), cm)


def tabulated_lambda(k: int, cm: CMInput) -> LogLinear:
    """Signed combination of the principal-part sums over the sextuple (without C_E)."""
    total = LogLinear()
    for sign, quad in zip(LAMBDA_SIGNS[k], ROSENHAIN_SEXTUPLE):
        if sign:
            total = total + _principal_terms(quad, cm).scale(sign)
    return total


def ct_theta(quad, cm: CMInput, trunc=DEFAULT_TRUNC) -> LogLinear:
    return ct_pairing(load_f(check_quadruple(quad), Fraction(trunc) + 1), cm, trunc)


def ct_lambda(k: int, cm: CMInput, trunc=DEFAULT_TRUNC) -> LogLinear:
    """CT route for log|lambda_k|: the pairing of the signed Rosenhain input."""
    return ct_pairing(rosenhain_inputs(k, Fraction(trunc) + 1), cm, trunc)


def a0_part(value: LogLinear) -> LogLinear:
    return value.symbolic_part()


# ---------------------------------------------------------------------------
# the numerical oracle


def _cm_point(cm: CMInput, prec: int):
    with mpmath.workprec(prec):
        _, tau, _, _ = cm_point(cm)
    return tau


def oracle_theta(quad, cm: CMInput, prec: int = 200) -> float:
    """multiplicity * (-log ||theta(tau)||^2_Pet) at the CM point."""
    tau = _cm_point(cm, prec)
    with mpmath.workprec(prec):
        val = siegel_theta(check_quadruple(quad), tau, prec=prec)
        norm = pet_norm(val, tau, prec=prec)
        if norm == 0:
            raise CalibrationError(f"theta {quad_label(quad)} vanishes at the CM point")
        out = -mpmath.log(norm) * cm.multiplicity.numerator / cm.multiplicity.denominator
    return float(out)


def oracle_lambda(k: int, cm: CMInput, prec: int = 200) -> float:
    tau = _cm_point(cm, prec)
    with mpmath.workprec(prec):
        lam = rosenhain_numeric(tau, prec=prec)[k - 1]
        out = mpmath.log(abs(lam)) * cm.multiplicity.numerator / cm.multiplicity.denominator
    return float(out)


# ---------------------------------------------------------------------------
# evaluation with a global constant


def _constant(cfg: RunConfig, calibration: float | None) -> tuple[float | None, bool]:
    if calibration is not None:
        return calibration, True
    ce = cfg.cm.C_E
    return (float(ce), False) if ce is not None else (None, False)


def _finish(result: FormulaResult, const: float | None, calibrated: bool,
            oracle: Callable[[], float] | None) -> FormulaResult:
    value = result.loglinear
    if const is not None and not value.symbols:
        result.float_value = const * float(value.to_float(80))
    result.calibrated = calibrated
    if oracle is not None:
        result.oracle_value = oracle()
        if result.float_value is not None:
            result.abs_diff = abs(result.float_value - result.oracle_value)
    if value.symbols:
        result.notes.append("unresolved constant terms: " + ", ".join(sorted(value.symbols)))
    disc = result.route_discrepancy
    if disc:
        result.notes.append(f"fiber discrepancy (CT route minus tabulated): {disc}")
    return result


def eval_theta_formula(quad, cfg: RunConfig, calibration: float | None = None,
                       with_oracle: bool = True) -> FormulaResult:
    cm = cfg.cm
    quad = check_quadruple(quad)
    res = FormulaResult(f"theta({quad_label(quad)})", tabulated_theta(quad, cm), None,
                        ct_route=ct_theta(quad, cm, cfg.trunc))
    const, calibrated = _constant(cfg, calibration)
    oracle = (lambda: oracle_theta(quad, cm, cfg.precision_bits)) if with_oracle else None
    return _finish(res, const, calibrated, oracle)


def eval_lambda_formula(k: int, cfg: RunConfig, calibration: float | None = None,
                        with_oracle: bool = True) -> FormulaResult:
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    cm = cfg.cm
    res = FormulaResult(f"lambda({k})", tabulated_lambda(k, cm), None,
                        ct_route=ct_lambda(k, cm, cfg.trunc))
    const, calibrated = _constant(cfg, calibration)
    oracle = (lambda: oracle_lambda(k, cm, cfg.precision_bits)) if with_oracle else None
    return _finish(res, const, calibrated, oracle)


def calibrate(cfg: RunConfig, quad=None) -> float:
    """The constant c with c * formula = oracle on one theta quantity."""
    quad = check_quadruple(quad or cfg.calibration_char or (0, 0, 0, 0))
    value = tabulated_theta(quad, cfg.cm)
    if value.symbols:
        raise MissingA0Error(f"calibration on {quad_label(quad)} needs the constant terms "
                             + ", ".join(sorted(value.symbols)))
    formula = float(value.to_float(80))
    if abs(formula) < 1e-12:
        raise CalibrationError(f"formula value for {quad_label(quad)} vanishes; pick another characteristic")
    oracle = oracle_theta(quad, cfg.cm, cfg.precision_bits)
    if abs(oracle) < 1e-12:
        raise CalibrationError(f"oracle value for {quad_label(quad)} vanishes; pick another characteristic")
    return oracle / formula


def calibration_spread(cfg: RunConfig) -> dict[str, float]:
    """Calibration constant recomputed on every even characteristic."""
    return {quad_label(q): calibrate(cfg, q) for q in EVEN_QUADRUPLES}


def a0_symbols(cm: CMInput) -> list[str]:
    """Names of the constant-term symbols that enter the theta formulas."""
    names = set()
    for label in HEAD_LABELS:
        mu = MU_TABLE[label - 1]
        names.add(a0_name(CosetM(mu.a, mu.b, mu.r, Fraction(0), cm.D)))
    return sorted(names)


def fit_constant_terms(cfg: RunConfig) -> tuple[float, dict[str, float], float]:
    """Least-squares fit of c and c*a0 to the ten theta oracle values.

    Returns (c, a0 values, worst relative residual).  The system is linear in
    c and the products c*a0, so the fit is exact whenever the formula holds.
    """
    cm = cfg.cm
    names = a0_symbols(cm)
    rows, rhs = [], []
    bare = CMInput(**{**cm.__dict__, "a0_overrides": {}}) if cm.a0_overrides else cm
    for quad in EVEN_QUADRUPLES:
        value = tabulated_theta(quad, bare)
        rows.append([float(value.without_symbols().to_float(80))]
                    + [float(value.symbols.get(n, 0)) for n in names])
        rhs.append(oracle_theta(quad, cm, cfg.precision_bits))
    A = mpmath.matrix(rows)
    b = mpmath.matrix(rhs)
    sol = mpmath.lu_solve(A.T * A, A.T * b)
    c = float(sol[0])
    if abs(c) < 1e-300:
        raise CalibrationError("fitted constant vanishes")
    a0 = {n: float(sol[i + 1]) / c for i, n in enumerate(names)}
    resid = A * sol - b
    worst = max(abs(float(resid[i])) / max(abs(rhs[i]), 1e-300) for i in range(len(rhs)))
    return c, a0, worst


# ---------------------------------------------------------------------------
# config files

_KEYS = {
    "D", "delta", "alpha", "beta", "xi", "omega_E", "class_number", "lambda0_chi", "point_convention",
    "kappa_beta", "trace_field", "trunc", "precision", "mode", "calibrate", "tolerance", "level_structure",
}
_A0_KEY = re.compile(r"^a0\[[^\]]+\]$")


def _parse_cm_elem(text: str, fld: CMField):
    """``u`` or ``u ; v`` for u + v sqrt(Delta), with u and v field elements of F."""
    parts = [p.strip() for p in text.split(";")]
    if len(parts) == 1:
        return fld.elem(parse_quad(parts[0], fld.D))
    if len(parts) == 2:
        return fld.elem(parse_quad(parts[0], fld.D), parse_quad(parts[1], fld.D))
    raise ValueError(f"cannot parse CM field element {text!r}")


def format_cm_elem(x) -> str:
    return f"{format_quad(x.u)} ; {format_quad(x.v)}"


def parse_config(text: str) -> RunConfig:
    raw: dict[str, tuple[str, int]] = {}
    a0: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", None, lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        value = value.strip('"').strip("'")
        if _A0_KEY.match(key):
            a0[key] = (value, lineno)
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", key, lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", key, lineno)
        raw[key] = (value, lineno)
    for req in ("D", "delta", "alpha", "beta"):
        if req not in raw:
            raise ConfigError(f"missing required key {req!r}", req)

    def get(key, conv, default=None):
        if key not in raw:
            return default
        value, lineno = raw[key]
        try:
            return conv(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", key, lineno) from None

    D = get("D", int)
    delta = get("delta", lambda s: parse_quad(s, D))
    fld = get("delta", lambda s: CMField(D, delta))
    alpha = get("alpha", lambda s: _parse_cm_elem(s, fld))
    beta = get("beta", lambda s: _parse_cm_elem(s, fld))
    xi = get("xi", lambda s: _parse_cm_elem(s, fld))
    if xi is None:
        xi = (alpha.conj() * beta - alpha * beta.conj()).inverse()
    overrides = {}
    for key, (value, lineno) in a0.items():
        try:
            overrides[key] = LogLinear(Fraction(value))
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {value!r}", key, lineno) from None
    try:
        cm = CMInput(
            D, delta, alpha, beta, xi,
            omega_E=get("omega_E", int, 2),
            cT=get("class_number", int, 1),
            lambda0_chi=get("lambda0_chi", Fraction),
            a0_overrides=overrides,
            point_convention=get("point_convention", str, "ratio"),
            kappa_beta=get("kappa_beta", str, "scaled"),
            trace_field=get("trace_field", str, "Ftilde"),
            level_structure=get("level_structure", lambda s: tuple(int(x) for x in s.split(","))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    mode = get("mode", str, "lambda")
    if mode not in ("lambda", "theta", "verify", "dump"):
        raise ConfigError(f"unknown mode {mode!r}", "mode", raw["mode"][1])
    return RunConfig(
        cm,
        trunc=get("trunc", Fraction, DEFAULT_TRUNC),
        precision_bits=get("precision", int, 200),
        mode=mode,
        calibration_char=get("calibrate", parse_char),
        tolerance=get("tolerance", float, 1e-4),
    )


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


DEFAULT_CONFIG = """\
# D = 5 class-number-one example
D = 5
delta = -5/2 - 1/2 sqrt5
alpha = 1
beta = -5/4 - 1/4 sqrt5 ; 5/4 - 1/4 sqrt5
omega_E = 10
class_number = 1
lambda0_chi = 2/5
point_convention = lattice
"""


def default_config() -> RunConfig:
    return parse_config(DEFAULT_CONFIG)


# ---------------------------------------------------------------------------
# reports and the CLI


CSV_HEADER = ["quantity", "loglinear", "float", "oracle", "absdiff"]


def csv_text(results: Iterable[FormulaResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()


def table_text(results: Iterable[FormulaResult]) -> str:
    lines = [f"{'quantity':<14}{'formula':>22}{'oracle':>22}{'absdiff':>12}  loglinear"]
    for r in results:
        f = "n/a" if r.float_value is None else f"{r.float_value:.12g}"
        o = "n/a" if r.oracle_value is None else f"{r.oracle_value:.12g}"
        d = "n/a" if r.abs_diff is None else f"{r.abs_diff:.3g}"
        lines.append(f"{r.quantity:<14}{f:>22}{o:>22}{d:>12}  {r.loglinear}")
        lines += [f"{'':<14}note: {n}" for n in r.notes]
    return "\n".join(lines)


def agrees(r: FormulaResult, tol: float) -> bool:
    """Relative agreement, measured absolutely when the oracle is below 1 in size."""
    if r.abs_diff is None:
        return False
    return r.abs_diff <= tol * max(1.0, abs(r.oracle_value))


def _failed(results: list[FormulaResult], tol: float) -> list[str]:
    return [r.quantity for r in results if not agrees(r, tol)]


def run_lambda(cfg: RunConfig, calibration: float | None = None) -> list[FormulaResult]:
    return [eval_lambda_formula(k, cfg, calibration) for k in (1, 2, 3)]


def run_theta(cfg: RunConfig, calibration: float | None = None) -> list[FormulaResult]:
    return [eval_theta_formula(q, cfg, calibration) for q in EVEN_QUADRUPLES]


def run_cli(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = argparse.ArgumentParser(prog="cmtheta", description=__doc__)
    ap.add_argument("--config", help="flat key = value config file (default: built-in D = 5 example)")
    ap.add_argument("--trunc", type=Fraction)
    ap.add_argument("--precision", type=int)
    ap.add_argument("--mode", choices=["lambda", "theta", "verify", "dump"])
    ap.add_argument("--calibrate", metavar="CHAR", help="calibrate on theta(CHAR), e.g. 0000")
    ap.add_argument("--csv", metavar="PATH", help="also write the CSV rows to PATH")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.calibrate:
            cfg.calibration_char = parse_char(args.calibrate)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"config error{key}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.trunc is not None:
        cfg.trunc = args.trunc
    if args.precision is not None:
        cfg.precision_bits = args.precision
    if args.mode:
        cfg.mode = args.mode
    cfg.csv_path = args.csv

    if cfg.mode == "verify":
        from .checks import run_checks
        ok = True
        for name, passed, detail in run_checks():
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}", file=out)
        return 0 if ok else 1
    if cfg.mode == "dump":
        from .checks import dump_report
        print(dump_report(cfg.trunc if args.trunc is not None else 2), file=out)
        return 0

    calibration = None
    if cfg.calibration_char is not None:
        try:
            calibration = calibrate(cfg)
        except (MissingA0Error, CalibrationError) as exc:
            print(f"calibration failed: {exc}", file=sys.stderr)
            return 1
    try:
        results = run_lambda(cfg, calibration) if cfg.mode == "lambda" else run_theta(cfg, calibration)
    except MissingA0Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(table_text(results), file=out)
    text = csv_text(results)
    print(text, end="", file=out)
    if cfg.csv_path:
        with open(cfg.csv_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    failed = _failed(results, cfg.tolerance)
    if failed:
        print(f"FAIL: formula and oracle disagree beyond {cfg.tolerance:g} for {', '.join(failed)}", file=out)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())
