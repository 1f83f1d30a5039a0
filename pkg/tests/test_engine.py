import io
from fractions import Fraction as Fr

import pytest

from cmtheta.eisenstein import MissingA0Error
from cmtheta.engine import (DEFAULT_CONFIG, ConfigError, a0_part, a0_symbols, calibrate, csv_text,
                            ct_lambda, ct_pairing, ct_theta, default_config, eval_lambda_formula,
                            parse_char, parse_config, principal_labels, run_cli, tabulated_lambda,
                            tabulated_theta)
from cmtheta.geometry import EVEN_QUADRUPLES
from cmtheta.lattices import MU_TABLE
from cmtheta.qseries import LogLinear
from cmtheta.weilrep import SLVector, load_f, rosenhain_inputs

LOG5 = LogLinear.log(5)


def test_default_config_values(cfg):
    cm = cfg.cm
    assert cm.D == 5 and cm.omega_E == 10
    assert cm.multiplicity == Fr(4, 10)
    assert cfg.trunc == Fr(1, 4) and cfg.precision_bits == 200 and cfg.mode == "lambda"


@pytest.mark.parametrize("extra, key", [
    ("bogus = 1", "bogus"),
    ("omega_E = ten", "omega_E"),
    ("mode = sideways", "mode"),
    ("D = 7", "D"),
])
def test_config_errors_name_the_key(extra, key):
    with pytest.raises(ConfigError) as info:
        parse_config(DEFAULT_CONFIG + extra + "\n")
    assert info.value.key == key


def test_config_requires_core_keys():
    with pytest.raises(ConfigError) as info:
        parse_config("D = 5\n")
    assert info.value.key == "delta"


def test_config_line_without_equals():
    with pytest.raises(ConfigError) as info:
        parse_config("D 5\n")
    assert info.value.line == 1


def test_a0_overrides_resolve_symbols():
    text = DEFAULT_CONFIG + "".join(f"{n} = 1\n" for n in a0_symbols(default_config().cm))
    cm = parse_config(text).cm
    value = tabulated_theta((0, 0, 0, 0), cm)
    assert not value.symbols and value == LogLinear(-2)


def test_parse_char():
    assert parse_char("0 0 1 1") == (0, 0, 1, 1)
    with pytest.raises(ValueError):
        parse_char("1010")
    with pytest.raises(ValueError):
        parse_char("012")


def test_principal_labels_and_label_45():
    assert principal_labels((1, 1, 1, 1)) == [45, 46]
    mu = MU_TABLE[44]
    assert (mu.a, mu.b, mu.c, mu.d, mu.r) == (0, 0, 0, 0, Fr(1, 4))
    for q in EVEN_QUADRUPLES:
        assert len(principal_labels(q)) == 2


def test_tabulated_lambda_values(cm):
    assert [tabulated_lambda(k, cm) for k in (1, 2, 3)] == [LOG5.scale(Fr(-16, 5)), LOG5.scale(Fr(-16, 5)),
                                                           LOG5.scale(Fr(-32, 5))]


@pytest.mark.parametrize("quad", EVEN_QUADRUPLES)
def test_tabulated_theta_shape(cm, quad):
    value = tabulated_theta(quad, cm)
    assert set(value.symbols) == set(a0_symbols(cm))
    expected = LOG5.scale(Fr(-16, 5)) if quad in ((0, 0, 1, 1), (1, 1, 0, 0)) else LogLinear()
    assert value.without_symbols() == expected


@pytest.mark.parametrize("quad", EVEN_QUADRUPLES)
def test_routes_differ_only_in_constant_terms(cm, quad):
    disc = ct_theta(quad, cm) - tabulated_theta(quad, cm)
    assert disc.without_symbols() == LogLinear()


def test_lambda_routes_agree_on_logs(cm):
    for k in (1, 2, 3):
        assert (ct_lambda(k, cm) - tabulated_lambda(k, cm)).without_symbols() == LogLinear()


def test_ct_pairing_is_linear(cm):
    f, g = load_f((0, 0, 0, 0), Fr(5, 4)), load_f((1, 1, 1, 1), Fr(5, 4))
    assert ct_pairing(f + g.scale(3), cm) == ct_pairing(f, cm) + ct_pairing(g, cm).scale(3)
    assert ct_pairing(SLVector.zero(Fr(5, 4)), cm) == LogLinear()


def test_rosenhain_pairing_is_the_signed_sum(cm):
    for k in (1, 2, 3):
        assert ct_pairing(rosenhain_inputs(k, Fr(5, 4)), cm) == ct_lambda(k, cm)
        assert a0_part(ct_lambda(k, cm)) == ct_lambda(k, cm).symbolic_part()


def test_calibration_needs_constant_terms(cfg):
    with pytest.raises(MissingA0Error):
        calibrate(cfg, (0, 0, 0, 0))


def test_lambda_result_carries_discrepancy_note(cfg):
    r = eval_lambda_formula(1, cfg, with_oracle=False)
    assert r.float_value == pytest.approx(-16 / 5 * 1.6094379124341003)
    assert r.route_discrepancy and any("discrepancy" in n for n in r.notes)


def test_cli_lambda_writes_three_rows(tmp_path):
    path = tmp_path / "out.csv"
    code = run_cli(["--mode", "lambda", "--csv", str(path)], io.StringIO())
    rows = path.read_text().splitlines()
    assert rows[0] == "quantity,loglinear,float,oracle,absdiff"
    assert [r.split(",")[0] for r in rows[1:]] == ["lambda(1)", "lambda(2)", "lambda(3)"]
    assert code in (0, 1)


def test_cli_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(["--csv", str(a)], io.StringIO())
    run_cli(["--csv", str(b)], io.StringIO())
    assert a.read_bytes() == b.read_bytes()


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(DEFAULT_CONFIG + "tolerance = loose\n")
    assert run_cli(["--config", str(path)], io.StringIO()) == 2
    assert "tolerance" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path):
    assert run_cli(["--config", str(tmp_path / "nope.cfg")], io.StringIO()) == 2


def test_cli_calibration_without_constants_fails(capsys):
    assert run_cli(["--mode", "theta", "--calibrate", "0000"], io.StringIO()) == 1
    assert "calibration failed" in capsys.readouterr().err


def test_cli_verify_passes():
    out = io.StringIO()
    assert run_cli(["--mode", "verify"], out) == 0
    assert out.getvalue().count("PASS") == 6


def test_cli_dump():
    out = io.StringIO()
    assert run_cli(["--mode", "dump", "--trunc", "1"], out) == 0
    assert out.getvalue().startswith("# building blocks")


def test_csv_text_header_only_for_empty():
    assert csv_text([]) == "quantity,loglinear,float,oracle,absdiff\n"
