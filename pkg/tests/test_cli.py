import pytest

from dynastyprice import MarketState, derive_constants, short_rate
from dynastyprice.calibration import build_defaults
from dynastyprice.cli import build_parser, load_config, main, run_sweep


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_price_csv_shape(capsys):
    code, out, _ = run_cli(capsys, "price")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == ("a0,a1,a2,lambda,rho,epsilon,gamma_agg,alpha_mean,"
                        "x,u,stock_price,tail_err,grid_err")
    assert len(lines) == 2
    stock = float(lines[1].split(",")[10])
    assert stock == pytest.approx(1.05814777, rel=1e-6)


def test_bond_zero_maturity(capsys):
    code, out, _ = run_cli(capsys, "bond", "--tau", "0")
    assert code == 0
    assert out.strip().splitlines()[1].endswith(",0,1")


def test_rate_matches_library(capsys):
    code, out, _ = run_cli(capsys, "rate")
    params, state = build_defaults()
    want = short_rate(state, derive_constants(params))
    got = float(out.strip().splitlines()[1].split(",")[-1])
    assert code == 0
    assert got == pytest.approx(want, rel=1e-10)   # CSV carries 12 digits


def test_sweep_header_and_monotonicity(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--param", "rho",
                           "--from", "0.02", "--to", "0.08", "--steps", "7")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "param,value,stock_price,tail_err,grid_err"
    stocks = [float(l.split(",")[2]) for l in lines[1:]]
    assert all(a > b for a, b in zip(stocks, stocks[1:]))
    assert all(l.split(",")[0] == "rho" for l in lines[1:])


def test_sweep_rejects_unknown_param(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--param", "a0", "--from", "0", "--to", "1",
              "--steps", "3"])
    assert exc.value.code == 2


def test_volsurf_csv(capsys):
    code, out, _ = run_cli(capsys, "volsurf", "--x-steps", "3",
                           "--u-steps", "2")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "x,u,h_x_over_S"
    assert len(lines) == 7
    # row-major: x varies in the outer loop
    xs = [float(l.split(",")[0]) for l in lines[1:]]
    assert xs == sorted(xs)


def test_volsurf_single_point_matches_volatility(capsys):
    from dynastyprice import volatility
    params, state = build_defaults()
    consts = derive_constants(params)
    code, out, _ = run_cli(capsys, "volsurf",
                           "--x-from", "2.01", "--x-to", "2.01",
                           "--x-steps", "1",
                           "--u-from", "1.43", "--u-to", "1.43",
                           "--u-steps", "1")
    got = float(out.strip().splitlines()[1].split(",")[2])
    want = volatility(MarketState(2.01, 1.43), params, consts)
    assert code == 0
    assert got == pytest.approx(want, rel=1e-5)


def test_calibrate_output(capsys):
    code, out, _ = run_cli(capsys, "calibrate")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "gamma,a,rate_residual"
    gamma, a, resid = (float(v) for v in lines[1].split(","))
    assert 0.490 <= gamma <= 0.498
    assert 2.005 <= a <= 2.015
    assert abs(resid) < 1e-10


def test_config_file_and_set(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nrho=0.05\nx=1.5\n")
    code, out, _ = run_cli(capsys, "rate", "--config", str(cfg),
                           "--set", "u=0.0")
    row = out.strip().splitlines()[1].split(",")
    assert code == 0
    assert float(row[4]) == 0.05 and float(row[8]) == 1.5 and float(row[9]) == 0.0


def test_unknown_key_rejected(capsys):
    code, _, err = run_cli(capsys, "price", "--set", "bogus=1")
    assert code == 2
    assert "unknown key" in err


def test_bad_value_rejected(capsys):
    code, _, err = run_cli(capsys, "price", "--set", "rho=fast")
    assert code == 2


def test_invalid_params_exit_config(capsys):
    # lam * epsilon < 1 violates the age-density invariant
    code, _, err = run_cli(capsys, "price", "--set", "epsilon=0.2")
    assert code == 2


def test_numerical_failure_exit(capsys):
    # a2 < 0 drives the exponent root through zero: degenerate-g
    code, _, err = run_cli(capsys, "price", "--set", "a2=-5")
    assert code == 3
    assert "numerical failure" in err


def test_seed_precedence(monkeypatch):
    parser = build_parser()
    monkeypatch.setenv("DYNASTY_SEED", "777")
    args = parser.parse_args(["validate", "--suite", "bessel"])
    assert load_config(args)["seed"] == 777
    args = parser.parse_args(["validate", "--suite", "bessel",
                              "--set", "seed=5"])
    assert load_config(args)["seed"] == 5
    args = parser.parse_args(["validate", "--suite", "bessel",
                              "--set", "seed=5", "--seed", "9"])
    assert load_config(args)["seed"] == 9
    monkeypatch.delenv("DYNASTY_SEED")
    args = parser.parse_args(["validate", "--suite", "bessel"])
    assert load_config(args)["seed"] == 12345


def test_csv_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--param", "gamma_agg", "--from", "0.4", "--to",
                 "0.6", "--steps", "3", "--out", str(out1)]) == 0
    assert main(["sweep", "--param", "gamma_agg", "--from", "0.4", "--to",
                 "0.6", "--steps", "3", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_validate_bessel_suite(capsys):
    code, out, _ = run_cli(capsys, "validate", "--suite", "bessel")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "suite,check,value,tolerance,status"
    assert all(l.endswith(",pass") for l in lines[1:])


def test_run_sweep_lambda_recomputes_u():
    cfg_map = {"a0": 0.0, "a1": 0.0, "a2": 1.0, "lambda": 2.0, "rho": 0.04,
               "epsilon": 1.0, "gamma_agg": 0.49, "alpha_mean": 2.01,
               "x": 2.01, "u": 1.43003, "seed": 1}
    rows = run_sweep("lambda", 1.0, 2.0, 3, cfg_map)
    held = run_sweep("lambda", 1.0, 2.0, 3, cfg_map, hold_state=True)
    assert rows[0][1].stock != held[0][1].stock
    assert rows[-1][1].stock == pytest.approx(held[-1][1].stock, rel=1e-3)
