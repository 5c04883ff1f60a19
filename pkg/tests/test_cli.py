import numpy as np
import pytest

from rkentropy.cli import (
    ConfigError,
    barenblatt_profile,
    cmd_check_conditions,
    cmd_dlss_constants,
    cmd_gprofile,
    cmd_region,
    cmd_simulate,
    main,
    make_initial,
    parse_config,
)
from rkentropy.operators import Grid1D

MINIMAL = """\
# reproduction run
problem = pme
beta = 2.0
scheme = implicit_euler
n = 64
tau = 1e-4
t_end = 0.01
ic = barenblatt
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_minimal_config(tmp_path):
    cfg = parse_config(write_config(tmp_path, MINIMAL))
    assert cfg.problem == "pme" and cfg.beta == 2.0
    assert cfg.scheme == "implicit_euler"
    assert cfg.n == 64 and cfg.tau == 1e-4 and cfg.t_end == 0.01
    assert cfg.ic == "barenblatt" and cfg.t0 == 0.01 and cfg.x_r == 0.25
    assert cfg.newton_tol == 1e-12 and cfg.newton_max_iter == 50
    assert cfg.entropy == "experiment_power" and cfg.alpha == 5.0


def test_parse_config_rejects_negative_beta(tmp_path):
    path = write_config(tmp_path, MINIMAL.replace("beta = 2.0", "beta = -1"))
    with pytest.raises(ConfigError, match="beta"):
        parse_config(path)


def test_parse_config_rejects_unknown_scheme(tmp_path):
    path = write_config(tmp_path,
                        MINIMAL.replace("implicit_euler", "rk5"))
    with pytest.raises(ConfigError, match="trapezoidal"):
        parse_config(path)  # message lists the valid schemes


def test_parse_config_rejects_unknown_key(tmp_path):
    path = write_config(tmp_path, MINIMAL + "frobnicate = 3\n")
    with pytest.raises(ConfigError, match="line 9.*frobnicate"):
        parse_config(path)


def test_parse_config_rejects_bad_value(tmp_path):
    path = write_config(tmp_path, MINIMAL.replace("tau = 1e-4", "tau = fast"))
    with pytest.raises(ConfigError, match="tau"):
        parse_config(path)


def test_parse_config_barenblatt_needs_pme(tmp_path):
    text = MINIMAL.replace("problem = pme", "problem = dlss")
    with pytest.raises(ConfigError, match="barenblatt"):
        parse_config(write_config(tmp_path, text))


def test_barenblatt_profile_support():
    grid = Grid1D(64, 1.0)
    u = barenblatt_profile(grid.x(), beta=2.0, t0=0.01, x_r=0.25)
    x = grid.x()
    # zero exactly at the support endpoints 1/2 +- x_r (grid points here)
    assert u[x == 0.25][0] == 0.0
    assert u[x == 0.75][0] == 0.0
    assert np.all(u[(x < 0.25) | (x > 0.75)] == 0.0)
    # peak value at the centre: t0^(-1/3) * height constant
    height = (1.0 / 12.0) * (1.0 / 16.0) / 0.01 ** (2.0 / 3.0)
    assert u[x == 0.5][0] == pytest.approx(0.01 ** (-1.0 / 3.0) * height,
                                           rel=1e-14)
    assert np.all(u >= 0.0)


def test_make_initial_cosine_constant(tmp_path):
    text = MINIMAL.replace("ic = barenblatt",
                           "ic = cosine\nmean = 1.0\namplitude = 0.0")
    cfg = parse_config(write_config(tmp_path, text))
    u = make_initial(cfg, Grid1D(cfg.n, cfg.length))
    assert np.all(u.values == 1.0)


def test_make_initial_from_file(tmp_path):
    text = MINIMAL.replace("ic = barenblatt", "ic = file\nic_file = IC")
    text = text.replace("n = 64", "n = 8")
    data = tmp_path / "IC"
    np.savetxt(data, np.linspace(1.0, 2.0, 8))
    text = text.replace("ic_file = IC", f"ic_file = {data}")
    cfg = parse_config(write_config(tmp_path, text))
    u = make_initial(cfg, Grid1D(8, 1.0))
    assert u.values.shape == (1, 8)
    assert u.values[0, 0] == 1.0 and u.values[0, -1] == 2.0


def test_simulate_writes_deterministic_csv(tmp_path):
    text = MINIMAL.replace("t_end = 0.01", "t_end = 5e-4")
    text = text.replace("n = 64", "n = 16")
    cfg = parse_config(write_config(tmp_path, text))
    p1 = cmd_simulate(cfg, tmp_path / "a")
    p2 = cmd_simulate(cfg, tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().strip().split("\n")
    assert lines[0] == "t,H,mass,min,max,iters"
    assert len(lines) == 7  # header + 6 states (5 steps + initial)
    for line in lines[1:]:
        assert len(line.split(",")) == 6
    # the mass column drifts by at most the stepping bound
    masses = [float(line.split(",")[2]) for line in lines[1:]]
    for k, m in enumerate(masses):
        assert abs(m - masses[0]) <= 10.0 * max(k, 1) * cfg.newton_tol * cfg.tau


def test_simulate_csv_floats_round_trip(tmp_path):
    text = MINIMAL.replace("t_end = 0.01", "t_end = 3e-4").replace("n = 64",
                                                                   "n = 16")
    cfg = parse_config(write_config(tmp_path, text))
    path = cmd_simulate(cfg, tmp_path / "out")
    for line in path.read_text().strip().split("\n")[1:]:
        for tok in line.split(","):
            assert repr(float(tok)) == tok or tok.isdigit()


def test_simulate_snapshots(tmp_path):
    text = MINIMAL.replace("t_end = 0.01", "t_end = 5e-4")
    text = text.replace("n = 64", "n = 16") + "snapshot_times = 0,3e-4\n"
    cfg = parse_config(write_config(tmp_path, text))
    cmd_simulate(cfg, tmp_path / "out")
    assert (tmp_path / "out" / "snapshot_t0.csv").exists()
    assert (tmp_path / "out" / "snapshot_t0.0003.csv").exists()


def test_gprofile_minimal_grid(tmp_path):
    text = MINIMAL.replace("t_end = 0.01", "t_end = 1e-3").replace("n = 64",
                                                                   "n = 16")
    cfg = parse_config(write_config(tmp_path, text))
    paths = cmd_gprofile(cfg, [5e-4], 1e-4, 3, ["implicit_euler"],
                         tmp_path / "out")
    assert len(paths) == 1
    lines = paths[0].read_text().strip().split("\n")
    assert lines[0] == "tau,G,d2G,Q"
    assert len(lines) == 5


def test_gprofile_rejects_bad_arguments(tmp_path):
    cfg = parse_config(write_config(tmp_path, MINIMAL))
    with pytest.raises(ConfigError):
        cmd_gprofile(cfg, [1e-3], 0.0, 10, ["implicit_euler"], tmp_path / "x")
    with pytest.raises(ConfigError):
        cmd_gprofile(cfg, [1e-3], 1e-4, 2, ["implicit_euler"], tmp_path / "x")


def test_region_command(tmp_path):
    path = cmd_region("pme0", (0.5, 2.0), (0.5, 2.0), 4, 4, 1, 1.0,
                      tmp_path / "region.csv")
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "alpha,beta,member,witness_c1,witness_c2,witness_c3"
    assert len(lines) == 17


def test_check_conditions_heat_log():
    lines = cmd_check_conditions("heat_log", 1.0, 2.0, 0.5, 2.0, 4, 3, 1.0)
    assert lines[0].startswith("u,b,")
    # cond3 value for the heat/log pair is c_rk - 1 at every u
    for line in lines[1:]:
        assert float(line.split(",")[5]) == pytest.approx(0.0, abs=1e-14)
    lines0 = cmd_check_conditions("heat_log", 1.0, 2.0, 0.5, 2.0, 4, 3, 0.0)
    for line in lines0[1:]:
        assert float(line.split(",")[5]) == pytest.approx(-1.0, abs=1e-14)
        assert line.split(",")[8] == "1"  # cond3 passes only for c_rk = 0


def test_dlss_constants_pass():
    lines, ok = cmd_dlss_constants()
    assert ok
    assert len(lines) == 3
    assert all(line.endswith("PASS") for line in lines)
    assert "20/129" in lines[0]


def test_main_exit_codes(tmp_path, capsys):
    assert main(["dlss-constants"]) == 0
    bad = write_config(tmp_path, MINIMAL.replace("implicit_euler", "rk5"))
    assert main(["simulate", "--config", str(bad), "--out",
                 str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:config:")


def test_main_reports_overflowing_run(tmp_path, capsys):
    # an explicit step far beyond the stability limit blows up; the run
    # must abort with a categorized error, not a traceback
    text = MINIMAL.replace("implicit_euler", "explicit_euler")
    text = text.replace("tau = 1e-4", "tau = 1.0")
    text = text.replace("t_end = 0.01", "t_end = 20.0")
    cfg_path = write_config(tmp_path, text, name="blowup.cfg")
    with np.errstate(over="ignore", invalid="ignore"):
        code = main(["simulate", "--config", str(cfg_path), "--out",
                     str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error:step:")


def test_main_simulate_and_gprofile(tmp_path):
    text = MINIMAL.replace("t_end = 0.01", "t_end = 5e-4").replace("n = 64",
                                                                   "n = 16")
    cfg_path = write_config(tmp_path, text)
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "entropy.csv").exists()
    assert (out / "run_meta.txt").exists()
    out2 = tmp_path / "prof"
    assert main(["gprofile", "--config", str(cfg_path), "--base-times",
                 "3e-4", "--tau-max", "1e-4", "--m", "4", "--schemes",
                 "implicit_euler,trapezoidal", "--out", str(out2)]) == 0
    assert (out2 / "gprofile_implicit_euler_t0.0003.csv").exists()
    assert (out2 / "gprofile_trapezoidal_t0.0003.csv").exists()


def test_main_region_command(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["region", "--family", "pme0", "--d", "1", "--c-rk", "1",
                 "--alpha-steps", "3", "--beta-steps", "3", "--out",
                 str(out)]) == 0
    assert out.exists()
