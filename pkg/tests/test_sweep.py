import math
import re
import time
from pathlib import Path

import numpy as np
import pytest

from cpbentropy.charge import QubitEnergies
from cpbentropy.cli import main
from cpbentropy.config import config_from_string, load_config
from cpbentropy.dynamics import Propagator
from cpbentropy.errors import ConfigError, ContractError, GridSizeError
from cpbentropy.linalg import eig_hermitian
from cpbentropy.plots import render_svg
from cpbentropy.sweep import CSV_COLUMNS, SweepConfig, run_sweep, validate
from cpbentropy.tables import read_csv, write_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def small(**kw):
    base = dict(xi=math.pi / 2, gamma=0.0, e_m=1.0, t_grid=(0.0, 1.0, 5))
    base.update(kw)
    return SweepConfig(**base)


# --- config --------------------------------------------------------------


def test_config_invariants():
    with pytest.raises(ConfigError):
        small(t_grid=(1.0, 1.0, 5))
    with pytest.raises(ConfigError):
        small(t_grid=(-1.0, 1.0, 5))
    with pytest.raises(ConfigError):
        small(t_grid=(0.0, 1.0, 1))
    with pytest.raises(ConfigError):
        small(gamma=[])
    with pytest.raises(ConfigError):
        small(xi=4.0)
    with pytest.raises(ConfigError):
        small(outputs=("pdf",))
    with pytest.raises(GridSizeError):
        small(gamma=np.linspace(0, 1, 100), t_grid=(0.0, 1.0, 100_001))


def test_default_config_is_the_invariant_grid():
    cfg = SweepConfig()
    assert cfg.axes() == {"e_m": (0.0, 1.0, 5.0), "gamma": (0.0, 0.01, 0.1, 0.5),
                          "xi": (0.0, math.pi / 4, math.pi / 2), "e_j1": (30.0,), "e_j2": (30.0,)}
    assert cfg.n_points == 3 * 4 * 3 * 201


def test_config_file_parsing():
    cfg, plot = config_from_string("""
        [model]
        e_c1 = 100
        e_c2 = 120   # comment
        e_j1 = 30
        e_j2 = 25
        [initial]
        xi = 0, pi/4, 3*pi/4
        [sweep]
        gamma = 0.01, 0.1
        e_m = linspace(0, 10, 5)
        t_grid = 0, 20, 401
        [output]
        outputs = csv, svg, validate
        title = demo run
        plot = heatmap
    """)
    assert plot == "heatmap"
    assert cfg.model.e_c2 == 120
    assert cfg.xi == pytest.approx((0, math.pi / 4, 3 * math.pi / 4))
    assert cfg.e_m == (0.0, 2.5, 5.0, 7.5, 10.0)
    assert cfg.t_grid == (0.0, 20.0, 401)
    assert cfg.outputs == ("csv", "svg", "validate")
    assert cfg.title == "demo run"
    assert cfg.axes()["e_j2"] == (25.0,)


def test_config_model_coupling_used_when_not_swept():
    cfg, _ = config_from_string("[model]\ne_m = 4\n[sweep]\ngamma = 0\n")
    assert cfg.axes()["e_m"] == (4.0,)


def test_config_from_capacitances():
    cfg, _ = config_from_string("""
        [model]
        c_sigma1 = 2
        c_sigma2 = 2
        c_m = 1
        c_g1 = 1
        v_g1 = 1
        c_g2 = 1
        v_g2 = 1
        e_j1 = 0.5
        e_j2 = 0.5
    """)
    assert cfg.model.e_c1 == pytest.approx(4 / 3)
    assert cfg.axes()["e_m"] == (pytest.approx(4 / 3),)
    assert cfg.model.n_g1 == pytest.approx(0.5)


@pytest.mark.parametrize("text", [
    "[model]\nbogus = 1\n",
    "[extra]\na = 1\n",
    "[sweep]\ngamma = import os\n",
    "[sweep]\nt_grid = 0, 1\n",
    "[model]\ne_c1 = 1, 2\n",
    "[model]\nc_sigma1 = 1\nc_sigma2 = 1\nc_m = 1\n",
    "[model]\nc_sigma1 = 1\nc_sigma2 = 1\ne_c1 = 4\n",
    "[output]\nplot = pie\n",
    "no section header\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        config_from_string(text)


def test_shipped_configs_load():
    for path in sorted(CONFIGS.glob("*.ini")):
        cfg, _ = load_config(path)
        assert cfg.n_points >= 2


# --- sweep ---------------------------------------------------------------


def test_single_point_row():
    res = run_sweep(small())
    first = {k: res.columns[k][0] for k in CSV_COLUMNS}
    assert first["t"] == 0.0
    assert first["I"] == pytest.approx(1.0, abs=1e-12)
    assert first["purity"] == pytest.approx(0.5)
    assert first["p_gg"] == pytest.approx(0.5) and first["p_ee"] == pytest.approx(0.5)


def test_row_count_and_order():
    cfg = small(gamma=[0.0, 0.1], xi=[0.0, 1.0, 2.0], e_m=[1.0, 2.0])
    res = run_sweep(cfg)
    assert res.n_rows == 2 * 2 * 3 * 5
    c = res.columns
    keys = list(zip(c["e_m"], c["gamma"], c["xi"], c["e_j1"], c["e_j2"], c["t"]))
    assert keys == sorted(keys)
    assert res.varied_axes() == ["e_m", "gamma", "xi"]
    assert res.grid("I").shape == (2, 2, 3, 1, 1, 5)


def test_sweep_errors_carry_grid_coordinates(monkeypatch):
    import cpbentropy.sweep as sweep_mod

    def broken(*_):
        raise ValueError("boom")

    monkeypatch.setattr(sweep_mod, "build_four_level_hamiltonian", broken)
    with pytest.raises(RuntimeError, match=r"e_m=1\.0.*boom"):
        run_sweep(small())


def test_gamma_lines_have_one_curve_per_rate(tmp_path):
    cfg = SweepConfig(xi=math.pi / 2, gamma=[0.01, 0.1, 0.5], e_m=5.0, t_grid=(0, 20, 201))
    res = run_sweep(cfg)
    assert res.varied_axes() == ["gamma"]
    path = tmp_path / "rates.svg"
    render_svg(res, "lines", path)
    svg = path.read_text()
    assert svg.count("<polyline") == 3
    for g in ("0.01", "0.1", "0.5"):
        assert f"γ = {g}<" in svg


def test_coupling_heatmap_layout(tmp_path):
    cfg = SweepConfig(xi=math.pi / 2, gamma=0.0, e_m=np.linspace(0, 10, 6), t_grid=(0, 20, 21))
    res = run_sweep(cfg)
    path = tmp_path / "surface.svg"
    render_svg(res, "heatmap", path)
    svg = path.read_text()
    # 6 x 21 cells plus 64 colourbar slices
    assert len(re.findall(r'<rect x="[\d.]+" y="[\d.]+" width="[\d.]+" height="[\d.]+" fill="#', svg)) \
        == 6 * 21 + 64
    assert "E_m" in svg and "I (bits)" in svg
    assert not re.search(r"\bnan\b", svg, re.I)


def test_constant_series_draws_flat_line(tmp_path):
    # uncoupled and unitary: local evolution keeps I at its initial 0 or 1 bit
    res = run_sweep(SweepConfig(xi=[0.0, math.pi / 2], gamma=0.0, e_m=0.0, t_grid=(0, 5, 11)))
    np.testing.assert_allclose(res.grid("I").reshape(2, 11), [[0.0] * 11, [1.0] * 11], atol=1e-12)
    path = tmp_path / "flat.svg"
    render_svg(res, "lines", path)
    svg = path.read_text()
    assert not re.search(r"\bnan\b", svg, re.I)
    for pts in re.findall(r'points="([^"]+)"', svg):
        assert len({p.split(",")[1] for p in pts.split()}) == 1


def test_svg_arity_errors(tmp_path):
    res = run_sweep(small(gamma=[0.0, 0.1], e_m=[1.0, 2.0]))
    with pytest.raises(ContractError):
        render_svg(res, "lines", tmp_path / "x.svg")
    with pytest.raises(ContractError):
        render_svg(res, "heatmap", tmp_path / "x.svg")
    with pytest.raises(ContractError):
        render_svg(run_sweep(small()), "heatmap", tmp_path / "x.svg")


def test_svg_is_deterministic(tmp_path):
    cfg = small(gamma=[0.0, 0.1, 0.5], t_grid=(0, 3, 31))
    render_svg(run_sweep(cfg), "lines", tmp_path / "a.svg")
    render_svg(run_sweep(cfg), "lines", tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


# --- csv -----------------------------------------------------------------


def test_csv_header_and_rows(tmp_path):
    res = run_sweep(small(t_grid=(0.0, 1.0, 2)))
    path = tmp_path / "out.csv"
    write_csv(res, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,e_m,gamma,xi,e_j1,e_j2,S_A,S_B,S_AB,I,purity,energy,p_gg,p_ge,p_eg,p_ee"
    assert len(lines) == 3


def test_csv_round_trip_is_bit_exact(tmp_path):
    res = run_sweep(small(gamma=[0.0, 0.3], xi=[0.2, 1.3], t_grid=(0.0, 7.0, 23)))
    path = tmp_path / "rt.csv"
    write_csv(res, path)
    back = read_csv(path)
    assert back.equals(res)
    assert back.axes == res.axes


def test_csv_io_error_names_path(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv(run_sweep(small()), target)


# --- validate ------------------------------------------------------------


def test_validate_default_config_all_invariants_pass():
    report = validate(SweepConfig())
    print(report.format())
    assert report.passed


def test_validate_default_config_non_rk4_checks_pass():
    report = validate(SweepConfig())
    for check in report.checks:
        if check.name != "rk4_agreement":
            assert check.passed, check


def test_validate_moderate_spectrum_passes_everything():
    cfg = SweepConfig(model=QubitEnergies(e_j1=5, e_j2=6), gamma=[0.0, 0.1], xi=[0.0, math.pi / 2],
                      e_m=[0.0, 2.0], t_grid=(0, 10, 51))
    report = validate(cfg)
    assert report.passed, report.format()


def test_validate_flags_flipped_decay_sign():
    def corrupt(h, gamma):
        return Propagator(eig_hermitian(h), gamma, decay_sign=-1.0)

    cfg = SweepConfig(gamma=[0.01, 0.1], xi=[math.pi / 2], e_m=[1.0], t_grid=(0, 2, 21))
    report = validate(cfg, propagator_factory=corrupt)
    assert not report["purity_monotonicity"].passed
    assert not report.passed
    assert "FAIL  purity_monotonicity" in report.format()


# --- scaling / concurrency ---------------------------------------------


def test_workers_do_not_change_results():
    cfg = small(gamma=[0.0, 0.1, 0.5], xi=[0.0, 1.0], e_m=[0.0, 3.0], t_grid=(0, 5, 51))
    assert run_sweep(cfg, workers=1).equals(run_sweep(cfg, workers=3))


def test_sweep_time_scales_linearly():
    def timed(n):
        cfg = small(gamma=np.linspace(0, 0.5, n), t_grid=(0, 20, 201))
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            run_sweep(cfg)
            best = min(best, time.perf_counter() - t0)
        return best

    timed(4)  # warm-up
    t_small, t_big = timed(40), timed(160)
    assert t_big / t_small <= 2 * 4


# --- cli -----------------------------------------------------------------


def test_cli_simulate_and_sweep(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path), "--format", "both"]) == 0
    assert (tmp_path / "trajectory.csv").exists() and (tmp_path / "trajectory.svg").exists()
    out = tmp_path / "rates"
    assert main(["sweep", "--config", str(CONFIGS / "decoherence_rates.ini"), "--out", str(out)]) == 0
    assert read_csv(out / "sweep.csv").n_rows == 3 * 2001
    assert (out / "sweep.svg").read_text().count("<polyline") == 3


def test_cli_bands_and_compare(tmp_path, capsys):
    assert main(["bands", "--out", str(tmp_path), "--format", "both", "--ng", "0", "1", "11"]) == 0
    lines = (tmp_path / "bands.csv").read_text().splitlines()
    assert lines[0] == "n_g,E_0,E_1,E_2,E_3" and len(lines) == 12
    assert main(["compare-lattice", "--n-max", "2", "3"]) == 0
    assert "four-level" in capsys.readouterr().out


def test_cli_validate_exit_codes(tmp_path):
    ok = tmp_path / "ok.ini"
    ok.write_text("[model]\ne_j1 = 5\ne_j2 = 6\n[initial]\nxi = pi/2\n"
                  "[sweep]\ngamma = 0, 0.1\ne_m = 2\nt_grid = 0, 10, 51\n")
    assert main(["validate", "--config", str(ok), "--out", str(tmp_path)]) == 0
    assert "overall: PASS" in (tmp_path / "validation.txt").read_text()
    # a coarse RK4 step cannot track the exact solution
    assert main(["validate", "--config", str(ok), "--out", str(tmp_path), "--rk4-step", "0.05"]) == 2


def test_cli_usage_and_io_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nnonsense = 1\n")
    assert main(["sweep", "--config", str(bad)]) == 1
    assert main(["sweep", "--config", str(tmp_path / "absent.ini")]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--no-such-flag"])
    assert exc.value.code == 1
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--out", str(blocker), "--format", "csv"]) == 3
