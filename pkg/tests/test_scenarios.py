import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gpebohm import io
from gpebohm.cli import main, oracle_table
from gpebohm.scenarios import (PRESETS, ConfigError, OutputSpec, ScenarioConfig, potential_table, preset,
                               run_scenario, write_outputs)
from gpebohm.propagator import StepperConfig

SMALL = {
    "mode": "free_release",
    "r_factor": 2.0,
    "phi": 0.5,
    "grid": {"n_points": 512, "z_min_um": -25.6, "z_max_um": 25.6},
    "stepper": {"dt_ms": 0.001, "n_steps": 200, "store_every": 10},
    "trajectory": {"n_seeds": 8, "threshold_frac": 0.005},
    "outputs": {"artifacts": ["density", "velocity", "trajectories", "frames", "report", "pgm"],
                "frame_times": [0.0, 0.1]},
}


def test_defaults_round_trip():
    cfg = ScenarioConfig()
    again = ScenarioConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict({"physcal": {}, "grid": {"npoints": 4}, "outputs": {"colour": 1}})
    probs = exc.value.problems
    assert any("physcal" in p for p in probs)
    assert any("npoints" in p for p in probs)
    assert any("colour" in p for p in probs)


def test_phase_lives_at_top_level():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"physical": {"phi_rad": 1.0}})
    assert ScenarioConfig.from_dict({"phi": 1.0}).phi == 1.0


def test_every_violation_listed():
    bad = {
        "mode": "orbit",
        "r_factor": -1,
        "trajectory": {"n_seeds": 0, "threshold_frac": 2.0},
        "outputs": {"artifacts": ["movie"], "density_clip": [1.0, 0.0], "matrix_stride": 0},
        "analysis": {"min_contrast": 3.0},
    }
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict(bad)
    text = "\n".join(exc.value.problems)
    for needle in ("mode", "r_factor", "n_seeds", "threshold_frac", "movie", "density_clip", "matrix_stride",
                   "min_contrast"):
        assert needle in text
    assert len(exc.value.problems) >= 8


def test_nested_errors_collected_together():
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict({"physical": {"mass_kg": -1}, "grid": {"n_points": 1000}, "stepper": {"dt_ms": 0}})
    assert len(exc.value.problems) == 3


def test_clouds_must_fit_the_grid():
    with pytest.raises(ConfigError, match="outside the grid"):
        ScenarioConfig.from_dict({"physical": {"ell_um": 100.0}})


def test_free_release_switches_trap_off():
    cfg = ScenarioConfig(mode="free_release")
    assert cfg.scaled().omega_z_bar == 0.0
    assert ScenarioConfig(mode="trap").scaled().omega_z_bar == pytest.approx(2 * math.pi * 0.05)
    assert cfg.sigma0_um == pytest.approx(0.4874, abs=1e-3)


def test_bad_json_is_config_error(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        ScenarioConfig.from_json(p)


def test_preset_inventory():
    expected = {f"fig{n}{c}" for n, cs in ((2, "abc"), (3, "abcdef"), (4, "abcdef"), (5, "abc"), (6, "abc"),
                                            (7, "ab"))
                for c in cs}
    assert set(PRESETS) == expected
    for name in PRESETS:
        for cfg in preset(name).values():
            cfg.validate()
    with pytest.raises(KeyError):
        preset("fig9z")


def test_preset_parameters():
    a = preset("fig3a")[""]
    assert (a.physical.ell_um, a.r_factor, a.phi, a.mode) == (5.7, 1.0, 0.0, "free_release")
    assert a.stepper.t_final_ms == pytest.approx(3.0)
    assert a.outputs.density_clip == (0.0, 0.12) and a.outputs.velocity_clip == (-1.0, 1.0)
    d = preset("fig4d")
    assert d["phi_pi"].r_factor == 3.2 and d["phi_pi"].phi == pytest.approx(math.pi)
    c = preset("fig5c")[""]
    assert (c.physical.ell_um, c.physical.f_z_hz, c.mode) == (26.0, 50.0, "trap")
    assert c.stepper.t_final_ms == pytest.approx(80.0)
    assert c.outputs.density_clip == (0.0, 0.1) and c.outputs.velocity_clip == (-5.0, 5.0)
    assert preset("fig6c")[""].physics_key() == c.physics_key()


def test_antisymmetric_wide_clouds_keep_central_node(presets):
    res = presets("fig4d")["phi_pi"]
    first = res.series.densities()[0]
    g = res.config.grid
    # two lobes at t = 0 despite strong overlap
    assert first[g.index_of(0.0)] < 1e-20 * first.max()
    assert res.report["diagnostics"]["center_to_max_peak"] < 1e-4


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    cfg = ScenarioConfig.from_dict(SMALL)
    out = tmp_path_factory.mktemp("small")
    res = run_scenario(cfg)
    write_outputs(res, out, ("potential",))
    return cfg, res, out


def test_outputs_written(small_run):
    cfg, res, out = small_run
    names = {p.name for p in out.iterdir()}
    assert {"config.json", "density.csv", "velocity.csv", "trajectories.csv", "report.json", "density.pgm",
            "velocity.pgm", "potential.csv", "frames"} <= names
    t, z, d = io.read_spacetime(out / "density.csv")
    assert d.shape == (len(res.series), cfg.grid.n_points)
    assert np.array_equal(z, cfg.grid.z)
    img = io.read_pgm(out / "velocity.pgm")
    assert img.shape == d.shape
    assert len(list((out / "frames").iterdir())) == 2
    report = json.loads((out / "report.json").read_text())
    assert report["trajectories"]["n"] == 8
    assert ScenarioConfig.from_json(out / "config.json") == cfg


def test_matrix_stride(small_run, tmp_path):
    cfg, res, _ = small_run
    res.config = ScenarioConfig.from_dict({**SMALL, "outputs": {"artifacts": ["density"], "matrix_stride": 5}})
    write_outputs(res, tmp_path)
    t, _, d = io.read_spacetime(tmp_path / "density.csv")
    assert np.allclose(t, res.series.times[::5])


def test_byte_identical_reruns(tmp_path):
    cfg = ScenarioConfig.from_dict(SMALL)
    for sub in ("a", "b"):
        write_outputs(run_scenario(cfg), tmp_path / sub)
    for f in ("density.csv", "velocity.csv", "trajectories.csv", "report.json", "density.pgm"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_potential_table():
    tab = potential_table(ScenarioConfig())
    assert set(tab) == {"z_um", "v_trap", "v_latt", "v_ext"}
    assert np.allclose(tab["v_ext"], tab["v_trap"] + tab["v_latt"])


def test_oracle_tables():
    header, rows = oracle_table("widths")
    assert header[0] == "ell_um" and len(rows) == 3
    with pytest.raises(ValueError):
        oracle_table("nope")


def test_cli_oracle_and_list(capsys):
    assert main(["oracle", "params"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("a_perp_nm,")
    assert main(["preset", "--list"]) == 0
    assert "fig7b" in capsys.readouterr().out


def test_cli_run_and_dump(tmp_path, capsys):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({**SMALL, "outputs": {"artifacts": ["report"]}}))
    assert main(["--out", str(tmp_path / "o"), "--dump-potential", "run", str(cfgp)]) == 0
    assert (tmp_path / "o" / "report.json").exists() and (tmp_path / "o" / "potential.csv").exists()
    assert main(["--out", str(tmp_path / "p"), "--dump-potential"]) == 0
    header = (tmp_path / "p" / "potential.csv").read_text().splitlines()[0]
    assert header == "z_um,v_trap,v_latt,v_ext"


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mode": "x", "r_factor": 0}))
    assert main(["run", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "mode" in err and "r_factor" in err
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["preset", "fig99"]) == 2
    assert main([]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "gpebohm", "oracle", "widths"], capture_output=True, text=True,
                         check=True)
    assert out.stdout.startswith("ell_um,f_eff_hz")


def test_parallel_presets_match_serial(tmp_path):
    # two cheap free-release presets, each in its own worker
    names = ["fig3a", "fig3d"]
    assert main(["--out", str(tmp_path / "par"), "--jobs", "2", "preset", *names]) == 0
    assert main(["--out", str(tmp_path / "ser"), "preset", *names]) == 0
    for n, f in (("fig3a", "density.csv"), ("fig3d", "velocity.csv"), ("fig3a", "trajectories.csv")):
        assert (tmp_path / "par" / n / f).read_bytes() == (tmp_path / "ser" / n / f).read_bytes()
