import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergomix.cli import main
from ergomix.config import (
    Config,
    DatumBlock,
    FieldBlock,
    MapBlock,
    default_radii,
    parse_config,
    render_config,
)
from ergomix.errors import ConfigError
from ergomix.scalar import make_initial, sample_scalar, save_grid
from ergomix.fields import VelocityFieldSpec, make_field

MINIMAL_MIXING = """
experiment = mixing
seed = 11

[field]
kind = alternating_shear

[datum]
kind = checkerboard
"""


def test_minimal_config_materializes_documented_defaults():
    config = parse_config(MINIMAL_MIXING)
    assert config.resolution == 512
    assert config.horizon == 20
    assert config.kappa == pytest.approx(1.0 / 3.0)
    assert config.steps_per_unit == 256
    assert config.seed == 11
    assert config.field.kind == "alternating_shear"
    assert config.field.amplitude == 1.0


def test_kappa_range_error_names_key():
    with pytest.raises(ConfigError, match=r"kappa must lie in \(0.0, 1.0\)"):
        parse_config(MINIMAL_MIXING.replace("seed = 11", "seed = 11\nkappa = 1.5"))


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="wavenumbr"):
        parse_config(MINIMAL_MIXING + "\n[field]\nwavenumbr = 2\n")


def test_missing_seed_is_rejected():
    with pytest.raises(ConfigError, match="seed"):
        parse_config("experiment = mixing\n[field]\nkind = zero\n[datum]\nkind = stripe\n")


def test_experiment_routing_requires_blocks():
    with pytest.raises(ConfigError, match="map.kind"):
        parse_config("experiment = ruelle\nseed = 1\n")
    with pytest.raises(ConfigError, match="field"):
        parse_config("experiment = ruelle\nseed = 1\n[map]\nkind = time_one_flow\n")


def test_overrides_compose_textually():
    config = parse_config(MINIMAL_MIXING, overrides=["field.amplitude=1.25", "resolution=128"])
    assert config.field.amplitude == 1.25
    assert config.resolution == 128
    with pytest.raises(ConfigError):
        parse_config(MINIMAL_MIXING, overrides=["nonsense"])


valid_configs = st.builds(
    Config,
    experiment=st.sampled_from(["mixing", "regularity"]),
    seed=st.integers(0, 2**31),
    output_dir=st.sampled_from(["runs", "out/x", "r2"]),
    n=st.integers(1, 40),
    level=st.integers(1, 8),
    samples=st.integers(1, 10**7),
    lyapunov_samples=st.integers(1, 5000),
    lyapunov_n=st.integers(1, 400),
    probes_per_cell=st.integers(16, 256),
    shell_samples=st.integers(32, 1024),
    horizon=st.integers(1, 60),
    resolution=st.integers(16, 2048),
    kappa=st.floats(1e-6, 1.0 - 1e-6, allow_nan=False),
    steps_per_unit=st.integers(1, 512),
    burn_in_fraction=st.floats(0.0, 0.9, allow_nan=False),
    radii=st.lists(st.floats(1e-3, 0.5, allow_nan=False), max_size=4).map(tuple),
    grid_file=st.just(""),
    field=st.builds(
        FieldBlock,
        kind=st.sampled_from(["zero", "steady_shear", "alternating_shear", "cellular"]),
        amplitude=st.floats(0.0, 8.0, allow_nan=False),
        phases=st.lists(st.floats(0.0, 0.999), max_size=2).map(tuple),
        wavenumber=st.integers(1, 5),
    ),
    datum=st.builds(
        DatumBlock,
        kind=st.sampled_from(["sinusoid", "checkerboard", "stripe"]),
        wavevector=st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
        level=st.integers(0, 8),
    ),
    map=st.builds(MapBlock, kind=st.just("cat")),
)


@given(valid_configs)
@settings(max_examples=1000, deadline=None)
def test_config_round_trip(config):
    assert parse_config(render_config(config)) == config


def test_default_radii_bounds():
    radii = default_radii(256)
    assert radii[0] >= 2.0 / 256
    assert radii[-1] <= 0.5
    assert all(a < b for a, b in zip(radii, radii[1:]))


# --- CLI ---------------------------------------------------------------------


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


RUELLE_SMALL = """
experiment = ruelle
seed = 12
n = 8
level = 4
samples = 200000
lyapunov_samples = 30
lyapunov_n = 10
output_dir = {out}

[map]
kind = baker
"""


def test_cli_run_ruelle_writes_report(tmp_path, capsys):
    out = tmp_path / "results"
    path = _write(tmp_path, "ruelle.cfg", RUELLE_SMALL.format(out=out))
    code = main(["run", path])
    assert code == 0
    report = json.loads((out / "ruelle_report.json").read_text())
    assert report["pass"] is True
    assert (out / "resolved_config.cfg").exists()
    stdout = capsys.readouterr().out
    assert "ruelle:" in stdout
    assert "samples = 200000" in stdout


def test_cli_missing_config_exits_2(capsys):
    assert main(["run", "does/not/exist.cfg"]) == 2
    assert "does/not/exist.cfg" in capsys.readouterr().err


def test_cli_bad_override_exits_2(tmp_path, capsys):
    path = _write(tmp_path, "r.cfg", RUELLE_SMALL.format(out=tmp_path / "o"))
    assert main(["run", path, "--set", "kappa=1.5"]) == 2
    assert "kappa" in capsys.readouterr().err


def test_cli_override_reflected_in_echo(tmp_path, capsys):
    path = _write(tmp_path, "r.cfg", RUELLE_SMALL.format(out=tmp_path / "o"))
    code = main(["run", path, "--set", "samples=150000"])
    assert code == 0
    assert "samples = 150000" in capsys.readouterr().out


def test_cli_numeric_divergence_exits_3(tmp_path, capsys):
    text = """
experiment = lyapunov
seed = 13
n = 2
samples = 10
steps_per_unit = 4
output_dir = {out}

[map]
kind = time_one_flow

[field]
kind = cellular
amplitude = 1000000000.0
""".format(out=tmp_path / "o")
    path = _write(tmp_path, "diverge.cfg", text)
    assert main(["run", path]) == 3
    assert "numeric" in capsys.readouterr().err


def test_cli_gate_failure_exits_1(tmp_path, monkeypatch):
    def failing_run(config):
        payload = {
            "pass": False,
            "entropy_estimate": 1.0,
            "sum_positive_exponents": 0.5,
        }
        return payload, False, None

    monkeypatch.setattr("ergomix.cli.run_experiment", failing_run)
    path = _write(tmp_path, "r.cfg", RUELLE_SMALL.format(out=tmp_path / "o"))
    assert main(["run", path]) == 1
    assert (tmp_path / "o" / "ruelle_report.json").exists()


def test_cli_catalog(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "alternating_shear" in out
    assert "baker" in out
    assert "checkerboard" in out


def test_cli_diagnose_roundtrip(tmp_path, capsys):
    grid = sample_scalar(
        make_field(VelocityFieldSpec(kind="zero")), make_initial("checkerboard", level=1), 0.0, 64
    )
    stem = str(tmp_path / "grid")
    save_grid(grid, stem)
    assert main(["diagnose", stem, "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert "h_minus_one" in out
    assert main(["diagnose", str(tmp_path / "missing")]) == 2


def test_cli_run_is_deterministic_across_thread_env(tmp_path, monkeypatch):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    config = """
experiment = mixing
seed = 14
horizon = 5
resolution = 128
steps_per_unit = 8
shell_samples = 32
lyapunov_samples = 20
lyapunov_n = 5
output_dir = {out}

[field]
kind = alternating_shear
amplitude = 0.95
phases = 0.13, 0.41

[datum]
kind = checkerboard
level = 2
"""
    path_a = _write(tmp_path, "a.cfg", config.format(out=out_a))
    path_b = _write(tmp_path, "b.cfg", config.format(out=out_b))
    monkeypatch.setenv("ERGOMIX_THREADS", "1")
    assert main(["run", path_a]) == 0
    monkeypatch.setenv("ERGOMIX_THREADS", "4")
    assert main(["run", path_b]) == 0
    assert (out_a / "mixing_report.json").read_bytes() == (out_b / "mixing_report.json").read_bytes()
    assert (out_a / "mixing_series.csv").read_bytes() == (out_b / "mixing_series.csv").read_bytes()
