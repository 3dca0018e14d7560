"""Config parsing contract and end-to-end command-line runs."""

import json

import numpy as np
import pytest

from magnls import ConfigError, GridSpec, ground_state, parse_config
from magnls.cli import main
from magnls.grid import make_field, write_field, zero_vector_field
from magnls.hamiltonian import build_hamiltonian
from magnls.potentials import build_gaussian_well, make_potential_pair

MINIMAL = """\
[grid]
sizes = 256
lengths = 40.0

[potential]
kind = gaussian_well
"""


def write_config(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write_config(tmp_path, MINIMAL))
    assert cfg.grid.dim == 1
    assert cfg.grid.sizes == (256,)
    assert cfg.potential.depth == -2.0
    assert cfg.potential.width == 1.0
    assert cfg.solver.resolvent_eps == 1e-2
    assert cfg.nonlinearity.sign == 1
    assert cfg.nonlinearity.z == 0.05 + 0.0j
    assert cfg.nonlinearity.z_sweep == (0.01, 0.02, 0.04, 0.08)
    assert cfg.evolution.dt == 1e-4
    assert cfg.evolution.t_final == 4.0
    assert cfg.evolution.snapshot_stride == 500
    assert cfg.modulation.sigma == 4.1
    assert cfg.modulation.amplitudes == (1e-3, 2e-3, 4e-3)
    assert cfg.output.seed == 12345


def test_scalar_grid_entries_broadcast_to_dim(tmp_path):
    text = MINIMAL.replace("[grid]", "[grid]\ndim = 3").replace(
        "sizes = 256", "sizes = 16").replace("lengths = 40.0",
                                             "lengths = 20.0")
    cfg = parse_config(write_config(tmp_path, text))
    assert cfg.grid.sizes == (16, 16, 16)
    assert cfg.grid.lengths == (20.0, 20.0, 20.0)
    mixed = text.replace("sizes = 16", "sizes = 16, 8, 8")
    cfg = parse_config(write_config(tmp_path, mixed, "mixed.ini"))
    assert cfg.grid.sizes == (16, 8, 8)


def test_typo_in_section_is_named(tmp_path):
    text = MINIMAL.replace("[potential]", "[potental]")
    with pytest.raises(ConfigError,
                       match=r"\[potental\] is not a recognized section"):
        parse_config(write_config(tmp_path, text))


def test_typo_in_key_is_named(tmp_path):
    text = MINIMAL + "\n[solver]\ntol = 1e-9\n"
    with pytest.raises(ConfigError, match="solver.tol is not recognized"):
        parse_config(write_config(tmp_path, text))


def test_missing_required_section(tmp_path):
    text = "[grid]\nsizes = 256\nlengths = 40.0\n"
    with pytest.raises(ConfigError,
                       match=r"must contain a \[potential\] section"):
        parse_config(write_config(tmp_path, text))


def test_malformed_line_reports_position(tmp_path):
    text = "sizes = 256\n" + MINIMAL
    with pytest.raises(ConfigError, match="config parse error") as err:
        parse_config(write_config(tmp_path, text))
    assert "line" in str(err.value)


def test_bad_number_is_named(tmp_path):
    text = MINIMAL.replace("sizes = 256", "sizes = twelve")
    with pytest.raises(ConfigError,
                       match="grid.sizes must be an integer, got 'twelve'"):
        parse_config(write_config(tmp_path, text))


def test_power_of_two_rule(tmp_path):
    text = MINIMAL.replace("sizes = 256", "sizes = 100")
    with pytest.raises(ConfigError,
                       match="powers of two >= 8, got 100"):
        parse_config(write_config(tmp_path, text))


def test_sigma_floor_message(tmp_path):
    text = MINIMAL + "\n[modulation]\nsigma = 4.0\n"
    with pytest.raises(ConfigError, match="modulation.sigma must exceed 4"):
        parse_config(write_config(tmp_path, text))


def test_time_step_rules(tmp_path):
    big = MINIMAL + "\n[evolution]\ndt = 0.2\n"
    with pytest.raises(ConfigError,
                       match=r"evolution.dt must lie in \(0, 0.1\]"):
        parse_config(write_config(tmp_path, big))
    # stride * dt caps the spacing between tracked frames
    sparse = MINIMAL + "\n[evolution]\ndt = 1e-3\nsnapshot_stride = 500\n"
    with pytest.raises(ConfigError, match="snapshot_stride \\* dt"):
        parse_config(write_config(tmp_path, sparse, "sparse.ini"))


def test_overrides_apply_after_file(tmp_path):
    path = write_config(tmp_path, MINIMAL)
    cfg = parse_config(path, overrides=("potential.depth=-1.5",
                                        "output.seed=7"))
    assert cfg.potential.depth == -1.5
    assert cfg.output.seed == 7
    with pytest.raises(ConfigError, match="override must look like"):
        parse_config(path, overrides=("depth=-1.5",))
    with pytest.raises(ConfigError, match="is not recognized"):
        parse_config(path, overrides=("potential.dep=-1.5",))


def test_echo_resolves_tuples_and_renames_sign(tmp_path):
    cfg = parse_config(write_config(tmp_path, MINIMAL))
    echo = cfg.echo()
    assert echo["nonlinearity"]["sign"] == "defocusing"
    assert echo["grid"]["sizes"] == [256]
    assert echo["modulation"]["amplitudes"] == [1e-3, 2e-3, 4e-3]


def test_cli_pass_run_and_manifest_inventory(tmp_path):
    path = write_config(tmp_path, MINIMAL)
    out = tmp_path / "run"
    code = main(["ground-state", "--config", str(path),
                 "--output", str(out), "--seed", "99"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "pass"
    assert manifest["seed"] == 99
    assert manifest["gates"]["eigen_residual"]["passed"]
    # the manifest inventory is exactly the files on disk
    assert sorted(p.name for p in out.iterdir()) == manifest["outputs"]
    payload = json.loads((out / "ground_state.json").read_text())
    assert payload["e0"] < -0.9


def test_cli_gate_failure_exits_one(tmp_path):
    flat = make_field(GridSpec(1, (256,), (40.0,)),
                      np.full(256, -0.5, dtype=np.complex128))
    vfile = tmp_path / "flat.fld"
    write_field(vfile, flat)
    text = MINIMAL.replace(
        "kind = gaussian_well", f"kind = file\nv_file = {vfile}")
    out = tmp_path / "run"
    code = main(["validate-potentials", "--config",
                 str(write_config(tmp_path, text)), "--output", str(out)])
    assert code == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "gate-failed"
    assert not manifest["gates"]["potential_checks"]["passed"]


def test_cli_config_error_exits_two(tmp_path, capsys):
    code = main(["ground-state", "--config", str(tmp_path / "missing.ini")])
    assert code == 2
    assert "config error" in capsys.readouterr().err
    bad = write_config(tmp_path, MINIMAL.replace("[potential]", "[potental]"))
    assert main(["ground-state", "--config", str(bad)]) == 2


def test_cli_numeric_error_exits_two(tmp_path, capsys):
    path = write_config(tmp_path, MINIMAL)
    out = tmp_path / "run"
    code = main(["ground-state", "--config", str(path), "--output", str(out),
                 "--override", "potential.depth=-1e-12"])
    assert code == 2
    assert "error" in capsys.readouterr().err
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "error"
    assert manifest["error"]


def test_cli_reruns_are_byte_identical(tmp_path):
    path = write_config(tmp_path, MINIMAL)
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["resolvent-scan", "--config", str(path),
                     "--output", str(out)]) == 0
        blobs.append(((out / "resolvent.csv").read_bytes(),
                      (out / "resolvent.json").read_bytes()))
    assert blobs[0] == blobs[1]


def test_file_potential_matches_direct_construction(tmp_path):
    g = GridSpec(1, (256,), (40.0,))
    well = build_gaussian_well(g, -2.0, 1.0)
    vfile = tmp_path / "well.fld"
    write_field(vfile, well.v)
    text = MINIMAL.replace(
        "kind = gaussian_well", f"kind = file\nv_file = {vfile}")
    out = tmp_path / "run"
    assert main(["ground-state", "--config",
                 str(write_config(tmp_path, text)),
                 "--output", str(out)]) == 0
    payload = json.loads((out / "ground_state.json").read_text())
    spec = build_hamiltonian(
        make_potential_pair(zero_vector_field(g), well.v))
    direct = ground_state(spec)
    assert abs(payload["e0"] - direct.e0) <= 1e-12
