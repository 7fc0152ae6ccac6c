import csv
import json
from pathlib import Path

import pytest

from hardylab.cli import LabConfig, load_config, main, run, validate_config
from hardylab.errors import SupercriticalCouplingError


def light_config(**overrides) -> LabConfig:
    cfg = LabConfig(
        n_interior=200, n_ang=128, time_steps=100, k_modes=4,
        tau_steps=256, kernel_t_nodes=65, transform_t_nodes=1001,
        spectrum_modes=5, obs_time_steps=16, hum_verify_steps=20_000,
        inverse_steps=2000, recon_steps=500,
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def read_rows(path: Path):
    with open(path) as fh:
        return list(csv.reader(fh))


def find_run_dir(root: Path, sub: str) -> Path:
    dirs = [p for p in root.iterdir() if p.name.startswith(sub)]
    assert len(dirs) == 1
    return dirs[0]


def test_spectrum_run_writes_csv(tmp_path):
    code = run("spectrum", light_config(n_interior=800), tmp_path)
    assert code == 0
    outdir = find_run_dir(tmp_path, "spectrum")
    rows = read_rows(outdir / "spectrum.csv")
    assert rows[0] == ["k", "mu_k", "bessel_oracle", "rel_err"]
    assert len(rows) == 6  # header + 5 modes
    assert all(float(r[3]) <= 5e-3 for r in rows[1:])
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["checks"]["spectrum_oracle_rel_err"] is True
    assert "spectrum.csv" in manifest["digests"]


def test_supercritical_coupling_exit_code(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("lam = 0.3\n")
    code = main(["spectrum", "--config", str(cfg_file), "--out", str(tmp_path)])
    assert code == 3
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["error"] == "supercritical_coupling"
    assert payload["lambda_star"] == 0.25


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("no_such_key = 1\n")
    code = main(["spectrum", "--config", str(cfg_file), "--out", str(tmp_path)])
    assert code == 2
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["error"] == "invalid_config"


def test_validate_config_rules():
    with pytest.raises(SupercriticalCouplingError):
        validate_config(light_config(lam=0.25))
    for bad in (
        {"dimension_n": 2},
        {"mask_a": 0.9, "mask_b": 0.2},
        {"eps_list": (1e-3, 1e-2)},
        {"k_trunc": 50},
        {"n_interior": 4},
    ):
        with pytest.raises((ValueError,)):
            validate_config(light_config(**bad))


def test_config_file_round_trip(tmp_path):
    cfg_file = tmp_path / "lab.cfg"
    cfg_file.write_text(
        "# comment line\n"
        "lam = 0.1875\n"
        "n_interior = 300\n"
        "eps_list = 0.1, 0.01\n"
        "mask_kind = cantor  # trailing comment\n"
    )
    cfg = load_config(str(cfg_file))
    assert cfg.lam == 0.1875
    assert cfg.n_interior == 300
    assert cfg.eps_list == (0.1, 0.01)
    assert cfg.mask_kind == "cantor"


def test_seed_and_out_flags(tmp_path, monkeypatch):
    env_root = tmp_path / "env_root"
    monkeypatch.setenv("LAB_OUT", str(env_root))
    code = main(["titchmarsh", "--out", str(tmp_path / "ignored"), "--seed", "3"])
    assert code == 0
    assert env_root.exists()  # LAB_OUT overrides --out
    outdir = find_run_dir(env_root, "titchmarsh")
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 3


def test_determinism_of_csv_bodies(tmp_path):
    cfg = light_config()
    for sub in ("spectrum", "titchmarsh", "hum"):
        root1 = tmp_path / f"{sub}_a"
        root2 = tmp_path / f"{sub}_b"
        assert run(sub, cfg, root1) == 0
        assert run(sub, cfg, root2) == 0
        m1 = json.loads((find_run_dir(root1, sub) / "manifest.json").read_text())
        m2 = json.loads((find_run_dir(root2, sub) / "manifest.json").read_text())
        assert m1["digests"] == m2["digests"]


def test_check_flag_fails_on_breach(tmp_path):
    # the kernel residual ratio check is red at the default truncation
    code = run("kernel", light_config(), tmp_path, check=True)
    assert code == 1
    outdir = find_run_dir(tmp_path, "kernel")
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["checks"]["kernel_residual_ratio"] is False
    assert manifest["checks"]["kernel_boundary_exact"] is True
