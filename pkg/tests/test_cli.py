import json
import subprocess
import sys
from pathlib import Path

import pytest

from urywidth.cli import RunConfig, main


class TestRunConfig:
    def test_round_trip_bit_exact(self):
        cfg = RunConfig(command="construct",
                        params={"eps": 0.125, "m": 1}, seed=7, out="/tmp/x")
        text = cfg.to_json()
        assert RunConfig.from_json(text).to_json() == text

    def test_hash_ignores_output_path(self):
        a = RunConfig(command="c", params={"x": 1}, seed=0, out="/a")
        b = RunConfig(command="c", params={"x": 1}, seed=0, out="/b")
        assert a.config_hash() == b.config_hash()

    def test_hash_sees_seed(self):
        a = RunConfig(command="c", params={}, seed=0)
        b = RunConfig(command="c", params={}, seed=1)
        assert a.config_hash() != b.config_hash()


class TestCommands:
    def test_constants_table(self, tmp_path, capsys):
        rc = main(["--out", str(tmp_path), "constants", "--m", "1",
                   "--beta", "2", "--all-beta"])
        assert rc == 0
        data = json.loads((tmp_path / "constants.json").read_text())
        by_beta = {row["beta"]: row for row in data["table"]}
        assert by_beta[0]["improved"] == pytest.approx(1 / 3)
        assert by_beta[2]["improved"] == pytest.approx(1 / 7)
        assert (tmp_path / "constants.csv").exists()

    def test_constants_m2(self, tmp_path):
        rc = main(["--out", str(tmp_path), "constants", "--m", "2"])
        assert rc == 0
        data = json.loads((tmp_path / "constants.json").read_text())
        assert data["table"][0]["improved"] == pytest.approx(1 / 7)

    def test_construct_ball_simplex(self, tmp_path):
        rc = main(["--out", str(tmp_path), "construct", "ball-simplex",
                   "--m", "1", "--d", "1", "--eps", "0.3",
                   "--samples", "8000", "--t-count", "8"])
        assert rc == 0
        man = json.loads((tmp_path / "ball_simplex_manifest.json").read_text())
        assert man["n"] == 3
        assert man["certificate"]["extra"]["passes"]
        assert "config_hash" in man and "version" in man

    def test_construct_gromov_cube(self, tmp_path):
        rc = main(["--out", str(tmp_path), "construct", "gromov-cube",
                   "--eps", "0.125", "--samples", "20000"])
        assert rc == 0
        man = json.loads((tmp_path / "gromov_cube_manifest.json").read_text())
        assert man["certificate"]["extra"]["C"] <= 6.0
        assert (tmp_path / "gromov_cube_widths.csv").exists()

    def test_construct_bundle(self, tmp_path):
        rc = main(["--out", str(tmp_path), "construct", "bundle",
                   "--m", "1", "--k", "0", "--eps", "0.05",
                   "--samples", "6000"])
        assert rc == 0
        man = json.loads((tmp_path / "bundle_manifest.json").read_text())
        assert man["core_identity"]["max_identity_deviation"] <= 1e-12

    def test_interpolate_annulus(self, tmp_path):
        rc = main(["--out", str(tmp_path), "interpolate", "annulus"])
        assert rc == 0
        data = json.loads((tmp_path / "interpolation.json").read_text())
        assert data["chain_audit"]["ok"]
        csv = (tmp_path / "interpolation_widths.csv").read_text()
        assert csv.splitlines()[0] == "t,width"

    def test_bad_config_exit_2(self, tmp_path):
        rc = main(["--out", str(tmp_path), "construct", "ball-simplex",
                   "--eps", "-1"])
        assert rc == 2

    def test_invariant_failure_exit_1(self, tmp_path):
        # an absurdly small C cap forces the invariant-failure path
        rc = main(["--out", str(tmp_path), "construct", "gromov-cube",
                   "--eps", "0.25", "--samples", "8000",
                   "--tolerance", "1e-6"])
        assert rc == 1


class TestDeterminism:
    def test_byte_identical_manifests(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            rc = main(["--out", str(out), "--seed", "3", "construct",
                       "gromov-cube", "--eps", "0.25", "--samples", "8000"])
            assert rc == 0
        fa = (a / "gromov_cube_manifest.json").read_bytes()
        fb = (b / "gromov_cube_manifest.json").read_bytes()
        assert fa == fb
        assert ((a / "gromov_cube_widths.csv").read_bytes()
                == (b / "gromov_cube_widths.csv").read_bytes())

    def test_seed_changes_certificate(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["--out", str(a), "--seed", "1", "construct", "gromov-cube",
              "--eps", "0.25", "--samples", "8000"])
        main(["--out", str(b), "--seed", "2", "construct", "gromov-cube",
              "--eps", "0.25", "--samples", "8000"])
        assert ((a / "gromov_cube_manifest.json").read_bytes()
                != (b / "gromov_cube_manifest.json").read_bytes())


class TestEntryPoint:
    def test_module_invocation_help(self):
        res = subprocess.run([sys.executable, "-m", "urywidth.cli", "--help"],
                             capture_output=True, text=True, timeout=300)
        assert res.returncode == 0
        for flag in ("--out", "--seed"):
            assert flag in res.stdout
        res2 = subprocess.run(
            [sys.executable, "-m", "urywidth.cli", "construct", "--help"],
            capture_output=True, text=True, timeout=300)
        for flag in ("--m", "--d", "--k", "--eps", "--grid", "--samples",
                     "--tolerance"):
            assert flag in res2.stdout
