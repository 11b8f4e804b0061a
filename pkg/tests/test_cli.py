import json

import numpy as np
import pytest

from hriesz.cli import EXIT_CONFIG, EXIT_DATA, EXIT_FINDING, EXIT_OK, main, parse_eps_rule
from hriesz.errors import ConfigError


def write_config(tmp_path, name="config.json", **fields):
    path = tmp_path / name
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


AXIS_MEASURE = {"type": "axis", "t0": 0.0, "t1": 1.0, "count": 1024, "scale": 256.0}


class TestConfigParsing:
    def test_eps_rule_string(self):
        eps = parse_eps_rule("4^-2k", 3)
        assert eps == (4.0 ** -2, 4.0 ** -4, 4.0 ** -6)

    def test_eps_rule_list(self):
        assert parse_eps_rule([0.25, 0.0625], 2) == (0.25, 0.0625)

    def test_eps_rule_bad(self):
        with pytest.raises(ConfigError):
            parse_eps_rule("four^-2k", 2)

    def test_invalid_n(self, tmp_path):
        cfg = write_config(tmp_path, n=0, seed=1)
        assert main(["kernel-check", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["kernel-check", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json", encoding="utf-8")
        assert main(["kernel-check", "--config", str(p)]) == EXIT_CONFIG

    def test_missing_deltas_for_norm_profile(self, tmp_path):
        cfg = write_config(tmp_path, n=1, seed=1, measure=AXIS_MEASURE)
        assert main(["norm-profile", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_eps_constraint_is_parse_time(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=1,
            measure={"type": "cantor", "eps_rule": "2^-1k", "depth": 3},
        )
        assert main(["cantor", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_atoms_file(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=1, deltas=[0.1],
            measure={"type": "atoms_file", "path": "missing.csv"},
        )
        assert main(["norm-profile", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG


class TestKernelCheck:
    def test_passes_and_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, n=1, seed=7, kernel_check={"samples": 2000})
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        assert main(["kernel-check", "--config", cfg, "--out", str(out1)]) == EXIT_OK
        assert main(["kernel-check", "--config", cfg, "--out", str(out2)]) == EXIT_OK
        b1 = (out1 / "kernel_check.json").read_bytes()
        b2 = (out2 / "kernel_check.json").read_bytes()
        assert b1 == b2
        report = json.loads(b1)
        assert report["passed"] is True
        assert report["schema_version"] == 1
        assert "version" in report and "config" in report

    def test_seed_override_recorded(self, tmp_path):
        cfg = write_config(tmp_path, n=1, seed=7, kernel_check={"samples": 2000})
        out = tmp_path / "r"
        assert main(["kernel-check", "--config", cfg, "--out", str(out), "--seed", "99"]) == EXIT_OK
        report = json.loads((out / "kernel_check.json").read_text())
        assert report["config"]["seed"] == 99


class TestNormProfile:
    def test_axis_profile_is_zero(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=3,
            measure={"type": "axis", "t0": 0.0, "t1": 1.0, "count": 128},
            deltas=[1e-4, 1e-2, 0.5],
        )
        out = tmp_path / "out"
        assert main(["norm-profile", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "norm_profile.csv").read_text().strip().splitlines()
        assert lines[0] == "delta,value,iterations,residual"
        assert len(lines) == 4
        for ln in lines[1:]:
            assert float(ln.split(",")[1]) == 0.0
        report = json.loads((out / "norm_profile.json").read_text())
        assert report["sup_value"] == 0.0
        assert report["atoms"] == 128

    def test_empty_measure_is_data_error(self, tmp_path):
        atoms = tmp_path / "empty.csv"
        atoms.write_text("n=1\n", encoding="utf-8")
        cfg = write_config(
            tmp_path, n=1, seed=3,
            measure={"type": "atoms_file", "path": "empty.csv"},
            deltas=[0.1],
        )
        assert main(["norm-profile", "--config", cfg, "--out", str(tmp_path)]) == EXIT_DATA


class TestGrowthWitness:
    def test_axis_witness(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=5, measure=AXIS_MEASURE, deltas=[1e-3, 0.1],
            growth={"A": 2.0, "M": 128.0, "s": 0.1, "j_max": 3},
        )
        out = tmp_path / "w"
        assert main(["growth-witness", "--config", cfg, "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "witness.json").read_text())
        res = report["result"]
        assert res["verdict"] == "witness"
        assert res["mass_fraction"] >= 0.5
        assert res["dimension_estimate"] <= 2.2
        assert res["experimental_constants"] is True
        cube = res["start_cube"]  # integer-triple wire format
        assert set(cube) == {"k", "a", "b"}
        assert isinstance(cube["k"], int) and isinstance(cube["b"], int)
        assert all(isinstance(v, int) for v in cube["a"]) and len(cube["a"]) == 2
        levels = (out / "levels.csv").read_text().strip().splitlines()
        assert levels[0] == "j,mass,packing_sum,min_sidelength"
        assert len(levels) >= 2
        dims = (out / "dimension.csv").read_text().strip().splitlines()
        assert dims[0].startswith("exponent,S_0")

    def test_uniform_certificate(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=6,
            measure={"type": "uniform_cube", "k": 0, "a": [0, 0], "b": 0,
                     "count": 1024, "total": 1.0},
            deltas=[0.05],
            norm={"max_iters": 200},
        )
        out = tmp_path / "c"
        assert main(["growth-witness", "--config", cfg, "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "witness.json").read_text())
        assert report["result"]["verdict"] == "certificate"
        assert report["result"]["exceeds_threshold"] is False

    def test_certificate_threshold_finding(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=6,
            measure={"type": "uniform_cube", "k": 0, "a": [0, 0], "b": 0,
                     "count": 1024, "total": 1.0},
            deltas=[0.05],
            c2_threshold=0.25,
            norm={"max_iters": 200},
        )
        out = tmp_path / "f"
        assert main(["growth-witness", "--config", cfg, "--out", str(out)]) == EXIT_FINDING
        report = json.loads((out / "witness.json").read_text())
        assert report["result"]["exceeds_threshold"] is True

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=5, measure=AXIS_MEASURE, deltas=[1e-3],
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["growth-witness", "--config", cfg, "--out", str(out1)]) == EXIT_OK
        assert main(["growth-witness", "--config", cfg, "--out", str(out2)]) == EXIT_OK
        for name in ("witness.json", "levels.csv", "dimension.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_ball_growth_section(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=5, measure=AXIS_MEASURE, deltas=[1e-3],
            radii=[0.25, 1.0], centers=[[0.0, 0.0, 0.5]],
        )
        out = tmp_path / "g"
        assert main(["growth-witness", "--config", cfg, "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "witness.json").read_text())
        assert report["ball_growth"]["value"] > 0


class TestCantor:
    def test_depth_one(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=2,
            measure={"type": "cantor", "eps_rule": "4^-2k", "depth": 1},
        )
        out = tmp_path / "c1"
        assert main(["cantor", "--config", cfg, "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "cantor_summary.json").read_text())
        assert summary["atoms"] == 1
        assert summary["sup_norm"] == 0.0
        assert summary["total_mass"] == 1.0
        atoms = (out / "atoms.csv").read_text().strip().splitlines()
        assert atoms[0] == "n=1" and len(atoms) == 2

    def test_depth_five_bounded(self, tmp_path):
        cfg = write_config(
            tmp_path, n=1, seed=2,
            measure={"type": "cantor", "eps_rule": "4^-2k", "depth": 5},
        )
        out = tmp_path / "c5"
        assert main(["cantor", "--config", cfg, "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "cantor_summary.json").read_text())
        assert summary["atoms"] == 16
        assert 0 < summary["sup_norm"] < 1.0

    def test_requires_n1(self, tmp_path):
        cfg = write_config(
            tmp_path, n=2, seed=2,
            measure={"type": "cantor", "eps_rule": "4^-2k", "depth": 2},
        )
        assert main(["cantor", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_requires_cantor_measure(self, tmp_path):
        cfg = write_config(tmp_path, n=1, seed=2, measure=AXIS_MEASURE)
        assert main(["cantor", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG


class TestAtomsFileRoundtrip:
    def test_profile_from_file(self, tmp_path):
        from hriesz.lattice import CubeId
        from hriesz.measure import save_atoms, uniform_on_cube

        mu = uniform_on_cube(CubeId(0, (0, 0), 0), 64, 1.0, seed=8)
        save_atoms(mu, tmp_path / "atoms.csv")
        cfg = write_config(
            tmp_path, n=1, seed=8,
            measure={"type": "atoms_file", "path": "atoms.csv"},
            deltas=[0.1],
        )
        out = tmp_path / "p"
        assert main(["norm-profile", "--config", cfg, "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "norm_profile.json").read_text())
        assert report["atoms"] == 64
        assert report["sup_value"] > 0
