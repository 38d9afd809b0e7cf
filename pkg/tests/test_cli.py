"""CLI tests: subcommands, config merging, determinism, exit codes."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from diffcop import copula
from diffcop.cli import main
from diffcop.models import PathEnsemble
from diffcop.recombine import FirstPassageSample


def run(args):
    return main([str(a) for a in args])


class TestCopulaGrid:
    def test_ou_grid_symmetric(self, tmp_path):
        out = tmp_path / "grid.csv"
        code = run(["copula-grid", "--model", "ou", "--alpha", 0.1,
                    "--s", 30, "--t", 30.5, "--n", 21, "--out", out])
        assert code == 0
        matrix, meta = copula.read_grid_csv(out)
        assert meta["n"] == 21 and meta["s"] == 30.0 and meta["t"] == 30.5
        assert float(np.max(np.abs(matrix - matrix.T))) <= 1e-9

    def test_cir_gamma_one_matches_time_changed_rbm(self, tmp_path):
        alpha = 0.1
        out_cir = tmp_path / "cir.csv"
        out_rbm = tmp_path / "rbm.csv"
        code = run(["copula-grid", "--model", "cir", "--alpha", alpha, "--gamma", 1,
                    "--x0", 0, "--s", 30, "--t", 30.5, "--n", 9, "--out", out_cir])
        assert code == 0
        phi_inv = lambda tau: math.expm1(alpha * tau) / alpha
        code = run(["copula-grid", "--model", "rbm", "--s", phi_inv(30.0),
                    "--t", phi_inv(30.5), "--n", 9, "--out", out_rbm])
        assert code == 0
        a, _ = copula.read_grid_csv(out_cir)
        b, _ = copula.read_grid_csv(out_rbm)
        assert float(np.max(np.abs(a - b))) <= 1e-8

    def test_bad_surface_model(self, tmp_path, capsys):
        code = run(["copula-grid", "--model", "cir", "--s", 2, "--t", 1,
                    "--out", tmp_path / "x.csv"])
        assert code == 2


class TestSimulate:
    def test_byte_identical_with_same_seed(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = ["simulate", "--model", "bm", "--seed", 7, "--t-max", 1.0,
                "--n-steps", 10, "--n-paths", 8]
        assert run(base + ["--out", a]) == 0
        assert run(base + ["--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_uniformized_paths_in_unit_interval(self, tmp_path):
        out = tmp_path / "u.csv"
        code = run(["simulate", "--model", "ou", "--params",
                    "alpha=1.0,beta=0.5,sigma=0.9", "--x0", 0.2, "--uniformized",
                    "--t-max", 2.0, "--n-steps", 5, "--n-paths", 16, "--out", out])
        assert code == 0
        ens = PathEnsemble.from_csv(out)
        assert np.all((ens.paths >= 0.0) & (ens.paths <= 1.0))

    def test_invalid_params_usage_error(self, tmp_path):
        code = run(["simulate", "--model", "gbm", "--x0", 0.0,
                    "--params", "mu=0.1,sigma=0.4", "--out", tmp_path / "x.csv"])
        assert code == 2
        code = run(["simulate", "--model", "ou", "--params", "alpha=1.0",
                    "--out", tmp_path / "x.csv"])
        assert code == 2


class TestRecombineCommand:
    def test_writes_paths(self, tmp_path):
        out = tmp_path / "z.csv"
        code = run(["recombine",
                    "--source-model", "ou", "--source-params",
                    "alpha=1.0,beta=0.5,sigma=0.9", "--source-x0", 0.2,
                    "--target-model", "cir", "--target-params",
                    "alpha=1.0,beta=1.0,sigma=0.8", "--target-x0", 1.2,
                    "--t-max", 2.0, "--n-steps", 4, "--n-paths", 32,
                    "--seed", 3, "--out", out])
        assert code == 0
        ens = PathEnsemble.from_csv(out)
        assert ens.paths.shape == (32, 4)
        assert np.all(ens.paths > 0.0)      # cir marginals are positive


class TestFpt:
    def test_unreachable_threshold_all_censored(self, tmp_path):
        out = tmp_path / "fpt.csv"
        code = run(["fpt", "--model", "ou", "--params", "alpha=0.1,beta=0.0,sigma=1.0",
                    "--threshold", 1e10, "--t-max", 1.0, "--dt", 0.1,
                    "--n-paths", 12, "--out", out])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 12
        assert all(line == ">1" for line in lines)
        back = FirstPassageSample.from_csv(out)
        assert back.censored.all()


class TestValidate:
    def test_special_fn_suite_passes(self, capsys):
        code = run(["validate", "--suite", "special_fn"])
        captured = capsys.readouterr()
        assert code == 0
        assert "PASS criterion 1" in captured.out


class TestConfigAndUsage:
    def test_config_merges_under_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "bm", "n_paths": 5, "t_max": 1.0,
                                   "n_steps": 4, "out": str(tmp_path / "cfg_out.csv")}))
        code = run(["simulate", "--model", "bm", "--config", cfg,
                    "--n-paths", 3])
        assert code == 0
        ens = PathEnsemble.from_csv(tmp_path / "cfg_out.csv")
        assert ens.paths.shape[0] == 3          # flag wins over config

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"flux_capacitor": 1.21}))
        with pytest.raises(SystemExit) as err:
            run(["simulate", "--model", "bm", "--config", cfg,
                 "--out", tmp_path / "x.csv"])
        assert err.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["simulate", "--model", "bm", "--warp", "9"])
        assert err.value.code == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run([])
        assert err.value.code == 2

    def test_entry_point_runs(self, tmp_path):
        out = tmp_path / "p.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "diffcop.cli", "simulate", "--model", "bm",
             "--n-paths", "2", "--n-steps", "3", "--t-max", "1.0", "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert out.exists()
