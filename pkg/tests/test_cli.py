"""CLI contract: config validation, file outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from thirdkind.cli import main
from thirdkind.config import ConfigError, load_config, parse_config
from thirdkind.serialize import (
    dump_json,
    read_grid_function_csv,
    read_matrix_csv,
    write_grid_function_csv,
    write_matrix_csv,
)

BASE = {
    "depth": 6,
    "depth_max": 12,
    "alpha": 0.25,
    "lambda": 0.3,
    "eps0": 0.25,
    "ratio": 0.5,
    "bands": 3,
    "basis_size": "full",
    "coefficient": {"kind": "linear"},
    "kernel": {"kind": "exp_xy", "scale": 1.0},
    "seed": 11,
}


def write_config(tmp_path, name="config.json", **overrides):
    cfg = dict(BASE)
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestConfigParsing:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            parse_config({**BASE, "typo_key": 1})

    def test_depth_range(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "depth": 0})
        with pytest.raises(ConfigError):
            parse_config({**BASE, "depth": 30})

    def test_complex_pairs(self):
        cfg = parse_config({**BASE, "alpha": [0.1, -0.2], "lambda": [[1.0, 0.5], [0.0, 2.0]]})
        assert cfg.alpha == 0.1 - 0.2j
        assert cfg.lambdas == (1.0 + 0.5j, 2.0j)

    def test_ratio_range(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "ratio": 1.0})

    def test_missing_required(self):
        bad = dict(BASE)
        del bad["coefficient"]
        with pytest.raises(ConfigError, match="coefficient"):
            parse_config(bad)

    def test_tolerance_keys_validated(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "tolerances": {"no_such_check": 1.0}})

    def test_load_rejects_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)


class TestBuildSequenceCommand:
    def test_happy_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        code = main(["build-sequence", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 0
        report = json.loads((tmp_path / "o" / "sequence.json").read_text())
        assert len(report["bands"]) == 3
        for band in report["bands"]:
            assert band["norm_S1"] <= band["epsilon"]
            assert band["norm_S2_sum"] <= 1.0 / band["n"]

    def test_empty_band_exit_two(self, tmp_path):
        cfg = write_config(
            tmp_path,
            coefficient={"kind": "constant", "value": 5.0},
            alpha=3.0,
            kernel={"kind": "constant"},
        )
        code = main(["build-sequence", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 2
        report = json.loads((tmp_path / "o" / "sequence.json").read_text())
        assert report["error"]["type"] == "EmptyBand"
        assert report["error"]["band"] == 1

    def test_malformed_config_exit_one(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"depth": "six"}')
        code = main(["build-sequence", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "config error" in capsys.readouterr().err


class TestReduceCommand:
    def test_outputs_present_and_residual_small(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "red"
        assert main(["reduce", "--config", str(cfg), "--out", str(out)]) == 0
        for name in (
            "a0.csv",
            "a.csv",
            "sequence.json",
            "kernel_lambda0_i0_j0.csv",
            "kernel_lambda0_i1_j0.csv",
            "kernel_lambda0_i0_j1.csv",
            "report_lambda0.json",
        ):
            assert (out / name).exists(), name
        report = json.loads((out / "report_lambda0.json").read_text())
        assert report["passage_residual"] <= 1e-9

    def test_matrices_identical_across_lambda(self, tmp_path):
        cfg1 = write_config(tmp_path, name="c1.json", **{"lambda": 0.3})
        cfg2 = write_config(tmp_path, name="c2.json", **{"lambda": [[1.2, -0.7]]})
        main(["reduce", "--config", str(cfg1), "--out", str(tmp_path / "r1")])
        main(["reduce", "--config", str(cfg2), "--out", str(tmp_path / "r2")])
        for name in ("a0.csv", "a.csv"):
            b1 = (tmp_path / "r1" / name).read_bytes()
            b2 = (tmp_path / "r2" / name).read_bytes()
            assert b1 == b2, f"{name} depends on lambda"

    def test_lambda_sweep_one_report_each(self, tmp_path):
        cfg = write_config(tmp_path, **{"lambda": [[0.1, 0.0], [0.9, 0.2]]})
        out = tmp_path / "sweep"
        assert main(["reduce", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "report_lambda0.json").exists()
        assert (out / "report_lambda1.json").exists()

    def test_deterministic_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        main(["reduce", "--config", str(cfg), "--out", str(tmp_path / "d1")])
        main(["reduce", "--config", str(cfg), "--out", str(tmp_path / "d2")])
        for name in ("a0.csv", "a.csv", "report_lambda0.json", "sequence.json"):
            assert (tmp_path / "d1" / name).read_bytes() == (
                tmp_path / "d2" / name
            ).read_bytes()

    def test_strict_projected_exit_three(self, tmp_path, capsys):
        cfg = write_config(tmp_path, basis_size=16, strict=True)
        code = main(["reduce", "--config", str(cfg), "--out", str(tmp_path / "p")])
        assert code == 3
        report = json.loads((tmp_path / "p" / "report_lambda0.json").read_text())
        assert report["projected"] is True
        assert report["passage_residual"] > 1e-9


class TestVerifyCommand:
    def test_demo_passes(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "v"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
        result = json.loads((out / "verify.json").read_text())
        assert result["passed"] is True

    def test_alpha_zero_has_first_kind_section(self, tmp_path):
        cfg = write_config(tmp_path, alpha=0.0)
        out = tmp_path / "v0"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
        result = json.loads((out / "verify.json").read_text())
        names = {c["name"] for c in result["checks"]}
        assert "first_kind_residual" in names
        assert "hs_bound_slack" in names
        assert "first_kind" in result["reports"][0]

    def test_tight_tolerance_exit_three(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, depth=4, bands=2, eps0=1.0,
            tolerances={"passage_residual": 1e-18, "round_trip": 1e-18},
        )
        out = tmp_path / "tight"
        code = main(["verify", "--config", str(cfg), "--out", str(out)])
        assert code == 3
        result = json.loads((out / "verify.json").read_text())
        failing = [c["name"] for c in result["checks"] if not c["passed"]]
        assert failing
        assert "failed checks" in capsys.readouterr().err


class TestSerialization:
    def test_matrix_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(81)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m)
        np.testing.assert_array_equal(read_matrix_csv(path), m)

    def test_grid_function_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(82)
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        path = tmp_path / "f.csv"
        write_grid_function_csv(path, v)
        np.testing.assert_array_equal(read_grid_function_csv(path), v)

    def test_json_floats_round_trip(self):
        values = [1.0 / 3.0, 2.0**-52, 1e300, -0.0, 6.02e23]
        text = dump_json({"xs": values})
        parsed = json.loads(text)
        assert parsed["xs"] == values

    def test_json_handles_nonfinite(self):
        text = dump_json({"c": float("inf"), "n": float("nan")})
        parsed = json.loads(text)
        assert parsed["c"] == "inf"
        assert parsed["n"] == "nan"

    def test_csv_coefficient_input(self, tmp_path):
        # a coefficient supplied as a file reproduces the sampled built-in
        from thirdkind import GridFunction, build_space
        from thirdkind.config import make_coefficient

        space = build_space(4)
        direct = GridFunction.sample(space, lambda y: y)
        path = tmp_path / "h.csv"
        write_grid_function_csv(path, direct.values)
        loaded = make_coefficient({"kind": "csv", "path": str(path)}, space)
        np.testing.assert_array_equal(loaded.values, direct.values)

    def test_csv_kernel_input(self, tmp_path):
        from thirdkind import GridKernel, build_space
        from thirdkind.config import make_kernel

        space = build_space(3)
        c = space.centers()
        direct = GridKernel(space, np.exp(np.outer(c, c)))
        path = tmp_path / "k.csv"
        write_matrix_csv(path, direct.entries)
        loaded = make_kernel({"kind": "csv", "path": str(path)}, space)
        np.testing.assert_array_equal(loaded.entries, direct.entries)

    def test_reduce_exports_solution(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "sol"
        assert main(["reduce", "--config", str(cfg), "--out", str(out)]) == 0
        phi = read_grid_function_csv(out / "phi.csv")
        assert phi.size == 64

    def test_relative_csv_path_resolved_against_config(self, tmp_path):
        from thirdkind import GridFunction, build_space
        from thirdkind.config import make_coefficient

        space = build_space(4)
        direct = GridFunction.sample(space, lambda y: 2.0 * y)
        write_grid_function_csv(tmp_path / "h.csv", direct.values)
        cfg_path = write_config(
            tmp_path, coefficient={"kind": "csv", "path": "h.csv"}
        )
        cfg = load_config(cfg_path)
        loaded = make_coefficient(cfg.coefficient, space)
        np.testing.assert_array_equal(loaded.values, direct.values)
