"""
End-to-end tests of the pinlab command line on small constant-medium runs.
"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from src.cli.main import build_parser, main
from src.cli.validate import SUITES
from src.utils.errors import EXIT_CONFIG, EXIT_OK

FAST = ["--set", "solver.h=0.1", "--set", "interval.t_list=[1,2,4,8]", "--set", "output.plots=false"]


def _run(command, tmp_path, *extra):
    return main([command, "--out", str(tmp_path), *FAST, *extra])


class TestParser:
    def test_subcommands(self):
        parser = build_parser()
        for name in ("sweep", "interval", "shape", "bend-demo", "envelope", "validate"):
            args = parser.parse_args([name])
            assert args.command == name

    def test_quick_only_on_validate(self):
        parser = build_parser()
        assert parser.parse_args(["validate", "--quick"]).quick
        with pytest.raises(SystemExit):
            parser.parse_args(["interval", "--quick"])


class TestInterval:
    def test_constant_medium_interval(self, tmp_path, capsys):
        code = _run("interval", tmp_path, "--dump-field")
        assert code == EXIT_OK
        assert "(1,0)" in capsys.readouterr().out

        with open(tmp_path / "interval.json") as f:
            interval = json.load(f)
        assert interval["q_upper"] == pytest.approx(1.0, abs=1e-2)
        assert interval["q_lower"] == pytest.approx(1.0, abs=1e-2)
        assert interval["status"] == "ok"

        series = pd.read_csv(tmp_path / "t_series.csv")
        assert len(series) == 8
        assert set(series["mode"]) == {"min_supersolution", "max_subsolution"}
        assert (tmp_path / "field_min_supersolution.txt").is_file()
        assert (tmp_path / "field_max_subsolution.txt").is_file()

        with open(tmp_path / "manifest.json") as f:
            manifest = json.load(f)
        assert manifest["command"] == "interval"
        recorded = {item["path"] for item in manifest["outputs"]}
        assert {"interval.json", "t_series.csv"} <= recorded

    def test_invalid_override_is_a_config_error(self, tmp_path):
        assert _run("interval", tmp_path, "--set", "solver.h=5") == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["interval", "--config", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG


class TestEnvelope:
    @pytest.fixture
    def sweep_csv(self, tmp_path):
        thetas = 2.0 * math.pi * np.arange(8) / 8.0
        values = 1.0 + 0.1 * np.cos(4.0 * thetas)
        values[3] = np.nan
        path = tmp_path / "sweep.csv"
        pd.DataFrame({"theta": thetas, "q_upper": values}).to_csv(path, index=False)
        return path

    def test_non_monotone_envelope(self, tmp_path, sweep_csv):
        out = tmp_path / "out"
        code = main([
            "envelope", "--out", str(out),
            "--set", f"envelope.input={sweep_csv}",
            "--set", "envelope.n_samples=360",
            "--set", "envelope.m=5",
        ])
        assert code == EXIT_OK
        frame = pd.read_csv(out / "envelope.csv")
        assert list(frame.columns) == ["theta", "value"]
        assert len(frame) == 360
        assert frame["value"].iloc[0] == pytest.approx(1.1)
        assert (out / "envelope.svg").is_file()

    def test_double_regularization(self, tmp_path, sweep_csv, capsys):
        out = tmp_path / "out"
        code = main([
            "envelope", "--out", str(out),
            "--set", f"envelope.input={sweep_csv}",
            "--set", "envelope.n_samples=360",
            "--set", "envelope.n_lip=2",
            "--set", "output.plots=false",
        ])
        assert code == EXIT_OK
        assert "Lipschitz defect" in capsys.readouterr().out

    def test_input_required(self, tmp_path):
        assert main(["envelope", "--out", str(tmp_path)]) == EXIT_CONFIG


class TestValidate:
    def test_selected_suites(self, tmp_path):
        code = main([
            "validate", "--quick", "--out", str(tmp_path),
            "--set", "validate.suites=[envelope,lattice_identity]",
        ])
        assert code == EXIT_OK
        with open(tmp_path / "validation.json") as f:
            results = json.load(f)
        assert [r["name"] for r in results] == ["lattice_identity", "envelope"]
        assert all(r["passed"] for r in results)
        assert (tmp_path / "validation.csv").is_file()

    def test_unknown_suite(self, tmp_path):
        code = main(["validate", "--out", str(tmp_path), "--set", "validate.suites=[nothing]"])
        assert code == EXIT_CONFIG

    def test_normal_bound_registered_after_birkhoff(self):
        names = list(SUITES)
        assert names.index("normal_bound") == names.index("birkhoff") + 1
