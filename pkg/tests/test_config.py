"""
Tests for YAML run configuration and command-line overrides.
"""

from pathlib import Path

import pytest
import yaml

from src.medium import MediumKind
from src.utils.config import DEFAULT_T_LIST, apply_overrides, load_config, parse_config
from src.utils.errors import ConfigurationError


def _write_config(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


class TestDefaults:
    def test_all_defaults(self):
        config = load_config(None)
        assert config.seed == 0
        assert config.medium.kind == "constant"
        assert config.solver.h == 0.05
        assert config.interval.t_list == DEFAULT_T_LIST
        assert config.output.out_dir == "results"
        assert config.validate_.quick is False

    def test_resolved_uses_section_names(self):
        resolved = load_config(None).resolved()
        assert "validate" in resolved
        assert resolved["interval"]["xi"] == [1, 0]


class TestLoading:
    def test_load_file(self, tmp_path):
        path = _write_config(tmp_path, {
            "seed": 7,
            "medium": {"kind": "laminar", "mean": 1.0, "amplitude": 0.5, "axis": [0, 1]},
            "interval": {"xi": [1, 1], "t_list": [1, 2, 4, 8]},
        })
        config = load_config(path)
        assert config.seed == 7
        assert config.interval.xi == (1, 1)
        medium = config.medium.build()
        assert medium.kind is MediumKind.LAMINAR
        assert medium.qmin == pytest.approx(0.5, abs=1e-8)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError, match="mapping"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = _write_config(tmp_path, {"solver": {"step": 0.1}})
        with pytest.raises(ConfigurationError, match="Invalid configuration"):
            load_config(path)


class TestValidation:
    @pytest.mark.parametrize("override", [
        "solver.h=0.5",
        "solver.h=0",
        "medium.delta=1.5",
        "interval.t_list=[1,2,4]",
        "interval.t_list=[1,2,3,4]",
        "interval.xi=[0,0]",
        "sweep.xi_max=1",
        "bend_demo.r=5",
        "shape.epsilons=[]",
    ])
    def test_invalid_values(self, override):
        with pytest.raises(ConfigurationError):
            parse_config({}, [override])

    def test_laminar_must_stay_positive(self):
        with pytest.raises(ConfigurationError, match="positive"):
            parse_config({"medium": {"kind": "laminar", "mean": 1.0, "amplitude": 1.0}})

    def test_custom_medium_needs_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="medium file not found"):
            parse_config({"medium": {"kind": "custom", "path": str(tmp_path / "none.txt")}})

    def test_vertices_obstacle(self):
        config = parse_config({"shape": {"obstacle": "vertices", "vertices": [[-1, -1], [1, -1], [0, 1]]}})
        assert config.shape.build_obstacle().area == pytest.approx(2.0)
        with pytest.raises(ConfigurationError, match="convex"):
            parse_config({"shape": {
                "obstacle": "vertices",
                "vertices": [[0, 0], [2, 0], [1, 0.5], [2, 2], [0, 2]],
            }})

    def test_envelope_input_must_exist(self, tmp_path):
        with pytest.raises(ConfigurationError, match="envelope input not found"):
            parse_config({"envelope": {"input": str(tmp_path / "missing.csv")}})


class TestOverrides:
    def test_nested_values_keep_types(self):
        data = apply_overrides({"solver": {"h": 0.05}}, ["solver.jobs=4", "interval.xi=[2,1]", "seed=3"])
        assert data["solver"] == {"h": 0.05, "jobs": 4}
        assert data["interval"]["xi"] == [2, 1]
        assert data["seed"] == 3

    def test_source_not_mutated(self):
        raw = {"solver": {"h": 0.05}}
        apply_overrides(raw, ["solver.h=0.1"])
        assert raw["solver"]["h"] == 0.05

    def test_alias_section(self):
        config = parse_config({}, ["validate.quick=true", "validate.suites=[envelope]"])
        assert config.validate_.quick is True
        assert config.validate_.suites == ["envelope"]

    def test_malformed(self):
        with pytest.raises(ConfigurationError, match="section.key=value"):
            apply_overrides({}, ["solver.h"])
        with pytest.raises(ConfigurationError, match="empty key"):
            apply_overrides({}, ["=3"])


CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


class TestShippedConfigs:
    @pytest.mark.parametrize("name", ["constant", "laminar", "bump", "shape", "bend_demo", "validate"])
    def test_loads(self, name):
        config = load_config(CONFIG_DIR / f"{name}.yaml")
        assert config.output.out_dir == f"results/{name}"

    def test_envelope_needs_sweep_output(self):
        with pytest.raises(ConfigurationError, match="envelope input not found"):
            load_config(CONFIG_DIR / "envelope.yaml", ["envelope.input=results/none/sweep.csv"])
