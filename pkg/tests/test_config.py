import numpy as np
import pytest

from gmfilter.config import ExperimentConfig, FilterOptions, load_config
from gmfilter.errors import ConfigError


def write_config(tmp_path, text, name="exp.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def write_grid(tmp_path, name="park.txt", rows=("....", "....", "....")):
    path = tmp_path / name
    path.write_text("\n".join(rows) + "\n")
    return path


class TestLoadDefaults:
    def test_empty_file_yields_defaults(self, tmp_path):
        config = load_config(write_config(tmp_path, ""))
        assert config.scenario == "tricyclist"
        assert config.runs == 20
        assert config.filters == ("gmf", "pf", "pgm-ds", "pgm-du")
        assert config.filter_params.num_samples == 2000
        assert config.base_dir == str(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        with pytest.raises(ConfigError, match="invalid YAML"):
            load_config(write_config(tmp_path, "a: [1, 2\n"))

    def test_top_level_must_be_mapping(self, tmp_path):
        with pytest.raises(ConfigError, match="mapping"):
            load_config(write_config(tmp_path, "- 1\n- 2\n"))

    def test_lists_become_tuples(self, tmp_path):
        grid = write_grid(tmp_path)
        config = load_config(write_config(tmp_path, f"""
scenario: radio
radio:
  grid: {grid.name}
  waypoints: [[1.0, 1.0], [2.0, 1.0]]
"""))
        assert config.radio.waypoints == ((1.0, 1.0), (2.0, 1.0))
        assert isinstance(config.radio.waypoints[0], tuple)

    def test_grid_path_relative_to_config_file(self, tmp_path):
        sub = tmp_path / "sub"
        sub.mkdir()
        write_grid(sub)
        config = load_config(write_config(sub, "scenario: radio\nradio:\n  grid: park.txt\n"))
        assert config.radio.grid_path(config.base_dir) == sub / "park.txt"


class TestUnknownKeys:
    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ConfigError, match="key 'speling'"):
            load_config(write_config(tmp_path, "speling: 3\n"))

    def test_unknown_filter_params_key(self, tmp_path):
        with pytest.raises(ConfigError, match="key 'filter_params.x'"):
            load_config(write_config(tmp_path, "filter_params:\n  x: 1\n"))

    def test_unknown_radio_key(self, tmp_path):
        with pytest.raises(ConfigError, match="key 'radio.towers'"):
            load_config(write_config(tmp_path, "radio:\n  towers: 2\n"))

    def test_unknown_tricyclist_key(self, tmp_path):
        with pytest.raises(ConfigError, match="key 'tricyclist.gears'"):
            load_config(write_config(tmp_path, "tricyclist:\n  gears: 3\n"))

    def test_base_dir_not_settable_from_file(self, tmp_path):
        with pytest.raises(ConfigError, match="key 'base_dir'"):
            load_config(write_config(tmp_path, "base_dir: /tmp\n"))


class TestValidationMessages:
    @pytest.mark.parametrize("text,key", [
        ("scenario: underwater\n", "key 'scenario'"),
        ("seed: -1\n", "key 'seed'"),
        ("runs: 0\n", "key 'runs'"),
        ("filters: [gmf, warlock]\n", "key 'filters'"),
        ("filters: []\n", "key 'filters'"),
        ("filter_params:\n  num_samples: 1\n", "filter_params.num_samples"),
        ("filter_params:\n  bandwidth_exponent: 0.1\n", "filter_params.bandwidth_exponent"),
        ("filter_params:\n  eps: 0\n", "filter_params.eps"),
        ("filter_params:\n  min_pts: 0\n", "filter_params.min_pts"),
        ("filter_params:\n  ut_alpha: 0\n", "filter_params.ut_alpha"),
        ("filter_params:\n  pf_ess_fraction: 1.5\n", "filter_params.pf_ess_fraction"),
        ("tricyclist:\n  dt: 0\n", "tricyclist.dt"),
        ("tricyclist:\n  num_steps: 0\n", "tricyclist.num_steps"),
        ("tricyclist:\n  wheelbase: 0\n", "tricyclist.wheelbase"),
        ("tricyclist:\n  initial_mean: [0, 0, 0]\n", "tricyclist.initial_mean"),
        ("tricyclist:\n  q_diag: [1, 1, 1]\n", "tricyclist.q_diag"),
        ("tricyclist:\n  r_diag: [1, 1, 1]\n", "tricyclist.r_diag"),
        ("tricyclist:\n  meas_period: 0\n", "tricyclist.meas_period"),
        ("tricyclist:\n  initial_mean: [.inf, 0, 0, 0, 0, 0, 0]\n", "tricyclist.initial_mean"),
    ])
    def test_invalid_values_name_their_key(self, tmp_path, text, key):
        with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
            load_config(write_config(tmp_path, text))

    @pytest.mark.parametrize("radio_body,key", [
        ("  cell_size: 0\n", "radio.cell_size"),
        ("  robot_speed: 0\n", "radio.robot_speed"),
        ("  rate_hz: 0\n", "radio.rate_hz"),
        ("  r_min: 50.0\n", "radio.r_min"),
        ("  snr_low: 60.0\n", "radio.snr_low"),
        ("  los_threshold: 0\n", "radio.los_threshold"),
        ("  waypoints: []\n", "radio.waypoints"),
        ("  snapshot_format: toml\n", "radio.snapshot_format"),
        ("  snapshot_every: -1\n", "radio.snapshot_every"),
    ])
    def test_radio_validation(self, tmp_path, radio_body, key):
        write_grid(tmp_path)
        text = f"scenario: radio\nradio:\n  grid: park.txt\n{radio_body}"
        with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
            load_config(write_config(tmp_path, text))

    def test_radio_requires_grid(self, tmp_path):
        with pytest.raises(ConfigError, match="radio\\.grid"):
            load_config(write_config(tmp_path, "scenario: radio\n"))

    def test_radio_grid_must_exist(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(write_config(tmp_path, "scenario: radio\nradio:\n  grid: gone.txt\n"))


class TestOverrides:
    def test_overrides_win_over_file(self, tmp_path):
        path = write_config(tmp_path, "seed: 1\nruns: 5\nout: from_file\n")
        config = load_config(path, overrides={"seed": 7, "runs": 3, "out": "cli_out",
                                              "jobs": 2, "num_samples": 512})
        assert config.seed == 7
        assert config.runs == 3
        assert config.out == "cli_out"
        assert config.jobs == 2
        assert config.filter_params.num_samples == 512

    def test_none_overrides_ignored(self, tmp_path):
        path = write_config(tmp_path, "seed: 1\nruns: 5\n")
        config = load_config(path, overrides={"seed": None, "runs": None,
                                              "num_samples": None})
        assert config.seed == 1
        assert config.runs == 5
        assert config.filter_params.num_samples == 2000

    def test_overridden_values_are_validated(self, tmp_path):
        path = write_config(tmp_path, "")
        with pytest.raises(ConfigError, match="key 'runs'"):
            load_config(path, overrides={"runs": 0})


class TestShippedConfigs:
    def test_all_shipped_configs_load(self, config_dir):
        paths = sorted(config_dir.glob("*.yaml"))
        assert len(paths) == 4
        for path in paths:
            config = load_config(path)
            assert config.scenario in ("tricyclist", "radio")
            assert config.runs >= 1

    def test_desk_config_is_fast_profile(self, config_dir):
        config = load_config(config_dir / "tricyclist_desk.yaml")
        assert config.scenario == "tricyclist"
        assert config.filter_params.num_samples <= 2000

    def test_radio_configs_point_at_existing_grids(self, config_dir):
        for name in ("radio_los.yaml", "radio_nlos.yaml"):
            config = load_config(config_dir / name)
            assert config.radio.grid_path(config.base_dir).exists()


class TestDirectConstruction:
    def test_filter_options_standalone_validation(self):
        FilterOptions().validate()
        with pytest.raises(ConfigError):
            FilterOptions(num_samples=1).validate()

    def test_experiment_config_defaults_validate(self):
        ExperimentConfig().validate()
