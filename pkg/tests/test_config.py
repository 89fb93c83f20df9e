import pytest

from tilecast.config import ConfigError, parse_config


def write(tmp_path, text):
    p = tmp_path / "scenario.cfg"
    p.write_text(text)
    return p


MINIMAL = """
synthetic   = 7, 512, 512, 10
data_rates  = 22, 88, 176
t_TRlimits  = 180, 600, 1800
"""


def test_minimal_config_and_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert cfg.synthetic.seed == 7
    assert cfg.synthetic.objects == 10
    assert cfg.data_rates_kbps == (22.0, 88.0, 176.0)
    assert cfg.t_tr_limits_s == (180.0, 600.0, 1800.0)
    assert cfg.mu_t_hum == 30.0
    assert cfg.t_hum_cap == 300.0
    assert cfg.levels == 5
    assert cfg.tile_w == cfg.tile_h == 256
    assert cfg.baseline_human_budget == 10
    assert cfg.detector.detect_p == (0.3, 0.5, 0.7, 0.85, 0.95)
    assert cfg.tile_size_estimate == "max"
    assert not cfg.charge_index_bytes


def test_minute_suffix(tmp_path):
    cfg = parse_config(
        write(
            tmp_path,
            """
synthetic  = 1, 64, 64, 2
data_rates = 22
t_TRlimits = 3m, 10m, 30m
mu_t_hum   = 0.5m
t_hum_cap  = 5m
""",
        )
    )
    assert cfg.t_tr_limits_s == (180.0, 600.0, 1800.0)
    assert cfg.mu_t_hum == 30.0
    assert cfg.t_hum_cap == 300.0


def test_comments_and_overrides(tmp_path):
    cfg = parse_config(
        write(
            tmp_path,
            """
# full scenario
synthetic  = 1, 128, 128, 4   # seed, w, h, objects
tile_w     = 64
tile_h     = 32
levels     = 3
data_rates = 10.5
t_TRlimits = 60
detect_p   = 0.2, 0.4, 0.9
detect_conf = 0.3, 0.4, 0.5
detect_sigma = 0
detect_jitter = 0
detect_fp_rate = 0
baseline_human_budget = 3
seed = 9
tile_size_estimate = mean
charge_index_bytes = true
compute_delay = 2
""",
        )
    )
    assert cfg.tile_w == 64 and cfg.tile_h == 32
    assert cfg.levels == 3
    assert cfg.detector.detect_p == (0.2, 0.4, 0.9)
    assert cfg.detector.fp_rate == 0.0
    assert cfg.baseline_human_budget == 3
    assert cfg.seed == 9
    assert cfg.tile_size_estimate == "mean"
    assert cfg.charge_index_bytes
    assert cfg.compute_delay == 2.0


def test_missing_image_source(tmp_path):
    with pytest.raises(ConfigError, match="'image' or 'synthetic'"):
        parse_config(write(tmp_path, "data_rates = 22\nt_TRlimits = 60\n"))


def test_unknown_key_names_line(tmp_path):
    with pytest.raises(ConfigError, match="line 2: unknown key 'bogus'"):
        parse_config(write(tmp_path, "synthetic = 1, 64, 64, 1\nbogus = 3\n"))


def test_malformed_values_name_line(tmp_path):
    with pytest.raises(ConfigError, match="line 1"):
        parse_config(write(tmp_path, "synthetic = 1, 64\ndata_rates = 22\nt_TRlimits = 60\n"))
    with pytest.raises(ConfigError, match="bad time value"):
        parse_config(
            write(tmp_path, MINIMAL + "mu_t_hum = fast\n")
        )
    with pytest.raises(ConfigError, match="levels"):
        parse_config(write(tmp_path, MINIMAL + "levels = 9\n"))


def test_missing_required_lists(tmp_path):
    with pytest.raises(ConfigError, match="data_rates"):
        parse_config(write(tmp_path, "synthetic = 1, 64, 64, 1\nt_TRlimits = 60\n"))
    with pytest.raises(ConfigError, match="t_TRlimits"):
        parse_config(write(tmp_path, "synthetic = 1, 64, 64, 1\ndata_rates = 22\n"))


def test_image_requires_ground_truth(tmp_path):
    with pytest.raises(ConfigError, match="ground_truth"):
        parse_config(
            write(tmp_path, "image = x.pgm\ndata_rates = 22\nt_TRlimits = 60\n")
        )
    with pytest.raises(ConfigError, match="mutually exclusive"):
        parse_config(
            write(
                tmp_path,
                "image = x.pgm\nground_truth = x.csv\nsynthetic = 1, 64, 64, 1\n"
                "data_rates = 22\nt_TRlimits = 60\n",
            )
        )


def test_detector_table_length_checked(tmp_path):
    with pytest.raises(ConfigError, match="one value per level"):
        parse_config(write(tmp_path, MINIMAL + "detect_p = 0.5, 0.9\n"))
    with pytest.raises(ConfigError, match="invalid detector profile"):
        parse_config(write(tmp_path, MINIMAL + "detect_p = 0.9, 0.8, 0.7, 0.6, 0.5\n"))


def test_duplicate_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config(write(tmp_path, MINIMAL + "seed = 1\nseed = 2\n"))
