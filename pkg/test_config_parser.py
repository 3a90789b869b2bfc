"""
Tests for experiment config parsing
"""
from pathlib import Path

import pytest

from utils.config_parser import ConfigFileParser, load_config, parse_config_text
from utils.exceptions import ConfigError

sample_config = """# double well expansion
[potential]
variant = double_well
v0 = 4.27
v1 = 1.43

[task]
name = expand
x_min = -0.25
x_max = 2.38
points = 301   # grid size

[initial_state]
kind = well_mode
j = 1
tau = 0.25
sigma = 1.63

[output]
formats = csv, svg
"""


def test_parse_sample_config():
    config, summary = parse_config_text(sample_config, "sample.ini")
    assert config.task == 'expand'
    assert config.variant == 'double_well'
    assert config.potential_params == {'v0': 4.27, 'v1': 1.43}
    assert config.task_params['points'] == 301
    assert isinstance(config.task_params['points'], int)
    assert config.initial_kind == 'well_mode'
    assert config.formats == ('csv', 'svg')
    assert config.output_dir == 'results'
    assert summary['filename'] == 'sample.ini'


def test_value_coercion():
    parser = ConfigFileParser()
    assert parser._coerce('12') == 12
    assert parser._coerce('-1.5e-3') == -1.5e-3
    assert parser._coerce('none') is None
    assert parser._coerce('linear') == 'linear'


def test_to_dict_embeds_every_section():
    config, _ = parse_config_text(sample_config)
    data = config.to_dict()
    assert data['task'] == {'name': 'expand', 'x_min': -0.25, 'x_max': 2.38, 'points': 301}
    assert data['potential']['variant'] == 'double_well'
    assert data['initial_state']['sigma'] == 1.63


def test_none_value_falls_back_to_default():
    text = "[potential]\nvariant = hard_box\ntau = 0\nsigma = 1\nsplit = none\n[task]\nname = bands\nenergy_max = 5\n"
    config, _ = parse_config_text(text)
    assert 'split' not in config.potential_params


@pytest.mark.parametrize("text, fragment", [
    ("variant = step\n", "before any [section]"),
    ("[task]\nname = identity\nname = bands\n", "duplicate key"),
    ("[task]\nname = identity\n[task]\n", "appears twice"),
    ("[task]\nthis is not a key value line\n", "cannot parse"),
])
def test_malformed_files(text, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(text, "bad.ini")
    assert fragment in str(excinfo.value)


def test_invalid_parameters_are_config_errors():
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(sample_config.replace("v1 = 1.43", "v1 = 9.0"))
    assert excinfo.value.exit_code == 2


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))


@pytest.mark.parametrize("path", sorted(Path(__file__).parent.joinpath("configs").glob("*.ini")))
def test_shipped_configs_parse(path):
    config, _ = load_config(str(path))
    assert config.task
