"""
Tests for parameter and config validation
"""
from utils.validators import (validate_experiment_config, validate_initial_state_params,
                              validate_numerics, validate_oracle_points, validate_potential_params)

# Minimal valid expansion config, as sections
sample_sections = {
    'potential': {'variant': 'double_well', 'v0': 4.27, 'v1': 1.43},
    'task': {'name': 'expand', 'points': 101},
    'initial_state': {'kind': 'well_mode', 'j': 1, 'tau': 0.25, 'sigma': 1.63},
    'numerics': {'abs_tol': 1e-8},
    'output': {'formats': 'csv, json'},
}


def _with(section, **changes):
    sections = {name: dict(values) for name, values in sample_sections.items()}
    sections[section].update(changes)
    return sections


def test_sample_config_is_valid():
    is_valid, errors = validate_experiment_config(sample_sections)
    assert is_valid, errors
    assert errors == []


def test_potential_parameter_invariants():
    assert validate_potential_params('double_well', {'v0': 4.27, 'v1': 1.43})[0]
    is_valid, errors = validate_potential_params('double_well', {'v0': 1.0, 'v1': 2.0})
    assert not is_valid
    assert any('V0 > V1' in e for e in errors)
    assert not validate_potential_params('dirac_comb', {'a': 1.0, 'gamma': -1.0})[0]
    assert not validate_potential_params('step', {'v0': float('nan')})[0]
    assert validate_potential_params('open_box', {'v0': 2.0})[0]


def test_unknown_variant_lists_known_ones():
    is_valid, errors = validate_potential_params('harmonic', {})
    assert not is_valid
    assert 'double_well' in errors[0]


def test_initial_state_params():
    assert validate_initial_state_params('well_mode', {'j': 2, 'tau': 0.0, 'sigma': 1.0})[0]
    assert not validate_initial_state_params('well_mode', {'j': 0, 'tau': 0.0, 'sigma': 1.0})[0]
    assert not validate_initial_state_params('well_mode', {'j': 1.5, 'tau': 0.0, 'sigma': 1.0})[0]
    assert not validate_initial_state_params('box_first_excited',
                                             {'tau': 0.5, 'sigma': 1.0, 'v0': 4.0, 'v1': 1.0})[0]


def test_numerics_keys():
    assert validate_numerics({'threads': 4, 'edge_margin': 1e-6})[0]
    assert not validate_numerics({'threads': 0})[0]
    assert not validate_numerics({'precision': 1})[0]
    assert not validate_numerics({'initial_cutoff': 100.0, 'max_cutoff': 10.0})[0]


def test_unknown_keys_are_rejected():
    is_valid, errors = validate_experiment_config(_with('task', colour='red'))
    assert not is_valid
    assert any('task.colour' in e for e in errors)
    is_valid, errors = validate_experiment_config({**sample_sections, 'plot': {}})
    assert not is_valid


def test_task_requirements():
    sections = {name: values for name, values in sample_sections.items() if name != 'initial_state'}
    is_valid, errors = validate_experiment_config(sections)
    assert not is_valid
    assert any('[initial_state]' in e for e in errors)

    is_valid, errors = validate_experiment_config({'task': {'name': 'identity'}})
    assert not is_valid
    assert any('task.sigma' in e for e in errors)
    assert validate_experiment_config({'task': {'name': 'identity', 'sigma': 1.0}})[0]


def test_table1_needs_kronig_penney():
    sections = {'potential': {'variant': 'step', 'v0': 1.0}, 'task': {'name': 'table1'}}
    is_valid, errors = validate_experiment_config(sections)
    assert not is_valid
    assert any('kronig_penney' in e for e in errors)


def test_unknown_output_format():
    is_valid, errors = validate_experiment_config(_with('output', formats='csv, xlsx'))
    assert not is_valid
    assert any('xlsx' in e for e in errors)


def test_oracle_grid_needs_2000_points():
    assert validate_oracle_points("task.n", 2000)[0]
    is_valid, message = validate_oracle_points("task.n", 1999)
    assert not is_valid
    assert ">= 2000" in message
    assert not validate_oracle_points("task.n", 2500.5)[0]
    assert not validate_numerics({'grid_points': 500})[0]

    sections = {'potential': {'variant': 'step', 'v0': 2.645},
                'task': {'name': 'oracle', 'half_length': 60.0, 'n': 800},
                'initial_state': {'kind': 'well_mode', 'j': 2, 'tau': 0.0, 'sigma': 1.0}}
    is_valid, errors = validate_experiment_config(sections)
    assert not is_valid
    assert any('task.n' in e for e in errors)
    sections['task']['n'] = 12000
    assert validate_experiment_config(sections)[0]
