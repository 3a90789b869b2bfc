"""
Parameter validation utilities for eigencomplete
"""
import math
from typing import Dict, List, Optional, Tuple

POTENTIAL_PARAMETERS = {
    'double_well': ('v0', 'v1'),
    'cosine': ('v0',),
    'dirac_comb': ('a', 'gamma'),
    'kronig_penney': ('b', 'v0', 'v1'),
    'step': ('v0',),
    'open_box': ('v0', 'ramp'),
    'one_sided_comb': ('a', 'gamma', 'b'),
    'hard_box': ('tau', 'sigma', 'v_left', 'v_right', 'split'),
}

OPTIONAL_PARAMETERS = {
    'open_box': {'ramp': 'none'},
    'hard_box': {'v_left': 0.0, 'v_right': 0.0, 'split': None},
}

INITIAL_STATE_PARAMETERS = {
    'well_mode': ('j', 'tau', 'sigma'),
    'box_first_excited': ('tau', 'sigma', 'v0', 'v1'),
}

RAMP_KINDS = {'none', 'linear'}

NUMERICS_KEYS = ('abs_tol', 'rel_tol', 'max_depth', 'edge_margin', 'initial_cutoff', 'max_cutoff',
                 'cutoff_tol', 'probability_tol', 'threads', 'scan_density', 'grid_points')

ORACLE_MIN_POINTS = 2000


def is_finite_number(value) -> bool:
    """Check the value is a real, finite number"""
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


def validate_positive(name: str, value) -> Tuple[bool, Optional[str]]:
    """
    Validate that a parameter is a finite positive number
    Returns (is_valid, error_message)
    """
    if not is_finite_number(value):
        return False, f"{name} must be a finite number, got {value!r}"
    if float(value) <= 0:
        return False, f"{name} must be > 0, got {value}"
    return True, None


def validate_oracle_points(name: str, value) -> Tuple[bool, Optional[str]]:
    """
    Validate the interior point count of the finite-difference oracle grid
    Returns (is_valid, error_message)
    """
    if not is_finite_number(value) or float(value) != int(float(value)):
        return False, f"{name} must be an integer, got {value!r}"
    if int(float(value)) < ORACLE_MIN_POINTS:
        return False, f"{name} must be >= {ORACLE_MIN_POINTS}, got {int(float(value))}"
    return True, None


def validate_potential_params(variant: str, params: Dict) -> Tuple[bool, List[str]]:
    """
    Check every invariant of a potential variant
    Returns (is_valid, error_messages)
    """
    errors = []

    if variant not in POTENTIAL_PARAMETERS:
        known = ", ".join(sorted(POTENTIAL_PARAMETERS))
        return False, [f"Unknown potential variant '{variant}'. Known: {known}"]

    required = POTENTIAL_PARAMETERS[variant]
    optional = OPTIONAL_PARAMETERS.get(variant, {})
    for name in required:
        if name not in params and name not in optional:
            errors.append(f"{variant} requires parameter '{name}'")
    for name in params:
        if name not in required:
            errors.append(f"{variant} does not take parameter '{name}'")
    if errors:
        return False, errors

    for name, value in params.items():
        if name in ('ramp', 'split'):
            continue
        if not is_finite_number(value):
            errors.append(f"{variant}.{name} must be a finite number, got {value!r}")
    if errors:
        return False, errors

    if variant == 'double_well':
        # Both wells are attractive and the first one is deeper
        if not params['v1'] > 0:
            errors.append(f"double_well requires V1 > 0, got v1={params['v1']}")
        if not params['v0'] > params['v1']:
            errors.append(
                f"double_well requires V0 > V1, got v0={params['v0']}, v1={params['v1']}")

    elif variant == 'cosine':
        ok, message = validate_positive('cosine.v0', params['v0'])
        if not ok:
            errors.append(message)

    elif variant in ('dirac_comb', 'one_sided_comb'):
        for name in ('a', 'gamma'):
            ok, message = validate_positive(f"{variant}.{name}", params[name])
            if not ok:
                errors.append(message)
        if variant == 'one_sided_comb' and not 0 < params['b'] < params['a']:
            errors.append(
                f"one_sided_comb requires 0 < b < a, got b={params['b']}, a={params['a']}")

    elif variant == 'kronig_penney':
        ok, message = validate_positive('kronig_penney.b', params['b'])
        if not ok:
            errors.append(message)
        if params['v1'] < 0:
            errors.append(f"kronig_penney requires V1 >= 0, got v1={params['v1']}")
        if params['v0'] < params['v1']:
            errors.append(
                f"kronig_penney requires V0 >= V1, got v0={params['v0']}, v1={params['v1']}")

    elif variant == 'step':
        ok, message = validate_positive('step.v0', params['v0'])
        if not ok:
            errors.append(message)

    elif variant == 'open_box':
        ok, message = validate_positive('open_box.v0', params['v0'])
        if not ok:
            errors.append(message)
        if (params.get('ramp') or 'none') not in RAMP_KINDS:
            errors.append(f"open_box.ramp must be one of {sorted(RAMP_KINDS)}, got {params['ramp']!r}")

    elif variant == 'hard_box':
        ok, message = validate_positive('hard_box.sigma', params['sigma'])
        if not ok:
            errors.append(message)
        split = params.get('split')
        if split is not None:
            if not is_finite_number(split):
                errors.append(f"hard_box.split must be a finite number, got {split!r}")
            elif not params['tau'] < float(split) < params['tau'] + params['sigma']:
                errors.append("hard_box.split must lie strictly inside (tau, tau + sigma)")

    return len(errors) == 0, errors


def validate_initial_state_params(kind: str, params: Dict) -> Tuple[bool, List[str]]:
    """
    Validate initial-state parameters
    Returns (is_valid, error_messages)
    """
    errors = []
    if kind not in INITIAL_STATE_PARAMETERS:
        known = ", ".join(sorted(INITIAL_STATE_PARAMETERS))
        return False, [f"Unknown initial state kind '{kind}'. Known: {known}"]

    for name in INITIAL_STATE_PARAMETERS[kind]:
        if name not in params:
            errors.append(f"{kind} requires parameter '{name}'")
        elif not is_finite_number(params[name]):
            errors.append(f"{kind}.{name} must be a finite number, got {params[name]!r}")
    for name in params:
        if name not in INITIAL_STATE_PARAMETERS[kind]:
            errors.append(f"{kind} does not take parameter '{name}'")
    if errors:
        return False, errors

    ok, message = validate_positive(f"{kind}.sigma", params['sigma'])
    if not ok:
        errors.append(message)

    if kind == 'well_mode':
        j = params['j']
        if float(j) != int(float(j)) or int(float(j)) < 1:
            errors.append(f"well_mode.j must be a positive integer, got {j}")
    elif kind == 'box_first_excited':
        tau, sigma = params['tau'], params['sigma']
        if not tau < 0 < tau + sigma:
            errors.append("box_first_excited requires the box (tau, tau + sigma) to contain x = 0")

    return len(errors) == 0, errors


def validate_numerics(numerics: Dict) -> Tuple[bool, List[str]]:
    """
    Validate numerics overrides from the config file or the command line
    Returns (is_valid, error_messages)
    """
    errors = []
    for name in numerics:
        if name not in NUMERICS_KEYS:
            errors.append(f"numerics.{name}: unknown key. Known: {', '.join(NUMERICS_KEYS)}")
    for name in ('abs_tol', 'rel_tol', 'edge_margin', 'cutoff_tol', 'probability_tol', 'initial_cutoff', 'max_cutoff'):
        if name in numerics and numerics[name] is not None:
            ok, message = validate_positive(f"numerics.{name}", numerics[name])
            if not ok:
                errors.append(message)
    for name in ('max_depth', 'threads', 'scan_density', 'grid_points'):
        if name in numerics and numerics[name] is not None:
            value = numerics[name]
            if not is_finite_number(value) or float(value) != int(float(value)) or int(float(value)) < 1:
                errors.append(f"numerics.{name} must be a positive integer, got {value!r}")
    if numerics.get('grid_points') is not None:
        ok, message = validate_oracle_points("numerics.grid_points", numerics['grid_points'])
        if not ok:
            errors.append(message)
    if ('initial_cutoff' in numerics and 'max_cutoff' in numerics
            and not errors and numerics['initial_cutoff'] and numerics['max_cutoff']
            and numerics['max_cutoff'] < numerics['initial_cutoff']):
        errors.append("numerics.max_cutoff must not be below numerics.initial_cutoff")
    return len(errors) == 0, errors


SECTIONS = ('potential', 'task', 'initial_state', 'numerics', 'output')

# required keys, optional keys
TASK_KEYS = {
    'bands': (('energy_max',), ('points_per_band',)),
    'eigenstate': (('family',), ('energy', 'index', 'x_min', 'x_max', 'points')),
    'expand': ((), ('x_min', 'x_max', 'points', 'families')),
    'probability': ((), ('families',)),
    'table1': ((), ('tau', 'sigma', 'j_max')),
    'identity': (('sigma',), ()),
    'oracle': (('half_length',), ('n', 'energy_cutoff', 'x_min', 'x_max')),
}

TASKS_NEEDING_INITIAL_STATE = ('expand', 'probability', 'oracle')
TASKS_WITHOUT_POTENTIAL = ('identity',)
OUTPUT_FORMATS = {'csv', 'json', 'svg'}
OUTPUT_KEYS = ('directory', 'formats')


def validate_experiment_config(sections: Dict[str, Dict]) -> Tuple[bool, List[str]]:
    """
    Strict check of a parsed experiment config: known sections and keys only,
    task-required keys present, parameter invariants met
    Returns (is_valid, error_messages)
    """
    errors = []

    for name in sections:
        if name not in SECTIONS:
            errors.append(f"[{name}]: unknown section. Known: {', '.join(SECTIONS)}")

    task = sections.get('task', {})
    task_name = task.get('name')
    if task_name is None:
        errors.append("task.name is required")
        return False, errors
    if task_name not in TASK_KEYS:
        errors.append(f"task.name: unknown task '{task_name}'. Known: {', '.join(sorted(TASK_KEYS))}")
        return False, errors

    required, optional = TASK_KEYS[task_name]
    for key in required:
        if key not in task:
            errors.append(f"task.{key} is required for task '{task_name}'")
    for key in task:
        if key != 'name' and key not in required and key not in optional:
            errors.append(f"task.{key}: not a key of task '{task_name}'")

    potential = dict(sections.get('potential', {}))
    if task_name not in TASKS_WITHOUT_POTENTIAL:
        variant = potential.pop('variant', None)
        if variant is None:
            errors.append("potential.variant is required")
        else:
            ok, messages = validate_potential_params(variant, potential)
            errors.extend(f"potential: {m}" for m in messages)
            if task_name == 'table1' and variant != 'kronig_penney':
                errors.append("task.name: table1 needs potential.variant = kronig_penney")
    elif potential:
        errors.append(f"[potential]: task '{task_name}' takes no potential")

    initial = dict(sections.get('initial_state', {}))
    if initial:
        kind = initial.pop('kind', None)
        if kind is None:
            errors.append("initial_state.kind is required")
        else:
            ok, messages = validate_initial_state_params(kind, initial)
            errors.extend(f"initial_state: {m}" for m in messages)
    elif task_name in TASKS_NEEDING_INITIAL_STATE:
        errors.append(f"[initial_state] is required for task '{task_name}'")

    ok, messages = validate_numerics(sections.get('numerics', {}))
    errors.extend(messages)

    output = sections.get('output', {})
    for key in output:
        if key not in OUTPUT_KEYS:
            errors.append(f"output.{key}: unknown key. Known: {', '.join(OUTPUT_KEYS)}")
    formats = output.get('formats')
    if formats is not None:
        for fmt in [f.strip() for f in str(formats).split(',') if f.strip()]:
            if fmt not in OUTPUT_FORMATS:
                errors.append(f"output.formats: unknown format '{fmt}'")

    for key in ('sigma', 'energy_max', 'half_length'):
        if key in task:
            ok, message = validate_positive(f"task.{key}", task[key])
            if not ok:
                errors.append(message)
    if task_name == 'oracle' and 'n' in task:
        ok, message = validate_oracle_points("task.n", task['n'])
        if not ok:
            errors.append(message)

    return len(errors) == 0, errors
