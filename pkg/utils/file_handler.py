"""
Experiment running utilities for eigencomplete
"""
import math
from dataclasses import asdict
from datetime import datetime
from typing import Callable, Dict, List, Optional

import numpy as np

from .completeness import (NumericsOptions, expand, grid_oracle, identity_check,
                           make_initial, total_probability)
from .config_parser import ExperimentConfig, load_config
from .eigenstates import FAMILIES, bloch_state, bound_states, free_state, sample_eigenstate
from .exceptions import (BadParams, NonConvergence, NumericalError,
                         UnknownFamily, ValidationError)
from .exporter import FigureWriter, create_result_exporter
from .logging_config import get_logger
from .potentials import DiracComb, OneSidedComb, OpenBox, Potential, create_potential
from .presets import PUBLISHED_BOX_PROBABILITY, PUBLISHED_TABLE1, get_preset
from .spectra import band_rows, band_structure, comb_dispersion_k, one_sided_spectrum

logger = get_logger(__name__)

IDENTITY_TOLERANCE = 1e-6
BOUND_FAMILY_NAMES = ('dw_bound1', 'dw_bound2', 'openbox_bound', 'box_level')
TABLE1_DEFAULTS = {'tau': -0.38, 'sigma': 1.25, 'j_max': 6}


def _family_list(value) -> Optional[List[str]]:
    if value is None:
        return None
    return [name.strip() for name in str(value).split(',') if name.strip()]


def _branch(family: str) -> str:
    return '-' if family.endswith('-') or family in ('kp_bloch_2', 'kp_bloch_4') else '+'


def _default_window(p: Potential) -> tuple:
    if isinstance(p, OpenBox):
        return 0.0, 5.0
    if isinstance(p, OneSidedComb):
        return -p.b, 10.0 * p.a
    return -5.0, 5.0


class ExperimentRunner:
    """Runs experiment configs and writes their artifacts"""

    def __init__(self, output_dir: Optional[str] = None, numerics_overrides: Optional[Dict] = None,
                 timestamp: Optional[str] = None, figure_writer: Optional[FigureWriter] = None,
                 numerics_defaults: Optional[Dict] = None):
        self.output_dir = output_dir
        self.figure_writer = figure_writer
        self.numerics_defaults = dict(numerics_defaults or {})
        self.numerics_overrides = {k: v for k, v in (numerics_overrides or {}).items() if v is not None}
        self.timestamp = timestamp or datetime.now().strftime("%Y%m%dT%H%M%S")
        self.tasks: Dict[str, Callable] = {
            'bands': self._run_bands,
            'eigenstate': self._run_eigenstate,
            'expand': self._run_expand,
            'probability': self._run_probability,
            'table1': self._run_table1,
            'identity': self._run_identity,
            'oracle': self._run_oracle,
        }

    def run_file(self, config_path: str) -> Dict:
        """Parse and run one config file"""
        try:
            config, summary = load_config(config_path)
        except ValidationError as e:
            return self._failure(f"config {config_path}: {e}", e.exit_code)
        result = self.run_config(config)
        result['processing_steps'].insert(0, f"Loaded {config_path} ({summary['task']} on {summary['potential']})")
        return result

    def run_preset(self, name: str) -> Dict:
        """Run every config of a reproduction preset into one directory"""
        results = {
            'success': False,
            'errors': [],
            'processing_steps': [],
            'exit_code': 0,
            'runs': [],
            'artifacts': [],
        }
        try:
            preset = get_preset(name)
            configs = preset.configs(self.output_dir or f"results/{name}")
        except ValidationError as e:
            return self._failure(f"preset {name}: {e}", e.exit_code)

        results['processing_steps'].append(f"Preset {name}: {preset.description}")
        if preset.notes:
            results['processing_steps'].append(f"Note: {preset.notes}")
        for config in configs:
            run = self.run_config(config)
            results['runs'].append(run)
            results['processing_steps'].extend(run['processing_steps'])
            results['errors'].extend(run['errors'])
            results['artifacts'].extend(run['artifacts'])
            results['exit_code'] = max(results['exit_code'], run['exit_code'])

        results['success'] = results['exit_code'] == 0
        return results

    def run_config(self, config: ExperimentConfig) -> Dict:
        """
        Run one resolved config
        Returns a results dict with artifacts, errors and the exit code
        """
        results = {
            'success': False,
            'errors': [],
            'processing_steps': [],
            'exit_code': 0,
            'task': config.task,
            'results': {},
            'rows': [],
            'numerics_report': {},
            'artifacts': [],
            'stdout': [],
            'partial': False,
        }

        stage = 'numerics'
        try:
            options = NumericsOptions.from_dict({**self.numerics_defaults, **config.numerics,
                                                **self.numerics_overrides})
            stage = 'potential'
            potential = create_potential(config.variant, config.potential_params) if config.variant else None
            stage = 'initial_state'
            initial = make_initial(config.initial_kind, config.initial_params) if config.initial_kind else None
            stage = f"task {config.task}"
            results['processing_steps'].append(
                f"Running {config.task}" + (f" on {potential.label}" if potential else ""))
            outcome = self.tasks[config.task](config, potential, initial, options)
            results.update(outcome)
            results['numerics_report'] = {**outcome.get('numerics_report', {}),
                                          'options': asdict(options)}
        except ValidationError as e:
            results['errors'].append(f"{stage}: {e}")
            results['exit_code'] = e.exit_code
            return results
        except NumericalError as e:
            results['errors'].append(f"{stage}: {e}")
            results['exit_code'] = e.exit_code
            if isinstance(e, NonConvergence) and e.estimate is not None:
                results['partial'] = True
                results['results'] = {'estimate': e.estimate, 'error': e.error}
                results['numerics_report']['partial'] = True
            else:
                return results

        if results.get('numerics_report', {}).get('cutoff_reached'):
            results['processing_steps'].append("Cutoff cap reached; tail estimate flagged in numerics_report")

        try:
            exporter = create_result_exporter(self.output_dir or config.output_dir, self.figure_writer)
            name = f"{config.task}_{config.variant or 'free'}_{self.timestamp}"
            results['artifacts'] = exporter.export(name, config, results)
            results['processing_steps'].append(f"Wrote {len(results['artifacts'])} files")
        except OSError as e:
            results['errors'].append(f"output {config.output_dir}: {e}")
            results['exit_code'] = 2
            return results

        results['success'] = results['exit_code'] == 0
        return results

    def _failure(self, message: str, exit_code: int) -> Dict:
        return {
            'success': False,
            'errors': [message],
            'processing_steps': [],
            'exit_code': exit_code,
            'artifacts': [],
            'stdout': [],
        }

    # ------------------------------------------------------------------
    # Tasks
    # ------------------------------------------------------------------

    def _run_bands(self, config, p, initial, options) -> Dict:
        energy_max = float(config.task_params['energy_max'])
        points = int(config.task_params.get('points_per_band', 200))
        if isinstance(p, OneSidedComb):
            return self._run_walled_comb(p, energy_max, points)

        structure = band_structure(p, energy_max, options.scan_density)
        bands = [{'index': b.index, 'energy_lo': b.energy_lo, 'energy_hi': b.energy_hi,
                  'branch': b.branch} for b in structure.bands]
        return {
            'rows': band_rows(p, structure, points),
            'results': {'bands': bands, 'gaps': [list(g) for g in structure.gaps]},
            'plot': {'kind': 'bands'},
            'stdout': [f"{len(bands)} bands below eps = {energy_max:g}"],
        }

    def _run_walled_comb(self, p: OneSidedComb, energy_max: float, points: int) -> Dict:
        two_sided = DiracComb(p.a, p.gamma)
        k_max = math.sqrt(2.0 * energy_max)
        rows = []
        for k in np.linspace(k_max / points, k_max, points):
            k = float(k)
            rows.append({
                'k': k,
                'energy': 0.5 * k * k,
                'one_sided_allowed': int(one_sided_spectrum(p.a, p.gamma, 0.5 * k * k)),
                'two_sided_allowed': int(abs(float(comb_dispersion_k(two_sided, k))) <= 1.0),
            })
        agree = sum(r['one_sided_allowed'] == r['two_sided_allowed'] for r in rows)
        return {
            'rows': rows,
            'results': {'k_max': k_max, 'agreement': agree / len(rows)},
            'plot': {'kind': 'spectrum_comparison'},
            'stdout': [f"one-sided and two-sided comb spectra agree on {agree}/{len(rows)} k samples"],
        }

    def _eigenstate(self, config, p, options):
        params = config.task_params
        family = params['family']
        if family not in FAMILIES.get(p.variant, ()):
            raise UnknownFamily(f"task.family: {family} is not a family of {p.variant}")
        if family in BOUND_FAMILY_NAMES:
            states = [s for s in bound_states(p, options.scan_density) if s.family == family]
            index = int(params.get('index', 0))
            if not 0 <= index < len(states):
                raise BadParams(f"task.index: {family} has {len(states)} levels, got index {index}")
            return states[index]
        if 'energy' not in params:
            raise BadParams(f"task.energy is required for the free family {family}")
        energy = float(params['energy'])
        if family.startswith(('cos_bloch', 'comb_bloch', 'kp_bloch')):
            state = bloch_state(p, energy, _branch(family), options.edge_margin)
            if state.family != family:
                raise BadParams(f"task.energy: {energy} belongs to {state.family}, not {family}")
            return state
        return free_state(p, energy, family)

    def _run_eigenstate(self, config, p, initial, options) -> Dict:
        state = self._eigenstate(config, p, options)
        lo, hi = _default_window(p)
        lo = float(config.task_params.get('x_min', lo))
        hi = float(config.task_params.get('x_max', hi))
        points = int(config.task_params.get('points', 401))
        rows = sample_eigenstate(state, np.linspace(lo, hi, points))
        return {
            'rows': rows,
            'results': {'family': state.family, 'energy': state.energy, 'kappa': state.kappa,
                        'norm_const': state.norm_const},
            'plot': {'kind': 'eigenstate', 'title': f"{state.family} at eps = {state.energy:.6g}"},
            'stdout': [f"{state.family}: eps = {state.energy:.10g}, norm constant {state.norm_const:.10g}"],
        }

    def _run_expand(self, config, p, s, options) -> Dict:
        lo, hi = s.support
        margin = 0.25 * s.width
        x_min = float(config.task_params.get('x_min', lo - margin))
        x_max = float(config.task_params.get('x_max', hi + margin))
        if isinstance(p, OpenBox):
            x_min = max(x_min, 0.0)
        points = int(config.task_params.get('points', 401))
        x_grid = np.linspace(x_min, x_max, points)
        result = expand(s, p, x_grid, options, _family_list(config.task_params.get('families')))

        rows = [{'x': float(x), 're_f': float(f.real), 'im_f': float(f.imag),
                 'target': float(t.real), 'residual': float(abs(f - t))}
                for x, f, t in zip(result.x_grid, result.f, result.target)]
        return {
            'rows': rows,
            'results': {
                'residual_sup': result.residual_sup,
                'residual_l2': result.residual_l2,
                'total_probability': result.total_probability,
                'per_family_probability': dict(result.per_family_probability),
                'initial_state': {'kind': s.kind, **s.params},
            },
            'numerics_report': result.quadrature_report,
            'plot': {'kind': 'expansion',
                     'title': f"{p.label}: {s.kind} {s.params}".replace("'", "")},
            'stdout': [f"residual sup {result.residual_sup:.3e}, L2 {result.residual_l2:.3e}, "
                       f"P = {result.total_probability:.8f}"],
        }

    def _run_probability(self, config, p, s, options) -> Dict:
        report = total_probability(s, p, options, _family_list(config.task_params.get('families')))
        rows = [{'family': name, 'probability': value} for name, value in sorted(report.per_family.items())]
        rows.append({'family': 'total', 'probability': report.total})
        results = {
            'total_probability': report.total,
            'deviation': report.deviation,
            'per_family_probability': dict(report.per_family),
            'bound_states': [{'family': f, 'energy': e, 'probability': w} for f, e, w in report.bound],
            'initial_state': {'kind': s.kind, **s.params, **s.constants},
        }
        if s.kind == 'box_first_excited':
            results['published_probability'] = PUBLISHED_BOX_PROBABILITY
            results['difference_vs_published'] = report.total - PUBLISHED_BOX_PROBABILITY
        return {
            'rows': rows,
            'results': results,
            'numerics_report': {'cutoffs': list(report.cutoffs), 'cutoff_reached': report.cutoff_reached,
                                'quadrature_error': report.error},
            'stdout': [f"P = {report.total:.8f} (1 - P = {report.deviation:.3e})"],
        }

    def _run_table1(self, config, p, initial, options) -> Dict:
        params = {**TABLE1_DEFAULTS, **config.task_params}
        tau, sigma, j_max = float(params['tau']), float(params['sigma']), int(params['j_max'])
        published = (tau, sigma) == (TABLE1_DEFAULTS['tau'], TABLE1_DEFAULTS['sigma'])
        rows, cutoffs, reached = [], {}, False
        for j in range(1, j_max + 1):
            s = make_initial('well_mode', {'j': j, 'tau': tau, 'sigma': sigma})
            report = total_probability(s, p, options)
            reference = PUBLISHED_TABLE1[j - 1] if published and j <= len(PUBLISHED_TABLE1) else None
            difference = None if reference is None else report.deviation - reference
            rows.append({'j': j, 'P_j': report.total, 'one_minus_P_j': report.deviation,
                         'published_one_minus_P_j': reference, 'difference_vs_published': difference})
            cutoffs[str(j)] = list(report.cutoffs)
            reached = reached or report.cutoff_reached
            logger.info(f"table1 j = {j}: P = {report.total:.8f}")
        worst = max(abs(r['one_minus_P_j']) for r in rows)
        return {
            'rows': rows,
            'results': {'tau': tau, 'sigma': sigma, 'max_abs_deviation': worst},
            'numerics_report': {'cutoffs': cutoffs, 'cutoff_reached': reached},
            'plot': {'kind': 'table'},
            'stdout': [f"j = {r['j']}: P = {r['P_j']:.6f}, 1 - P = {r['one_minus_P_j']:+.3e}"
                       + (f" (published {r['published_one_minus_P_j']:+.3f}, "
                          f"difference {r['difference_vs_published']:+.3f})"
                          if r['published_one_minus_P_j'] is not None else "") for r in rows],
        }

    def _run_identity(self, config, p, initial, options) -> Dict:
        sigma = float(config.task_params['sigma'])
        value = identity_check(sigma, options)
        error = abs(value - 1.0)
        if error >= IDENTITY_TOLERANCE:
            raise NonConvergence(f"identity_check({sigma:g}) = {value:.10f} misses 1 by {error:.2e}",
                                 estimate=value, error=error)
        return {
            'rows': [{'sigma': sigma, 'value': value, 'error': error}],
            'results': {'sigma': sigma, 'value': value, 'error': error},
            'stdout': [format_identity(value)],
        }

    def _run_oracle(self, config, p, s, options) -> Dict:
        params = config.task_params
        n = int(params.get('n', options.grid_points))
        result = grid_oracle(p, s, float(params['half_length']), n, params.get('energy_cutoff'))
        lo = float(params.get('x_min', -np.inf))
        hi = float(params.get('x_max', np.inf))
        rows = [{'x': float(x), 'target': float(t.real), 'reconstruction': float(r.real),
                 'residual': float(abs(r - t))}
                for x, t, r in zip(result.x, result.target, result.reconstruction) if lo <= x <= hi]
        return {
            'rows': rows,
            'results': {'bound_energies': [float(e) for e in result.bound_energies],
                        'levels_kept': int(len(result.energies)),
                        'residual_sup': result.residual_sup,
                        'residual_l2': result.residual_l2},
            'numerics_report': {'grid_points': n, 'half_length': float(params['half_length']),
                                'energy_cutoff': params.get('energy_cutoff')},
            'stdout': [f"grid oracle: {len(result.bound_energies)} bound levels, "
                       f"residual sup {result.residual_sup:.3e}"],
        }


def format_identity(value: float) -> str:
    """Console line of the identity check"""
    error = abs(value - 1.0)
    bound = "|err| < 1e-6" if error < IDENTITY_TOLERANCE else f"|err| = {error:.1e}"
    return f"identity_check: {value:.6f} ({bound})"


def create_experiment_runner(output_dir: Optional[str] = None, numerics_overrides: Optional[Dict] = None,
                             timestamp: Optional[str] = None,
                             figure_writer: Optional[FigureWriter] = None,
                             numerics_defaults: Optional[Dict] = None) -> ExperimentRunner:
    """Factory function to create an ExperimentRunner instance"""
    return ExperimentRunner(output_dir, numerics_overrides, timestamp, figure_writer, numerics_defaults)
