"""
Read-only registry of reproduction presets

Each preset is a list of experiment configs (as section dicts) sharing one
output directory. Parameters are the published ones; where a grid or sweep
value was never published the one used here is noted in `notes`.
"""
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, List, Tuple

from .config_parser import ExperimentConfig, config_from_sections
from .exceptions import BadParams

# 1 - P_j for j = 1..6 as published for the Kronig-Penney lattice
PUBLISHED_TABLE1 = (-0.369, -0.514, 0.616, 0.068, -0.595, 0.300)
PUBLISHED_BOX_PROBABILITY = 0.417

KP_LATTICE = {'variant': 'kronig_penney', 'b': 0.43, 'v0': 2.645, 'v1': 0.27}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    runs: Tuple[Dict, ...]
    notes: str = ""

    def configs(self, output_dir: str) -> List[ExperimentConfig]:
        configs = []
        for i, sections in enumerate(self.runs):
            sections = {key: dict(value) for key, value in sections.items()}
            sections['output'] = {'directory': output_dir, 'formats': 'csv, json, svg'}
            configs.append(config_from_sections(sections, f"preset:{self.name}#{i + 1}"))
        return configs


def _well_mode(j: int, tau: float, sigma: float) -> Dict:
    return {'kind': 'well_mode', 'j': j, 'tau': tau, 'sigma': sigma}


def _expand(potential: Dict, j: int, tau: float, sigma: float, margin: float = 0.5,
            points: int = 301) -> Dict:
    return {
        'potential': potential,
        'task': {'name': 'expand', 'x_min': tau - margin, 'x_max': tau + sigma + margin, 'points': points},
        'initial_state': _well_mode(j, tau, sigma),
    }


_DOUBLE_WELL = {'variant': 'double_well', 'v0': 4.27, 'v1': 1.43}
_COSINE = {'variant': 'cosine', 'v0': 1.0}
_COMB = {'variant': 'dirac_comb', 'a': 1.3, 'gamma': 1.0}


def _open_box(v0: float, ramp: str = 'none') -> Dict:
    return {'variant': 'open_box', 'v0': v0, 'ramp': ramp}


_PRESETS = {
    'fig1': Preset(
        'fig1',
        "Double well (V0, V1) = (4.27, 1.43): bound and free families reconstruct well modes "
        "inside the wells (tau, sigma) = (0.25, 1.63) and straddling them (-1.17, 4.23).",
        tuple([_expand(_DOUBLE_WELL, j, 0.25, 1.63) for j in (1, 2, 3)]
              + [_expand(_DOUBLE_WELL, i, -1.17, 4.23) for i in (1, 2, 3)]),
    ),
    'fig2': Preset(
        'fig2',
        "Cosine potential V0 cos(2x), V0 = 1: band structure, the Bloch state at eps = -0.17 "
        "and expansions of well modes confined to one period (tau, sigma) = (0.15, 2.1).",
        tuple([{'potential': _COSINE, 'task': {'name': 'bands', 'energy_max': 10.0}},
               {'potential': _COSINE, 'task': {'name': 'eigenstate', 'family': 'cos_bloch+',
                                               'energy': -0.17, 'x_min': 0.0, 'x_max': 3.141592653589793 * 3}}]
              + [_expand(_COSINE, j, 0.15, 2.1) for j in (1, 2, 3)]),
    ),
    'fig3a': Preset(
        'fig3a',
        "Kronig-Penney lattice (b, V0, V1) = (0.43, 2.645, 0.27): band structure up to eps = 40.",
        ({'potential': KP_LATTICE, 'task': {'name': 'bands', 'energy_max': 40.0}},),
    ),
    'fig4': Preset(
        'fig4',
        "Dirac comb (a, gamma) = (1.3, 1): bands, the Bloch state at k = 1.5 on the minus branch "
        "and expansions of well modes in one period (tau, sigma) = (0.45, 1).",
        tuple([{'potential': _COMB, 'task': {'name': 'bands', 'energy_max': 20.0}},
               {'potential': _COMB, 'task': {'name': 'eigenstate', 'family': 'comb_bloch-',
                                             'energy': 1.125, 'x_min': -1.3, 'x_max': 3.9}}]
              + [_expand(_COMB, j, 0.45, 1.0) for j in (1, 2, 3)]),
    ),
    'fig6': Preset(
        'fig6',
        "Open box: a control expansion, then the same state moved (tau), widened (sigma), "
        "with a shallower box (V0 = 0.893, no bound states) and with the linear ramp.",
        (_expand(_open_box(2.645), 1, 0.2, 0.6),
         _expand(_open_box(2.645), 1, 0.5, 0.6),
         _expand(_open_box(2.645), 1, 0.2, 1.5),
         _expand(_open_box(0.893), 1, 0.2, 0.6),
         _expand(_open_box(2.645, 'linear'), 1, 0.2, 0.6),
         _expand(_open_box(2.645, 'linear'), 2, 0.2, 0.6)),
        notes="The sweep values are not published; the control (tau, sigma) = (0.2, 0.6) keeps "
              "the state inside the box.",
    ),
    'fig7a': Preset(
        'fig7a',
        "Walled comb (a, gamma, b) = (1.3, 1, 0.4) against the two-sided comb: allowed k on (0, 6].",
        ({'potential': {'variant': 'one_sided_comb', 'a': 1.3, 'gamma': 1.0, 'b': 0.4},
          'task': {'name': 'bands', 'energy_max': 18.0}},),
    ),
    'table1': Preset(
        'table1',
        "Kronig-Penney lattice: total measurement probability of well modes j = 1..6 at "
        "(tau, sigma) = (-0.38, 1.25) and of the first excited two-step box level.",
        ({'potential': KP_LATTICE, 'task': {'name': 'table1', 'tau': -0.38, 'sigma': 1.25, 'j_max': 6}},
         {'potential': KP_LATTICE, 'task': {'name': 'probability'},
          'initial_state': {'kind': 'box_first_excited', 'tau': -0.38, 'sigma': 1.25,
                            'v0': 2.645, 'v1': 0.27}}),
    ),
}

PRESETS = MappingProxyType(_PRESETS)


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise BadParams(f"Unknown preset '{name}'. Known: {', '.join(sorted(PRESETS))}")
    return PRESETS[name]
