"""
SVG figure builders for eigencomplete runs
"""
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

# stable element ids so identical runs give identical files
matplotlib.rcParams['svg.hashsalt'] = 'eigencomplete'
SVG_METADATA = {'Date': None}


def _column(rows: List[Dict], key: str) -> List[float]:
    return [row[key] for row in rows]


def create_expansion_figure(rows: List[Dict], title: str = ""):
    """Expansion function over the initial state it reconstructs"""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = _column(rows, 'x')
    ax.plot(x, _column(rows, 'target'), color='black', linewidth=2.2, label='initial state')
    ax.plot(x, _column(rows, 're_f'), color='tab:red', linestyle='--', linewidth=1.2,
            label='expansion (Re)')
    if any(abs(v) > 1e-12 for v in _column(rows, 'im_f')):
        ax.plot(x, _column(rows, 'im_f'), color='tab:blue', linestyle=':', linewidth=1.0,
                label='expansion (Im)')
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.3)
    ax.legend(loc='best', fontsize=8)
    return fig


def create_eigenstate_figure(rows: List[Dict], title: str = ""):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = _column(rows, 'x')
    ax.plot(x, _column(rows, 're_psi'), color='tab:red', label='Re psi')
    ax.plot(x, _column(rows, 'im_psi'), color='tab:blue', linestyle='--', label='Im psi')
    ax.set_xlabel("x")
    ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.3)
    ax.legend(loc='best', fontsize=8)
    return fig


def create_band_figure(rows: List[Dict], title: str = ""):
    """Reduced wavenumber against energy, one curve per band (or step branch)"""
    fig, ax = plt.subplots(figsize=(6, 5))
    for index in sorted({row['band_index'] for row in rows}):
        band = [row for row in rows if row['band_index'] == index]
        energies = _column(band, 'energy')
        ax.plot(_column(band, 'kappa_plus'), energies, color='tab:blue', linewidth=1.2)
        if band[0]['kappa_minus'] is not None:
            ax.plot(_column(band, 'kappa_minus'), energies, color='tab:blue', linewidth=1.2)
    ax.set_xlabel("kappa")
    ax.set_ylabel("energy")
    ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.3)
    return fig


def create_spectrum_comparison_figure(rows: List[Dict], title: str = ""):
    """Allowed (1) / forbidden (0) wavenumbers of the walled and the two-sided comb"""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    k = _column(rows, 'k')
    ax.step(k, _column(rows, 'two_sided_allowed'), where='mid', color='black', linewidth=2.0,
            label='two-sided comb')
    ax.step(k, [0.05 + v * 0.9 for v in _column(rows, 'one_sided_allowed')], where='mid',
            color='tab:red', linestyle='--', label='walled comb')
    ax.set_xlabel("k")
    ax.set_yticks([0, 1], ['gap', 'band'])
    ax.set_title(title, fontsize=9)
    ax.legend(loc='upper right', fontsize=8)
    return fig


def create_table_figure(rows: List[Dict], title: str = ""):
    """Computed 1 - P_j next to the published values where they exist"""
    fig, ax = plt.subplots(figsize=(6, 4))
    j = _column(rows, 'j')
    ax.bar([v - 0.2 for v in j], _column(rows, 'one_minus_P_j'), width=0.4, label='computed')
    published = [(row['j'], row['published_one_minus_P_j']) for row in rows
                 if row.get('published_one_minus_P_j') is not None]
    if published:
        ax.bar([v + 0.2 for v, _ in published], [p for _, p in published], width=0.4,
               color='tab:gray', label='published')
    ax.axhline(0.0, color='black', linewidth=0.8)
    ax.set_xlabel("j")
    ax.set_ylabel("1 - P_j")
    ax.set_title(title, fontsize=9)
    ax.legend(loc='best', fontsize=8)
    return fig


FIGURE_BUILDERS = {
    'expansion': create_expansion_figure,
    'eigenstate': create_eigenstate_figure,
    'bands': create_band_figure,
    'spectrum_comparison': create_spectrum_comparison_figure,
    'table': create_table_figure,
}


def write_figure(path: Path, config, results: Dict):
    """Figure writer handed to the result exporter"""
    plot = results['plot']
    title = plot.get('title') or f"{config.task}: {config.variant}"
    fig = FIGURE_BUILDERS[plot['kind']](results['rows'], title)
    try:
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata=SVG_METADATA)
    finally:
        plt.close(fig)
