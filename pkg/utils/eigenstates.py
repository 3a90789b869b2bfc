"""
Orthonormalized eigenstates for the potential catalog.

Bound states are normalized to 1. Free states follow the average-density
convention: 1/(2 pi) when the state extends to both sides, 1/pi when a wall
closes one side. Bloch states carry period/(2 pi) in every cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import airy

from .exceptions import AtBandEdge, BadParams, InGap, OutOfSpectrum, UnknownFamily
from .logging_config import get_logger
from .numerics import DEFAULT_SCAN_DENSITY, fixed_quadrature, scan_roots
from .potentials import (Cosine, DiracComb, DoubleWell, HardBox, KronigPenney, OneSidedComb,
                         OpenBox, Potential, Step)
from .spectra import DEFAULT_EDGE_MARGIN, mathieu_cell, monodromy, one_sided_spectrum, step_sf
from .waves import PiecewiseWave, Region, airy_region, constant_region

logger = get_logger(__name__)

TWO_SIDED_DENSITY = 1.0 / (2.0 * math.pi)
ONE_SIDED_DENSITY = 1.0 / math.pi

FAMILIES = {
    'double_well': ('dw_bound1', 'dw_bound2', 'dw_free_left', 'dw_free_right'),
    'cosine': ('cos_bloch+', 'cos_bloch-'),
    'dirac_comb': ('comb_bloch+', 'comb_bloch-'),
    'kronig_penney': ('kp_bloch_1', 'kp_bloch_2', 'kp_bloch_3', 'kp_bloch_4'),
    'step': ('step_psi0', 'step_psi1', 'step_psi2'),
    'open_box': ('openbox_bound', 'openbox_free'),
    'one_sided_comb': ('onesided_comb',),
    'hard_box': ('box_level',),
}

BLOCH_PREFIX = {'cosine': 'cos_bloch', 'dirac_comb': 'comb_bloch'}


@dataclass(frozen=True)
class Eigenstate:
    family: str
    energy: float
    kappa: Optional[float]
    wave: PiecewiseWave
    norm_const: float
    # (A_n, B_n) of psi = A_n e^{ikx} + B_n e^{-ikx} per cell, for states built cell by cell
    coefficients: Optional[Tuple[Tuple[complex, complex], ...]] = field(default=None, compare=False,
                                                                       repr=False)

    def evaluate(self, x, side: str = 'right'):
        return self.wave.evaluate(x, side)

    def derivative(self, x, side: str = 'right'):
        return self.wave.derivative(x, side)


def families(p: Potential) -> Tuple[str, ...]:
    return FAMILIES[p.variant]


def _check_family(p: Potential, family: str):
    if family not in FAMILIES.get(p.variant, ()):
        raise UnknownFamily(f"{family!r} is not an eigenstate family of {p.variant}; "
                            f"known: {', '.join(FAMILIES.get(p.variant, ()))}")


def _shoot_layers(layers: Sequence[Tuple[float, float, float]], psi0: complex,
                  dpsi0: complex) -> Tuple[List[Region], complex, complex]:
    """Propagate (psi, psi') through constant layers (x_lo, x_hi, q2 = 2 (eps - V))"""
    regions = []
    psi, dpsi = psi0, dpsi0
    for lo, hi, q2 in layers:
        region = constant_region(lo, hi, q2, psi, dpsi)
        regions.append(region)
        value, slope = region.values(np.array([hi]))
        psi, dpsi = complex(value[0]), complex(slope[0])
    return regions, psi, dpsi


def _decaying_tail(x0: float, decay: float, amplitude: complex) -> Region:
    return Region(x0, np.inf, 'complex_exp', (amplitude, 0.0), 1j * decay, x0)


def _normalized(family: str, energy: float, kappa: Optional[float], wave: PiecewiseWave,
                lo: float = -np.inf, hi: float = np.inf, target: float = 1.0) -> Eigenstate:
    norm = wave.norm_squared(lo, hi)
    constant = math.sqrt(target / norm)
    return Eigenstate(family, energy, kappa, wave.scaled(constant), constant)


# ---------------------------------------------------------------------------
# Bound states
# ---------------------------------------------------------------------------

def dw_level_lower(p: DoubleWell, energy):
    """Level function for -V0 < eps < -V1, cleared of the tan(k1) poles"""
    energy = np.asarray(energy, dtype=float)
    k = np.sqrt(-2.0 * energy)
    k1 = np.sqrt(2.0 * (energy + p.v0))
    k2 = np.sqrt(-2.0 * (energy + p.v1))
    cos, sin = np.cos(k1), np.sin(k1)
    return (2 * k * k1 * k2 * cos + k2 * (k * k - k1 * k1) * sin
            + (k1 * (k * k + k2 * k2) * cos + k * (k2 * k2 - k1 * k1) * sin) * np.tanh(k2))


def dw_level_upper(p: DoubleWell, energy):
    """Level function for -V1 < eps < 0, cleared of the tan(k3), tan(k4) poles"""
    energy = np.asarray(energy, dtype=float)
    k = np.sqrt(-2.0 * energy)
    k3 = np.sqrt(2.0 * (energy + p.v0))
    k4 = np.sqrt(2.0 * (energy + p.v1))
    cos3, sin3 = np.cos(k3), np.sin(k3)
    return (np.cos(k4) * (2 * k * k3 * k4 * cos3 + k4 * (k * k - k3 * k3) * sin3)
            + np.sin(k4) * (k3 * (k * k - k4 * k4) * cos3 - k * (k3 * k3 + k4 * k4) * sin3))


def _dw_bound(p: DoubleWell, energy: float, family: str) -> Eigenstate:
    k = math.sqrt(-2.0 * energy)
    layers = [(0.0, 1.0, 2.0 * (energy + p.v0)), (1.0, 2.0, 2.0 * (energy + p.v1))]
    inner, psi2, _ = _shoot_layers(layers, 1.0, k)
    regions = ([Region(-np.inf, 0.0, 'complex_exp', (1.0, 0.0), -1j * k, 0.0)]
               + inner + [_decaying_tail(2.0, k, psi2)])
    return _normalized(family, energy, None, PiecewiseWave(tuple(regions)))


def open_box_level(p: OpenBox, energy):
    """Matching residual at x = 1 for a state started as psi(0) = 0, psi'(0) = 1.

    Without a ramp this is (k sin(beta) + beta cos(beta)) / beta.
    """
    energy = np.asarray(energy, dtype=float)
    k = np.sqrt(np.maximum(-2.0 * energy, 0.0))
    psi, dpsi = _open_box_interior_end(p, energy)
    return dpsi + k * psi


def _open_box_interior_end(p: OpenBox, energy):
    """(psi(1), psi'(1)) for psi(0) = 0, psi'(0) = 1, vectorized in energy"""
    q2 = 2.0 * (energy + p.v0)
    q = np.sqrt(np.asarray(q2, dtype=complex))
    width = OpenBox.ramp_start if p.ramp == 'linear' else 1.0
    psi = (width * np.sinc(q * width / np.pi)).real
    dpsi = np.cos(q * width).real
    if p.ramp != 'linear':
        return psi, dpsi
    scale = (6.0 * p.v0) ** (1.0 / 3.0)
    turning = OpenBox.ramp_start + (energy + p.v0) / (3.0 * p.v0)
    ai0, aip0, bi0, bip0 = airy(scale * (OpenBox.ramp_start - turning))
    ai1, aip1, bi1, bip1 = airy(scale * (1.0 - turning))
    slope = dpsi / scale
    c0 = math.pi * (psi * bip0 - slope * bi0)
    c1 = math.pi * (slope * ai0 - psi * aip0)
    return c0 * ai1 + c1 * bi1, scale * (c0 * aip1 + c1 * bip1)


def _open_box_interior(p: OpenBox, energy: float) -> Tuple[List[Region], complex, complex]:
    if p.ramp != 'linear':
        return _shoot_layers([(0.0, 1.0, 2.0 * (energy + p.v0))], 0.0, 1.0)
    regions, psi, dpsi = _shoot_layers([(0.0, OpenBox.ramp_start, 2.0 * (energy + p.v0))], 0.0, 1.0)
    scale = (6.0 * p.v0) ** (1.0 / 3.0)
    turning = OpenBox.ramp_start + (energy + p.v0) / (3.0 * p.v0)
    ramp = airy_region(OpenBox.ramp_start, 1.0, scale, turning, psi, dpsi)
    value, slope = ramp.values(np.array([1.0]))
    return regions + [ramp], complex(value[0]), complex(slope[0])


def _open_box_bound(p: OpenBox, energy: float) -> Eigenstate:
    k = math.sqrt(-2.0 * energy)
    inner, psi1, _ = _open_box_interior(p, energy)
    wave = PiecewiseWave(tuple(inner + [_decaying_tail(1.0, k, psi1)]), compact=True)
    return _normalized('openbox_bound', energy, None, wave, 0.0, np.inf)


def hard_box_level(p: HardBox, energy):
    """psi(tau + sigma) for psi(tau) = 0, psi'(tau) = 1, vectorized in energy"""
    energy = np.asarray(energy, dtype=float)
    split = p.tau + p.sigma if p.split is None else p.split
    widths = [(split - p.tau, p.v_left), (p.tau + p.sigma - split, p.v_right)]
    psi, dpsi = np.zeros_like(energy), np.ones_like(energy)
    for width, v in widths:
        if width <= 0:
            continue
        q = np.sqrt((2.0 * (energy - v)).astype(complex))
        c = np.cos(q * width).real
        s = (width * np.sinc(q * width / np.pi)).real
        psi, dpsi = c * psi + s * dpsi, -2.0 * (energy - v) * s * psi + c * dpsi
    return psi


def _hard_box_layers(p: HardBox, energy: float) -> List[Tuple[float, float, float]]:
    split = p.tau + p.sigma if p.split is None else p.split
    layers = [(p.tau, split, 2.0 * (energy - p.v_left))]
    if split < p.tau + p.sigma:
        layers.append((split, p.tau + p.sigma, 2.0 * (energy - p.v_right)))
    return layers


def hard_box_state(p: HardBox, energy: float) -> Eigenstate:
    regions, _, _ = _shoot_layers(_hard_box_layers(p, energy), 0.0, 1.0)
    wave = PiecewiseWave(tuple(regions), compact=True)
    return _normalized('box_level', energy, None, wave, p.tau, p.tau + p.sigma)


def bound_states(p: Potential, scan_density: int = DEFAULT_SCAN_DENSITY,
                 count: int = 10) -> List[Eigenstate]:
    """All bound states of a double well or open box; the lowest `count` levels of a hard box"""
    if isinstance(p, DoubleWell):
        gap = 1e-10 * p.v0
        states = []
        for energy in scan_roots(lambda e: dw_level_lower(p, e), -p.v0 + gap, -p.v1 - gap, scan_density):
            states.append(_dw_bound(p, energy, 'dw_bound1'))
        for energy in scan_roots(lambda e: dw_level_upper(p, e), -p.v1 + gap, -gap, scan_density):
            states.append(_dw_bound(p, energy, 'dw_bound2'))
        logger.info(f"{p.label}: {len(states)} bound states "
                    f"{', '.join(f'{s.energy:.6f}' for s in states)}")
        return states

    if isinstance(p, OpenBox):
        gap = 1e-10 * p.v0
        energies = scan_roots(lambda e: open_box_level(p, e), -p.v0 + gap, -gap, scan_density)
        logger.info(f"{p.label}: {len(energies)} bound states")
        return [_open_box_bound(p, e) for e in energies]

    if isinstance(p, HardBox):
        floor = min(p.v_left, p.v_right)
        top = max(p.v_left, p.v_right) + ((count + 1) * math.pi / p.sigma) ** 2 / 2.0
        density = max(scan_density, int(4 * count / (top - floor)) + 1)
        energies = scan_roots(lambda e: hard_box_level(p, e), floor + 1e-12, top, density)
        return [hard_box_state(p, e) for e in energies[:count]]

    return []


# ---------------------------------------------------------------------------
# Free states
# ---------------------------------------------------------------------------

def _layered_scattering(boundaries: Sequence[float], wavenumbers: Sequence[float],
                        incoming: str, amplitude: float) -> np.ndarray:
    """Amplitude pairs (a_r, b_r) of exp(+-i q_r (x - o_r)) for a layered medium.

    o_0 = boundaries[0], o_r = boundaries[r - 1] otherwise. Left incidence fixes
    a_0 = amplitude and b_last = 0, right incidence b_last = amplitude and a_0 = 0.
    """
    n_regions = len(wavenumbers)
    origins = [boundaries[0]] + list(boundaries)
    size = 2 * n_regions
    matrix = np.zeros((2 * (n_regions - 1), size), dtype=complex)
    for j, x in enumerate(boundaries):
        q_l, q_r = wavenumbers[j], wavenumbers[j + 1]
        e = np.exp(1j * q_l * (x - origins[j]))
        matrix[2 * j, 2 * j:2 * j + 4] = [e, 1 / e, -1, -1]
        matrix[2 * j + 1, 2 * j:2 * j + 4] = [q_l * e, -q_l / e, -q_r, q_r]

    if incoming == 'left':
        known, silent = 0, size - 1
    else:
        known, silent = size - 1, 0
    unknown = [i for i in range(size) if i not in (known, silent)]
    rhs = -amplitude * matrix[:, known]
    solution = np.linalg.solve(matrix[:, unknown], rhs)
    amplitudes = np.zeros(size, dtype=complex)
    amplitudes[known] = amplitude
    amplitudes[unknown] = solution
    return amplitudes.reshape(n_regions, 2)


def _dw_free(p: DoubleWell, energy: float, family: str) -> Eigenstate:
    kappa = math.sqrt(2.0 * energy)
    k5, k6 = math.sqrt(2.0 * (energy + p.v0)), math.sqrt(2.0 * (energy + p.v1))
    boundaries = (0.0, 1.0, 2.0)
    incoming = 'left' if family == 'dw_free_left' else 'right'
    amps = _layered_scattering(boundaries, (kappa, k5, k6, kappa), incoming,
                               math.sqrt(TWO_SIDED_DENSITY))
    edges = (-np.inf, 0.0, 1.0, 2.0, np.inf)
    origins = (0.0, 0.0, 1.0, 2.0)
    regions = tuple(Region(edges[r], edges[r + 1], 'complex_exp', (amps[r, 0], amps[r, 1]),
                           q, origins[r])
                    for r, q in enumerate((kappa, k5, k6, kappa)))
    return Eigenstate(family, energy, kappa, PiecewiseWave(regions), 1.0)


def double_well_coefficients(e: Eigenstate) -> Dict[str, complex]:
    """Incident, reflected and transmitted amplitudes of a double-well free state"""
    left, right = e.wave.regions[0], e.wave.regions[-1]
    if e.family == 'dw_free_left':
        return {'A': left.coefficients[0], 'B': left.coefficients[1], 'G': right.coefficients[0]}
    return {'A': right.coefficients[1], 'B': right.coefficients[0], 'G': left.coefficients[1]}


def _step_free(p: Step, energy: float, family: str) -> Eigenstate:
    k = math.sqrt(2.0 * energy)
    if family == 'step_psi0':
        if not 0 < energy < p.v0:
            raise OutOfSpectrum(f"step_psi0 needs 0 < eps < V0, got {energy}")
        alpha = math.sqrt(2.0 * (p.v0 - energy))
        c = math.sqrt(2 * k * k / (math.pi * (alpha * alpha + k * k)))
        b = math.sqrt(2 * alpha * alpha / (math.pi * (alpha * alpha + k * k)))
        regions = (Region(-np.inf, 0.0, 'trig', (c, -b), k, 0.0),
                   _decaying_tail(0.0, alpha, c))
        return Eigenstate(family, energy, k, PiecewiseWave(regions), c)

    if energy <= p.v0:
        raise OutOfSpectrum(f"{family} needs eps > V0, got {energy}")
    beta = math.sqrt(2.0 * (energy - p.v0))
    if family == 'step_psi1':
        a = 1.0 / math.sqrt(math.pi)
        coefficients = ((a, 0.0), (a, 0.0))
    else:
        total = beta * beta + k * k
        coefficients = ((0.0, math.sqrt(2 * beta * beta / (math.pi * total))),
                        (0.0, math.sqrt(2 * k * k / (math.pi * total))))
    regions = (Region(-np.inf, 0.0, 'trig', coefficients[0], k, 0.0),
               Region(0.0, np.inf, 'trig', coefficients[1], beta, 0.0))
    kappa = getattr(step_sf(p.v0, k), 'kappa1' if family == 'step_psi1' else 'kappa2')
    return Eigenstate(family, energy, kappa, PiecewiseWave(regions), 1.0)


def step_pair(p: Step, k: float, f_amp: float, theta: float) -> Tuple[Eigenstate, Eigenstate]:
    """The (F, theta) family of orthonormal step states above the barrier"""
    energy = 0.5 * k * k
    if energy <= p.v0:
        raise OutOfSpectrum(f"step_pair needs eps > V0, got {energy}")
    if not 0 <= math.pi * f_amp * f_amp <= 1:
        raise BadParams(f"step_pair needs 0 <= pi F^2 <= 1, got F = {f_amp}")
    beta = math.sqrt(k * k - 2.0 * p.v0)
    total = beta * beta + k * k
    rest = 1.0 - math.pi * f_amp * f_amp
    phase = complex(np.exp(1j * theta))
    first = ((f_amp, math.sqrt(2 * beta * beta * rest / (math.pi * total)) * phase),
             (f_amp, math.sqrt(2 * k * k * rest / (math.pi * total)) * phase))
    second = ((math.sqrt(rest / math.pi), -math.sqrt(2 * beta * beta * f_amp * f_amp / total) * phase),
              (math.sqrt(rest / math.pi), -math.sqrt(2 * k * k * f_amp * f_amp / total) * phase))
    states = []
    for family, (left, right) in (('step_psi1', first), ('step_psi2', second)):
        regions = (Region(-np.inf, 0.0, 'trig', left, k, 0.0),
                   Region(0.0, np.inf, 'trig', right, beta, 0.0))
        states.append(Eigenstate(family, energy, None, PiecewiseWave(regions), 1.0))
    return states[0], states[1]


def step_coefficients(e: Eigenstate) -> Dict[str, complex]:
    """(D, E) on the left and (F, G) on the right of a step state above the barrier"""
    (d, e_), (f, g) = e.wave.regions[0].coefficients, e.wave.regions[1].coefficients
    return {'D': d, 'E': e_, 'F': f, 'G': g}


def _open_box_free(p: OpenBox, energy: float) -> Eigenstate:
    kappa = math.sqrt(2.0 * energy)
    inner, psi1, dpsi1 = _open_box_interior(p, energy)
    outer = constant_region(1.0, np.inf, kappa * kappa, psi1, dpsi1)
    amplitude = math.sqrt(abs(psi1) ** 2 + abs(dpsi1 / kappa) ** 2)
    constant = math.sqrt(2.0 * ONE_SIDED_DENSITY) / amplitude
    wave = PiecewiseWave(tuple(inner + [outer]), compact=True).scaled(constant)
    return Eigenstate('openbox_free', energy, kappa, wave, constant)


def open_box_free_closed_form(v0: float, energy: float, x):
    """Flat open-box free state written out in closed form"""
    x = np.asarray(x, dtype=float)
    kappa, gamma = math.sqrt(2.0 * energy), math.sqrt(2.0 * (energy + v0))
    denominator = math.sqrt(math.pi * (gamma ** 2 * math.cos(gamma) ** 2
                                       + kappa ** 2 * math.sin(gamma) ** 2) / 2.0)
    inside = kappa * np.sin(gamma * x)
    outside = (kappa * math.sin(gamma) * np.cos(kappa * (x - 1))
               + gamma * math.cos(gamma) * np.sin(kappa * (x - 1)))
    return np.where(x < 0, 0.0, np.where(x < 1, inside, outside)) / denominator


def free_state(p: Potential, energy: float, family: str) -> Eigenstate:
    """Normalized free state of the given family at energy eps"""
    _check_family(p, family)
    if isinstance(p, DoubleWell):
        if family not in ('dw_free_left', 'dw_free_right'):
            raise UnknownFamily(f"{family} is a bound family; use bound_states")
        if energy <= 0:
            raise OutOfSpectrum(f"double-well free states need eps > 0, got {energy}")
        return _dw_free(p, energy, family)
    if isinstance(p, Step):
        if energy <= 0:
            raise OutOfSpectrum(f"step free states need eps > 0, got {energy}")
        return _step_free(p, energy, family)
    if isinstance(p, OpenBox):
        if family != 'openbox_free':
            raise UnknownFamily(f"{family} is a bound family; use bound_states")
        if energy <= 0:
            raise OutOfSpectrum(f"open-box free states need eps > 0, got {energy}")
        return _open_box_free(p, energy)
    if isinstance(p, OneSidedComb):
        return one_sided_comb_state(p, energy)
    if isinstance(p, (Cosine, DiracComb, KronigPenney)):
        branch = '-' if family.endswith('-') or family in ('kp_bloch_2', 'kp_bloch_4') else '+'
        state = bloch_state(p, energy, branch)
        if state.family != family:
            raise OutOfSpectrum(f"energy {energy} belongs to {state.family}, not {family}")
        return state
    raise UnknownFamily(f"{p.variant} has no free states")


# ---------------------------------------------------------------------------
# Bloch states
# ---------------------------------------------------------------------------

def _cell(p: Potential) -> Tuple[float, float]:
    if isinstance(p, KronigPenney):
        return -p.b, p.period
    return 0.0, p.period


def bloch_family(p: Potential, energy: float, branch: str) -> str:
    if isinstance(p, KronigPenney):
        index = (1 if branch == '+' else 2) + (2 if energy > p.v0 else 0)
        return f"kp_bloch_{index}"
    return f"{BLOCH_PREFIX[p.variant]}{branch}"


def _cell_regions(p: Potential, energy: float, psi0: complex, dpsi0: complex) -> List[Region]:
    if isinstance(p, Cosine):
        c, d = psi0, dpsi0
        return [Region(0.0, math.pi, 'mathieu_pair', (c, d), 0.0, 0.0,
                       mathieu_cell(2.0 * energy, p.v0))]
    if isinstance(p, DiracComb):
        return [constant_region(0.0, p.a, 2.0 * energy, psi0, dpsi0)]
    layers = [(-p.b, 0.0, 2.0 * (energy - p.v0)), (0.0, 1.0, 2.0 * (energy - p.v1))]
    regions, _, _ = _shoot_layers(layers, psi0, dpsi0)
    return regions


def bloch_state(p: Potential, energy: float, branch: str = '+',
                margin: float = DEFAULT_EDGE_MARGIN) -> Eigenstate:
    """Common eigenstate of H and the lattice translation, normalized to period/(2 pi) per cell"""
    if branch not in ('+', '-'):
        raise BadParams(f"branch must be '+' or '-', got {branch!r}")
    matrix, d_matrix = monodromy(p, energy)
    c = 0.5 * float(np.trace(matrix))
    dc = 0.5 * float(np.trace(d_matrix))
    if abs(c) > 1.0 + 1e-12:
        raise InGap(f"energy {energy} lies in a gap of {p.variant} (cos arg {c:.6g})")
    c = max(-1.0, min(1.0, c))
    if dc != 0.0 and (1.0 - abs(c)) / abs(dc) < margin:
        raise AtBandEdge(f"energy {energy} is within {margin:g} of a band edge of {p.variant}")

    cell_lo, period = _cell(p)
    kappa = math.acos(c) / period * (1.0 if branch == '+' else -1.0)
    lam = complex(np.exp(1j * kappa * period))
    first = np.array([matrix[0, 1], lam - matrix[0, 0]], dtype=complex)
    second = np.array([lam - matrix[1, 1], matrix[1, 0]], dtype=complex)
    vector = first if np.linalg.norm(first) >= np.linalg.norm(second) else second

    regions = _cell_regions(p, energy, vector[0], vector[1])
    wave = PiecewiseWave(tuple(regions), bloch=(kappa, period, cell_lo))
    nodes = 96 + 8 * int(math.sqrt(max(2.0 * energy, 0.0)) * period)
    norm = wave.norm_squared(cell_lo, cell_lo + period, nodes=nodes)
    constant = math.sqrt(period * TWO_SIDED_DENSITY / norm)
    return Eigenstate(bloch_family(p, energy, branch), energy, kappa, wave.scaled(constant), constant)


# ---------------------------------------------------------------------------
# One-sided comb
# ---------------------------------------------------------------------------

def one_sided_transfer(gamma: float, a: float, k: float) -> np.ndarray:
    """Cell map (A_n, w^-n B_n) -> (A_n+1, w^-(n+1) B_n+1) with w = exp(2 i a k)"""
    c = 1j * gamma / k
    w = np.exp(2j * a * k)
    return np.array([[1 - c, -c], [c / w, (1 + c) / w]], dtype=complex)


def one_sided_power(gamma: float, a: float, k: float, n: int) -> np.ndarray:
    """Closed-form n-th power of the cell map from its two eigenvalues"""
    t = one_sided_transfer(gamma, a, k)
    w = np.exp(2j * a * k)
    v = (1 - 1j * gamma / k) * w + 1j * gamma / k + 1
    root = np.sqrt(v * v - 4 * w + 0j)
    lam1, lam2 = (v + root) / (2 * w), (v - root) / (2 * w)
    if abs(lam1 - lam2) < 1e-12:
        raise AtBandEdge(f"k = {k} sits on a band edge of the one-sided comb")
    identity = np.eye(2)
    return (lam1 ** n * (t - lam2 * identity) - lam2 ** n * (t - lam1 * identity)) / (lam1 - lam2)


def one_sided_recurrence(gamma: float, a: float, k: float, a0: complex, b0: complex,
                         n: int) -> List[Tuple[complex, complex]]:
    """(A_m, B_m) for m = 0..n from the jump conditions applied one delta at a time"""
    c = 1j * gamma / k
    pairs = [(complex(a0), complex(b0))]
    for m in range(n):
        a_m, b_m = pairs[-1]
        w_m = np.exp(2j * a * k * m)
        pairs.append(((1 - c) * a_m - c * b_m / w_m, c * w_m * a_m + (1 + c) * b_m))
    return pairs


def one_sided_comb_amplitude(p: OneSidedComb, k: float) -> float:
    """Closed-form A_0 of the walled comb that sets the cell average of |A_n|^2 + |B_n|^2 to 1/pi.

    The A_n B_n* e^{2ikx} cross term is left out, so the state built from this
    A_0 has a mean density above 1/pi wherever that term does not average
    out. one_sided_comb_state normalizes the full density.
    """
    alpha = math.atan(p.gamma / k)
    numerator = math.sin(p.a * k) * math.sin(p.a * k - 2 * alpha) / math.sin(p.a * k - alpha)
    denominator = 2 * math.pi * (math.cos(k * (p.a - 2 * p.b)) * math.sin(alpha)
                                 + math.sin(p.a * k - alpha))
    return math.sqrt(numerator / denominator)


def one_sided_mean_density(p: OneSidedComb, k: float, a0: complex, b0: complex,
                           coherent: bool = True) -> float:
    """Long-range cell average of |psi|^2 from the eigen-decomposition of the cell map.

    With coherent=False the average is that of |A_n|^2 + |B_n|^2, the
    quantity one_sided_comb_amplitude normalizes.
    """
    t = one_sided_transfer(p.gamma, p.a, k)
    w = np.exp(2j * p.a * k)
    g = (1 - np.conj(w)) / (2j * k) if coherent else 0.0
    h = np.array([[1.0, np.conj(g) / p.a], [g / p.a, 1.0]], dtype=complex)
    eigenvalues, vectors = np.linalg.eig(t)
    if abs(eigenvalues[0] - eigenvalues[1]) < 1e-12:
        raise AtBandEdge(f"k = {k} sits on a band edge of the one-sided comb")
    weights = np.linalg.solve(vectors, np.array([a0, b0], dtype=complex))
    mean = 0.0
    for i in range(2):
        v = vectors[:, i]
        mean += abs(weights[i]) ** 2 * float(np.real(np.conj(v) @ h @ v))
    return mean


def one_sided_comb_state(p: OneSidedComb, energy: float, n_cells: int = 200) -> Eigenstate:
    """Walled comb state on [-b, n_cells * a] with mean density 1/pi.

    `coefficients` holds (A_n, B_n) for n = 0..n_cells, n counting the deltas
    to the left of the cell.
    """
    if energy <= 0 or not one_sided_spectrum(p.a, p.gamma, energy):
        raise InGap(f"energy {energy} lies outside the one-sided comb spectrum")
    k = math.sqrt(2.0 * energy)
    b0 = -np.exp(-2j * k * p.b)
    mean = one_sided_mean_density(p, k, 1.0, b0)
    a0 = math.sqrt(ONE_SIDED_DENSITY / mean)

    coefficients = [(complex(a0), complex(a0 * b0))]
    regions = [Region(-p.b, 0.0, 'complex_exp', coefficients[0], k, 0.0)]
    w = np.exp(2j * p.a * k)
    u0 = np.array([a0, a0 * b0], dtype=complex)
    for n in range(1, n_cells + 1):
        a_n, b_tilde = one_sided_power(p.gamma, p.a, k, n) @ u0
        coefficients.append((complex(a_n), complex(b_tilde * w ** n)))
        regions.append(Region((n - 1) * p.a, n * p.a, 'complex_exp', coefficients[-1], k, 0.0))
    logger.debug(f"{p.label}: one-sided state at eps = {energy:.6g}, A_0 = {a0:.6g}")
    return Eigenstate('onesided_comb', energy, k, PiecewiseWave(tuple(regions), compact=True), a0,
                      tuple(coefficients))


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def orthonormality_probe(e1: Eigenstate, e2: Eigenstate, windows: Sequence[float],
                         lo: Optional[float] = None) -> List[Tuple[float, float]]:
    """Window averages of conj(psi1) psi2 over [-L, L] (or [lo, lo + L]).

    Equal states approach their average density, different continuum states
    approach zero as L grows.
    """
    breaks = sorted(set(b for b in e1.wave.breakpoints + e2.wave.breakpoints if np.isfinite(b)))
    k_max = max(abs(e1.kappa or 1.0), abs(e2.kappa or 1.0), 1.0)
    averages = []
    for half in windows:
        a, b = (-half, half) if lo is None else (lo, lo + half)
        points = [a] + [x for x in breaks if a < x < b] + [b]
        total = 0.0 + 0.0j
        for x0, x1 in zip(points[:-1], points[1:]):
            nodes = 64 + int(4 * k_max * (x1 - x0))
            integrand = lambda x: np.conj(e1.evaluate(x)) * e2.evaluate(x)
            total += complex(fixed_quadrature(integrand, x0, x1, nodes))
        averages.append((half, abs(total) / (b - a)))
    return averages


def sample_eigenstate(e: Eigenstate, x_grid) -> List[Dict]:
    """Rows (x, Re psi, Im psi) for CSV export"""
    x_grid = np.asarray(x_grid, dtype=float)
    values = np.atleast_1d(e.evaluate(x_grid))
    return [{'x': float(x), 're_psi': float(v.real), 'im_psi': float(v.imag)}
            for x, v in zip(x_grid, values)]
