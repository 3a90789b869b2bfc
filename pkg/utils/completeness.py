"""
Completeness engine: initial states, projection amplitudes, expansion
reconstruction, total measurement probability and a finite-difference oracle.

Notes
-----
- Every continuous family is integrated piece by piece in its own variable
  (kappa, k, beta or eps) after the substitution t = lo + (hi - lo)(1 - cos th)/2.
  The sin(th) factor cancels the inverse square-root growth of |dkappa/deps|
  at band edges, so the quadrature never samples an edge.
- The wavenumber cutoff starts at 40/sigma and is doubled until the newest
  window changes f(x) by less than cutoff_tol (or P by less than
  probability_tol). Every cutoff used is kept in the report.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .eigenstates import (Eigenstate, FAMILIES, bloch_family, bloch_state, bound_states,
                          free_state)
from .exceptions import (AtBandEdge, BadParams, ExpansionNotSupported, InGap, SupportExceedsBox,
                         UnknownFamily)
from .logging_config import get_logger
from .numerics import (DEFAULT_SCAN_DENSITY, MATHIEU_CELL_A_MAX, QuadratureSpec, integrate)
from .potentials import (Cosine, DiracComb, DoubleWell, HardBox, KronigPenney, OneSidedComb,
                         OpenBox, Potential, Step, classify, delta_markers)
from .spectra import (DEFAULT_EDGE_MARGIN, band_structure, comb_dispersion_dk, comb_dispersion_k,
                      monodromy)
from .validators import validate_initial_state_params, validate_numerics, validate_oracle_points
from .waves import PiecewiseWave, Region

logger = get_logger(__name__)

ENDPOINT_EXCLUSION = 1e-3
BOUND_FAMILIES = ('dw_bound1', 'dw_bound2', 'openbox_bound')


@dataclass(frozen=True)
class NumericsOptions:
    """Tolerances and cutoffs shared by expand, total_probability and the oracle"""
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_depth: int = 2000
    edge_margin: float = DEFAULT_EDGE_MARGIN
    initial_cutoff: Optional[float] = None
    max_cutoff: Optional[float] = None
    cutoff_tol: float = 1e-4
    probability_tol: float = 1e-7
    threads: int = 1
    scan_density: int = DEFAULT_SCAN_DENSITY
    grid_points: int = 2000

    @classmethod
    def from_dict(cls, values: Dict) -> "NumericsOptions":
        known = {f.name for f in fields(cls)}
        unknown = [name for name in values if name not in known]
        if unknown:
            raise BadParams(f"Unknown numerics keys: {', '.join(sorted(unknown))}")
        is_valid, errors = validate_numerics(values)
        if not is_valid:
            raise BadParams("; ".join(errors))
        cleaned = {}
        for name, value in values.items():
            if value is None:
                continue
            integer = name in ('max_depth', 'threads', 'scan_density', 'grid_points')
            cleaned[name] = int(value) if integer else float(value)
        return cls(**cleaned)

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self.abs_tol, self.rel_tol, self.max_depth)


@contextmanager
def _workers(threads: int):
    """quad_vec workers argument: 1, or the map of a thread pool"""
    if threads <= 1:
        yield 1
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialState:
    """Superposition sum w_i * wave_i of compactly supported waves"""
    kind: str
    params: Dict = field(compare=False)
    terms: Tuple[Tuple[complex, PiecewiseWave], ...]
    energy: Optional[float] = None
    constants: Dict = field(default_factory=dict, compare=False)

    @property
    def support(self) -> Tuple[float, float]:
        return (min(w.support[0] for _, w in self.terms),
                max(w.support[1] for _, w in self.terms))

    @property
    def width(self) -> float:
        lo, hi = self.support
        return hi - lo

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(np.atleast_1d(x).shape, dtype=complex)
        for weight, wave in self.terms:
            total = total + weight * np.atleast_1d(wave.evaluate(x))
        return complex(total[0]) if x.ndim == 0 else total

    def norm_squared(self) -> float:
        lo, hi = self.support
        total = 0.0
        for wi, a in self.terms:
            for wj, b in self.terms:
                total += float(np.real(np.conj(wi) * wj * _wave_overlap(a, b, lo, hi)))
        return total


def well_mode_wave(j: int, tau: float, sigma: float) -> PiecewiseWave:
    """sqrt(2/sigma) sin(j pi (x - tau)/sigma) on [tau, tau + sigma], zero outside"""
    region = Region(tau, tau + sigma, 'trig', (0.0, math.sqrt(2.0 / sigma)), j * math.pi / sigma, tau)
    return PiecewiseWave((region,), compact=True)


def make_initial(kind: str, params: Dict) -> InitialState:
    """Universal initial state: an infinite-well mode or the first excited two-step box level"""
    is_valid, errors = validate_initial_state_params(kind, params)
    if not is_valid:
        raise BadParams("; ".join(errors))

    if kind == 'well_mode':
        j, tau, sigma = int(params['j']), float(params['tau']), float(params['sigma'])
        return InitialState(kind, dict(params), ((1.0, well_mode_wave(j, tau, sigma)),))

    tau, sigma = float(params['tau']), float(params['sigma'])
    v0, v1 = float(params['v0']), float(params['v1'])
    box = HardBox(tau, sigma, v0, v1, split=0.0)
    levels = bound_states(box, count=2)
    if len(levels) < 2:
        raise BadParams(f"two-step box {box.label} has fewer than two levels")
    level = levels[1]
    xi = math.sqrt(2.0 * (level.energy - v0)) if level.energy > v0 else None
    eta = math.sqrt(2.0 * (level.energy - v1)) if level.energy > v1 else None
    constants = {'energy': level.energy, 'xi': xi, 'eta': eta,
                 'A': level.norm_const / xi if xi else None}
    logger.info(f"box_first_excited: eps = {level.energy:.6f}, xi = {xi}, eta = {eta}")
    return InitialState(kind, dict(params), ((1.0, level.wave),), level.energy, constants)


def superpose(pairs: Sequence[Tuple[complex, InitialState]]) -> InitialState:
    """Linear combination of initial states (not renormalized)"""
    if not pairs:
        raise BadParams("superpose needs at least one state")
    terms = tuple((weight * w, wave) for weight, s in pairs for w, wave in s.terms)
    return InitialState('superposition', {'parts': [s.kind for _, s in pairs]}, terms)


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------

def _gauss_nodes(energy: float, kappa: Optional[float], region: Region, length: float) -> int:
    scale = math.sqrt(2.0 * abs(energy)) + abs(kappa or 0.0) + abs(complex(region.wavenumber)) + 10.0
    return min(2000, 64 + int(4 * scale * length))


def _wave_overlap(a: PiecewiseWave, b: PiecewiseWave, lo: float, hi: float,
                  energy: float = 0.0, kappa: Optional[float] = None) -> complex:
    """Integral of conj(a) * b over [lo, hi], region by region of b"""
    total = 0.0 + 0.0j
    for piece in b.pieces(lo, hi):
        region = piece.region
        terms = region.exponential_terms()
        value = None
        if terms is not None:
            omegas, amps = terms
            value = a.overlap_exponentials(omegas, piece.phase * amps, piece.shift + region.origin,
                                           piece.a, piece.b)
        if value is None:
            shift, phase = piece.shift, piece.phase
            g = lambda x: phase * region.values(x - shift)[0]
            value = a.inner_product(g, piece.a, piece.b,
                                    _gauss_nodes(energy, kappa, region, piece.b - piece.a))
        total += value
    return total


def project(s: InitialState, e: Eigenstate) -> complex:
    """Measurement amplitude: integral of conj(psi_e) * Psi over the support of s"""
    lo, hi = s.support
    return sum(weight * _wave_overlap(e.wave, wave, lo, hi, e.energy, e.kappa)
               for weight, wave in s.terms)


# ---------------------------------------------------------------------------
# Spectral decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Segment:
    """One continuous piece: states psi_t with measure weight(t) dt on (lo, hi)"""
    family: str
    lo: float
    hi: float
    state: Callable[[float], Eigenstate]
    weight: Callable[[float], float]
    variable: str


def _bloch_density(p: Potential, energy: float) -> float:
    """|dkappa/deps| from the monodromy, zero on the edge itself"""
    matrix, d_matrix = monodromy(p, energy)
    c = 0.5 * float(np.trace(matrix))
    dc = 0.5 * float(np.trace(d_matrix))
    s2 = 1.0 - c * c
    if s2 <= 0.0:
        return 0.0
    return abs(dc) / (p.period * math.sqrt(s2))


def _comb_density_k(p: DiracComb, k: float) -> float:
    """|dkappa/dk| of the comb"""
    c = float(comb_dispersion_k(p, k))
    s2 = 1.0 - c * c
    if s2 <= 0.0:
        return 0.0
    return abs(float(comb_dispersion_dk(p, k))) / (p.a * math.sqrt(s2))


def _clip(lo: float, hi: float, window: Tuple[float, float]) -> Optional[Tuple[float, float]]:
    a, b = max(lo, window[0]), min(hi, window[1])
    return (a, b) if b > a else None


def _bloch_segments(p: Potential, window_k: Tuple[float, float],
                    scan_density: int) -> List[_Segment]:
    if isinstance(p, DiracComb):
        bands = band_structure(p, 0.5 * window_k[1] ** 2, scan_density).bands
        segments = []
        for band in bands:
            piece = _clip(math.sqrt(2.0 * band.energy_lo), math.sqrt(2.0 * band.energy_hi), window_k)
            if piece is None:
                continue
            for branch in ('+', '-'):
                segments.append(_Segment(
                    f"comb_bloch{branch}", piece[0], piece[1],
                    lambda k, b=branch: bloch_state(p, 0.5 * k * k, b, margin=0.0),
                    lambda k: _comb_density_k(p, k), 'k'))
        return segments

    # energies are counted from the well floor; the first window starts below every band
    offset = p.v1 if isinstance(p, KronigPenney) else 0.0
    window = (offset + 0.5 * window_k[0] ** 2 if window_k[0] > 0 else -np.inf,
              offset + 0.5 * window_k[1] ** 2)
    bands = band_structure(p, window[1], scan_density).bands
    segments = []
    for band in bands:
        cuts = [band.energy_lo, band.energy_hi]
        if isinstance(p, KronigPenney) and band.energy_lo < p.v0 < band.energy_hi:
            cuts.insert(1, p.v0)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            piece = _clip(lo, hi, window)
            if piece is None:
                continue
            middle = 0.5 * (piece[0] + piece[1])
            for branch in ('+', '-'):
                segments.append(_Segment(
                    bloch_family(p, middle, branch), piece[0], piece[1],
                    lambda e, b=branch: bloch_state(p, e, b, margin=0.0),
                    lambda e: _bloch_density(p, e), 'energy'))
    return segments


def _continuum_segments(p: Potential, window_k: Tuple[float, float],
                        scan_density: int) -> List[_Segment]:
    """Continuous families restricted to the wavenumber window (k_prev, k_next]"""
    if isinstance(p, DoubleWell):
        return [_Segment(family, window_k[0], window_k[1],
                         lambda k, f=family: free_state(p, 0.5 * k * k, f), lambda k: 1.0, 'kappa')
                for family in ('dw_free_left', 'dw_free_right')]

    if isinstance(p, OpenBox):
        return [_Segment('openbox_free', window_k[0], window_k[1],
                         lambda k: free_state(p, 0.5 * k * k, 'openbox_free'), lambda k: 1.0, 'kappa')]

    if isinstance(p, Step):
        segments = []
        k0 = math.sqrt(2.0 * p.v0)
        if window_k[0] == 0.0:
            segments.append(_Segment('step_psi0', 0.0, k0,
                                     lambda k: free_state(p, 0.5 * k * k, 'step_psi0'),
                                     lambda k: 1.0, 'k'))
        # beta = sqrt(k^2 - 2 V0); dkappa = jacobian * (beta / k) dbeta
        k_of = lambda beta: math.sqrt(beta * beta + k0 * k0)
        weights = {'step_psi1': lambda beta: 2.0 * beta / (beta + k_of(beta)),
                   'step_psi2': lambda beta: (beta * beta + k_of(beta) ** 2) / (k_of(beta) * (beta + k_of(beta)))}
        for family, weight in weights.items():
            segments.append(_Segment(family, window_k[0], window_k[1],
                                     lambda beta, f=family: free_state(p, 0.5 * beta * beta + p.v0, f),
                                     weight, 'beta'))
        return segments

    if isinstance(p, (Cosine, DiracComb, KronigPenney)):
        return _bloch_segments(p, window_k, scan_density)

    raise ExpansionNotSupported(f"No spectral function is available for {p.variant}")


def _cutoff_cap(p: Potential) -> float:
    if isinstance(p, Cosine):
        return math.sqrt(MATHIEU_CELL_A_MAX)
    return np.inf


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmplitudeTable:
    family: str
    samples: Tuple[Tuple[float, complex], ...]
    jacobian_mode: str  # none | dkappa_deps | dkappa_dk
    variable: str = 'kappa'


@dataclass(frozen=True)
class ProbabilityReport:
    total: float
    per_family: Dict[str, float]
    bound: Tuple[Tuple[str, float, float], ...]
    cutoffs: Tuple[float, ...]
    cutoff_reached: bool
    error: float

    @property
    def deviation(self) -> float:
        return 1.0 - self.total


@dataclass(frozen=True)
class ExpansionResult:
    x_grid: np.ndarray
    f: np.ndarray
    target: np.ndarray
    residual_sup: float
    residual_l2: float
    total_probability: float
    per_family_probability: Dict[str, float]
    quadrature_report: Dict


def _integrate_segment(segment: _Segment, s: InitialState, x_grid: Optional[np.ndarray],
                       spec: QuadratureSpec, workers) -> Tuple[np.ndarray, float, float]:
    """(sum over t of phi psi_t(x) dmu, integral of |phi|^2 dmu, error)"""
    span = segment.hi - segment.lo
    size = 0 if x_grid is None else len(x_grid)

    def integrand(theta):
        t = segment.lo + span * (1.0 - math.cos(theta)) / 2.0
        measure = segment.weight(t) * span * math.sin(theta) / 2.0
        out = np.zeros(size + 1, dtype=complex)
        if measure == 0.0:
            return out
        try:
            state = segment.state(t)
        except (InGap, AtBandEdge):
            # round-off right at a band edge
            return out
        phi = project(s, state)
        out[-1] = abs(phi) ** 2 * measure
        if size:
            out[:-1] = phi * measure * state.evaluate(x_grid)
        return out

    result = integrate(integrand, 0.0, math.pi, spec, workers)
    value = np.asarray(result.value)
    return value[:-1], float(value[-1].real), result.error


def _bound_part(s: InitialState, p: Potential, x_grid: Optional[np.ndarray], scan_density: int,
                selected) -> Tuple[np.ndarray, List[Tuple[str, float, float]]]:
    f = np.zeros(0 if x_grid is None else len(x_grid), dtype=complex)
    rows = []
    if not isinstance(p, (DoubleWell, OpenBox)):
        return f, rows
    for state in bound_states(p, scan_density):
        if not selected(state.family):
            continue
        phi = project(s, state)
        rows.append((state.family, state.energy, abs(phi) ** 2))
        if x_grid is not None:
            f = f + phi * state.evaluate(x_grid)
    return f, rows


def _spectral_sum(s: InitialState, p: Potential, x_grid: Optional[np.ndarray],
                  options: NumericsOptions, families: Optional[Iterable[str]]):
    if isinstance(p, (OneSidedComb, HardBox)):
        raise ExpansionNotSupported(f"expansion is not available for {p.variant}")
    if families is not None:
        families = set(families)
        unknown = families - set(FAMILIES[p.variant])
        if unknown:
            raise UnknownFamily(f"{', '.join(sorted(unknown))} not families of {p.variant}")
    selected = (lambda name: True) if families is None else (lambda name: name in families)

    f, bound = _bound_part(s, p, x_grid, options.scan_density, selected)
    per_family: Dict[str, float] = {}
    for family, _, weight in bound:
        per_family[family] = per_family.get(family, 0.0) + weight

    spec = options.quadrature()
    cap = min(_cutoff_cap(p), options.max_cutoff or np.inf)
    cutoff = min(options.initial_cutoff or 40.0 / s.width, cap)
    if options.max_cutoff is None and not np.isfinite(cap):
        cap = cutoff * 2 ** 10
    previous, cutoffs, error, reached = 0.0, [], 0.0, False
    # convergence is judged on the residual points, away from the support ends of s
    inside = None
    if x_grid is not None and len(f):
        inside = interior_mask(s, x_grid)
        if not np.any(inside):
            inside = np.ones(len(f), dtype=bool)
    with _workers(options.threads) as workers:
        while True:
            delta_f = np.zeros_like(f)
            delta_p = 0.0
            for segment in _continuum_segments(p, (previous, cutoff), options.scan_density):
                if not selected(segment.family):
                    continue
                part_f, part_p, err = _integrate_segment(segment, s, x_grid, spec, workers)
                delta_f = delta_f + part_f
                delta_p += part_p
                error += err
                per_family[segment.family] = per_family.get(segment.family, 0.0) + part_p
            f = f + delta_f
            cutoffs.append(cutoff)
            change = float(np.max(np.abs(delta_f[inside]))) if inside is not None else 0.0
            logger.debug(f"window ({previous:.4g}, {cutoff:.4g}]: df = {change:.3g}, dP = {delta_p:.3g}")
            settled = change < options.cutoff_tol if x_grid is not None else delta_p < options.probability_tol
            if previous > 0 and settled:
                break
            if cutoff >= cap:
                reached = True
                logger.warning(f"{p.label}: cutoff cap {cap:.4g} reached before the tail "
                               f"settled (df = {change:.3g}, dP = {delta_p:.3g})")
                break
            previous, cutoff = cutoff, min(2.0 * cutoff, cap)

    total = float(sum(per_family.values()))
    logger.info(f"{p.label} / {s.kind}: P = {total:.8f} with cutoff {cutoffs[-1]:.4g}")
    report = ProbabilityReport(total, per_family, tuple(bound), tuple(cutoffs), reached, error)
    return f, report


def total_probability(s: InitialState, p: Potential, options: Optional[NumericsOptions] = None,
                      families: Optional[Iterable[str]] = None) -> ProbabilityReport:
    """Sum of |phi_n|^2 over bound states plus the integral of |phi|^2 over every continuous family.

    `families` restricts both parts to the named families.
    """
    _, report = _spectral_sum(s, p, None, options or NumericsOptions(), families)
    return report


def interior_mask(s: InitialState, x_grid: np.ndarray,
                  exclusion: float = ENDPOINT_EXCLUSION) -> np.ndarray:
    """Grid points farther than `exclusion` from every support endpoint of s"""
    mask = np.ones(len(x_grid), dtype=bool)
    for _, wave in s.terms:
        for end in wave.support:
            if np.isfinite(end):
                mask &= np.abs(x_grid - end) > exclusion
    return mask


def residuals(f: np.ndarray, target: np.ndarray, x_grid: np.ndarray,
              mask: np.ndarray) -> Tuple[float, float]:
    residual = np.where(mask, np.abs(f - target), 0.0)
    sup = float(np.max(residual)) if len(residual) else 0.0
    l2 = float(math.sqrt(np.trapezoid(residual ** 2, x_grid))) if len(residual) > 1 else sup
    return sup, l2


def expand(s: InitialState, p: Potential, x_grid, options: Optional[NumericsOptions] = None,
           families: Optional[Iterable[str]] = None) -> ExpansionResult:
    """Reconstruct s from the eigenstates of p on x_grid and measure the residual"""
    options = options or NumericsOptions()
    x_grid = np.asarray(x_grid, dtype=float)
    f, report = _spectral_sum(s, p, x_grid, options, families)
    target = np.atleast_1d(s.evaluate(x_grid))
    sup, l2 = residuals(f, target, x_grid, interior_mask(s, x_grid))
    quadrature_report = {
        'cutoffs': list(report.cutoffs),
        'cutoff_reached': report.cutoff_reached,
        'quadrature_error': report.error,
        'abs_tol': options.abs_tol,
        'rel_tol': options.rel_tol,
        'cutoff_tol': options.cutoff_tol,
        'endpoint_exclusion': ENDPOINT_EXCLUSION,
        'bound_states': [{'family': fam, 'energy': e, 'probability': w} for fam, e, w in report.bound],
    }
    logger.info(f"{p.label} / {s.kind}: residual sup {sup:.3e}, l2 {l2:.3e}")
    return ExpansionResult(x_grid, f, target, sup, l2, report.total, report.per_family, quadrature_report)


def amplitude_table(s: InitialState, p: Potential, family: str, samples: int = 200,
                    options: Optional[NumericsOptions] = None) -> AmplitudeTable:
    """phi sampled inside every piece of one family below the initial cutoff"""
    options = options or NumericsOptions()
    cutoff = options.initial_cutoff or 40.0 / s.width
    cutoff = min(cutoff, _cutoff_cap(p))
    segments = [seg for seg in _continuum_segments(p, (0.0, cutoff), options.scan_density)
                if seg.family == family]
    if not segments:
        raise UnknownFamily(f"{family} has no continuous states of {p.variant} below k = {cutoff:g}")
    per_segment = max(2, samples // len(segments))
    rows = []
    for seg in segments:
        theta = (np.arange(per_segment) + 0.5) * math.pi / per_segment
        for t in seg.lo + (seg.hi - seg.lo) * (1.0 - np.cos(theta)) / 2.0:
            state = seg.state(float(t))
            label = state.kappa if state.kappa is not None else float(t)
            rows.append((float(label), project(s, state)))
    mode = {'energy': 'dkappa_deps', 'k': 'dkappa_dk', 'beta': 'dkappa_dk'}.get(segments[0].variable, 'none')
    return AmplitudeTable(family, tuple(rows), mode, segments[0].variable)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def identity_check(sigma: float, options: Optional[NumericsOptions] = None) -> float:
    """Integral over k > 0 of 8 pi sigma cos^2(k sigma/2) / (pi^2 - k^2 sigma^2)^2; equals 1"""
    if not sigma > 0:
        raise BadParams(f"sigma must be > 0, got {sigma}")
    options = options or NumericsOptions()
    pole = math.pi / sigma

    def integrand(k):
        u = k * sigma
        if abs(u - math.pi) < 1e-7:
            # removable: the limit is sigma / (2 pi)
            return sigma / (2.0 * math.pi)
        return 8.0 * math.pi * sigma * math.cos(0.5 * u) ** 2 / (math.pi ** 2 - u * u) ** 2

    spec = QuadratureSpec(min(options.abs_tol, 1e-11), min(options.rel_tol, 1e-11), options.max_depth,
                          ((pole, 0.25 * pole),), initial_cutoff=40.0 / sigma)
    result = integrate(integrand, 0.0, np.inf, spec)
    value = float(result.value)
    logger.info(f"identity_check(sigma={sigma:g}) = {value:.12f}, cutoff {result.cutoff:.4g}")
    return value


@dataclass(frozen=True)
class OracleResult:
    x: np.ndarray
    energies: np.ndarray
    bound_energies: np.ndarray
    reconstruction: np.ndarray
    target: np.ndarray
    residual_sup: float
    residual_l2: float


def _finite_domain(p: Potential, half_length: float) -> Tuple[float, float]:
    lo, hi = -half_length, half_length
    if isinstance(p, OpenBox):
        lo = 0.0
    elif isinstance(p, OneSidedComb):
        lo = -p.b
    elif isinstance(p, HardBox):
        lo, hi = p.tau, p.tau + p.sigma
    return lo, hi


def grid_oracle(p: Potential, s: InitialState, half_length: float, n: int,
                energy_cutoff: Optional[float] = None) -> OracleResult:
    """Finite-difference Hamiltonian on [-L, L] with hard walls, diagonalized and used to expand s.

    With energy_cutoff only eigenvectors below it are kept, for comparison
    with a continuum expansion cut at the same energy.
    """
    ok, message = validate_oracle_points("grid_oracle n", n)
    if not ok:
        raise BadParams(message)
    lo, hi = _finite_domain(p, half_length)
    s_lo, s_hi = s.support
    if s_lo < lo or s_hi > hi:
        raise SupportExceedsBox(f"initial state support [{s_lo:g}, {s_hi:g}] exceeds the box [{lo:g}, {hi:g}]")

    h = (hi - lo) / (n + 1)
    x = lo + h * np.arange(1, n + 1)
    potential = np.asarray(p.evaluate(x), dtype=float)
    for marker in delta_markers(p, lo, hi):
        i = int(round((marker.location - lo) / h)) - 1
        if 0 <= i < n:
            potential[i] += marker.strength / h
    diagonal = 1.0 / h ** 2 + potential
    off = np.full(n - 1, -0.5 / h ** 2)

    if energy_cutoff is None:
        energies, vectors = eigh_tridiagonal(diagonal, off)
    else:
        floor = float(np.min(potential)) - 1.0
        energies, vectors = eigh_tridiagonal(diagonal, off, select='v',
                                             select_range=(floor, energy_cutoff))
    target = np.atleast_1d(s.evaluate(x))
    coefficients = vectors.T @ target
    reconstruction = vectors @ coefficients

    thresholds = [c.value for c in (classify(p, 'left'), classify(p, 'right')) if c.kind == 'constant']
    threshold = min(thresholds) if thresholds else -np.inf
    bound = energies[energies < threshold]
    sup, l2 = residuals(reconstruction, target, x, interior_mask(s, x))
    logger.info(f"grid_oracle {p.label}: n = {n}, {len(energies)} levels kept, residual {sup:.3e}")
    return OracleResult(x, energies, bound, reconstruction, target, sup, l2)
