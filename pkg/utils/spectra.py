"""
Spectral functions and band structures.

Periodic variants are handled through the one-period monodromy matrix M(eps)
acting on (psi, psi'). Its half trace is the dispersion argument cos(kappa*P),
the Bloch wavenumber lives in the reduced zone [0, pi/P] and the Jacobian
|d kappa/d eps| follows from the energy derivative of the half trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import mathieu_a, mathieu_b

from .exceptions import AtBandEdge, BadParams, InGap, NoSignChange, OutOfDomain, WrongClass
from .logging_config import get_logger
from .numerics import (DEFAULT_SCAN_DENSITY, MATHIEU_CELL_A_MAX, MathieuSolution,
                       constant_propagator, constant_propagator_derivative, find_root,
                       make_bracket, scan_roots)
from .potentials import (Cosine, DiracComb, KronigPenney, OneSidedComb, Potential, Step,
                         classify, is_periodic)

logger = get_logger(__name__)

DEFAULT_EDGE_MARGIN = 1e-6
STEP_BRANCHES = ('kappa0', 'kappa1', 'kappa2')


@dataclass(frozen=True)
class SpectralBand:
    """An energy interval on which kappa(eps) is real and monotone"""
    energy_lo: float
    energy_hi: float
    branch: str
    kappa_range: Tuple[float, float]
    index: int = 0

    def contains(self, energy: float) -> bool:
        return self.energy_lo < energy < self.energy_hi

    @property
    def width(self) -> float:
        return self.energy_hi - self.energy_lo


@dataclass(frozen=True)
class BandStructure:
    variant: str
    bands: Tuple[SpectralBand, ...]
    gaps: Tuple[Tuple[float, float], ...]
    energy_max: float

    def band_of(self, energy: float) -> Optional[SpectralBand]:
        for band in self.bands:
            if band.contains(energy):
                return band
        return None

    @property
    def edges(self) -> List[float]:
        return sorted({e for band in self.bands for e in (band.energy_lo, band.energy_hi)})


@dataclass(frozen=True)
class StepSpectralFunction:
    """kappa0 below the step; kappa1, kappa2 and their k-Jacobians above it"""
    k: float
    kappa0: Optional[float]
    kappa1: Optional[float]
    kappa2: Optional[float]
    jacobian1: Optional[float]
    jacobian2: Optional[float]


# ---------------------------------------------------------------------------
# Asymptotically constant sides
# ---------------------------------------------------------------------------

def universal_sf(p: Potential, energy: float, side: str) -> Optional[float]:
    """sqrt(2 (eps - V_inf)) on an asymptotically constant side, None below V_inf"""
    asymptote = classify(p, side)
    if asymptote.kind != 'constant':
        raise WrongClass(f"{p.variant} is {asymptote.kind} on the {side}, not constant")
    if energy <= asymptote.value:
        return None
    return math.sqrt(2.0 * (energy - asymptote.value))


def step_sf(v0: float, k: float) -> StepSpectralFunction:
    """Branches kappa0 (0 < eps < V0) or kappa1, kappa2 (eps > V0) at k = sqrt(2 eps)"""
    if v0 <= 0:
        raise BadParams(f"step_sf requires V0 > 0, got {v0}")
    if k <= 0:
        raise BadParams(f"step_sf requires k > 0, got {k}")
    beta_sq = k * k - 2.0 * v0
    if beta_sq <= 0:
        return StepSpectralFunction(k, k, None, None, None, None)
    beta = math.sqrt(beta_sq)
    offset = math.sqrt(2.0 * v0) / 3.0
    s = beta + k
    kappa1 = (s * s + beta_sq + k * k) / (3.0 * s) + offset
    kappa2 = -(s * s + 2.0 * beta * k) / (3.0 * s) + offset
    return StepSpectralFunction(k, None, kappa1, kappa2,
                                2.0 * k / s, (beta_sq + k * k) / (beta * s))


def step_sum_rules(v0: float, k: float, f_amp: float) -> Dict[str, float]:
    """Jacobians of the (F, theta) step family and both Riemann-Lebesgue sum rules.

    With pi F^2 in {0, 1} the rules evaluate to 2 exactly; other F give
    Jacobians that are not both positive.
    """
    beta = math.sqrt(k * k - 2.0 * v0)
    pf2 = math.pi * f_amp * f_amp
    denominator = (1.0 - 2.0 * pf2) * beta * (beta + k)
    if abs(denominator) < 1e-300:
        raise BadParams("pi F^2 = 1/2 makes the step family degenerate")
    jac1 = (beta ** 2 + k ** 2 - pf2 * (beta + k) ** 2) / denominator
    jac2 = (2.0 * beta * k - pf2 * (beta + k) ** 2) / denominator
    total = beta ** 2 + k ** 2
    rule_a = ((2 * beta ** 2 - pf2 * beta ** 2 + pf2 * k ** 2) / total * abs(jac1)
              + (total + pf2 * beta ** 2 - pf2 * k ** 2) / total * abs(jac2))
    rule_b = (beta * (2 * k ** 2 + pf2 * beta ** 2 - pf2 * k ** 2) / (k * total) * abs(jac1)
              + beta * (total - pf2 * beta ** 2 + pf2 * k ** 2) / (k * total) * abs(jac2))
    return {'jacobian1': jac1, 'jacobian2': jac2, 'rule_a': rule_a, 'rule_b': rule_b}


# ---------------------------------------------------------------------------
# Periodic variants
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def mathieu_cell(a: float, q: float) -> MathieuSolution:
    """Cached one-period Mathieu solution used by the cosine potential"""
    return MathieuSolution(a, q, math.pi, a_max=MATHIEU_CELL_A_MAX)


def _require_periodic(p: Potential):
    if not is_periodic(p):
        raise WrongClass(f"{p.variant} is not a two-sided periodic potential")


def _kick(gamma: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [2.0 * gamma, 1.0]])


def monodromy(p: Potential, energy: float) -> Tuple[np.ndarray, np.ndarray]:
    """One-period transfer matrix of (psi, psi') and its energy derivative.

    Cells start at x = 0 (cosine), x = 0+ (comb, the delta closes the cell) and
    x = -b (Kronig-Penney).
    """
    _require_periodic(p)
    if isinstance(p, Cosine):
        if abs(2.0 * energy) > MATHIEU_CELL_A_MAX:
            raise OutOfDomain(f"energy {energy} outside the supported Mathieu range")
        cell = mathieu_cell(2.0 * energy, p.v0)
        return cell.monodromy, 2.0 * cell.monodromy_da
    if isinstance(p, DiracComb):
        kick = _kick(p.gamma)
        free = constant_propagator(2.0 * energy, p.a)
        return kick @ free, kick @ constant_propagator_derivative(2.0 * energy, p.a)
    barrier_q2, well_q2 = 2.0 * (energy - p.v0), 2.0 * (energy - p.v1)
    barrier = constant_propagator(barrier_q2, p.b)
    well = constant_propagator(well_q2, 1.0)
    d_barrier = constant_propagator_derivative(barrier_q2, p.b)
    d_well = constant_propagator_derivative(well_q2, 1.0)
    return well @ barrier, d_well @ barrier + well @ d_barrier


def _cos_and_sinc(q2, length):
    """cos(qL) and sin(qL)/q for arrays of q^2 of either sign"""
    q = np.sqrt(np.asarray(q2, dtype=complex))
    c = np.cos(q * length).real
    s = (length * np.sinc(q * length / np.pi)).real
    return c, s


def dispersion(p: Potential, energy: float) -> float:
    """cos(kappa * period); |value| <= 1 exactly on the bands"""
    _require_periodic(p)
    if isinstance(p, DiracComb):
        if energy <= 0:
            decay = math.sqrt(-2.0 * energy)
            if decay == 0.0:
                return 1.0 + p.gamma * p.a
            return math.cosh(decay * p.a) + p.gamma * math.sinh(decay * p.a) / decay
        return float(comb_dispersion_k(p, math.sqrt(2.0 * energy)))
    if isinstance(p, KronigPenney):
        return float(kp_half_trace(p, np.array([energy]))[0])
    return mathieu_cell(2.0 * energy, p.v0).half_trace


def kp_half_trace(p: KronigPenney, energies: np.ndarray) -> np.ndarray:
    """Vectorized Kronig-Penney dispersion argument for both energy ranges.

    For V1 < eps < V0 this is cos(beta) cosh(b g) + (g^2 - beta^2)/(2 beta g) sin(beta) sinh(b g),
    above V0 the hyperbolic functions turn trigonometric.
    """
    barrier_q2 = 2.0 * (np.asarray(energies, dtype=float) - p.v0)
    well_q2 = 2.0 * (np.asarray(energies, dtype=float) - p.v1)
    c_b, s_b = _cos_and_sinc(barrier_q2, p.b)
    c_w, s_w = _cos_and_sinc(well_q2, 1.0)
    return c_w * c_b - 0.5 * (well_q2 + barrier_q2) * s_w * s_b


def comb_dispersion_k(p: DiracComb, k):
    """cos(kappa a) as a function of k = sqrt(2 eps), vectorized"""
    k = np.asarray(k, dtype=float)
    return np.cos(k * p.a) + p.gamma * p.a * np.sinc(k * p.a / np.pi)


def comb_dispersion_dk(p: DiracComb, k):
    k = np.asarray(k, dtype=float)
    ka = k * p.a
    return -p.a * np.sin(ka) + p.gamma * (ka * np.cos(ka) - np.sin(ka)) / (k * k)


def kappa(p: Potential, energy: float) -> float:
    """Reduced-zone |kappa| in [0, pi/period]; raises InGap outside the bands"""
    c = dispersion(p, energy)
    if abs(c) > 1.0 + 1e-12:
        raise InGap(f"energy {energy} lies in a gap of {p.variant} (cos arg {c:.6g})")
    return math.acos(max(-1.0, min(1.0, c))) / p.period


def _edge_guard(c: float, dc: float, margin: float, energy: float, variant: str):
    if abs(c) > 1.0:
        raise InGap(f"energy {energy} lies in a gap of {variant}")
    if dc == 0.0:
        return
    if (1.0 - abs(c)) / abs(dc) < margin:
        raise AtBandEdge(f"energy {energy} is within {margin:g} of a band edge of {variant}")


def sf_jacobian(p: Potential, energy: float, margin: float = DEFAULT_EDGE_MARGIN,
                branch: Optional[str] = None) -> float:
    """|d kappa / d eps| inside a band. Diverges like 1/sqrt(distance) at band edges.

    For the step potential, branch picks kappa0, kappa1 or kappa2.
    """
    if isinstance(p, Step):
        k = math.sqrt(2.0 * energy)
        sf = step_sf(p.v0, k)
        if energy < p.v0:
            if branch not in (None, 'kappa0'):
                raise InGap(f"branch {branch} needs eps > V0")
            return 1.0 / k
        if branch == 'kappa1':
            return sf.jacobian1 / k
        if branch == 'kappa2':
            return sf.jacobian2 / k
        raise BadParams("step potential above V0 needs branch 'kappa1' or 'kappa2'")

    _require_periodic(p)
    if isinstance(p, DiracComb):
        if energy <= 0:
            raise InGap(f"energy {energy} is below the lowest comb band")
        k = math.sqrt(2.0 * energy)
        c = float(comb_dispersion_k(p, k))
        dc = float(comb_dispersion_dk(p, k)) / k
    else:
        matrix, d_matrix = monodromy(p, energy)
        c = 0.5 * float(np.trace(matrix))
        dc = 0.5 * float(np.trace(d_matrix))
    _edge_guard(c, dc, margin, energy, p.variant)
    return abs(dc) / (p.period * math.sqrt(max(1.0 - c * c, 1e-300)))


def comb_jacobian_k(p: DiracComb, k: float, margin: float = DEFAULT_EDGE_MARGIN) -> float:
    """|d kappa / d k| for the Dirac comb"""
    c = float(comb_dispersion_k(p, k))
    dc = float(comb_dispersion_dk(p, k))
    _edge_guard(c, dc / k, margin, 0.5 * k * k, p.variant)
    return abs(dc) / (p.a * math.sqrt(max(1.0 - c * c, 1e-300)))


# ---------------------------------------------------------------------------
# Band enumeration
# ---------------------------------------------------------------------------

def _make_band(p: Potential, lo: float, hi: float, index: int) -> SpectralBand:
    # kappa is monotone, so the end values give the range
    ends = []
    for e in (lo, hi):
        c = max(-1.0, min(1.0, dispersion(p, e)))
        ends.append(math.acos(c) / p.period)
    return SpectralBand(lo, hi, 'plus', (min(ends), max(ends)), index)


def _comb_edges(p: DiracComb, energy_max: float) -> List[Tuple[float, float]]:
    k_max = math.sqrt(2.0 * energy_max)
    edges = []
    n = 1
    while True:
        k_hi = n * math.pi / p.a
        k_lo_start = (n - 1) * math.pi / p.a
        if k_lo_start >= k_max:
            break
        target = 1.0 if n % 2 == 1 else -1.0
        start = k_lo_start + 1e-9 * max(1.0, k_lo_start)
        g = lambda k: float(comb_dispersion_k(p, k)) - target
        try:
            k_lo = find_root(g, make_bracket(g, start, k_hi * (1 - 1e-15)), tol=1e-14)
        except NoSignChange:
            k_lo = k_lo_start
        if 0.5 * k_lo ** 2 >= energy_max:
            break
        edges.append((0.5 * k_lo ** 2, min(0.5 * k_hi ** 2, energy_max)))
        n += 1
    return edges


def _refine_mathieu_edge(q: float, seed_a: float, sign: float) -> float:
    """Polish a characteristic value so that the half trace equals sign exactly"""
    g = lambda a: mathieu_cell(a, q).half_trace - sign
    width = 1e-7 * max(1.0, abs(seed_a))
    try:
        return find_root(g, make_bracket(g, seed_a - width, seed_a + width), tol=1e-13)
    except NoSignChange:
        return seed_a


def _cosine_edges(p: Cosine, energy_max: float) -> List[Tuple[float, float]]:
    edges = []
    n = 0
    while True:
        lo_a = float(mathieu_a(n, p.v0))
        if lo_a / 2.0 >= energy_max or abs(lo_a) > MATHIEU_CELL_A_MAX:
            break
        hi_a = float(mathieu_b(n + 1, p.v0))
        lo_a = _refine_mathieu_edge(p.v0, lo_a, 1.0 if n % 2 == 0 else -1.0)
        hi_a = _refine_mathieu_edge(p.v0, hi_a, 1.0 if (n + 1) % 2 == 0 else -1.0)
        edges.append((lo_a / 2.0, min(hi_a / 2.0, energy_max)))
        n += 1
    return edges


def kp_phase(p: KronigPenney, energy: float) -> float:
    """Phase beta * 1 + alpha * b gathered over one period above the barrier"""
    return math.sqrt(2.0 * (energy - p.v1)) + p.b * math.sqrt(2.0 * max(energy - p.v0, 0.0))


def _kp_energy_at_phase(p: KronigPenney, theta: float) -> float:
    g = lambda e: kp_phase(p, e) - theta
    lo = max(p.v0, p.v1 + 0.5 * (theta / p.period) ** 2)
    hi = max(p.v0, p.v1 + 0.5 * theta ** 2)
    return find_root(g, make_bracket(g, lo, hi))


@lru_cache(maxsize=64)
def _kp_low_roots(p: KronigPenney, density: int) -> Tuple[int, float, Tuple[float, ...]]:
    """Dense scan of the band edges below the first phase window.

    Above V0 + max(4 (V0 - V1), 1) the gaps sit one per window of phase
    around n pi, so only the range below that needs the scan.
    """
    switch = p.v0 + max(4.0 * (p.v0 - p.v1), 1.0)
    first = math.ceil(kp_phase(p, switch) / math.pi + 0.5)
    top = _kp_energy_at_phase(p, (first - 0.5) * math.pi)
    lo = p.v1 + 1e-12
    f_up = lambda e: kp_half_trace(p, e) - 1.0
    f_down = lambda e: kp_half_trace(p, e) + 1.0
    roots = sorted(set(scan_roots(f_up, lo, top, density) + scan_roots(f_down, lo, top, density)))
    logger.debug(f"{p.label}: {len(roots)} edges scanned below {top:.6g}")
    return first, top, tuple(roots)


@lru_cache(maxsize=None)
def _kp_gap(p: KronigPenney, n: int) -> Tuple[float, float, Tuple[float, ...]]:
    """Window (lo, hi) of phase (n -+ 1/2) pi and the gap edges inside it, empty when the gap is closed"""
    lo = _kp_energy_at_phase(p, (n - 0.5) * math.pi)
    hi = _kp_energy_at_phase(p, (n + 0.5) * math.pi)
    sign = 1.0 if n % 2 == 0 else -1.0
    excess = lambda e: sign * dispersion(p, e) - 1.0
    peak = minimize_scalar(lambda e: -excess(e), bounds=(lo, hi), method='bounded',
                           options={'xatol': 1e-10 * max(1.0, hi)})
    top = float(peak.x)
    # below rounding of the half trace the gap is closed
    if not excess(top) > 1e-13:
        return lo, hi, ()
    left = find_root(excess, make_bracket(excess, lo, top))
    right = find_root(excess, make_bracket(excess, top, hi))
    return lo, hi, (left, right)


def _kp_edges(p: KronigPenney, energy_max: float, density: int) -> List[Tuple[float, float]]:
    first, top, low_roots = _kp_low_roots(p, density)
    points = [e for e in low_roots if e < energy_max]
    n = first
    while True:
        lo, hi, gap = _kp_gap(p, n)
        if lo >= energy_max:
            break
        points.extend(e for e in gap if e < energy_max)
        n += 1
    lo = p.v1 + 1e-12
    points = [lo] + sorted(points) + [energy_max]
    edges = []
    for a, b in zip(points[:-1], points[1:]):
        if b - a < 1e-12:
            continue
        if abs(kp_half_trace(p, np.array([0.5 * (a + b)]))[0]) <= 1.0:
            if edges and abs(edges[-1][1] - a) < 1e-12:
                # closed gap: the free limit V0 = V1 touches +-1 without leaving the band
                edges[-1] = (edges[-1][0], b)
            else:
                edges.append((a, b))
    return edges


def band_structure(p: Potential, energy_max: float,
                   scan_density: int = DEFAULT_SCAN_DENSITY) -> BandStructure:
    """Enumerate bands (or labeled step branches) up to energy_max"""
    if isinstance(p, Step):
        if energy_max <= 0:
            return BandStructure(p.variant, (), (), energy_max)
        k0 = math.sqrt(2.0 * p.v0)
        bands = [SpectralBand(0.0, min(p.v0, energy_max), 'kappa0',
                              (0.0, math.sqrt(2.0 * min(p.v0, energy_max))), 1)]
        if energy_max > p.v0:
            top = step_sf(p.v0, math.sqrt(2.0 * energy_max))
            bands.append(SpectralBand(p.v0, energy_max, 'kappa1', (k0, top.kappa1), 2))
            bands.append(SpectralBand(p.v0, energy_max, 'kappa2', (top.kappa2, 0.0), 3))
        return BandStructure(p.variant, tuple(bands), (), energy_max)

    _require_periodic(p)
    if isinstance(p, DiracComb):
        intervals = _comb_edges(p, energy_max)
    elif isinstance(p, Cosine):
        intervals = _cosine_edges(p, energy_max)
    else:
        intervals = _kp_edges(p, energy_max, scan_density)

    bands = tuple(_make_band(p, lo, hi, i + 1) for i, (lo, hi) in enumerate(intervals) if hi > lo)
    gaps = tuple((a.energy_hi, b.energy_lo) for a, b in zip(bands[:-1], bands[1:])
                 if b.energy_lo > a.energy_hi)
    logger.debug(f"{p.label}: {len(bands)} bands below {energy_max:g}")
    return BandStructure(p.variant, bands, gaps, energy_max)


def band_rows(p: Potential, structure: BandStructure, points_per_band: int = 200) -> List[Dict]:
    """CSV rows (energy, kappa_plus, kappa_minus, band_index) sampled inside each band"""
    rows = []
    for band in structure.bands:
        if isinstance(p, Step):
            energies = np.linspace(band.energy_lo, band.energy_hi, points_per_band + 2)[1:-1]
            for e in energies:
                sf = step_sf(p.v0, math.sqrt(2.0 * e))
                value = getattr(sf, band.branch)
                rows.append({'energy': float(e), 'kappa_plus': value, 'kappa_minus': None,
                             'band_index': band.index, 'branch': band.branch})
            continue
        energies = np.linspace(band.energy_lo, band.energy_hi, points_per_band)
        for e in energies:
            c = max(-1.0, min(1.0, dispersion(p, float(e))))
            value = math.acos(c) / p.period
            rows.append({'energy': float(e), 'kappa_plus': value, 'kappa_minus': -value,
                         'band_index': band.index, 'branch': 'plus'})
    return rows


# ---------------------------------------------------------------------------
# Semi-infinite combs
# ---------------------------------------------------------------------------

def one_sided_spectrum(a: float, gamma: float, energy: float) -> bool:
    """Whether eps belongs to the spectrum of the comb sum_{n>=0} gamma delta(x - n a)"""
    if energy <= 0:
        return False
    k = math.sqrt(2.0 * energy)
    alpha = math.atan(gamma / k)
    return math.cos(2.0 * alpha) - math.cos(2.0 * k * a - 2.0 * alpha) >= 0.0


def two_comb_spectrum(left: OneSidedComb, right: OneSidedComb, energy: float) -> bool:
    """Two different semi-infinite combs facing each other: both sides must propagate"""
    return (one_sided_spectrum(left.a, left.gamma, energy)
            and one_sided_spectrum(right.a, right.gamma, energy))
