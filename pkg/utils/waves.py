"""
Piecewise closed-form wavefunctions
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import airy

from .exceptions import BadParams, OutOfDomain
from .numerics import MathieuSolution, exp_integral, fixed_quadrature

BASES = ('trig', 'hyperbolic', 'complex_exp', 'linear', 'mathieu_pair', 'airy_pair')
EXPONENTIAL_BASES = ('trig', 'hyperbolic', 'complex_exp')


@dataclass(frozen=True)
class Region:
    """psi on [x_lo, x_hi) as c0 * u0(x - origin) + c1 * u1(x - origin).

    trig:         cos(q u), sin(q u)
    hyperbolic:   cosh(q u), sinh(q u)
    complex_exp:  exp(i q u), exp(-i q u); q may be complex
    linear:       1, u
    mathieu_pair: mc(u), ms(u) of `solution`
    airy_pair:    Ai(q u), Bi(q u)
    """
    x_lo: float
    x_hi: float
    basis: str
    coefficients: Tuple[complex, complex]
    wavenumber: complex = 0.0
    origin: float = 0.0
    solution: Optional[MathieuSolution] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise BadParams(f"Unknown region basis '{self.basis}'")
        if not self.x_lo < self.x_hi:
            raise BadParams(f"Region needs x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if self.basis == 'mathieu_pair' and self.solution is None:
            raise BadParams("mathieu_pair region needs a MathieuSolution")

    def values(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """psi and psi' at x (array), without any range check"""
        u = np.asarray(x, dtype=float) - self.origin
        c0, c1 = self.coefficients
        q = self.wavenumber

        if self.basis == 'trig':
            cos, sin = np.cos(q * u), np.sin(q * u)
            return c0 * cos + c1 * sin, q * (c1 * cos - c0 * sin)
        if self.basis == 'hyperbolic':
            cosh, sinh = np.cosh(q * u), np.sinh(q * u)
            return c0 * cosh + c1 * sinh, q * (c0 * sinh + c1 * cosh)
        if self.basis == 'complex_exp':
            psi = np.zeros(u.shape, dtype=complex)
            dpsi = np.zeros(u.shape, dtype=complex)
            # zero amplitudes are skipped so that growing partners never overflow
            if c0 != 0:
                term = c0 * np.exp(1j * q * u)
                psi, dpsi = psi + term, dpsi + 1j * q * term
            if c1 != 0:
                term = c1 * np.exp(-1j * q * u)
                psi, dpsi = psi + term, dpsi - 1j * q * term
            return psi, dpsi
        if self.basis == 'linear':
            return c0 + c1 * u, c1 + 0.0 * u
        if self.basis == 'mathieu_pair':
            mc, dmc, ms, dms = self.solution.values(u)
            return c0 * mc + c1 * ms, c0 * dmc + c1 * dms
        ai, aip, bi, bip = airy(q * u)
        return c0 * ai + c1 * bi, q * (c0 * aip + c1 * bip)

    def exponential_terms(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """(omegas, amplitudes) with psi = sum a_m exp(i omega_m (x - origin)), or None"""
        c0, c1 = self.coefficients
        q = complex(self.wavenumber)
        if self.basis == 'trig':
            return (np.array([q, -q]),
                    np.array([0.5 * c0 - 0.5j * c1, 0.5 * c0 + 0.5j * c1]))
        if self.basis == 'hyperbolic':
            return (np.array([-1j * q, 1j * q]),
                    np.array([0.5 * (c0 + c1), 0.5 * (c0 - c1)]))
        if self.basis == 'complex_exp':
            omegas, amps = [], []
            for omega, amp in ((q, c0), (-q, c1)):
                if amp != 0:
                    omegas.append(omega)
                    amps.append(amp)
            return np.array(omegas, dtype=complex), np.array(amps, dtype=complex)
        return None


def constant_region(x_lo: float, x_hi: float, q2: float, psi0: complex, dpsi0: complex,
                    origin: Optional[float] = None) -> Region:
    """Region of constant potential from (psi, psi') at `origin` (default x_lo); q2 = 2 (eps - V)"""
    origin = x_lo if origin is None else origin
    if q2 > 0:
        q = math.sqrt(q2)
        return Region(x_lo, x_hi, 'trig', (psi0, dpsi0 / q), q, origin)
    if q2 < 0:
        q = math.sqrt(-q2)
        return Region(x_lo, x_hi, 'hyperbolic', (psi0, dpsi0 / q), q, origin)
    return Region(x_lo, x_hi, 'linear', (psi0, dpsi0), 0.0, origin)


def airy_region(x_lo: float, x_hi: float, scale: float, turning_point: float,
                psi0: complex, dpsi0: complex) -> Region:
    """Linear-potential region psi'' = scale^3 (x - turning_point) psi, started at x_lo"""
    z0 = scale * (x_lo - turning_point)
    ai, aip, bi, bip = airy(z0)
    slope = dpsi0 / scale
    # Wronskian W(Ai, Bi) = 1/pi
    c0 = math.pi * (psi0 * bip - slope * bi)
    c1 = math.pi * (slope * ai - psi0 * aip)
    return Region(x_lo, x_hi, 'airy_pair', (c0, c1), scale, turning_point)


def _segment_exp_integral(omega, a: float, b: float, origin: float):
    """Integral of exp(i omega (x - origin)) over [a, b]; either end may be infinite"""
    omega = np.asarray(omega, dtype=complex)
    if np.isinf(a) and np.isinf(b):
        raise OutOfDomain("Doubly infinite exponential segment")
    if np.isinf(a):
        return np.exp(1j * omega * (b - origin)) * exp_integral(-omega, np.inf)
    return np.exp(1j * omega * (a - origin)) * exp_integral(omega, b - a)


@dataclass(frozen=True)
class Piece:
    """Part of a wave on [a, b] where psi(x) = phase * region(x - shift)"""
    a: float
    b: float
    region: Region
    phase: complex = 1.0
    shift: float = 0.0


@dataclass(frozen=True)
class PiecewiseWave:
    """Ordered regions tiling the support, optionally extended by a Bloch rule.

    bloch = (kappa, period, cell_lo): psi(x + period) = exp(i kappa period) psi(x)
    with the listed regions tiling [cell_lo, cell_lo + period).
    compact = True means psi vanishes outside the listed regions (hard walls).
    """
    regions: Tuple[Region, ...]
    bloch: Optional[Tuple[float, float, float]] = None
    compact: bool = False

    def __post_init__(self):
        if not self.regions:
            raise BadParams("PiecewiseWave needs at least one region")
        for left, right in zip(self.regions[:-1], self.regions[1:]):
            if abs(left.x_hi - right.x_lo) > 1e-12 * max(1.0, abs(left.x_hi)):
                raise BadParams(f"Regions do not tile: gap or overlap at {left.x_hi} / {right.x_lo}")
        if self.bloch is not None:
            _, period, cell_lo = self.bloch
            if (abs(self.regions[0].x_lo - cell_lo) > 1e-12
                    or abs(self.regions[-1].x_hi - cell_lo - period) > 1e-9):
                raise BadParams("Bloch regions must tile exactly one cell")

    @property
    def support(self) -> Tuple[float, float]:
        if self.bloch is not None:
            return -np.inf, np.inf
        return self.regions[0].x_lo, self.regions[-1].x_hi

    @property
    def breakpoints(self) -> List[float]:
        return [r.x_hi for r in self.regions[:-1]]

    def _reduce(self, x: np.ndarray, side: str) -> Tuple[np.ndarray, np.ndarray]:
        """Map x into the reference cell; returns (reduced x, phase factor)"""
        if self.bloch is None:
            return x, np.ones_like(x, dtype=complex)
        kappa, period, cell_lo = self.bloch
        t = (x - cell_lo) / period
        n = np.floor(t) if side == 'right' else np.ceil(t) - 1
        reduced = np.clip(x - n * period, cell_lo, cell_lo + period)
        return reduced, np.exp(1j * kappa * period * n)

    def _evaluate(self, x, side: str):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        reduced, phase = self._reduce(x, side)
        psi = np.zeros(x.shape, dtype=complex)
        dpsi = np.zeros(x.shape, dtype=complex)
        covered = np.zeros(x.shape, dtype=bool)
        last = len(self.regions) - 1
        for i, region in enumerate(self.regions):
            if side == 'right':
                mask = (reduced >= region.x_lo) & (reduced < region.x_hi)
                if i == last:
                    mask |= reduced == region.x_hi
            else:
                mask = (reduced > region.x_lo) & (reduced <= region.x_hi)
                if i == 0:
                    mask |= reduced == region.x_lo
            mask &= ~covered
            if np.any(mask):
                value, slope = region.values(reduced[mask])
                psi[mask], dpsi[mask] = value, slope
                covered |= mask
        if not np.all(covered) and not self.compact:
            outside = x[~covered]
            raise OutOfDomain(f"Wave is undefined at x = {outside[0]:g} (support {self.support})")
        psi, dpsi = psi * phase, dpsi * phase
        if scalar:
            return complex(psi[0]), complex(dpsi[0])
        return psi, dpsi

    def evaluate(self, x, side: str = 'right'):
        """psi(x); side picks the one-sided limit at breakpoints"""
        return self._evaluate(x, side)[0]

    def derivative(self, x, side: str = 'right'):
        return self._evaluate(x, side)[1]

    def __call__(self, x):
        return self.evaluate(x)

    def pieces(self, lo: float, hi: float) -> Iterator[Piece]:
        """Pieces of the wave covering [lo, hi] intersected with its support"""
        if self.bloch is None:
            for region in self.regions:
                a, b = max(lo, region.x_lo), min(hi, region.x_hi)
                if b > a:
                    yield Piece(a, b, region)
            return
        kappa, period, cell_lo = self.bloch
        first = math.floor((lo - cell_lo) / period)
        last = math.floor((hi - cell_lo) / period)
        for n in range(first, last + 1):
            shift = n * period
            phase = complex(np.exp(1j * kappa * shift))
            for region in self.regions:
                a, b = max(lo, region.x_lo + shift), min(hi, region.x_hi + shift)
                if b > a:
                    yield Piece(a, b, region, phase, shift)

    def is_exponential(self) -> bool:
        return all(r.basis in EXPONENTIAL_BASES for r in self.regions)

    def overlap_exponentials(self, omegas, amplitudes, origin: float, lo: float, hi: float) -> Optional[complex]:
        """Closed form of the integral of conj(psi) * sum b_l exp(i mu_l (x - origin)) over [lo, hi].

        Returns None when some piece is not a sum of exponentials.
        """
        omegas = np.asarray(omegas, dtype=complex)
        amplitudes = np.asarray(amplitudes, dtype=complex)
        total = 0.0 + 0.0j
        for piece in self.pieces(lo, hi):
            terms = piece.region.exponential_terms()
            if terms is None:
                return None
            own_omegas, own_amps = terms
            s = piece.shift + piece.region.origin
            # conj(a_m) b_l exp(i mu_l (s - origin)) exp(i (mu_l - conj(w_m)) (x - s))
            coeff = (np.conj(piece.phase) * np.conj(own_amps)[:, None] * amplitudes[None, :]
                     * np.exp(1j * omegas[None, :] * (s - origin)))
            freq = omegas[None, :] - np.conj(own_omegas)[:, None]
            total += complex(np.sum(coeff * _segment_exp_integral(freq, piece.a, piece.b, s)))
        return total

    def norm_squared(self, lo: float = -np.inf, hi: float = np.inf, nodes: int = 96) -> float:
        """Integral of |psi|^2 over [lo, hi]; closed form on exponential pieces"""
        lo, hi = max(lo, self.support[0]), min(hi, self.support[1])
        if self.bloch is not None and (np.isinf(lo) or np.isinf(hi)):
            raise OutOfDomain("norm_squared of a Bloch wave needs a finite interval")
        total = 0.0
        for piece in self.pieces(lo, hi):
            terms = piece.region.exponential_terms()
            s = piece.shift + piece.region.origin
            if terms is not None:
                omegas, amps = terms
                freq = omegas[None, :] - np.conj(omegas)[:, None]
                coeff = np.conj(amps)[:, None] * amps[None, :]
                total += float(np.real(np.sum(coeff * _segment_exp_integral(freq, piece.a, piece.b, s))))
            else:
                region, shift = piece.region, piece.shift
                density = lambda x: np.abs(region.values(x - shift)[0]) ** 2
                total += float(fixed_quadrature(density, piece.a, piece.b, nodes))
        return total

    def inner_product(self, g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                      nodes: int = 96) -> complex:
        """Integral of conj(psi) * g over [lo, hi] by Gauss-Legendre on each smooth piece"""
        total = 0.0 + 0.0j
        for piece in self.pieces(lo, hi):
            region, shift, phase = piece.region, piece.shift, piece.phase
            integrand = lambda x: np.conj(phase * region.values(x - shift)[0]) * g(x)
            total += complex(fixed_quadrature(integrand, piece.a, piece.b, nodes))
        return total

    def scaled(self, factor: complex) -> "PiecewiseWave":
        regions = tuple(Region(r.x_lo, r.x_hi, r.basis,
                               (factor * r.coefficients[0], factor * r.coefficients[1]),
                               r.wavenumber, r.origin, r.solution) for r in self.regions)
        return PiecewiseWave(regions, self.bloch, self.compact)
