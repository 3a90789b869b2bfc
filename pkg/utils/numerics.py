"""
Numerical substrate: root finding, adaptive quadrature with excluded points,
principal-value normalization limits and Mathieu functions.

Every function here is a pure function of its arguments. The quadrature layer is
built on scipy.integrate.quad_vec so that scalar, complex and vector-valued
integrands share one code path; complex values are integrated as stacked real
and imaginary parts.

Notes
-----
- Semi-infinite integrals are cut at a finite K that is doubled until the
  contribution of the newest piece drops below abs_tol/10. The final K is
  reported in QuadratureResult.cutoff.
- Excluded points are approached from both sides with margins halved at every
  step. The strip contributions form a geometric sequence near integrable
  singularities, and the remaining tail is extrapolated from their ratio.
- Mathieu functions are solved as an initial-value problem from x = 0 with the
  DOP853 stepper. The unit-Wronskian pair (mc, ms) is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec, solve_ivp
from scipy.optimize import brentq

from .exceptions import (BadParams, MaxIterations, NoLimit, NonConvergence,
                         NoSignChange, OutOfDomain)
from .logging_config import get_logger

logger = get_logger(__name__)

# Supported Mathieu parameter box
MATHIEU_A_MAX = 200.0
MATHIEU_Q_MAX = 50.0
# one-period cells reach further, for the tail of cosine expansions; det M = 1 is checked
MATHIEU_CELL_A_MAX = 5000.0
UNIMODULAR_TOL = 1e-8

DEFAULT_SCAN_DENSITY = 2000
MAX_MARGIN_HALVINGS = 80


@dataclass(frozen=True)
class Bracket:
    """Interval enclosing a sign change of a real function."""
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BadParams(f"Bracket requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and singular-point policy for integrate().

    Attributes
    ----------
    abs_tol, rel_tol : float
        Target accuracy, |result - truth| <= max(abs_tol, rel_tol*|result|).
    max_depth : int
        Maximum number of adaptive subintervals per quad_vec call.
    excluded_points : tuple of (location, margin)
        Points where the integrand may be singular or undefined. Points outside
        the integration interval are ignored.
    initial_cutoff : float
        Length of the first finite piece when the upper limit is +inf.
    max_doublings : int
        Cap on cutoff doublings for semi-infinite integrals.
    """
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 2000
    excluded_points: Tuple[Tuple[float, float], ...] = ()
    initial_cutoff: float = 40.0
    max_doublings: int = 40

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise BadParams("Quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise BadParams("max_depth must be at least 1")
        for location, margin in self.excluded_points:
            if margin <= 0:
                raise BadParams(f"Excluded point {location} has non-positive margin {margin}")
        if self.initial_cutoff <= 0:
            raise BadParams("initial_cutoff must be positive")

    def with_points(self, points: Sequence[Tuple[float, float]]) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol, self.rel_tol, self.max_depth,
                              tuple(points), self.initial_cutoff, self.max_doublings)


@dataclass(frozen=True)
class QuadratureResult:
    value: object
    error: float
    cutoff: Optional[float] = None
    final_margins: Tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class MathieuEval:
    """Unit-Wronskian Mathieu pair and derivatives at one point."""
    a: float
    q: float
    x: float
    mc: float
    ms: float
    dmc: float
    dms: float

    @property
    def wronskian(self) -> float:
        return self.mc * self.dms - self.dmc * self.ms


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def make_bracket(f: Callable[[float], float], lo: float, hi: float) -> Bracket:
    """Evaluate f at both ends and build a Bracket"""
    return Bracket(lo, hi, float(f(lo)), float(f(hi)))


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12,
              max_iter: int = 200) -> float:
    """Brent's method on a sign-changing bracket.

    Raises NoSignChange when the bracket does not enclose a sign change and
    MaxIterations when Brent's method does not converge within max_iter steps.
    """
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    if bracket.f_lo * bracket.f_hi > 0:
        raise NoSignChange(
            f"No sign change on [{bracket.lo}, {bracket.hi}]: f = ({bracket.f_lo}, {bracket.f_hi})")

    root, info = brentq(f, bracket.lo, bracket.hi, xtol=tol, maxiter=max_iter,
                        full_output=True, disp=False)
    if not info.converged:
        raise MaxIterations(
            f"Brent did not converge on [{bracket.lo}, {bracket.hi}] after {info.iterations} iterations")
    logger.debug(f"root {root:.15g} after {info.iterations} iterations")
    return float(root)


def scan_roots(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
               density: int = DEFAULT_SCAN_DENSITY, tol: float = 1e-12,
               min_points: int = 200) -> List[float]:
    """Scan a vectorized f on a uniform grid and refine every sign change.

    The grid has `density` points per unit length, at least `min_points`.
    """
    if not lo < hi:
        return []
    n = max(min_points, int(np.ceil((hi - lo) * density)) + 1)
    grid = np.linspace(lo, hi, n)
    values = np.asarray(f(grid), dtype=float)

    roots = []
    for i in range(n - 1):
        f_lo, f_hi = values[i], values[i + 1]
        if not (np.isfinite(f_lo) and np.isfinite(f_hi)):
            continue
        if f_lo == 0.0:
            if i == 0 or values[i - 1] != 0.0:
                roots.append(float(grid[i]))
            continue
        if f_lo * f_hi < 0:
            scalar = lambda x: float(f(np.array([x]))[0])
            roots.append(find_root(scalar, Bracket(grid[i], grid[i + 1], f_lo, f_hi), tol))
    if values[-1] == 0.0 and values[-2] != 0.0:
        roots.append(float(grid[-1]))
    return roots


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _as_real_integrand(f: Callable, sample_x: float) -> Tuple[Callable, bool, Tuple[int, ...]]:
    """Wrap f so that quad_vec always sees a real array"""
    sample = np.asarray(f(sample_x))
    is_complex = np.iscomplexobj(sample)
    shape = sample.shape

    if not is_complex:
        return (lambda x: np.asarray(f(x), dtype=float)), False, shape

    def stacked(x):
        value = np.asarray(f(x), dtype=complex)
        return np.concatenate([np.ravel(value.real), np.ravel(value.imag)])

    return stacked, True, shape


def _restore(value: np.ndarray, is_complex: bool, shape: Tuple[int, ...]):
    if not is_complex:
        return float(value) if shape == () else np.reshape(value, shape)
    half = np.size(value) // 2
    joined = value[:half] + 1j * value[half:]
    return complex(joined[0]) if shape == () else np.reshape(joined, shape)


def _norm(value) -> float:
    return float(np.max(np.abs(value))) if np.size(value) else 0.0


def _quad_piece(g: Callable, a: float, b: float, spec: QuadratureSpec, workers=None):
    """One quad_vec call on a finite interval, raising NonConvergence on failure"""
    if b <= a:
        return 0.0, 0.0
    value, error, info = quad_vec(g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                  limit=spec.max_depth, norm="max", full_output=True,
                                  workers=workers if workers is not None else 1)
    if not info.success:
        raise NonConvergence(f"quad_vec on [{a}, {b}]: {info.message}",
                             estimate=value, error=float(error))
    return value, float(error)


def _integrate_finite(g: Callable, a: float, b: float, spec: QuadratureSpec, workers=None):
    points = sorted((loc, margin) for loc, margin in spec.excluded_points if a <= loc <= b)
    if not points:
        value, error = _quad_piece(g, a, b, spec, workers)
        return value, error, ()

    # Keep holes from overlapping one another
    locations = [loc for loc, _ in points]
    margins = []
    for i, (loc, margin) in enumerate(points):
        gaps = [abs(loc - other) / 2 for j, other in enumerate(locations) if j != i]
        margins.append(min([margin] + gaps) if gaps else margin)

    # Core pieces between holes
    edges = [a]
    for loc, margin in zip(locations, margins):
        edges.extend([max(a, loc - margin), min(b, loc + margin)])
    edges.append(b)
    total, error = 0.0, 0.0
    for lo, hi in zip(edges[0::2], edges[1::2]):
        value, err = _quad_piece(g, lo, hi, spec, workers)
        total = total + value
        error += err

    # Shrink every hole geometrically
    final_margins = []
    for loc, margin in zip(locations, margins):
        previous = None
        tail = 0.0
        for step in range(MAX_MARGIN_HALVINGS):
            inner = margin / 2
            strip = 0.0
            for lo, hi in ((loc - margin, loc - inner), (loc + inner, loc + margin)):
                lo, hi = max(a, lo), min(b, hi)
                if hi > lo:
                    value, err = _quad_piece(g, lo, hi, spec, workers)
                    strip = strip + value
                    error += err
            total = total + strip
            margin = inner
            size = _norm(strip)
            tolerance = max(spec.abs_tol, spec.rel_tol * _norm(total))
            if previous is not None and previous > 0:
                ratio = size / previous
                if ratio < 1:
                    tail = np.asarray(strip) * (ratio / (1 - ratio))
                    if _norm(tail) < tolerance:
                        break
            elif size == 0.0 and step > 0:
                tail = 0.0
                break
            previous = size
        else:
            raise NonConvergence(f"Margin around excluded point {loc} did not stabilize",
                                 estimate=total, error=error)
        total = total + tail
        final_margins.append(margin)
        logger.debug(f"excluded point {loc:.6g}: stopped at margin {margin:.3g}")
    return total, error, tuple(final_margins)


def integrate(f: Callable, a: float, b: float, spec: Optional[QuadratureSpec] = None,
              workers=None) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integral of a scalar, complex or vector function.

    Parameters
    ----------
    f : callable
        Integrand of one real variable. May return a real or complex scalar or array.
    a, b : float
        Limits with a < b; b may be +inf.
    spec : QuadratureSpec
        Tolerances, excluded points and the cutoff policy.
    workers : int or map-like callable, optional
        Forwarded to quad_vec.
    """
    spec = spec or QuadratureSpec()
    if not a < b:
        raise BadParams(f"integrate requires a < b, got a={a}, b={b}")
    if np.isinf(a):
        raise BadParams("Lower limit must be finite")

    sample_x = a + 0.5 * (min(b, a + spec.initial_cutoff) - a) * (1 + 1e-3)
    g, is_complex, shape = _as_real_integrand(f, sample_x)

    if np.isfinite(b):
        value, error, margins = _integrate_finite(g, a, b, spec, workers)
        return QuadratureResult(_restore(np.asarray(value), is_complex, shape), error, None, margins)

    cutoff = a + spec.initial_cutoff
    value, error, margins = _integrate_finite(g, a, cutoff, spec, workers)
    for _ in range(spec.max_doublings):
        upper = a + 2 * (cutoff - a)
        piece, err, more = _integrate_finite(g, cutoff, upper, spec, workers)
        value = value + piece
        error += err
        margins = margins + more
        cutoff = upper
        if _norm(piece) < spec.abs_tol / 10:
            logger.debug(f"semi-infinite integral converged at cutoff {cutoff:.6g}")
            return QuadratureResult(_restore(np.asarray(value), is_complex, shape),
                                    error, cutoff, margins)
    raise NonConvergence(f"Tail did not fall below {spec.abs_tol / 10:g} by cutoff {cutoff:g}",
                         estimate=_restore(np.asarray(value), is_complex, shape), error=error)


def exp_integral(omega, length):
    """Closed form of the integral of exp(i*omega*u) for u in [0, length].

    omega may be complex and an array. length = inf requires Im(omega) > 0.
    """
    omega = np.asarray(omega, dtype=complex)
    if np.isinf(length):
        if np.any(omega.imag <= 0):
            raise OutOfDomain("Semi-infinite exponential integral needs a decaying integrand")
        return 1j / omega
    half = 0.5 * omega * length
    return length * np.exp(1j * half) * np.sinc(half / np.pi)


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def fixed_quadrature(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int):
    """n-point Gauss-Legendre rule on [a, b] for smooth vectorized integrands"""
    nodes, weights = gauss_legendre(int(n))
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * nodes
    return half * np.sum(weights * f(x))


# ---------------------------------------------------------------------------
# Principal-value normalization
# ---------------------------------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    value, _ = quad_vec(lambda t: _bump(np.atleast_1d(t))[0], -1.0, 1.0, epsabs=1e-15, epsrel=1e-14)
    return float(value)


def pv_normalization(density: Callable[[np.ndarray], np.ndarray], reference_density: float,
                     mode: str = "two_sided", x0: float = 0.0, start_window: float = 16.0,
                     max_doublings: int = 14, tol: float = 1e-8) -> float:
    """Squared normalization constant A^2 that gives a free state the reference average density.

    The mean value of the density is taken with a smooth compactly supported
    window of half-width a, centred on 0 (two_sided) or on x0 + a (one_sided).
    a is doubled until successive means differ by less than tol.
    """
    if mode not in ("two_sided", "one_sided"):
        raise BadParams(f"Unknown normalization mode: {mode}")

    def windowed_mean(a: float) -> float:
        centre = 0.0 if mode == "two_sided" else x0 + a
        weighted = lambda x: _bump((np.atleast_1d(x) - centre) / a)[0] * float(
            np.atleast_1d(density(np.atleast_1d(x)))[0])
        value, _ = quad_vec(weighted, centre - a, centre + a, epsabs=1e-13 * a,
                            epsrel=1e-12, limit=20000)
        return float(value) / (a * _bump_mass())

    previous = windowed_mean(start_window)
    window = start_window
    for _ in range(max_doublings):
        window *= 2
        current = windowed_mean(window)
        if abs(current - previous) < tol:
            if current <= 0:
                raise NoLimit("Average density vanished; not a free-state density")
            logger.debug(f"pv_normalization converged at window {window:g}: mean {current:.12g}")
            return reference_density / current
        previous = current
    raise NoLimit(f"Window averages did not stabilize below {tol:g} by half-width {window:g}")


# ---------------------------------------------------------------------------
# Constant-potential propagators
# ---------------------------------------------------------------------------

def _c_and_s(q2: float, length: float) -> Tuple[float, float]:
    """cos(qL) and sin(qL)/q for q^2 = q2 of either sign"""
    if q2 > 0:
        q = np.sqrt(q2)
        return np.cos(q * length), np.sin(q * length) / q
    if q2 < 0:
        k = np.sqrt(-q2)
        return np.cosh(k * length), np.sinh(k * length) / k
    return 1.0, length


def constant_propagator(q2: float, length: float) -> np.ndarray:
    """Transfer matrix of (psi, psi') across a constant region of width length.

    q2 = 2 (energy - V).
    """
    c, s = _c_and_s(q2, length)
    return np.array([[c, s], [-q2 * s, c]])


def constant_propagator_derivative(q2: float, length: float) -> np.ndarray:
    """Derivative of constant_propagator with respect to the energy (dq2/de = 2)"""
    c, s = _c_and_s(q2, length)
    dc = -0.5 * length * s
    if abs(q2) * length ** 2 < 1e-4:
        ds = -length ** 3 / 6 + q2 * length ** 5 / 60
    else:
        ds = (length * c - s) / (2 * q2)
    return 2.0 * np.array([[dc, ds], [-s - q2 * ds, dc]])


# ---------------------------------------------------------------------------
# Mathieu functions
# ---------------------------------------------------------------------------

def _check_mathieu_box(a: float, q: float, a_max: float = MATHIEU_A_MAX):
    if abs(a) > a_max or abs(q) > MATHIEU_Q_MAX:
        raise OutOfDomain(
            f"Mathieu parameters (a={a}, q={q}) outside |a| <= {a_max}, |q| <= {MATHIEU_Q_MAX}")


def _mathieu_rhs(a: float, q: float, sensitivities: bool):
    def rhs(x, y):
        weight = a - 2.0 * q * np.cos(2.0 * x)
        dy = [y[1], -weight * y[0], y[3], -weight * y[2]]
        if sensitivities:
            dy += [y[5], -weight * y[4] - y[0], y[7], -weight * y[6] - y[2]]
        return dy
    return rhs


def mathieu(a: float, q: float, x: float, rtol: float = 1e-12, atol: float = 1e-14) -> MathieuEval:
    """Even/odd unit-Wronskian Mathieu solutions of w'' + (a - 2q cos 2x) w = 0.

    mc(0) = 1, mc'(0) = 0, ms(0) = 0, ms'(0) = 1.
    """
    _check_mathieu_box(a, q)
    if x == 0:
        return MathieuEval(a, q, 0.0, 1.0, 0.0, 0.0, 1.0)
    sol = solve_ivp(_mathieu_rhs(a, q, False), (0.0, x), [1.0, 0.0, 0.0, 1.0],
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise NonConvergence(f"Mathieu IVP failed at a={a}, q={q}: {sol.message}")
    mc, dmc, ms, dms = sol.y[:, -1]
    return MathieuEval(a, q, x, float(mc), float(ms), float(dmc), float(dms))


class MathieuSolution:
    """Dense Mathieu pair on [0, length] with the a-derivatives of the monodromy.

    values() evaluates (mc, dmc, ms, dms) anywhere on [0, length] through the
    stepper's dense output.
    """

    def __init__(self, a: float, q: float, length: float = np.pi, rtol: float = 1e-12,
                 atol: float = 1e-14, a_max: float = MATHIEU_A_MAX):
        _check_mathieu_box(a, q, a_max)
        self.a = a
        self.q = q
        self.length = length
        y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        sol = solve_ivp(_mathieu_rhs(a, q, True), (0.0, length), y0, method="DOP853",
                        rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise NonConvergence(f"Mathieu IVP failed at a={a}, q={q}: {sol.message}")
        self._dense = sol.sol
        end = sol.y[:, -1]
        self.monodromy = np.array([[end[0], end[2]], [end[1], end[3]]])
        m = self.monodromy
        scale = max(1.0, abs(m[0, 0] * m[1, 1]), abs(m[0, 1] * m[1, 0]))
        drift = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1.0) / scale
        if drift > UNIMODULAR_TOL:
            raise NonConvergence(
                f"Mathieu cell at a={a}, q={q} lost unimodularity (relative |det M - 1| = {drift:.1e})")
        self.monodromy_da = np.array([[end[4], end[6]], [end[5], end[7]]])

    def values(self, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12) or np.any(x > self.length + 1e-12):
            raise OutOfDomain(f"Mathieu dense output only covers [0, {self.length}]")
        y = self._dense(np.clip(x, 0.0, self.length))
        return y[0], y[1], y[2], y[3]

    def evaluate(self, x) -> MathieuEval:
        mc, dmc, ms, dms = (float(v) for v in self.values(np.array([x])))
        return MathieuEval(self.a, self.q, float(x), mc, ms, dmc, dms)

    @property
    def half_trace(self) -> float:
        return 0.5 * (self.monodromy[0, 0] + self.monodromy[1, 1])

    @property
    def half_trace_da(self) -> float:
        return 0.5 * (self.monodromy_da[0, 0] + self.monodromy_da[1, 1])
