"""
Tests for piecewise closed-form wavefunctions
"""
import math

import numpy as np
import pytest

from utils.exceptions import BadParams, OutOfDomain
from utils.numerics import MathieuSolution
from utils.waves import PiecewiseWave, Region, airy_region, constant_region


def _kinked_wave():
    """Tent function: rises with slope 1 on [0, 1), falls with slope -1 on [1, 2]"""
    return PiecewiseWave((Region(0.0, 1.0, 'linear', (0.0, 1.0)),
                          Region(1.0, 2.0, 'linear', (1.0, -1.0), origin=1.0)))


def test_constant_region_picks_basis():
    assert constant_region(0, 1, 4.0, 1.0, 0.0).basis == 'trig'
    assert constant_region(0, 1, -4.0, 1.0, 0.0).basis == 'hyperbolic'
    assert constant_region(0, 1, 0.0, 1.0, 2.0).basis == 'linear'


@pytest.mark.parametrize("q2", [4.0, -4.0, 0.0])
def test_constant_region_matches_initial_values(q2):
    region = constant_region(0.3, 1.5, q2, 0.7, -1.2)
    psi, dpsi = region.values(np.array([0.3]))
    assert psi[0] == pytest.approx(0.7)
    assert dpsi[0] == pytest.approx(-1.2)


def test_trig_region_solves_schrodinger():
    region = constant_region(0.0, 2.0, 4.0, 1.0, 0.0)
    x = np.linspace(0, 2, 9)
    psi, dpsi = region.values(x)
    np.testing.assert_allclose(psi, np.cos(2 * x), atol=1e-14)
    np.testing.assert_allclose(dpsi, -2 * np.sin(2 * x), atol=1e-14)


def test_airy_region_matches_initial_values():
    region = airy_region(0.5, 2.0, 1.7, 1.2, 0.4, -0.9)
    psi, dpsi = region.values(np.array([0.5]))
    assert psi[0] == pytest.approx(0.4, abs=1e-12)
    assert dpsi[0] == pytest.approx(-0.9, abs=1e-12)


def test_mathieu_region_starts_from_coefficients():
    region = Region(0.0, math.pi, 'mathieu_pair', (0.3, 0.8), solution=MathieuSolution(-0.34, 1.0))
    psi, dpsi = region.values(np.array([0.0]))
    assert psi[0] == pytest.approx(0.3)
    assert dpsi[0] == pytest.approx(0.8)


def test_region_validation():
    with pytest.raises(BadParams):
        Region(1.0, 0.0, 'trig', (1.0, 0.0), 1.0)
    with pytest.raises(BadParams):
        Region(0.0, 1.0, 'legendre', (1.0, 0.0))
    with pytest.raises(BadParams):
        Region(0.0, 1.0, 'mathieu_pair', (1.0, 0.0))


def test_regions_must_tile():
    with pytest.raises(BadParams):
        PiecewiseWave((Region(0.0, 1.0, 'linear', (1.0, 0.0)),
                       Region(1.5, 2.0, 'linear', (1.0, 0.0))))


def test_one_sided_limits_at_breakpoint():
    wave = _kinked_wave()
    assert wave.evaluate(1.0, 'left') == pytest.approx(1.0)
    assert wave.evaluate(1.0, 'right') == pytest.approx(1.0)
    assert wave.derivative(1.0, 'left') == pytest.approx(1.0)
    assert wave.derivative(1.0, 'right') == pytest.approx(-1.0)
    assert wave.breakpoints == [1.0]


def test_evaluate_outside_support():
    with pytest.raises(OutOfDomain):
        _kinked_wave().evaluate(3.0)
    walled = PiecewiseWave(_kinked_wave().regions, compact=True)
    assert walled.evaluate(3.0) == 0.0
    assert walled.evaluate(-1.0) == 0.0


def test_norm_squared_closed_form():
    sine = PiecewiseWave((Region(0.0, math.pi, 'trig', (0.0, 1.0), 1.0),))
    assert sine.norm_squared() == pytest.approx(math.pi / 2, abs=1e-13)
    cosh = PiecewiseWave((Region(0.0, 1.0, 'hyperbolic', (1.0, 0.0), 1.0),))
    assert cosh.norm_squared() == pytest.approx(0.5 * (1.0 + 0.5 * math.sinh(2.0)), abs=1e-13)


def test_norm_squared_semi_infinite_tail():
    k = 0.8
    tail = PiecewiseWave((Region(0.0, np.inf, 'complex_exp', (1.0, 0.0), 1j * k),))
    assert tail.norm_squared() == pytest.approx(1.0 / (2 * k), abs=1e-13)
    assert tail.evaluate(2.0) == pytest.approx(math.exp(-2 * k))


def test_norm_squared_falls_back_to_quadrature():
    assert _kinked_wave().norm_squared() == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_bloch_extension():
    k = 1.1
    wave = PiecewiseWave((Region(0.0, 1.0, 'complex_exp', (1.0, 0.0), k),), bloch=(k, 1.0, 0.0))
    for x in (-2.7, 0.4, 3.3):
        assert wave.evaluate(x) == pytest.approx(np.exp(1j * k * x), abs=1e-12)
    assert wave.support == (-np.inf, np.inf)
    assert wave.norm_squared(0.0, 5.0) == pytest.approx(5.0, abs=1e-12)
    assert wave.norm_squared(-0.5, 0.5) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(OutOfDomain):
        wave.norm_squared()


def test_bloch_regions_must_cover_one_cell():
    with pytest.raises(BadParams):
        PiecewiseWave((Region(0.0, 0.5, 'linear', (1.0, 0.0)),), bloch=(0.0, 1.0, 0.0))


def test_overlap_exponentials_matches_quadrature():
    wave = PiecewiseWave((Region(0.0, math.pi, 'trig', (1.0, 0.0), 1.0),
                          Region(math.pi, 4.0, 'hyperbolic', (-1.0, 0.5), 0.7, origin=math.pi)))
    mu = 1.3
    closed = wave.overlap_exponentials([mu], [1.0], 0.0, 0.0, 4.0)
    numeric = wave.inner_product(lambda x: np.exp(1j * mu * x), 0.0, 4.0)
    assert closed == pytest.approx(numeric, abs=1e-12)


def test_overlap_exponentials_needs_exponential_pieces():
    assert _kinked_wave().overlap_exponentials([1.0], [1.0], 0.0, 0.0, 2.0) is None


def test_scaled_wave():
    sine = PiecewiseWave((Region(0.0, math.pi, 'trig', (0.0, 1.0), 1.0),))
    assert sine.scaled(2.0).norm_squared() == pytest.approx(2.0 * math.pi, abs=1e-12)
    assert sine.scaled(1j).evaluate(math.pi / 2) == pytest.approx(1j)
