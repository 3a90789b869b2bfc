"""
Tests for the numerical substrate: roots, quadrature, principal-value normalization, Mathieu pair
"""
import math

import numpy as np
import pytest

from utils.exceptions import BadParams, NoLimit, NoSignChange, OutOfDomain
from utils.numerics import (MATHIEU_CELL_A_MAX, Bracket, MathieuSolution, QuadratureSpec,
                            constant_propagator, exp_integral, find_root, fixed_quadrature, integrate,
                            make_bracket, mathieu, pv_normalization, scan_roots)


def _open_box_residual(v0):
    """k sin(beta) + beta cos(beta), zero at the flat open-box levels"""
    def residual(energy):
        energy = np.asarray(energy, dtype=float)
        k = np.sqrt(-2.0 * energy)
        beta = np.sqrt(2.0 * (energy + v0))
        return k * np.sin(beta) + beta * np.cos(beta)
    return residual


def test_find_root_sqrt2():
    """x^2 - 2 on [1, 2]"""
    f = lambda x: x * x - 2.0
    root = find_root(f, make_bracket(f, 1.0, 2.0), tol=1e-12)
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-11)
    # deterministic
    assert find_root(f, make_bracket(f, 1.0, 2.0), tol=1e-12) == root


def test_find_root_without_sign_change():
    f = lambda x: x * x + 1.0
    with pytest.raises(NoSignChange):
        find_root(f, make_bracket(f, -1.0, 1.0))


def test_bracket_rejects_reversed_interval():
    with pytest.raises(BadParams):
        Bracket(2.0, 1.0, -1.0, 1.0)


@pytest.mark.parametrize("v0, count", [(0.893, 0), (2.645, 1), (300.17, 8)])
def test_scan_roots_counts_open_box_levels(v0, count):
    gap = 1e-10 * v0
    roots = scan_roots(_open_box_residual(v0), -v0 + gap, -gap)
    assert len(roots) == count
    assert roots == sorted(roots)


def test_integrate_sin_squared():
    result = integrate(lambda x: math.sin(x) ** 2, 0.0, math.pi)
    assert result.value == pytest.approx(math.pi / 2, abs=1e-10)
    assert result.cutoff is None


def test_integrate_polynomials_exactly():
    rng = np.random.default_rng(7)
    coefficients = rng.normal(size=11)
    exact = sum(c / (n + 1) for n, c in enumerate(coefficients))
    result = integrate(lambda x: np.polyval(coefficients[::-1], x), 0.0, 1.0)
    assert result.value == pytest.approx(exact, abs=1e-12)


def test_integrate_complex_integrand():
    result = integrate(lambda x: np.exp(1j * x), 0.0, 1.0)
    assert isinstance(result.value, complex)
    assert result.value == pytest.approx((np.exp(1j) - 1.0) / 1j, abs=1e-12)


def test_integrate_vector_integrand():
    result = integrate(lambda x: np.array([1.0, x, x * x]), 0.0, 2.0)
    np.testing.assert_allclose(result.value, [2.0, 2.0, 8.0 / 3.0], atol=1e-12)


@pytest.mark.parametrize("sigma", [1.0, 5.0])
def test_integrate_semi_infinite_with_excluded_point(sigma):
    """Well-mode plane-wave weight integrates to one; the 0/0 point k = pi/sigma is excluded"""
    def integrand(k):
        u = k * sigma
        if abs(u - math.pi) < 1e-7:
            return sigma / (2.0 * math.pi)
        return 8.0 * math.pi * sigma * math.cos(0.5 * u) ** 2 / (math.pi ** 2 - u * u) ** 2

    pole = math.pi / sigma
    spec = QuadratureSpec(1e-11, 1e-11, excluded_points=((pole, 0.25 * pole),),
                          initial_cutoff=40.0 / sigma)
    result = integrate(integrand, 0.0, np.inf, spec)
    assert result.value == pytest.approx(1.0, abs=1e-8)
    assert result.cutoff is not None and result.cutoff > 40.0 / sigma
    assert len(result.final_margins) == 1


def test_excluded_point_outside_interval_is_ignored():
    spec = QuadratureSpec(excluded_points=((5.0, 0.1),))
    result = integrate(lambda x: x, 0.0, 1.0, spec)
    assert result.value == pytest.approx(0.5, abs=1e-12)
    assert result.final_margins == ()


def test_integrable_singularity_at_excluded_point():
    """1/sqrt|x - 1/2| on [0, 1] integrates to 2 sqrt(2)"""
    spec = QuadratureSpec(1e-9, 1e-9, excluded_points=((0.5, 0.25),))
    f = lambda x: 1.0 / math.sqrt(abs(x - 0.5)) if x != 0.5 else 0.0
    result = integrate(f, 0.0, 1.0, spec)
    assert result.value == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-6)


def test_quadrature_spec_validation():
    with pytest.raises(BadParams):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(BadParams):
        QuadratureSpec(excluded_points=((0.5, -1.0),))
    with pytest.raises(BadParams):
        integrate(lambda x: x, 1.0, 0.0)


def test_exp_integral_matches_quadrature():
    omega = 2.3 + 0.4j
    length = 1.7
    direct = fixed_quadrature(lambda u: np.exp(1j * omega * u), 0.0, length, 64)
    assert complex(exp_integral(omega, length)) == pytest.approx(direct, abs=1e-12)
    assert complex(exp_integral(1j, np.inf)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(OutOfDomain):
        exp_integral(1.0, np.inf)


def test_pv_normalization_plane_wave():
    value = pv_normalization(lambda x: np.ones_like(x), 1.0 / (2.0 * math.pi))
    assert value == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-8)


def test_pv_normalization_one_sided_sine():
    """|2i sin kx|^2 averages to 2 on the half line"""
    k = 1.3
    value = pv_normalization(lambda x: 4.0 * np.sin(k * x) ** 2, 1.0 / math.pi, mode="one_sided", x0=0.0)
    assert value == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-7)


def test_pv_normalization_phase_invariant():
    psi = lambda x: np.exp(1j * 0.7 * x) + 0.5 * np.exp(-1j * 0.7 * x)
    plain = pv_normalization(lambda x: np.abs(psi(x)) ** 2, 1.0 / (2.0 * math.pi))
    rotated = pv_normalization(lambda x: np.abs(np.exp(1j * 0.4) * psi(x)) ** 2, 1.0 / (2.0 * math.pi))
    assert rotated == pytest.approx(plain, rel=1e-12)


def test_pv_normalization_rejects_decaying_density():
    with pytest.raises(NoLimit):
        pv_normalization(lambda x: np.exp(-x * x), 1.0 / (2.0 * math.pi))


def test_pv_normalization_unknown_mode():
    with pytest.raises(BadParams):
        pv_normalization(lambda x: np.ones_like(x), 1.0, mode="sideways")


def test_open_box_density_average():
    """Interior open-box free-state density averages to the closed-form prefactor"""
    rng = np.random.default_rng(3)
    for _ in range(3):
        energy, v0 = rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0)
        gamma, kappa = math.sqrt(2 * (energy + v0)), math.sqrt(2 * energy)
        # un-normalized outer form kappa sin(gamma) cos(kappa u) + gamma cos(gamma) sin(kappa u)
        outer = lambda x: (kappa * math.sin(gamma) * np.cos(kappa * (x - 1))
                           + gamma * math.cos(gamma) * np.sin(kappa * (x - 1))) ** 2
        squared = pv_normalization(outer, 1.0 / math.pi, mode="one_sided", x0=1.0)
        expected = 2.0 / (math.pi * (gamma ** 2 * math.cos(gamma) ** 2 + kappa ** 2 * math.sin(gamma) ** 2))
        assert squared == pytest.approx(expected, rel=1e-6)


def test_mathieu_reduces_to_trig_when_q_is_zero():
    a = 2.25
    for x in (0.3, 1.1, 2.9):
        value = mathieu(a, 0.0, x)
        assert value.mc == pytest.approx(math.cos(1.5 * x), abs=1e-10)
        assert value.ms == pytest.approx(math.sin(1.5 * x) / 1.5, abs=1e-10)


def test_mathieu_initial_values():
    value = mathieu(-0.34, 1.0, 0.0)
    assert (value.mc, value.dmc, value.ms, value.dms) == (1.0, 0.0, 0.0, 1.0)


@pytest.mark.parametrize("x", [0.3, 1.7, math.pi])
def test_mathieu_unit_wronskian(x):
    assert mathieu(-0.34, 1.0, x).wronskian == pytest.approx(1.0, abs=1e-9)


def test_mathieu_ode_residual():
    rng = np.random.default_rng(11)
    h = 1e-4
    for _ in range(20):
        a, q, x = rng.uniform(-50, 50), rng.uniform(-5, 5), rng.uniform(0.2, 3.0)
        centre = mathieu(a, q, x)
        plus, minus = mathieu(a, q, x + h), mathieu(a, q, x - h)
        weight = a - 2.0 * q * math.cos(2.0 * x)
        second_mc = (plus.dmc - minus.dmc) / (2 * h)
        second_ms = (plus.dms - minus.dms) / (2 * h)
        scale = 1.0 + abs(weight) * (abs(centre.mc) + abs(centre.ms))
        assert abs(second_mc + weight * centre.mc) / scale < 1e-6
        assert abs(second_ms + weight * centre.ms) / scale < 1e-6


def test_mathieu_solution_dense_output_agrees():
    cell = MathieuSolution(-0.34, 1.0)
    direct = mathieu(-0.34, 1.0, 1.2)
    dense = cell.evaluate(1.2)
    assert dense.mc == pytest.approx(direct.mc, abs=1e-9)
    assert dense.ms == pytest.approx(direct.ms, abs=1e-9)
    assert np.linalg.det(cell.monodromy) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(OutOfDomain):
        cell.values(4.0)


def test_mathieu_outside_parameter_box():
    assert mathieu(200.0, 1.0, 0.5).wronskian == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(OutOfDomain):
        mathieu(250.0, 1.0, 0.5)
    with pytest.raises(OutOfDomain):
        MathieuSolution(250.0, 1.0)
    with pytest.raises(OutOfDomain):
        mathieu(1.0, 60.0, 0.5)


def test_mathieu_cell_reaches_the_tail_range():
    cell = MathieuSolution(4000.0, 1.0, a_max=MATHIEU_CELL_A_MAX)
    assert np.linalg.det(cell.monodromy) == pytest.approx(1.0, abs=1e-8)
    assert cell.half_trace == pytest.approx(math.cos(math.pi * math.sqrt(4000.0)), abs=1e-3)
    with pytest.raises(OutOfDomain):
        MathieuSolution(6000.0, 1.0, a_max=MATHIEU_CELL_A_MAX)


@pytest.mark.parametrize("q2", [4.0, -4.0, 0.0])
def test_constant_propagator_is_unimodular(q2):
    assert np.linalg.det(constant_propagator(q2, 0.7)) == pytest.approx(1.0, abs=1e-12)
