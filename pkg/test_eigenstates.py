"""
Tests for bound, free, Bloch and walled-comb eigenstates
"""
import math

import numpy as np
import pytest

from utils.eigenstates import (ONE_SIDED_DENSITY, TWO_SIDED_DENSITY, bloch_state, bound_states,
                               double_well_coefficients, families, free_state,
                               one_sided_comb_amplitude, one_sided_comb_state, one_sided_mean_density,
                               one_sided_power, one_sided_recurrence, open_box_free_closed_form,
                               orthonormality_probe, sample_eigenstate, step_coefficients, step_pair)
from utils.exceptions import AtBandEdge, InGap, OutOfSpectrum, UnknownFamily
from utils.potentials import (Cosine, DiracComb, DoubleWell, HardBox, KronigPenney, OneSidedComb,
                              OpenBox, Step)
from utils.spectra import band_structure

DOUBLE_WELL = DoubleWell(4.27, 1.43)
STEP = Step(2.645)
COMB = DiracComb(1.3, 1.0)


def _continuous_at(state, x, tol=1e-9):
    left, right = state.evaluate(x, 'left'), state.evaluate(x, 'right')
    return abs(left - right) < tol * max(1.0, abs(left))


def _smooth_at(state, x, tol=1e-9):
    left, right = state.derivative(x, 'left'), state.derivative(x, 'right')
    return abs(left - right) < tol * max(1.0, abs(left))


def test_families_catalog():
    assert families(DOUBLE_WELL) == ('dw_bound1', 'dw_bound2', 'dw_free_left', 'dw_free_right')
    assert 'openbox_free' in families(OpenBox(1.0))


def test_double_well_bound_energies():
    states = bound_states(DOUBLE_WELL)
    assert len(states) == 2
    assert states[0].energy == pytest.approx(-2.80, abs=0.01)
    assert states[1].energy == pytest.approx(-0.35, abs=0.01)
    assert [s.family for s in states] == ['dw_bound1', 'dw_bound2']


def test_double_well_bound_states_are_orthonormal():
    first, second = bound_states(DOUBLE_WELL)
    for state in (first, second):
        assert state.wave.norm_squared() == pytest.approx(1.0, abs=1e-10)
        for x in (0.0, 1.0, 2.0):
            assert _continuous_at(state, x)
            assert _smooth_at(state, x)
    overlap = first.wave.inner_product(second.evaluate, -40.0, 42.0, nodes=200)
    assert abs(overlap) < 1e-8


@pytest.mark.parametrize("v0, count", [(0.893, 0), (2.645, 1), (300.17, 8)])
def test_open_box_bound_state_count(v0, count):
    states = bound_states(OpenBox(v0))
    assert len(states) == count
    for state in states:
        assert state.evaluate(0.0) == pytest.approx(0.0, abs=1e-12)
        assert state.wave.norm_squared(0.0, np.inf) == pytest.approx(1.0, abs=1e-10)
        assert _smooth_at(state, 1.0, tol=1e-7)


def test_open_box_ramp_is_continuous():
    p = OpenBox(300.17, ramp='linear')
    states = bound_states(p)
    assert states
    for state in states:
        assert _continuous_at(state, 2.0 / 3.0)
        assert _smooth_at(state, 2.0 / 3.0, tol=1e-7)


def test_hard_box_levels():
    states = bound_states(HardBox(0.0, 1.0), count=3)
    expected = [0.5 * (n * math.pi) ** 2 for n in (1, 2, 3)]
    assert [s.energy for s in states] == pytest.approx(expected, rel=1e-9)
    assert states[0].wave.norm_squared() == pytest.approx(1.0, abs=1e-12)
    assert states[0].evaluate(2.0) == 0.0


def test_double_well_transmission_balance():
    state = free_state(DOUBLE_WELL, 2.0, 'dw_free_left')
    assert state.kappa == pytest.approx(2.0)
    amps = double_well_coefficients(state)
    assert abs(amps['A']) == pytest.approx(1.0 / math.sqrt(2 * math.pi))
    assert abs(amps['G']) ** 2 == pytest.approx(abs(amps['A']) ** 2 - abs(amps['B']) ** 2, abs=1e-12)
    for x in (0.0, 1.0, 2.0):
        assert _continuous_at(state, x)
        assert _smooth_at(state, x)


def test_double_well_right_incidence():
    amps = double_well_coefficients(free_state(DOUBLE_WELL, 0.7, 'dw_free_right'))
    assert abs(amps['G']) ** 2 == pytest.approx(abs(amps['A']) ** 2 - abs(amps['B']) ** 2, abs=1e-12)


@pytest.mark.parametrize("energy, family", [(1.0, 'step_psi0'), (4.5, 'step_psi1'), (4.5, 'step_psi2')])
def test_step_states_match_at_the_step(energy, family):
    state = free_state(STEP, energy, family)
    assert _continuous_at(state, 0.0)
    assert _smooth_at(state, 0.0)


def test_step_below_barrier_coefficients():
    energy = 1.0
    k, alpha = math.sqrt(2 * energy), math.sqrt(2 * (STEP.v0 - energy))
    state = free_state(STEP, energy, 'step_psi0')
    assert state.evaluate(0.0) == pytest.approx(math.sqrt(2 * k * k / (math.pi * (alpha ** 2 + k ** 2))))
    assert abs(state.evaluate(20.0)) < 1e-10


def test_step_above_barrier_coefficients():
    energy = 4.5
    k, beta = 3.0, math.sqrt(2 * (energy - STEP.v0))
    total = beta ** 2 + k ** 2
    coefficients = step_coefficients(free_state(STEP, energy, 'step_psi2'))
    assert abs(coefficients['E']) == pytest.approx(math.sqrt(2 * beta ** 2 / (math.pi * total)))
    assert abs(coefficients['G']) == pytest.approx(math.sqrt(2 * k ** 2 / (math.pi * total)))
    first = step_coefficients(free_state(STEP, energy, 'step_psi1'))
    assert first['D'] == pytest.approx(1.0 / math.sqrt(math.pi))


def test_step_pair_family():
    psi1, psi2 = step_pair(STEP, 3.0, 0.3, 0.8)
    for state in (psi1, psi2):
        assert _continuous_at(state, 0.0)
        assert _smooth_at(state, 0.0)
    plain1, plain2 = step_pair(STEP, 3.0, 0.0, 0.0)
    assert step_coefficients(plain1)['E'] == pytest.approx(step_coefficients(free_state(STEP, 4.5, 'step_psi2'))['E'])
    assert step_coefficients(plain2)['D'] == pytest.approx(1.0 / math.sqrt(math.pi))


def test_step_mean_density():
    state = free_state(STEP, 4.5, 'step_psi1')
    (_, average), = orthonormality_probe(state, state, [100.0])
    assert average == pytest.approx(TWO_SIDED_DENSITY, abs=2e-3)


def test_different_energies_decorrelate():
    a, b = free_state(STEP, 4.5, 'step_psi1'), free_state(STEP, 8.0, 'step_psi1')
    trend = orthonormality_probe(a, b, [20.0, 100.0])
    assert trend[-1][1] < 5e-3


def test_open_box_free_state_closed_form():
    p = OpenBox(2.645)
    state = free_state(p, 1.7, 'openbox_free')
    x = np.linspace(0.0, 6.0, 25)
    np.testing.assert_allclose(state.evaluate(x).real, open_box_free_closed_form(2.645, 1.7, x), atol=1e-12)
    assert state.evaluate(-1.0) == 0.0


def test_free_state_errors():
    with pytest.raises(OutOfSpectrum):
        free_state(DOUBLE_WELL, -1.0, 'dw_free_left')
    with pytest.raises(UnknownFamily):
        free_state(DOUBLE_WELL, 1.0, 'step_psi1')
    with pytest.raises(UnknownFamily):
        free_state(DOUBLE_WELL, 1.0, 'dw_bound1')
    with pytest.raises(OutOfSpectrum):
        free_state(STEP, 1.0, 'step_psi1')


def test_cosine_bloch_state():
    state = bloch_state(Cosine(1.0), -0.17, '+')
    assert state.family == 'cos_bloch+'
    assert state.kappa == pytest.approx(0.44, abs=0.01)
    assert state.wave.norm_squared(0.0, math.pi) == pytest.approx(0.5, abs=1e-8)
    for x in (0.3, 1.9):
        shifted = state.evaluate(x + math.pi)
        assert shifted == pytest.approx(np.exp(1j * state.kappa * math.pi) * state.evaluate(x), abs=1e-10)


def test_comb_bloch_state_jump():
    state = bloch_state(COMB, 1.125, '-')
    assert state.kappa == pytest.approx(-1.01, abs=0.01)
    jump = state.derivative(0.0, 'right') - state.derivative(0.0, 'left')
    assert jump == pytest.approx(2.0 * state.evaluate(0.0), abs=1e-10)
    assert _continuous_at(state, 1.3)
    assert state.wave.norm_squared(0.0, 1.3) == pytest.approx(1.3 / (2 * math.pi), abs=1e-10)


def test_kronig_penney_free_limit_is_plane_wave():
    state = bloch_state(KronigPenney(0.43, 0.0, 0.0), 1.0, '+')
    assert state.family == 'kp_bloch_3'
    density = np.abs(state.evaluate(np.linspace(-3, 3, 13))) ** 2
    np.testing.assert_allclose(density, TWO_SIDED_DENSITY, atol=1e-10)


def test_kronig_penney_branches():
    p = KronigPenney(0.43, 2.645, 0.27)
    band = band_structure(p, 40.0).bands[0]
    energy = 0.5 * (band.energy_lo + band.energy_hi)
    assert energy < p.v0
    assert bloch_state(p, energy, '+').family == 'kp_bloch_1'
    assert bloch_state(p, energy, '-').family == 'kp_bloch_2'
    state = bloch_state(p, energy, '+')
    for x in (-0.43, 0.0):
        assert _continuous_at(state, x)
        assert _smooth_at(state, x)


def test_bloch_state_rejects_gap_and_edge():
    with pytest.raises(InGap):
        bloch_state(COMB, 0.01)
    edge = band_structure(COMB, 5.0).bands[0].energy_lo
    with pytest.raises(AtBandEdge):
        bloch_state(COMB, edge + 1e-9)


def test_one_sided_closed_form_matches_recurrence():
    k = 1.5
    a0 = 1.0
    b0 = -np.exp(-2j * k * 0.4)
    pairs = one_sided_recurrence(1.0, 1.3, k, a0, b0, 200)
    w = np.exp(2j * 1.3 * k)
    for n in (1, 17, 100, 200):
        a_n, b_tilde = one_sided_power(1.0, 1.3, k, n) @ np.array([a0, b0])
        assert abs(a_n - pairs[n][0]) < 1e-9
        assert abs(b_tilde * w ** n - pairs[n][1]) < 1e-9
    assert max(abs(a) ** 2 + abs(b) ** 2 for a, b in pairs) < 1e3


def test_one_sided_recurrence_grows_in_gap():
    pairs = one_sided_recurrence(1.0, 1.3, 0.5, 1.0, -np.exp(-0.4j), 50)
    assert abs(pairs[-1][0]) > 1e6
    with pytest.raises(InGap):
        one_sided_comb_state(OneSidedComb(1.3, 1.0, 0.4), 0.125)


def test_one_sided_amplitude_free_limit():
    p = OneSidedComb(1.3, 1e-9, 0.4)
    assert one_sided_comb_amplitude(p, 1.5) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-6)


@pytest.mark.parametrize("energy", [1.125, 2.0])
def test_one_sided_comb_state_density(energy):
    p = OneSidedComb(1.3, 1.0, 0.4)
    state = one_sided_comb_state(p, energy, n_cells=800)
    assert state.evaluate(-0.4) == pytest.approx(0.0, abs=1e-12)
    jump = state.derivative(1.3, 'right') - state.derivative(1.3, 'left')
    assert jump == pytest.approx(2.0 * state.evaluate(1.3), abs=1e-9)
    for length in (1000.0, 1040.0):
        average = state.wave.norm_squared(-0.4, -0.4 + length) / length
        assert average == pytest.approx(ONE_SIDED_DENSITY, rel=1e-2)


def test_one_sided_comb_state_coefficients():
    p = OneSidedComb(1.3, 1.0, 0.4)
    state = one_sided_comb_state(p, 1.125, n_cells=50)
    k = state.kappa
    assert len(state.coefficients) == 51
    a0, b0 = state.coefficients[0]
    assert a0 == pytest.approx(state.norm_const)
    pairs = one_sided_recurrence(1.0, 1.3, k, a0, b0, 50)
    for (a_n, b_n), (a_ref, b_ref) in zip(state.coefficients, pairs):
        assert abs(a_n - a_ref) < 1e-9
        assert abs(b_n - b_ref) < 1e-9
    x = 10 * 1.3 + 0.37
    a_n, b_n = state.coefficients[11]
    expected = a_n * np.exp(1j * k * x) + b_n * np.exp(-1j * k * x)
    assert abs(state.evaluate(x) - expected) < 1e-12


@pytest.mark.parametrize("energy, excess", [(1.125, 1.2701), (2.0, 1.1050)])
def test_one_sided_amplitude_leaves_out_the_cross_term(energy, excess):
    p = OneSidedComb(1.3, 1.0, 0.4)
    k = math.sqrt(2 * energy)
    b0 = -np.exp(-2j * k * 0.4)
    closed = one_sided_comb_amplitude(p, k)
    incoherent = one_sided_mean_density(p, k, 1.0, b0, coherent=False)
    assert math.pi * closed ** 2 * incoherent == pytest.approx(1.0, rel=1e-6)

    # the full density with the closed-form A_0 overshoots 1/pi
    coherent = one_sided_mean_density(p, k, 1.0, b0)
    assert math.pi * closed ** 2 * coherent == pytest.approx(excess, abs=5e-3)
    state = one_sided_comb_state(p, energy, n_cells=800)
    assert (closed / state.norm_const) ** 2 == pytest.approx(excess, abs=5e-3)
    measured = state.wave.norm_squared(-0.4, 1039.6) / 1040.0
    assert math.pi * measured == pytest.approx(1.0, abs=1e-2)


def test_sample_eigenstate_rows():
    state = free_state(STEP, 4.5, 'step_psi1')
    rows = sample_eigenstate(state, [-1.0, 0.0, 1.0])
    assert [row['x'] for row in rows] == [-1.0, 0.0, 1.0]
    assert set(rows[0]) == {'x', 're_psi', 'im_psi'}
    assert rows[1]['re_psi'] == pytest.approx(1.0 / math.sqrt(math.pi))
