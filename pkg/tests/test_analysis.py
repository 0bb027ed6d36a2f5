import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pair_kernel_states
from wstab.analysis import (
    FitPolicy,
    NoAdmissibleWindow,
    SimulationTrace,
    decay_rate_symmetric,
    fit_time_constant,
    ghz_decay_rate,
    global_kernel_dimension,
    initial_log_slope,
    jump_kernel,
    projector_distance,
    rate_model_ratio,
    trace_distance,
    w_decay_rate,
    witness_expectation,
    witness_operator,
)
from wstab.protocol import DecoherenceRates, build_jump_operator, global_jump_coefficients, two_dissipator_example
from wstab.qalg import ground_state, random_pure_state, w_state

# -- fits -------------------------------------------------------------------


def test_fit_pure_exponential():
    t = np.linspace(0, 100, 200)
    fit = fit_time_constant((t, 0.3 * np.exp(-t / 5)))
    assert fit.tau == pytest.approx(5.0, abs=1e-6)
    assert fit.r_squared > 1 - 1e-12
    assert fit.epsilon0 == pytest.approx(0.3, rel=1e-6)


def test_fit_two_modes_uses_late_window():
    t = np.linspace(0, 100, 400)
    fit = fit_time_constant((t, 0.5 * np.exp(-t) + 0.3 * np.exp(-t / 5)))
    assert fit.tau == pytest.approx(5.0, rel=0.02)
    assert fit.fit_window[0] > 5


def test_fit_accepts_trace_and_uses_plateau():
    t = np.linspace(0, 200, 401)
    eps = 0.3 * np.exp(-t / 10) + 1e-6
    trace = SimulationTrace(t, eps, epsilon_inf=1e-6)
    fit = fit_time_constant(trace, FitPolicy(subtract_plateau=True))
    assert fit.tau == pytest.approx(10.0, rel=1e-6)
    # The floor sits at ten times the plateau, keeping the fit clear of it.
    assert 0.3 * np.exp(-fit.fit_window[1] / 10) >= 9e-6
    # Without subtraction the plateau bends the late slope past tolerance.
    with pytest.raises(NoAdmissibleWindow):
        fit_time_constant(trace)


def test_fit_rejects_plateau_only():
    t = np.linspace(0, 100, 200)
    with pytest.raises(NoAdmissibleWindow):
        fit_time_constant((t, np.full_like(t, 0.2)))
    with pytest.raises(NoAdmissibleWindow):
        fit_time_constant((t[:10], np.exp(-t[:10])))


def test_fit_rejects_growth():
    t = np.linspace(0, 10, 200)
    with pytest.raises(NoAdmissibleWindow):
        fit_time_constant((t, 1e-6 * np.exp(t / 3)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 50), st.floats(0.05, 20))
def test_fit_time_rescaling(tau, scale):
    t = np.linspace(0, 15 * tau, 300)
    eps = 0.4 * np.exp(-t / tau) + 0.1 * np.exp(-3 * t / tau)
    a = fit_time_constant((t, eps))
    b = fit_time_constant((scale * t, eps))
    assert b.tau == pytest.approx(scale * a.tau, rel=1e-9)


def test_trace_validation():
    with pytest.raises(ValueError):
        SimulationTrace([0, 1], [0.1])
    with pytest.raises(ValueError):
        SimulationTrace([0, 0], [0.1, 0.1])


def test_initial_log_slope():
    t = np.linspace(0, 0.1, 21)
    assert initial_log_slope(t, np.exp(-3 * t + 2 * t**2)) == pytest.approx(-3, rel=1e-9)


def test_fit_policy_defaults_documented():
    p = FitPolicy()
    assert (p.slope_tolerance, p.ceiling_fraction, p.floor_min, p.floor_plateau_factor, p.min_samples) == (
        0.05, 0.5, 1e-9, 10.0, 20)


# -- decay rates --------------------------------------------------------------


def test_w_rate_example_n5():
    g = 1e-3
    rates = DecoherenceRates.uniform(5, g, g)
    a, b = np.sqrt(4 / 5), np.sqrt(1 / 5)
    assert decay_rate_symmetric(a, b, 0.0, rates) == pytest.approx(4.2 * g)
    assert w_decay_rate(5, rates) == pytest.approx(4.2 * g)


def test_ghz_rate_example_n4():
    g = 2e-3
    rates = DecoherenceRates.uniform(4, g, g)
    assert ghz_decay_rate(4, rates) == pytest.approx(6 * g)
    assert decay_rate_symmetric(2**-0.5, 2**-0.5, 0.0, rates) == pytest.approx(6 * g)


def test_w_rate_examples():
    assert w_decay_rate(3, DecoherenceRates.uniform(3, 1e-3, 1e-3)) == pytest.approx(1e-3 * (1 + 8 / 3))
    big = w_decay_rate(2000, DecoherenceRates.uniform(2000, 1.0, 1.0))
    assert big == pytest.approx(5.0, rel=1e-3)


def test_ground_state_rate_zero():
    assert decay_rate_symmetric(1.0, 0.0, 0.3, DecoherenceRates.uniform(3, 1, 1)) == 0.0


def test_decay_rate_errors():
    rates = DecoherenceRates.uniform(3, 1, 1)
    with pytest.raises(ValueError):
        decay_rate_symmetric(1.0, 1.0, 0.0, rates)
    with pytest.raises(ValueError):
        decay_rate_symmetric(1.0, 0.0, 1.5, rates)
    with pytest.raises(ValueError):
        w_decay_rate(4, rates)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi / 2), st.floats(0, 2 * np.pi), st.data())
def test_decay_rate_phase_and_permutation_invariant(phase, angle, rel, data):
    n = 4
    gm = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    gz = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    perm = data.draw(st.permutations(range(n)))
    alpha, beta = np.cos(angle), np.sin(angle) * np.exp(1j * rel)
    rates = DecoherenceRates(gm, gz)
    shuffled = DecoherenceRates([gm[i] for i in perm], [gz[i] for i in perm])
    ref = decay_rate_symmetric(alpha, beta, 0.2, rates)
    g = np.exp(1j * phase)
    assert decay_rate_symmetric(g * alpha, g * beta, 0.2, rates) == pytest.approx(ref, abs=1e-12)
    assert decay_rate_symmetric(alpha, beta, 0.2, shuffled) == pytest.approx(ref, abs=1e-12)


# -- witness ----------------------------------------------------------------


def test_witness_examples():
    assert witness_expectation(0.1, 5) == (pytest.approx(-0.1), True)
    value, ok = witness_expectation(1 / 3, 3)
    assert value == pytest.approx(0, abs=1e-15) and not ok
    value, ok = witness_expectation(0.239, 5)
    assert value == pytest.approx(0.039) and not ok
    with pytest.raises(ValueError):
        witness_expectation(1.5, 3)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_witness_operator_identity(n, seed):
    rng = np.random.default_rng(seed)
    psi = random_pure_state(n, rng).amplitudes
    w = w_state(n).amplitudes
    t = rng.uniform()
    rho = t * np.outer(psi, psi.conj()) + (1 - t) * np.outer(w, w)
    eps = 1 - np.real(w @ rho @ w)
    direct = np.real(np.trace(witness_operator(n) @ rho))
    assert direct == pytest.approx(witness_expectation(eps, n)[0], abs=1e-12)


# -- kernels ----------------------------------------------------------------


@pytest.mark.parametrize("n", range(3, 7))
def test_global_kernel_dimension(n):
    dim, basis = jump_kernel([global_jump_coefficients(n)], n)
    assert dim == global_kernel_dimension(n) == [3, 6, 10, 20][n - 3]
    for state in (w_state(n), ground_state(n)):
        v = state.amplitudes
        assert np.linalg.norm(basis @ (basis.conj().T @ v) - v) < 1e-10


def test_pair_kernel_matches_listed_states():
    p = two_dissipator_example()
    dim, basis = jump_kernel(p.dissipators, 5)
    assert dim == 5
    assert projector_distance(basis, pair_kernel_states()) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_kernel_dimension_scale_invariant(s1, s2):
    p = two_dissipator_example()
    scaled = [build_jump_operator(c.edge, np.array(c.r) * s, c.gamma) for c, s in zip(p.dissipators, (s1, s2))]
    assert jump_kernel(scaled, 5)[0] == 5


def test_rate_model_ratio():
    assert rate_model_ratio(2e-3, 20.0, 1e-4) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        rate_model_ratio(0.0, 1.0, 1.0)


def test_trace_distance():
    a = np.diag([1.0, 0.0])
    b = np.diag([0.0, 1.0])
    assert trace_distance(a, b) == pytest.approx(1.0)
    assert trace_distance(a, a) == 0.0
