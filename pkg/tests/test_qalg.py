import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wstab.qalg import (
    DensityMatrix,
    asymmetric_w_split,
    basis_state,
    excitation_numbers,
    fidelity_to_pure,
    ghz_state,
    ground_state,
    hamming_weight_index,
    monomial,
    random_pure_state,
    site_operator,
    w_state,
)


def test_single_qubit_lowering():
    op = site_operator(1, 1, "lower").to_sparse().toarray()
    np.testing.assert_array_equal(op, [[0, 1], [0, 0]])


def test_site_one_is_most_significant_bit():
    low = site_operator(2, 1, "lower")
    np.testing.assert_allclose(low.apply(basis_state(2, 0b10).amplitudes), basis_state(2, 0).amplitudes)
    np.testing.assert_allclose(low.apply(basis_state(2, 0b01).amplitudes), 0)


def test_pauli_z_sign():
    z = site_operator(3, 2, "pauli_z")
    v = basis_state(3, 0b010).amplitudes
    np.testing.assert_allclose(z.apply(v), -v)


def test_site_out_of_range():
    with pytest.raises(ValueError):
        site_operator(3, 4, "lower")
    with pytest.raises(ValueError):
        site_operator(3, 0, "raise")
    with pytest.raises(ValueError):
        site_operator(3, 1, "bogus")


@pytest.mark.parametrize("n", range(1, 7))
def test_raise_is_adjoint_of_lower_dense(n):
    for q in range(1, n + 1):
        lo = site_operator(n, q, "lower")
        hi = site_operator(n, q, "raise")
        np.testing.assert_array_equal(hi.densify(), lo.densify().conj().T)
        np.testing.assert_array_equal(lo.to_sparse().toarray(), lo.densify())
        np.testing.assert_array_equal(hi.to_sparse().toarray(), hi.densify())


@pytest.mark.parametrize("n", range(2, 5))
def test_distinct_sites_commute(n):
    kinds = ("lower", "raise", "pauli_z")
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j == k:
                continue
            for a in kinds:
                for b in kinds:
                    A = site_operator(n, j, a).densify()
                    B = site_operator(n, k, b).densify()
                    np.testing.assert_allclose(A @ B, B @ A, atol=0)


def test_lower_reduces_weight():
    n = 4
    weights = excitation_numbers(n)
    for q in range(1, n + 1):
        act = site_operator(n, q, "lower").action
        assert np.all(weights[act.dst] == weights[act.src] - 1)


def test_w_state_values():
    w3 = w_state(3).amplitudes
    expected = np.zeros(8)
    expected[[4, 2, 1]] = 3 ** -0.5
    np.testing.assert_allclose(w3, expected, atol=1e-15)
    w2 = w_state(2).amplitudes
    np.testing.assert_allclose(w2, [0, 2**-0.5, 2**-0.5, 0])
    with pytest.raises(ValueError):
        w_state(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_constructor_norms(n):
    for psi in (w_state(n), ghz_state(n), ground_state(n)):
        assert abs(psi.norm() - 1) < 1e-12


@pytest.mark.parametrize("n", range(2, 7))
def test_w_state_lowering_chain(n):
    # Total lowering takes |W> to weight 0 in one step and to zero in the next.
    total = sum(site_operator(n, q, "lower").to_sparse() for q in range(1, n + 1))
    v = total @ w_state(n).amplitudes
    np.testing.assert_allclose(v, np.sqrt(n) * ground_state(n).amplitudes, atol=1e-14)
    np.testing.assert_allclose(total @ v, 0, atol=1e-14)


def test_hamming_weight_index():
    assert hamming_weight_index(3, 1) == [1, 2, 4]
    assert len(hamming_weight_index(4, 3)) == 4
    assert hamming_weight_index(5, 0) == [0]


def test_asymmetric_w_split():
    a, b = asymmetric_w_split(5, 3)
    assert a == pytest.approx(np.sqrt(3 / 5)) and b == pytest.approx(np.sqrt(2 / 5))
    assert asymmetric_w_split(4, 2) == pytest.approx((np.sqrt(0.5), np.sqrt(0.5)))
    with pytest.raises(ValueError):
        asymmetric_w_split(4, 4)


@given(st.integers(2, 8), st.data())
def test_asymmetric_split_normalized(n, data):
    k = data.draw(st.integers(1, n - 1))
    a, b = asymmetric_w_split(n, k)
    assert a * a + b * b == pytest.approx(1.0, abs=1e-14)


def test_asymmetric_split_reconstructs_w():
    n, k = 5, 3
    a, b = asymmetric_w_split(n, k)
    front = np.kron(w_state(k).amplitudes, ground_state(n - k).amplitudes)
    back = np.kron(ground_state(k).amplitudes, w_state(n - k).amplitudes)
    np.testing.assert_allclose(a * front + b * back, w_state(n).amplitudes, atol=1e-15)


def test_fidelity_examples():
    w3 = w_state(3)
    assert fidelity_to_pure(w3.projector(), w3) == pytest.approx(1.0)
    assert fidelity_to_pure(ground_state(3).projector(), w3) == pytest.approx(0.0)
    mixed = DensityMatrix(2, np.eye(4) / 4)
    assert fidelity_to_pure(mixed, w_state(2)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        fidelity_to_pure(mixed, w3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
def test_fidelity_linear_and_phase_invariant(seed, phase):
    rng = np.random.default_rng(seed)
    a = random_pure_state(3, rng).projector().matrix
    b = random_pure_state(3, rng).projector().matrix
    psi = random_pure_state(3, rng)
    t = rng.uniform()
    mix = t * a + (1 - t) * b
    lhs = fidelity_to_pure(mix, psi)
    rhs = t * fidelity_to_pure(a, psi) + (1 - t) * fidelity_to_pure(b, psi)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    rotated = np.exp(1j * phase) * psi.amplitudes
    assert fidelity_to_pure(mix, rotated) == pytest.approx(lhs, abs=1e-12)


def test_density_matrix_check():
    DensityMatrix(2, np.eye(4) / 4).check()
    with pytest.raises(ValueError):
        DensityMatrix(1, [[0.5, 0.1], [0.2, 0.5]]).check()
    with pytest.raises(ValueError):
        DensityMatrix(1, np.eye(2)).check()
    with pytest.raises(ValueError):
        DensityMatrix(1, [[1.5, 0], [0, -0.5]]).check()


def test_monomial_maps_bits():
    m = monomial(3, lowers=(1,), raises=(2, 3))
    v = m.apply(basis_state(3, 0b100).amplitudes)
    np.testing.assert_allclose(v, basis_state(3, 0b011).amplitudes)
    with pytest.raises(ValueError):
        monomial(3, lowers=(1,), raises=(1,))


def test_states_are_immutable():
    w = w_state(3)
    with pytest.raises(ValueError):
        w.amplitudes[0] = 1.0
