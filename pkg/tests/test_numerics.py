import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qperceptron.numerics import (DensityMatrix, NumericsError, Operator, QuantumState,
                                  choose_steps, evolve, evolve_step, hermitian_eig, is_hermitian,
                                  kron, partial_trace, partial_transpose)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return 0.5 * (a + a.conj().T)


def random_density(rng, n):
    a = random_matrix(rng, n)
    r = a @ a.conj().T
    return r / np.trace(r).real


def random_pure(rng, n=2):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# --- containers ----------------------------------------------------------------

def test_state_dims_must_factor_length():
    with pytest.raises(NumericsError):
        QuantumState(np.ones(3), (2, 2))


def test_basis_state_from_digits():
    s = QuantumState.basis((2, 2), (1, 0))
    assert s.amplitudes[2] == 1 and s.norm == 1


def test_operator_tags_are_checked():
    with pytest.raises(NumericsError):
        Operator(np.array([[0, 1], [0, 0]]), (2,), "hermitian")
    with pytest.raises(NumericsError):
        Operator(2 * np.eye(2), (2,), "unitary")
    with pytest.raises(NumericsError):
        Operator(np.eye(2), (2,), "symmetric")


def test_operator_entries_are_read_only():
    op = Operator(np.eye(2), (2,))
    with pytest.raises(ValueError):
        op.entries[0, 0] = 3


def test_density_matrix_invariants():
    with pytest.raises(NumericsError):
        DensityMatrix(np.diag([0.6, 0.6]), (2,))
    with pytest.raises(NumericsError):
        DensityMatrix(np.diag([1.2, -0.2]), (2,))
    assert DensityMatrix(np.eye(4) / 4, (2, 2)).purity == pytest.approx(0.25)


# --- kron ------------------------------------------------------------------------

def test_kron_identities():
    i2 = Operator.identity((2,))
    k = kron(i2, i2)
    assert k.dims == (2, 2)
    np.testing.assert_array_equal(k.entries, np.eye(4))
    np.testing.assert_array_equal(kron(SZ, np.eye(2)).entries, np.diag([1, 1, -1, -1]))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (random_matrix(rng, 2) for _ in range(4))
    lhs = kron(a, b).entries @ kron(c, d).entries
    np.testing.assert_allclose(lhs, kron(a @ c, b @ d).entries, atol=1e-12 * np.abs(lhs).max())


# --- eigendecomposition ------------------------------------------------------------

def test_eig_small_cases():
    vals, vecs = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [1, 2, 3])
    np.testing.assert_allclose(np.abs(vecs.entries), np.eye(3)[:, [1, 2, 0]])
    np.testing.assert_allclose(hermitian_eig(SX)[0], [-1, 1])


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_eig_reconstructs_random_hermitian(seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, 8)
    vals, vecs = hermitian_eig(m)
    v = vecs.entries
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_allclose(v @ np.diag(vals) @ v.conj().T, m, atol=1e-9)
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(8)]
    assert np.all(np.abs(lead.imag) < 1e-12) and np.all(lead.real > 0)


def test_eig_rejects_bad_input():
    with pytest.raises(NumericsError, match="not Hermitian"):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(NumericsError):
        hermitian_eig(np.array([[np.nan, 0], [0, 1]]))


def test_is_hermitian_is_relative_to_scale():
    m = 1e9 * SX
    m[0, 1] += 1e-5
    assert is_hermitian(m, atol=1e-12)
    assert not is_hermitian(SX + np.array([[0, 1e-6], [0, 0]]), atol=1e-12)


# --- time stepping --------------------------------------------------------------------

def test_rabi_pi_pulse():
    omega = 2 * np.pi * 10e6
    h = lambda t: 0.5 * omega * SX  # noqa: E731
    out = evolve(h, QuantumState.basis((2,), 0), 0.0, np.pi / omega, 2000)
    assert abs(out.amplitudes[1]) ** 2 == pytest.approx(1.0, abs=1e-6)


def test_zero_generator_leaves_state():
    psi = QuantumState(np.array([0.6, 0.8j]), (2,))
    out = evolve_step(lambda t: np.zeros((2, 2)), psi, 0.0, 1e-9)
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


def test_relative_phase_oracle():
    delta, t = 2 * np.pi * 3e6, 0.4e-6
    h = lambda _: np.diag([0.0, delta])  # noqa: E731
    psi = QuantumState(np.array([1, 1]) / np.sqrt(2), (2,))
    out = evolve(h, psi, 0.0, t, 4000).amplitudes
    assert out[1] / out[0] == pytest.approx(np.exp(-1j * delta * t), abs=1e-8)


def test_step_rejects_nan_generator_and_bad_dt():
    psi = QuantumState.basis((2,), 0)
    with pytest.raises(NumericsError):
        evolve_step(lambda t: np.full((2, 2), np.nan), psi, 0.0, 1e-9)
    with pytest.raises(NumericsError):
        evolve_step(lambda t: np.zeros((2, 2)), psi, 0.0, 0.0)


def _driven(t):
    return np.array([[0.0, 0.7 * np.cos(3 * t)], [0.7 * np.cos(3 * t), -1.5 * t]], dtype=complex)


def rk4_order_factor(n=40):
    psi = QuantumState.basis((2,), 0)
    ref = evolve(_driven, psi, 0.0, 2.0, 64 * n).amplitudes
    e1 = np.abs(evolve(_driven, psi, 0.0, 2.0, n).amplitudes - ref).max()
    e2 = np.abs(evolve(_driven, psi, 0.0, 2.0, 2 * n).amplitudes - ref).max()
    return e1 / e2


def test_rk4_fourth_order_convergence():
    assert rk4_order_factor() >= 12


def test_choose_steps_bounds(caplog):
    assert choose_steps(1e-6, 0.0) == 200
    assert choose_steps(1e-6, 1e8, 0.01) == 10_000
    with caplog.at_level("WARNING"):
        assert choose_steps(1.0, 1e12, 0.01, max_steps=1000) == 1000
    assert "exceeds cap" in caplog.text
    with pytest.raises(NumericsError):
        choose_steps(float("nan"), 1.0)


# --- partial operations ------------------------------------------------------------------

def test_partial_trace_product_and_bell():
    rho = DensityMatrix(np.kron(np.diag([1, 0]), np.diag([0, 1])), (2, 2))
    np.testing.assert_allclose(partial_trace(rho, {0}).entries, np.diag([1, 0]))
    np.testing.assert_allclose(partial_trace(rho, 1).entries, np.diag([0, 1]))
    bell = DensityMatrix(np.outer(BELL, BELL), (2, 2))
    np.testing.assert_allclose(partial_trace(bell, {1}).entries, np.eye(2) / 2, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_partial_trace_unit_trace(seed):
    rho = DensityMatrix(random_density(np.random.default_rng(seed), 4), (2, 2))
    assert np.trace(partial_trace(rho, {0}).entries).real == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_three_qubits_keeps_order():
    a, b, c = np.diag([1, 0]), np.diag([0, 1]), np.eye(2) / 2
    rho = DensityMatrix(np.kron(np.kron(a, b), c), (2, 2, 2))
    np.testing.assert_allclose(partial_trace(rho, {0, 2}).entries, np.kron(a, c), atol=1e-15)


def test_partial_transpose_bell_spectrum():
    pt = partial_transpose(DensityMatrix(np.outer(BELL, BELL), (2, 2)), 1)
    np.testing.assert_allclose(np.linalg.eigvalsh(pt.entries), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_product_state():
    rng = np.random.default_rng(5)
    a, b = random_pure(rng), random_pure(rng)
    v = np.kron(a, b)
    rho = np.outer(v, v.conj())
    lam = np.linalg.eigvalsh(partial_transpose(DensityMatrix(rho, (2, 2)), 0).entries)
    np.testing.assert_allclose(lam, [0, 0, 0, 1], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_partial_transpose_separable_mixture(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(10))
    rho = np.zeros((4, 4), dtype=complex)
    for pk in p:
        v = np.kron(random_pure(rng), random_pure(rng))
        rho += pk * np.outer(v, v.conj())
    pt = partial_transpose(DensityMatrix(rho, (2, 2)), 1).entries
    assert np.linalg.eigvalsh(pt).min() >= -1e-10


def test_partial_transpose_needs_explicit_set_for_three_parties():
    rho = DensityMatrix(np.eye(8) / 8, (2, 2, 2))
    with pytest.raises(NumericsError):
        partial_transpose(rho, 0)
    assert partial_transpose(rho, {0, 2}).dims == (2, 2, 2)
