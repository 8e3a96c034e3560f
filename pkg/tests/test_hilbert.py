import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qfridge.errors import SpecError, StructureError
from qfridge.hilbert import (
    BITS,
    I010,
    I101,
    MachineSpec,
    basis_bits,
    basis_index,
    check_density_matrix,
    hermitian_eigenvalues,
    is_density_matrix,
    product_thermal,
    reduce_to_qubit,
    thermal_qubit,
)

from conftest import make_spec

positive = st.floats(min_value=1e-2, max_value=1e2)


def test_basis_ordering_puts_coherence_at_3_6():
    assert basis_index(0, 1, 0) == 3
    assert basis_index(1, 0, 1) == 6
    assert (I010, I101) == (2, 5)
    assert basis_bits(1) == (0, 0, 0)
    assert basis_bits(8) == (1, 1, 1)
    assert [basis_index(*basis_bits(k)) for k in range(1, 9)] == list(range(1, 9))


@pytest.mark.parametrize("E,T", [(1.0, 1.0), (100.0, 100.0)])
def test_thermal_ground_population_depends_on_ratio(E, T):
    assert thermal_qubit(E, T).r == pytest.approx(0.7310585786, abs=1e-10)


def test_thermal_far_from_resonance_keeps_tiny_excitation():
    q = thermal_qubit(101.0, 1.0)
    assert q.r == 1.0
    assert q.excited == pytest.approx(math.exp(-101.0), rel=1e-12)


@pytest.mark.parametrize("E,T", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -2.0)])
def test_thermal_rejects_nonpositive(E, T):
    with pytest.raises(SpecError):
        thermal_qubit(E, T)


@pytest.mark.parametrize(
    "changes",
    [dict(E_C=100.0), dict(T_C=2.0), dict(T_R=200.0), dict(p_R=-1e-3), dict(g=-1.0), dict(T_H=0.0)],
)
def test_spec_validation(changes):
    with pytest.raises(SpecError):
        make_spec(**changes)


def test_spec_derived_energy():
    spec = make_spec()
    assert spec.E_R == 101.0
    assert spec.total_rate == pytest.approx(1.02e-3)


@given(E=positive, T1=positive, T2=positive)
def test_r_decreases_with_temperature(E, T1, T2):
    if T1 == T2:
        return
    lo, hi = sorted((T1, T2))
    assert thermal_qubit(E, lo).r >= thermal_qubit(E, hi).r
    if E / lo - E / hi > 1e-6 and E / lo < 30:
        assert thermal_qubit(E, lo).r > thermal_qubit(E, hi).r


@given(T=positive, E1=positive, E2=positive)
def test_r_increases_with_gap(T, E1, E2):
    lo, hi = sorted((E1, E2))
    assert thermal_qubit(lo, T).r <= thermal_qubit(hi, T).r


@st.composite
def machine_specs(draw):
    E_C = draw(st.floats(0.1, 10))
    E_H = draw(st.floats(0.1, 200).filter(lambda e: abs(e - E_C) > 1e-3))
    T_C = draw(st.floats(0.1, 10))
    T_R = T_C * draw(st.floats(1, 5))
    T_H = T_R * draw(st.floats(1, 100))
    rates = [draw(st.floats(1e-6, 1e-2)) for _ in range(3)]
    g = draw(st.floats(0, 1e-1))
    return MachineSpec(E_C=E_C, E_H=E_H, T_C=T_C, T_R=T_R, T_H=T_H,
                       p_C=rates[0], p_R=rates[1], p_H=rates[2], g=g)


@given(machine_specs())
def test_product_thermal_is_valid_state(spec):
    # rho_88 ~ exp(-sum E/T) must stay above double underflow
    assume(sum(E / T for E, T in zip(spec.energies, spec.temperatures)) < 700)
    tau = product_thermal(spec)
    assert abs(np.trace(tau) - 1) <= 1e-12
    d = np.real(np.diag(tau))
    assert np.all(d > 0)
    # d_k < 1 shows up as a positive remainder; 1 - 1e-20 itself rounds to 1
    assert all(np.delete(d, k).sum() > 0 for k in range(8)) and np.all(d <= 1)
    for label, q in zip("CRH", spec.baths()):
        np.testing.assert_allclose(reduce_to_qubit(tau, label), q.matrix(), atol=1e-15)


def test_coherence_at_3_6_leaves_marginals_diagonal():
    rho = np.diag(np.full(8, 1 / 8)).astype(complex)
    rho[I010, I101] = 0.05j
    rho[I101, I010] = -0.05j
    for label in "CRH":
        red = reduce_to_qubit(rho, label)
        assert red[0, 1] == 0 and red[1, 0] == 0


def test_maximally_mixed_marginals():
    for label in "CRH":
        np.testing.assert_allclose(reduce_to_qubit(np.eye(8) / 8, label), np.eye(2) / 2, atol=1e-15)


def test_marginals_follow_bit_ordering():
    # |100> has C excited and R, H in ground
    rho = np.zeros((8, 8), complex)
    k = basis_index(1, 0, 0) - 1
    rho[k, k] = 1
    assert reduce_to_qubit(rho, "C")[1, 1] == 1
    assert reduce_to_qubit(rho, "R")[0, 0] == 1
    assert reduce_to_qubit(rho, "H")[0, 0] == 1
    assert BITS[k].tolist() == [1, 0, 0]


def _random_state(rng):
    X = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


@settings(max_examples=50)
@given(alpha=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_partial_trace_is_linear(alpha, seed):
    rng = np.random.default_rng(seed)
    r1, r2 = _random_state(rng), _random_state(rng)
    for label in "CRH":
        lhs = reduce_to_qubit(alpha * r1 + (1 - alpha) * r2, label)
        rhs = alpha * reduce_to_qubit(r1, label) + (1 - alpha) * reduce_to_qubit(r2, label)
        assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_hermitian_eigenvalue_examples():
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([0.2, 0.8])), [0.2, 0.8])
    a = 0.37
    np.testing.assert_allclose(hermitian_eigenvalues(np.array([[0, 1j * a], [-1j * a, 0]])), [-a, a])


def test_hermitian_eigenvalues_reject_non_hermitian():
    with pytest.raises(StructureError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))


def _count_below(M, x):
    """Number of eigenvalues of Hermitian M below x, by Sylvester inertia of M - xI."""
    A = np.array(M, dtype=complex) - x * np.eye(len(M))
    n, neg = len(A), 0
    for k in range(n):
        d = A[k, k].real
        if d == 0:
            d = 1e-300
        if d < 0:
            neg += 1
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:]) / d
    return neg


def _bisection_eigenvalues(M, tol=1e-13):
    bound = np.max(np.sum(np.abs(M), axis=1)) + 1
    out = []
    for k in range(len(M)):
        lo, hi = -bound, bound
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _count_below(M, mid) > k:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


@pytest.mark.parametrize("seed", range(5))
def test_hermitian_eigenvalues_match_inertia_bisection(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    M = 0.5 * (X + X.conj().T)
    np.testing.assert_allclose(hermitian_eigenvalues(M), _bisection_eigenvalues(M), atol=1e-9)


def test_density_matrix_checks():
    spec = make_spec()
    check_density_matrix(product_thermal(spec))
    bad = np.eye(8) / 8
    bad[0, 0] -= 0.2
    bad[1, 1] += 0.2 - 1e-8
    assert not is_density_matrix(bad)
    with pytest.raises(StructureError, match="trace"):
        check_density_matrix(np.eye(8) / 4)
