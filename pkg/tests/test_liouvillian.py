import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfridge.errors import StructureError
from qfridge.hilbert import DIM, I010, I101, product_thermal
from qfridge.integrate import evolve_rk4
from qfridge.liouvillian import (
    IM,
    NV,
    POPS,
    RE,
    apply_generator,
    build_full_superoperator,
    build_hamiltonian,
    build_reduced_system,
    embed,
    extract,
    full_populations,
    unvec,
    vec,
)
from qfridge.observables import trace_distance
from qfridge.spectral import steady_state

from conftest import make_spec


def random_density(rng):
    X = rng.normal(size=(DIM, DIM)) + 1j * rng.normal(size=(DIM, DIM))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def random_reduced(rng):
    """Reduced coordinates of a random valid state of the restricted form."""
    p = rng.dirichlet(np.ones(DIM))
    bound = np.sqrt(p[I010] * p[I101])
    phase = rng.uniform(0, 2 * np.pi)
    c = rng.uniform(0, 1) * bound * np.exp(1j * phase)
    v = np.empty(NV)
    v[POPS] = p[1:]
    v[RE], v[IM] = c.real, c.imag
    return v


def test_hamiltonian_diagonal_without_coupling():
    spec = make_spec(g=0.0)
    E_C, E_R, E_H = spec.energies
    expected = [0, E_H, E_R, E_R + E_H, E_C, E_C + E_H, E_C + E_R, E_C + E_R + E_H]
    np.testing.assert_array_equal(build_hamiltonian(spec), np.diag(expected))


def test_hamiltonian_coupling_only_in_degenerate_pair():
    H = build_hamiltonian(make_spec(g=1e-2))
    assert H[I010, I101] == H[I101, I010] == 1e-2
    off = H - np.diag(np.diag(H))
    off[I010, I101] = off[I101, I010] = 0
    assert not off.any()
    assert H[I010, I010] == H[I101, I101]


def test_thermal_state_is_fixed_point_without_coupling():
    spec = make_spec(g=0.0)
    assert not apply_generator(spec, product_thermal(spec)).any()


def test_unitary_drive_on_degenerate_pair():
    spec = make_spec(p_C=0.0, p_R=0.0, p_H=0.0, g=0.03)
    a, b = 0.3, 0.1
    rho = np.diag([0.2, 0.1, a, 0.05, 0.05, b, 0.1, 0.1]).astype(complex)
    d = apply_generator(spec, rho)
    assert np.all(np.diag(d) == 0)
    assert d[I010, I101] == pytest.approx(-1j * spec.g * (b - a))
    assert d[I101, I010] == pytest.approx(np.conj(d[I010, I101]))
    d[I010, I101] = d[I101, I010] = 0
    assert not d.any()


def test_full_superoperator_matches_generator(rng):
    spec = make_spec(g=3e-2, p_C=2e-3, p_R=5e-3, p_H=1e-3)
    L = build_full_superoperator(spec)
    for _ in range(100):
        rho = random_density(rng)
        np.testing.assert_allclose(unvec(L @ vec(rho)), apply_generator(spec, rho), atol=1e-12, rtol=0)


def test_full_superoperator_preserves_trace():
    L = build_full_superoperator(make_spec()).L
    trace_row = vec(np.eye(DIM))
    assert np.max(np.abs(trace_row @ L)) <= 1e-12


def test_full_superoperator_decouples_populations_without_coupling():
    L = build_full_superoperator(make_spec(g=0.0)).L
    diag = np.array([k * DIM + k for k in range(DIM)])
    off = np.setdiff1d(np.arange(DIM * DIM), diag)
    assert not L[np.ix_(diag, off)].any()
    assert not L[np.ix_(off, diag)].any()
    block = L[np.ix_(diag, diag)].real
    assert np.all(block - np.diag(np.diag(block)) >= 0)
    assert np.all(np.diag(block) <= 0)


def test_full_superoperator_annihilates_steady_state():
    spec = make_spec()
    rho_inf = embed(steady_state(build_reduced_system(spec)))
    L = build_full_superoperator(spec)
    assert np.max(np.abs(L @ vec(rho_inf))) <= 1e-9


@settings(max_examples=50)
@given(seed=st.integers(0, 2**32 - 1), g=st.floats(0, 0.1), p=st.lists(st.floats(0, 1e-2), min_size=3, max_size=3))
def test_reduced_system_projects_generator(seed, g, p):
    spec = make_spec(g=g, p_C=p[0], p_R=p[1], p_H=p[2])
    sys = build_reduced_system(spec)
    v = random_reduced(np.random.default_rng(seed))
    expected = extract(apply_generator(spec, embed(v)), tol=1e-12)
    np.testing.assert_allclose(sys.rhs(v), expected, atol=1e-12, rtol=0)


def test_coherence_rows():
    spec = make_spec(g=2e-2)
    sys = build_reduced_system(spec)
    gamma = spec.total_rate
    v = random_reduced(np.random.default_rng(3))
    rho33, rho66 = v[I010 - 1], v[I101 - 1]
    assert sys.rhs(v)[IM] == pytest.approx(-spec.g * (rho66 - rho33) - gamma * v[IM], abs=1e-15)
    assert sys.rhs(v)[RE] == pytest.approx(-gamma * v[RE], abs=1e-15)


def test_unitary_reduced_system_is_homogeneous():
    assert not build_reduced_system(make_spec(p_C=0.0, p_R=0.0, p_H=0.0)).u.any()


def test_extract_thermal_state():
    v = extract(product_thermal(make_spec()))
    assert v[RE] == 0 and v[IM] == 0


def test_embed_extract_round_trip(rng):
    for _ in range(100):
        v = random_reduced(rng)
        assert np.max(np.abs(extract(embed(v)) - v)) <= 1e-15
        rho = embed(v)
        assert np.max(np.abs(embed(extract(rho)) - rho)) <= 1e-15


def test_extract_rejects_stray_coherence():
    rho = np.eye(DIM, dtype=complex) / DIM
    rho[1, 4] = rho[4, 1] = 0.01
    with pytest.raises(StructureError, match=r"rho\[2,5\]"):
        extract(rho)


def test_full_populations_fill_ground_state():
    v = random_reduced(np.random.default_rng(0))
    pops = full_populations(v)
    assert pops.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_array_equal(pops[1:], v[POPS])
    assert full_populations(np.stack([v, v])).shape == (2, DIM)


@pytest.mark.parametrize("g", [1e-2, 1e-4])
def test_full_dynamics_stays_in_restricted_form(g):
    spec = make_spec(g=g, p_C=1e-3, p_R=5e-3, p_H=1e-3)
    times = np.linspace(0, 400, 21)
    rho0 = product_thermal(spec)
    full = evolve_rk4(build_full_superoperator(spec), rho0, times[-1], times=times).states
    reduced = evolve_rk4(build_reduced_system(spec), extract(rho0), times[-1], times=times).states
    for rho, v in zip(full, reduced):
        stray = rho.copy()
        stray[np.diag_indices(DIM)] = 0
        stray[I010, I101] = stray[I101, I010] = 0
        assert np.max(np.abs(stray)) <= 1e-12
        assert abs(rho[I010, I101].real) <= 1e-12
        assert trace_distance(rho, embed(v)) <= 1e-9
