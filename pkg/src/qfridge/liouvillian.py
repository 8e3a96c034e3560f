"""Hamiltonian, reset-model generator, and its two linear representations.

The master equation is

    d rho/dt = -i [H0 + Hint, rho] + sum_i p_i (tau_i (x) Tr_i(rho) - rho)

It is available three ways:

* :func:`apply_generator` evaluates the right-hand side on an 8x8 matrix
  through explicit partial traces.
* :func:`build_full_superoperator` gives the 64x64 matrix acting on the
  column-stacked density matrix (Kraus form of each reset channel).
* :func:`build_reduced_system` gives the 9-dimensional affine system
  ``dv/dt = A v + u`` that is closed for states which are diagonal apart from
  the (3, 6) coherence.

Reduced coordinates are ``v = (rho_22, ..., rho_88, Re rho_36, Im rho_36)``
with ``rho_11 = 1 - sum(v[:7])`` implicit. The ground state |000> carries the
largest population, so reconstructing it from the trace costs nothing, while
the small populations (|111> sits near 1e-46 for the standard parameters)
stay explicit and keep full relative precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .hilbert import BITS, DIM, I010, I101, LABELS, MachineSpec

NV = 9
POPS = slice(0, 7)
RE = 7
IM = 8
# v index of the population of 0-based basis state k (k >= 1)
V_010 = I010 - 1
V_101 = I101 - 1

_TRACE_OUT = {
    0: ("abcaef->bcef", "ad,bcef->abcdef"),
    1: ("abcdbf->acdf", "be,acdf->abcdef"),
    2: ("abcdec->abde", "cf,abde->abcdef"),
}


def build_hamiltonian(spec: MachineSpec) -> np.ndarray:
    H = np.diag(BITS @ np.array(spec.energies, dtype=float)).astype(complex)
    H[I010, I101] = spec.g
    H[I101, I010] = spec.g
    return H


def apply_generator(spec: MachineSpec, rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation at ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    H = build_hamiltonian(spec)
    out = -1j * (H @ rho - rho @ H)
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    for i, bath in enumerate(spec.baths()):
        p = spec.rates[i]
        if p == 0:
            continue
        trace_sub, insert_sub = _TRACE_OUT[i]
        reset = np.einsum(insert_sub, bath.matrix(), np.einsum(trace_sub, t))
        out += p * (reset.reshape(DIM, DIM) - rho)
    return out


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(DIM, DIM, order="F")


@dataclass(frozen=True)
class FullSuperoperator:
    L: np.ndarray
    spec: MachineSpec

    def __matmul__(self, x):
        return self.L @ x


def _single_qubit_op(op: np.ndarray, position: int) -> np.ndarray:
    factors = [np.eye(2)] * 3
    factors[position] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def build_full_superoperator(spec: MachineSpec) -> FullSuperoperator:
    H = build_hamiltonian(spec)
    eye = np.eye(DIM)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    # reset channel rho -> sum_xy tau(x) K_xy rho K_xy^dag with K_xy = |x><y|_i
    for i, bath in enumerate(spec.baths()):
        p = spec.rates[i]
        if p == 0:
            continue
        channel = np.zeros((DIM * DIM, DIM * DIM))
        for x, weight in enumerate(bath.populations):
            for y in range(2):
                k = np.zeros((2, 2))
                k[x, y] = 1.0
                K = _single_qubit_op(k, i)
                channel += weight * np.kron(K.conj(), K)
        L = L + p * (channel - np.eye(DIM * DIM))
    return FullSuperoperator(L=L, spec=spec)


def population_rates(spec: MachineSpec) -> np.ndarray:
    """Rate matrix W of the diagonal under the reset channels: dP/dt = W P."""
    W = np.zeros((DIM, DIM))
    for i, bath in enumerate(spec.baths()):
        p = spec.rates[i]
        others = [m for m in range(3) if m != i]
        same = np.all(BITS[:, None, others] == BITS[None, :, others], axis=2)
        target = bath.populations[BITS[:, i]]
        W += p * (same * target[:, None] - np.eye(DIM))
    return W


@dataclass(frozen=True)
class ReducedSystem:
    A: np.ndarray
    u: np.ndarray
    spec: MachineSpec

    def rhs(self, v: np.ndarray) -> np.ndarray:
        return self.A @ v + self.u


def build_reduced_system(spec: MachineSpec) -> ReducedSystem:
    W = population_rates(spec)
    g = spec.g
    gamma = spec.total_rate
    A = np.zeros((NV, NV))
    u = np.zeros(NV)
    # rho_11 = 1 - sum_k rho_kk: dP_k = sum_j (W_kj - W_k0) P_j + W_k0
    A[POPS, POPS] = W[1:, 1:] - W[1:, :1]
    u[POPS] = W[1:, 0]
    # coherent exchange inside the degenerate pair, rho_36 = x + i y
    A[V_010, IM] += -2 * g
    A[V_101, IM] += 2 * g
    A[IM, V_101] += -g
    A[IM, V_010] += g
    # Tr_i kills rho_36 for every i, so the coherence only decays
    A[RE, RE] = -gamma
    A[IM, IM] = -gamma
    return ReducedSystem(A=A, u=u, spec=spec)


def embed(v: np.ndarray) -> np.ndarray:
    """Reduced coordinates -> 8x8 density matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (NV,):
        raise StructureError(f"reduced state must have 9 entries, got shape {v.shape}")
    rho = np.zeros((DIM, DIM), dtype=complex)
    diag = np.empty(DIM)
    diag[1:] = v[POPS]
    diag[0] = 1.0 - np.sum(v[POPS])
    rho[np.diag_indices(DIM)] = diag
    rho[I010, I101] = v[RE] + 1j * v[IM]
    rho[I101, I010] = v[RE] - 1j * v[IM]
    return rho


def extract(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """8x8 density matrix -> reduced coordinates.

    Raises StructureError if ``rho`` has coherences other than (3, 6)/(6, 3).
    """
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        raise StructureError(f"expected an 8x8 matrix, got shape {rho.shape}")
    off = rho.copy()
    off[np.diag_indices(DIM)] = 0
    off[I010, I101] = 0
    off[I101, I010] = 0
    stray = np.max(np.abs(off))
    if stray > tol:
        i, j = np.unravel_index(np.argmax(np.abs(off)), off.shape)
        raise StructureError(
            f"coherence outside (3,6): |rho[{i + 1},{j + 1}]| = {stray:.3e}"
        )
    v = np.empty(NV)
    v[POPS] = np.real(np.diag(rho))[1:]
    v[RE] = rho[I010, I101].real
    v[IM] = rho[I010, I101].imag
    return v


def full_populations(v: np.ndarray) -> np.ndarray:
    """All eight populations from one reduced state or a stack of them."""
    v = np.asarray(v, dtype=float)
    pops = v[..., POPS]
    return np.concatenate([1.0 - pops.sum(axis=-1, keepdims=True), pops], axis=-1)


__all__ = [
    "LABELS",
    "NV",
    "RE",
    "IM",
    "FullSuperoperator",
    "ReducedSystem",
    "apply_generator",
    "build_full_superoperator",
    "build_hamiltonian",
    "build_reduced_system",
    "embed",
    "extract",
    "full_populations",
    "population_rates",
    "unvec",
    "vec",
]
