"""Basis conventions and state construction for the three-qubit fridge.

Qubits are ordered C, R, H with C the most significant bit, so the
computational basis state |c r h> has 1-based index ``4c + 2r + h + 1``.
With this convention |010> is index 3 and |101> is index 6, and the single
coherence the machine develops sits at matrix element (3, 6).

Units: hbar = k_B = 1. Energies and temperatures are usually quoted in units
of E_C and times in units of 1/E_C, but nothing here assumes E_C = 1.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import SpecError, StructureError

LABELS = ("C", "R", "H")
DIM = 8

# 0-based positions of |010> and |101>
I010 = 2
I101 = 5

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-10


def basis_index(c: int, r: int, h: int) -> int:
    """1-based index of |c r h>."""
    for b in (c, r, h):
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {(c, r, h)}")
    return 4 * c + 2 * r + h + 1


def basis_bits(index: int) -> tuple[int, int, int]:
    """Inverse of :func:`basis_index`."""
    if not 1 <= index <= DIM:
        raise ValueError(f"index must be in 1..8, got {index}")
    k = index - 1
    return (k >> 2) & 1, (k >> 1) & 1, k & 1


BITS = np.array([basis_bits(i) for i in range(1, DIM + 1)])


def _qubit_position(label: str) -> int:
    try:
        return LABELS.index(label)
    except ValueError:
        raise ValueError(f"unknown qubit label {label!r}; expected one of {LABELS}") from None


@dataclass(frozen=True)
class ThermalQubit:
    """Qubit in equilibrium with its bath.

    ``excited`` is computed independently of ``r`` so that states with
    E/T of order 100 keep a meaningful excited population instead of
    ``1 - r == 0``.
    """

    r: float
    excited: float
    E: float
    T: float

    @property
    def populations(self) -> np.ndarray:
        return np.array([self.r, self.excited])

    def matrix(self) -> np.ndarray:
        return np.diag(self.populations).astype(complex)


def thermal_qubit(E: float, T: float) -> ThermalQubit:
    """Ground population r = 1/(exp(-E/T) + 1) of a qubit with gap E at temperature T."""
    if not (E > 0 and T > 0):
        raise SpecError(f"energy and temperature must be positive, got E={E}, T={T}")
    x = E / T
    return ThermalQubit(r=float(expit(x)), excited=float(expit(-x)), E=float(E), T=float(T))


@dataclass(frozen=True)
class MachineSpec:
    """Physical parameters of the refrigerator.

    E_R is not a field: it is fixed to E_C + E_H so that |010> and |101> are
    degenerate.
    """

    E_C: float = 1.0
    E_H: float = 100.0
    T_C: float = 1.0
    T_R: float = 1.0
    T_H: float = 100.0
    p_C: float = 1e-5
    p_R: float = 1e-3
    p_H: float = 1e-5
    g: float = 1e-2

    def __post_init__(self):
        for name in ("E_C", "E_H", "T_C", "T_R", "T_H"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise SpecError(f"{name} must be positive and finite, got {value}")
        for name in ("p_C", "p_R", "p_H", "g"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise SpecError(f"{name} must be non-negative and finite, got {value}")
        if self.E_C == self.E_H:
            raise SpecError("E_C and E_H must differ")
        if not self.T_C <= self.T_R <= self.T_H:
            raise SpecError(
                f"temperatures must satisfy T_C <= T_R <= T_H, got {self.T_C}, {self.T_R}, {self.T_H}"
            )

    @property
    def E_R(self) -> float:
        return self.E_C + self.E_H

    @property
    def energies(self) -> tuple[float, float, float]:
        return self.E_C, self.E_R, self.E_H

    @property
    def temperatures(self) -> tuple[float, float, float]:
        return self.T_C, self.T_R, self.T_H

    @property
    def rates(self) -> tuple[float, float, float]:
        return self.p_C, self.p_R, self.p_H

    @property
    def total_rate(self) -> float:
        return self.p_C + self.p_R + self.p_H

    def energy(self, label: str) -> float:
        return self.energies[_qubit_position(label)]

    def bath(self, label: str) -> ThermalQubit:
        i = _qubit_position(label)
        return thermal_qubit(self.energies[i], self.temperatures[i])

    def baths(self) -> tuple[ThermalQubit, ThermalQubit, ThermalQubit]:
        return tuple(self.bath(label) for label in LABELS)

    def replace(self, **changes) -> "MachineSpec":
        return dataclasses.replace(self, **changes)


def product_thermal(spec: MachineSpec) -> np.ndarray:
    """tau_C (x) tau_R (x) tau_H as an 8x8 complex matrix."""
    pops = np.array([q.populations for q in spec.baths()])  # (3, 2)
    diag = pops[0, BITS[:, 0]] * pops[1, BITS[:, 1]] * pops[2, BITS[:, 2]]
    return np.diag(diag).astype(complex)


def reduce_to_qubit(rho: np.ndarray, label: str) -> np.ndarray:
    """Partial trace of an 8x8 state onto one qubit."""
    t = np.asarray(rho).reshape(2, 2, 2, 2, 2, 2)
    i = _qubit_position(label)
    subscripts = {
        0: "abcdbc->ad",
        1: "abcadc->bd",
        2: "abcabf->cf",
    }[i]
    return np.einsum(subscripts, t)


def hermitian_eigenvalues(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {M.shape}")
    dev = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
    if dev > tol:
        raise StructureError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def check_density_matrix(
    rho: np.ndarray,
    *,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    positivity_tol: float = POSITIVITY_TOL,
) -> None:
    """Raise StructureError unless ``rho`` is a valid 8x8 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        raise StructureError(f"expected an 8x8 matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > hermitian_tol:
        raise StructureError(f"not Hermitian: deviation {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise StructureError(f"trace {tr} differs from 1")
    lo = hermitian_eigenvalues(rho, tol=hermitian_tol)[0]
    if lo < positivity_tol:
        raise StructureError(f"not positive semidefinite: smallest eigenvalue {lo:.3e}")


def is_density_matrix(rho: np.ndarray, **tols) -> bool:
    try:
        check_density_matrix(rho, **tols)
    except StructureError:
        return False
    return True
