"""Scalar observables and closed-form predictions.

Witness index convention: for a bipartition X|Y the witness compares
|rho_36| with sqrt(rho_jj rho_{9-j,9-j}), where |j> and |9-j> are |010> and
|101> with the bits of one side exchanged. That gives j = 2 for C|RH, j = 1 for
R|CH and j = 4 for CR|H; the genuine tripartite witness sums all three.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import SpecError, StructureError
from .hilbert import I010, I101, MachineSpec, hermitian_eigenvalues, reduce_to_qubit

INFINITE_TOL = 1e-12

PARTITIONS: dict[str, frozenset[int]] = {
    "C|RH": frozenset({2}),
    "R|CH": frozenset({1}),
    "CR|H": frozenset({4}),
    "genuine": frozenset({1, 2, 4}),
}


@dataclass(frozen=True)
class Temperature:
    value: float
    regime: str  # "positive", "infinite" or "negative"

    def __float__(self):
        return float(self.value)


def temperature_from_populations(ground: float, excited: float, E: float) -> Temperature:
    """Temperature T with excited/ground = exp(-E/T).

    Both populations are taken as given rather than as r and 1 - r, so tiny
    excited populations keep their relative precision. A non-positive excited
    population reads as T = 0.
    """
    if abs(ground - excited) <= INFINITE_TOL:
        return Temperature(math.inf, "infinite")
    if excited <= 0:
        return Temperature(0.0, "positive")
    if ground <= 0:
        return Temperature(-0.0, "negative")
    T = E / math.log(ground / excited)
    return Temperature(T, "positive" if T > 0 else "negative")


def effective_temperature(reduced: np.ndarray, E: float) -> Temperature:
    """Temperature of a diagonal single-qubit state with gap E."""
    reduced = np.asarray(reduced)
    if reduced.shape != (2, 2):
        raise StructureError(f"expected a 2x2 state, got shape {reduced.shape}")
    if abs(reduced[0, 1]) > 1e-10 or abs(reduced[1, 0]) > 1e-10:
        raise StructureError(f"reduced state is not diagonal (|off-diagonal| = {abs(reduced[0, 1]):.3e})")
    return temperature_from_populations(float(reduced[0, 0].real), float(reduced[1, 1].real), E)


def qubit_temperatures(spec: MachineSpec, rho: np.ndarray) -> dict[str, Temperature]:
    return {
        label: effective_temperature(reduce_to_qubit(rho, label), spec.energy(label))
        for label in ("C", "R", "H")
    }


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Half the trace norm of rho1 - rho2."""
    diff = np.asarray(rho1) - np.asarray(rho2)
    return 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(diff))))


@dataclass(frozen=True)
class WitnessValue:
    value: float
    partition: str | None
    S: frozenset[int]

    @property
    def entangled(self) -> bool:
        return self.value > 0


def witness(rho: np.ndarray, S: str | Iterable[int]) -> WitnessValue:
    """W_S = 2 (|rho_36| - sum_{j in S} sqrt(rho_jj rho_{9-j,9-j})), 1-based indices.

    ``S`` is either a partition name from :data:`PARTITIONS` or an explicit
    index set drawn from {1, 2, 3, 4}.
    """
    if isinstance(S, str):
        try:
            indices = PARTITIONS[S]
        except KeyError:
            raise ValueError(f"unknown partition {S!r}; expected one of {sorted(PARTITIONS)}") from None
        name = S
    else:
        indices = frozenset(int(j) for j in S)
        if not indices <= {1, 2, 3, 4}:
            raise ValueError(f"witness indices must lie in 1..4, got {sorted(indices)}")
        name = next((k for k, v in PARTITIONS.items() if v == indices), None)
    rho = np.asarray(rho)
    diag = np.clip(np.real(np.diag(rho)), 0.0, None)
    total = sum(math.sqrt(diag[j - 1] * diag[8 - j]) for j in sorted(indices))
    value = 2.0 * (abs(rho[I010, I101]) - total)
    return WitnessValue(value=float(value), partition=name, S=indices)


def virtual_temperature(spec: MachineSpec) -> tuple[Temperature, bool]:
    """T_V = E_C / (E_R/T_R - E_H/T_H) and whether 0 <= T_V < T_C (the machine cools)."""
    denom = spec.E_R / spec.T_R - spec.E_H / spec.T_H
    if abs(denom) <= 1e-14:
        raise SpecError("virtual qubit is degenerate: E_R/T_R == E_H/T_H")
    T_V = spec.E_C / denom
    regime = "positive" if T_V > 0 else "negative"
    return Temperature(T_V, regime), bool(0 <= T_V < spec.T_C)


def _softplus(x: float) -> float:
    return float(np.logaddexp(0.0, x))


def max_entanglement(spec: MachineSpec, kind: str = "R|CH") -> float:
    """Largest witness value reachable from tau by the dissipation-free dynamics.

    Closed form with N = (1 + e^{E_C/T_C})(1 + e^{E_R/T_R})(1 + e^{E_H/T_H}):

        N^-1 |e^{E_R/T_R} - e^{E_C/T_C + E_H/T_H}| - k N^-1 e^{(E_C/T_C + E_R/T_R + E_H/T_H)/2}

    with k = 2 for a bipartition and 6 for genuine tripartite entanglement.
    Everything is evaluated in log space since E/T above ~709 overflows.
    """
    if kind == "genuine":
        k = 6.0
    elif kind in ("R|CH", "C|RH", "CR|H"):
        k = 2.0
    else:
        raise ValueError(f"unknown kind {kind!r}")
    xC = spec.E_C / spec.T_C
    xR = spec.E_R / spec.T_R
    xH = spec.E_H / spec.T_H
    log_n = _softplus(xC) + _softplus(xR) + _softplus(xH)
    a, b = xR, xC + xH
    if a == b:
        first = 0.0
    else:
        hi, gap = max(a, b), abs(a - b)
        first = math.exp(hi - log_n + math.log(-math.expm1(-gap)))
    second = k * math.exp(0.5 * (xC + xR + xH) - log_n)
    value = first - second
    if not math.isfinite(value):
        raise OverflowError(f"max_entanglement out of range for E/T = {(xC, xR, xH)}")
    return value


def swap_ground_population(spec: MachineSpec) -> float:
    """Cold-qubit ground population once |010> holds max(tau_33, tau_66)."""
    qc, qr, qh = spec.baths()
    tau33 = qc.r * qr.excited * qh.r
    tau66 = qc.excited * qr.r * qh.excited
    return qc.r - tau33 + max(tau33, tau66)


def min_unitary_temperature(spec: MachineSpec) -> tuple[Temperature, float]:
    """Coldest cold-qubit temperature reachable from tau without dissipation.

    Returns the temperature and the time pi/(2g) of the complete swap.
    """
    if not spec.g > 0:
        raise SpecError("min_unitary_temperature needs g > 0")
    qc, qr, qh = spec.baths()
    tau33 = qc.r * qr.excited * qh.r
    tau66 = qc.excited * qr.r * qh.excited
    ground = swap_ground_population(spec)
    excited = qc.excited + tau33 - max(tau33, tau66)
    return temperature_from_populations(ground, excited, spec.E_C), math.pi / (2 * spec.g)


__all__ = [
    "PARTITIONS",
    "Temperature",
    "WitnessValue",
    "effective_temperature",
    "max_entanglement",
    "min_unitary_temperature",
    "qubit_temperatures",
    "swap_ground_population",
    "temperature_from_populations",
    "trace_distance",
    "virtual_temperature",
    "witness",
]
