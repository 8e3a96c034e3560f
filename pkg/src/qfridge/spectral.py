"""Spectral solution of the reduced affine system dv/dt = A v + u.

v(t) = v_inf + sum_j c_j exp(lambda_j t) e_j with v_inf = -A^{-1} u. The
eigendecomposition itself is LAPACK's (Hessenberg reduction followed by
shifted QR, via :func:`numpy.linalg.eig`); this module adds the checks and
bookkeeping around it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectralError
from .liouvillian import IM, NV, POPS, RE, ReducedSystem

STEADY_COND_MAX = 1e14
EIGVEC_COND_MAX = 1e12
REAL_TOL = 1e-10  # |Im lambda| below REAL_TOL * ||A|| counts as real
CLUSTER_TOL = 1e-8
RESIDUAL_TOL = 1e-9


def _scale(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def steady_state(sys: ReducedSystem) -> np.ndarray:
    """v_inf = -A^{-1} u."""
    cond = np.linalg.cond(sys.A)
    if not np.isfinite(cond) or cond >= STEADY_COND_MAX:
        raise SpectralError(
            f"generator is singular or ill-conditioned (cond={cond:.3e})",
            stage="steady_state",
            condition=cond,
        )
    v_inf = -np.linalg.solve(sys.A, sys.u)
    residual = np.max(np.abs(sys.A @ v_inf + sys.u))
    if residual > 1e-11:
        raise SpectralError(
            f"steady-state residual {residual:.3e} too large",
            stage="steady_state",
            condition=cond,
        )
    return v_inf


def eigendecompose(sys: ReducedSystem) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit eigenvectors of A.

    Eigenvalues are ordered by decreasing real part; a complex pair is stored
    as (lambda, conj(lambda)) with Im lambda > 0 first and exactly conjugate
    eigenvectors. Numerically real eigenvalues are snapped to the real axis.
    """
    A = sys.A
    scale = _scale(A)
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}", stage="eigendecompose") from exc

    tol = REAL_TOL * max(scale, np.finfo(float).tiny)
    real = np.abs(w.imag) <= tol
    vals: list[complex] = []
    vecs: list[np.ndarray] = []
    for j in np.flatnonzero(real):
        e = V[:, j].real if np.all(np.abs(V[:, j].imag) <= 1e-12) else V[:, j].real + V[:, j].imag
        vals.append(complex(w[j].real, 0.0))
        vecs.append(e / np.linalg.norm(e))
    upper = [j for j in np.flatnonzero(~real) if w[j].imag > 0]
    lower = [j for j in np.flatnonzero(~real) if w[j].imag < 0]
    if len(upper) != len(lower):
        raise SpectralError("complex eigenvalues do not come in conjugate pairs", stage="eigendecompose")
    for j in upper:
        e = V[:, j] / np.linalg.norm(V[:, j])
        vals += [complex(w[j]), complex(w[j]).conjugate()]
        vecs += [e, e.conj()]

    vals_arr = np.array(vals)
    vecs_arr = np.array(vecs).T.astype(complex)
    order = np.lexsort((-vals_arr.imag, -vals_arr.real))
    # keep each pair adjacent with Im > 0 first
    ordered: list[int] = []
    for j in order:
        if j in ordered:
            continue
        ordered.append(j)
        if vals_arr[j].imag > 0:
            partner = next(
                k for k in order
                if k not in ordered and vals_arr[k] == np.conj(vals_arr[j])
            )
            ordered.append(partner)
    vals_arr = vals_arr[ordered]
    vecs_arr = vecs_arr[:, ordered]

    residuals = np.linalg.norm(A @ vecs_arr - vecs_arr * vals_arr, axis=0)
    worst = float(np.max(residuals))
    if worst > RESIDUAL_TOL * max(scale, np.finfo(float).tiny):
        raise SpectralError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:g}*||A||",
            stage="eigendecompose",
        )
    return vals_arr, vecs_arr


def solve_coefficients(eigenvectors: np.ndarray, v0: np.ndarray, v_inf: np.ndarray) -> np.ndarray:
    """Coefficients c with sum_j c_j e_j = v0 - v_inf."""
    cond = np.linalg.cond(eigenvectors)
    if not np.isfinite(cond) or cond >= EIGVEC_COND_MAX:
        raise SpectralError(
            f"eigenbasis is ill-conditioned (cond={cond:.3e}); use the integrator instead",
            stage="coefficients",
            condition=cond,
        )
    rhs = np.asarray(v0, dtype=float) - np.asarray(v_inf, dtype=float)
    c = np.linalg.solve(eigenvectors, rhs.astype(complex))
    residual = np.max(np.abs(eigenvectors @ c - rhs))
    if residual > 1e-9:
        raise SpectralError(
            f"coefficient residual {residual:.3e}", stage="coefficients", condition=cond
        )
    return c


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    condition_number: float
    scale: float
    v_inf: np.ndarray
    v0: np.ndarray | None = None
    coefficients: np.ndarray | None = None

    def clusters(self, tol: float = CLUSTER_TOL) -> list[list[int]]:
        """Groups of eigenvalue indices closer than ``tol * ||A||``."""
        groups: list[list[int]] = []
        for j, lam in enumerate(self.eigenvalues):
            for group in groups:
                if abs(self.eigenvalues[group[0]] - lam) <= tol * self.scale:
                    group.append(j)
                    break
            else:
                groups.append([j])
        return groups


def decompose(sys: ReducedSystem, v0: np.ndarray | None = None) -> Spectrum:
    """Full spectral solution; with ``v0`` the coefficients are solved too."""
    v_inf = steady_state(sys)
    vals, vecs = eigendecompose(sys)
    cond = float(np.linalg.cond(vecs))
    coeffs = None
    if v0 is not None:
        v0 = np.asarray(v0, dtype=float).copy()
        coeffs = solve_coefficients(vecs, v0, v_inf)
    return Spectrum(
        eigenvalues=vals,
        eigenvectors=vecs,
        condition_number=cond,
        scale=_scale(sys.A),
        v_inf=v_inf,
        v0=v0,
        coefficients=coeffs,
    )


def evolve_spectral(spectrum: Spectrum, t) -> np.ndarray:
    """Reduced state at time(s) ``t``; shape (9,) for scalar t, (n, 9) otherwise.

    Evaluated as v0 + sum_j c_j (exp(lambda_j t) - 1) e_j, which equals
    v_inf + sum_j c_j exp(lambda_j t) e_j but does not cancel the large
    steady-state populations against the transient near t = 0.
    """
    if spectrum.coefficients is None or spectrum.v0 is None:
        raise ValueError("spectrum has no initial condition; call decompose(sys, v0)")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    ts = np.atleast_1d(t_arr)
    growth = np.expm1(np.outer(ts, spectrum.eigenvalues))  # (n, 9)
    delta = (growth * spectrum.coefficients) @ spectrum.eigenvectors.T
    residue = np.max(np.abs(delta.imag)) if delta.size else 0.0
    if residue > 1e-10:
        raise SpectralError(f"imaginary residue {residue:.3e} in real solution", stage="evolve")
    out = spectrum.v0 + delta.real
    return out[0] if t_arr.ndim == 0 else out


@dataclass(frozen=True)
class SpectrumClassification:
    """Named eigenvalues of the reduced generator.

    ``lambda_cp`` is the complex pair member with Im > 0, or None when the
    spectrum is numerically real. ``coherence_mode`` is the eigenvalue whose
    eigenvector weighs most on Im rho_36; it coincides with ``lambda_cp``
    whenever a pair exists and is used for the damping rate otherwise.
    """

    lambda_max: complex
    lambda_cp: complex | None
    coherence_mode: complex
    damping_rate: float
    oscillation_angular_frequency: float
    decay_rate: float

    @property
    def overdamped(self) -> bool:
        return self.lambda_cp is None


def _weight(vec: np.ndarray, idx) -> float:
    return float(np.linalg.norm(vec[idx]) / np.linalg.norm(vec))


def classify(spectrum: Spectrum) -> SpectrumClassification:
    vals = spectrum.eigenvalues
    vecs = spectrum.eigenvectors
    tol = REAL_TOL * spectrum.scale
    real_idx = [j for j in range(len(vals)) if abs(vals[j].imag) <= tol]
    pair_idx = [j for j in range(len(vals)) if vals[j].imag > tol]

    if not real_idx:
        raise SpectralError("no real eigenvalue found", stage="classify")
    top = max(vals[j].real for j in real_idx)
    ties = [j for j in real_idx if vals[j].real >= top - CLUSTER_TOL * spectrum.scale]
    j_max = max(ties, key=lambda j: (_weight(vecs[:, j], POPS), -j))
    lambda_max = complex(vals[j_max].real, 0.0)

    lambda_cp = None
    if pair_idx:
        if len(pair_idx) == 1:
            j_cp = pair_idx[0]
        else:
            j_cp = max(pair_idx, key=lambda j: (_weight(vecs[:, j], [RE, IM]), abs(vals[j].imag)))
        lambda_cp = complex(vals[j_cp])
        coherence = lambda_cp
    else:
        candidates = [j for j in range(len(vals)) if _weight(vecs[:, j], [RE]) < 0.5]
        j_coh = max(candidates, key=lambda j: _weight(vecs[:, j], [IM]))
        coherence = complex(vals[j_coh].real, 0.0)

    return SpectrumClassification(
        lambda_max=lambda_max,
        lambda_cp=lambda_cp,
        coherence_mode=coherence,
        damping_rate=-coherence.real,
        oscillation_angular_frequency=0.0 if lambda_cp is None else lambda_cp.imag,
        decay_rate=-lambda_max.real,
    )


__all__ = [
    "NV",
    "Spectrum",
    "SpectrumClassification",
    "classify",
    "decompose",
    "eigendecompose",
    "evolve_spectral",
    "solve_coefficients",
    "steady_state",
]
