"""Fixed-step fourth-order Runge-Kutta integration of the master equation.

Used as the independent check on the spectral route, in the full 64-dim
representation (Hamiltonian frame, no interaction picture) or the reduced
9-dim one. Both generators are constant linear maps, so one RK4 step of
size h is a fixed matrix ``P(h)``; it is obtained by running the RK4 stages on
the identity and then applied ``n`` times by binary powering. This is exactly
``n`` sequential RK4 steps in exact arithmetic, and it is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, IntegratorConfigError
from .hilbert import MachineSpec
from .liouvillian import FullSuperoperator, ReducedSystem, unvec, vec

STEP_BOUND_FACTOR = 0.05
_EPS = 1e-300


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def max_step(spec: MachineSpec, full: bool) -> float:
    """Largest admissible step: 0.05 of the fastest resolved time scale."""
    scales = [1.0 / (2 * spec.g + _EPS), 1.0 / (spec.total_rate + _EPS)]
    if full:
        levels = np.array([0, spec.E_H, spec.E_R, spec.E_R + spec.E_H, spec.E_C,
                           spec.E_C + spec.E_H, spec.E_C + spec.E_R,
                           spec.E_C + spec.E_R + spec.E_H])
        scales.append(1.0 / (np.ptp(levels) + _EPS))
    return STEP_BOUND_FACTOR * min(scales)


@dataclass(frozen=True)
class IntegratorConfig:
    """RK4 settings.

    ``dt=None`` picks ``safety`` times the fastest time scale, which keeps the
    global error of acceptance trajectories well below 1e-9.
    """

    dt: float | None = None
    max_steps: int = 10**12
    safety: float = 0.01
    method: str = field(default="rk4", init=False)

    def step_for(self, spec: MachineSpec, full: bool) -> float:
        bound = max_step(spec, full)
        if self.dt is None:
            return self.safety / STEP_BOUND_FACTOR * bound
        if not self.dt > 0:
            raise IntegratorConfigError(f"dt must be positive, got {self.dt}")
        if self.dt > bound:
            raise IntegratorConfigError(
                f"dt={self.dt:g} exceeds the resolution bound {bound:g}"
            )
        return self.dt


@dataclass
class RK4Result:
    state: np.ndarray
    times: np.ndarray | None = None
    states: np.ndarray | None = None
    steps: int = 0


class _Propagator:
    """Cache of RK4 one-step maps and their powers for a linear generator."""

    def __init__(self, M: np.ndarray):
        self.M = M
        self._step: dict[float, np.ndarray] = {}

    def step(self, h: float) -> np.ndarray:
        P = self._step.get(h)
        if P is None:
            eye = np.eye(self.M.shape[0], dtype=self.M.dtype)
            P = rk4_step(lambda Y: self.M @ Y, eye, h)
            self._step[h] = P
        return P

    def advance(self, y: np.ndarray, h: float, n: int) -> np.ndarray:
        if n == 0:
            return y
        return np.linalg.matrix_power(self.step(h), n) @ y


def _linear_form(generator, state0):
    """Homogeneous matrix, initial vector, and decoder for either generator."""
    if isinstance(generator, ReducedSystem):
        n = generator.A.shape[0]
        M = np.zeros((n + 1, n + 1))
        M[:n, :n] = generator.A
        M[:n, n] = generator.u
        y0 = np.append(np.asarray(state0, dtype=float), 1.0)
        return M, y0, (lambda y: y[..., :n]), generator.spec, False
    if isinstance(generator, FullSuperoperator):
        y0 = vec(np.asarray(state0, dtype=complex))
        decode = lambda y: (unvec(y) if y.ndim == 1 else np.array([unvec(r) for r in y]))
        return generator.L, y0, decode, generator.spec, True
    raise TypeError(f"unsupported generator type {type(generator).__name__}")


def evolve_rk4(generator, state0, t_final: float, config: IntegratorConfig | None = None,
               times=None) -> RK4Result:
    """Integrate from t = 0 to ``t_final``.

    With ``times`` (increasing, within [0, t_final]) the state is also
    recorded at each grid time, reached by stepping between grid points with
    the largest uniform step not above the configured dt.
    """
    config = config or IntegratorConfig()
    M, y, decode, spec, full = _linear_form(generator, state0)
    dt = config.step_for(spec, full)
    if t_final < 0:
        raise ValueError("t_final must be non-negative")

    grid = None if times is None else np.asarray(times, dtype=float)
    if grid is not None:
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > t_final:
            raise ValueError("times must be strictly increasing within [0, t_final]")
    stops = list(grid) if grid is not None else []
    if not stops or stops[-1] < t_final:
        stops.append(float(t_final))

    prop = _Propagator(M)
    t = 0.0
    total = 0
    recorded = []
    for stop in stops:
        span = stop - t
        n = math.ceil(span / dt - 1e-12) if span > 0 else 0
        if total + n > config.max_steps:
            raise IntegratorConfigError(
                f"run needs more than max_steps={config.max_steps} steps"
            )
        if n:
            y = prop.advance(y, span / n, n)
        total += n
        t = stop
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite state by step {total}", step_index=total)
        recorded.append(y.copy())

    states = None
    if grid is not None:
        states = decode(np.array(recorded[: len(grid)]))
    return RK4Result(state=decode(y), times=grid, states=states, steps=total)


__all__ = ["IntegratorConfig", "RK4Result", "evolve_rk4", "max_step", "rk4_step"]
