"""Time series, transient-minimum search, decay fits and parameter sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError, SpectralError
from .hilbert import BITS, MachineSpec, product_thermal
from .integrate import IntegratorConfig, evolve_rk4
from .liouvillian import IM, RE, ReducedSystem, build_reduced_system, embed, extract, full_populations
from .observables import (
    PARTITIONS,
    Temperature,
    max_entanglement,
    temperature_from_populations,
)
from .spectral import (
    Spectrum,
    SpectrumClassification,
    classify,
    decompose,
    eigendecompose,
    evolve_spectral,
    steady_state,
)

SOLVERS = ("auto", "spectral", "integrator")
SWEEPABLE = ("g", "p_C", "p_R", "p_H", "T_H", "E_H", "T_C", "T_R")
GOLDEN_RTOL = 1e-4
MIN_GRID = 2000
MAX_GRID = 1_000_000


def initial_state(spec: MachineSpec) -> np.ndarray:
    """Reduced coordinates of tau_C (x) tau_R (x) tau_H."""
    return extract(product_thermal(spec))


class Evolver:
    """Reduced-state trajectory from tau, by the spectral route or by RK4.

    ``solver='auto'`` uses the spectral solution and falls back to RK4 when the
    generator is singular or its eigenbasis is ill-conditioned.
    """

    def __init__(self, spec: MachineSpec, solver: str = "auto", v0=None,
                 config: IntegratorConfig | None = None):
        if solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {solver!r}")
        self.spec = spec
        self.system: ReducedSystem = build_reduced_system(spec)
        self.v0 = initial_state(spec) if v0 is None else np.asarray(v0, dtype=float)
        self.config = config or IntegratorConfig()
        self.spectrum: Spectrum | None = None
        self.classification: SpectrumClassification | None = None
        self.fallback_reason: str | None = None

        if solver in ("auto", "spectral"):
            try:
                self.spectrum = decompose(self.system, self.v0)
                self.solver = "spectral"
            except SpectralError as exc:
                if solver == "spectral":
                    raise
                self.fallback_reason = str(exc)
                self.solver = "integrator"
        else:
            self.solver = "integrator"

        if self.spectrum is not None:
            self.v_inf = self.spectrum.v_inf
        else:
            try:
                self.v_inf = steady_state(self.system)
            except SpectralError:
                self.v_inf = None
        try:
            spectrum = self.spectrum
            if spectrum is None and self.v_inf is not None:
                vals, vecs = eigendecompose(self.system)
                spectrum = Spectrum(vals, vecs, float(np.linalg.cond(vecs)),
                                    float(np.linalg.norm(self.system.A, 2)), self.v_inf)
            if spectrum is not None:
                self.classification = classify(spectrum)
        except SpectralError:
            self.classification = None

    def states(self, times) -> np.ndarray:
        """Reduced states at increasing, non-negative ``times``; shape (n, 9)."""
        times = np.asarray(times, dtype=float)
        if self.solver == "spectral":
            return evolve_spectral(self.spectrum, times)
        result = evolve_rk4(self.system, self.v0, float(times[-1]), self.config, times=times)
        return result.states

    def state(self, t: float) -> np.ndarray:
        if self.solver == "spectral":
            return evolve_spectral(self.spectrum, float(t))
        return evolve_rk4(self.system, self.v0, float(t), self.config).state


def qubit_populations(pops: np.ndarray) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """(ground, excited) populations of each qubit from 8-level populations."""
    pops = np.asarray(pops)
    out = {}
    for i, label in enumerate(("C", "R", "H")):
        excited = pops[..., BITS[:, i] == 1].sum(axis=-1)
        ground = pops[..., BITS[:, i] == 0].sum(axis=-1)
        out[label] = (ground, excited)
    return out


def _temperatures(spec: MachineSpec, pops: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    for label, (ground, excited) in qubit_populations(pops).items():
        E = spec.energy(label)
        out[label] = np.array([
            temperature_from_populations(float(a), float(b), E).value
            for a, b in zip(np.atleast_1d(ground), np.atleast_1d(excited))
        ])
    return out


def _witnesses(pops: np.ndarray, states: np.ndarray, indices) -> np.ndarray:
    coherence = np.hypot(states[:, RE], states[:, IM])
    p = np.clip(pops, 0.0, None)
    total = sum(np.sqrt(p[:, j - 1] * p[:, 8 - j]) for j in sorted(indices))
    return 2.0 * (coherence - total)


def _trace_distances(states: np.ndarray, v_inf: np.ndarray | None) -> np.ndarray:
    if v_inf is None:
        return np.full(len(states), np.nan)
    ref = embed(v_inf)
    diffs = np.array([embed(v) for v in states]) - ref
    eig = np.linalg.eigvalsh(diffs)
    return 0.5 * np.abs(eig).sum(axis=1)


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    D: float
    T_c: float
    T_r: float
    T_h: float
    W_R_CH: float
    W_genuine: float
    populations: tuple[float, ...]
    im_rho36: float


CSV_COLUMNS = ("t", "D", "T_c", "T_r", "T_h", "W_R_CH", "W_genuine",
               "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "im_rho36")


@dataclass
class TimeSeries:
    spec: MachineSpec
    times: np.ndarray
    states: np.ndarray
    D: np.ndarray
    T_c: np.ndarray
    T_r: np.ndarray
    T_h: np.ndarray
    W_R_CH: np.ndarray
    W_genuine: np.ndarray
    populations: np.ndarray
    im_rho36: np.ndarray
    solver: str
    classification: SpectrumClassification | None = None
    v_inf: np.ndarray | None = None

    def __post_init__(self):
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def record(self, i: int) -> ObservableRecord:
        return ObservableRecord(
            t=float(self.times[i]), D=float(self.D[i]), T_c=float(self.T_c[i]),
            T_r=float(self.T_r[i]), T_h=float(self.T_h[i]),
            W_R_CH=float(self.W_R_CH[i]), W_genuine=float(self.W_genuine[i]),
            populations=tuple(float(x) for x in self.populations[i]),
            im_rho36=float(self.im_rho36[i]),
        )

    def records(self):
        return [self.record(i) for i in range(len(self))]

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"t": self.times, "D": self.D, "T_c": self.T_c, "T_r": self.T_r,
                "T_h": self.T_h, "W_R_CH": self.W_R_CH, "W_genuine": self.W_genuine}
        for k in range(8):
            cols[f"p{k + 1}"] = self.populations[:, k]
        cols["im_rho36"] = self.im_rho36
        return cols

    def density_matrices(self) -> np.ndarray:
        return np.array([embed(v) for v in self.states])


def time_grid(t_final: float, n_samples: int, spacing: str = "linear",
              t_first: float | None = None) -> np.ndarray:
    """Sampling grid starting at t = 0.

    ``spacing='log'`` puts t = 0 first and ``n_samples - 1`` log-spaced points
    from ``t_first`` (default min(1, t_final/10)) to ``t_final``.
    """
    if not t_final > 0 or n_samples < 2:
        raise ValueError("need t_final > 0 and at least two samples")
    if spacing == "linear":
        return np.linspace(0.0, t_final, n_samples)
    if spacing == "log":
        t_first = min(1.0, t_final / 10) if t_first is None else t_first
        return np.concatenate([[0.0], np.geomspace(t_first, t_final, n_samples - 1)])
    raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")


def observe(spec: MachineSpec, times, states, v_inf, solver: str,
            classification=None) -> TimeSeries:
    states = np.asarray(states, dtype=float)
    pops = full_populations(states)
    temps = _temperatures(spec, pops)
    return TimeSeries(
        spec=spec,
        times=np.asarray(times, dtype=float),
        states=states,
        D=_trace_distances(states, v_inf),
        T_c=temps["C"],
        T_r=temps["R"],
        T_h=temps["H"],
        W_R_CH=_witnesses(pops, states, PARTITIONS["R|CH"]),
        W_genuine=_witnesses(pops, states, PARTITIONS["genuine"]),
        populations=pops,
        im_rho36=states[:, IM].copy(),
        solver=solver,
        classification=classification,
        v_inf=v_inf,
    )


def run_timeseries(spec: MachineSpec, t_final: float | None = None, n_samples: int = 2001,
                   solver: str = "auto", spacing: str = "linear", times=None,
                   config: IntegratorConfig | None = None, evolver: Evolver | None = None) -> TimeSeries:
    """All observables along the trajectory from tau on a sampling grid."""
    ev = evolver or Evolver(spec, solver, config=config)
    if times is None:
        if t_final is None:
            raise ValueError("either t_final or times is required")
        times = time_grid(t_final, n_samples, spacing)
    times = np.asarray(times, dtype=float)
    return observe(spec, times, ev.states(times), ev.v_inf, ev.solver, ev.classification)


def cold_excited(states: np.ndarray) -> np.ndarray:
    """Excited population of the cold qubit, rho_55 + rho_66 + rho_77 + rho_88."""
    return np.asarray(states)[..., 3:7].sum(axis=-1)


def _golden_section(f, a: float, b: float, rtol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rtol * max(abs(a), abs(b), 1e-300):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def search_pitch(spec: MachineSpec) -> float:
    scales = []
    if spec.g > 0:
        scales.append(math.pi / (20 * spec.g))
    if spec.total_rate > 0:
        scales.append(1.0 / spec.total_rate)
    return min(scales) if scales else math.inf


def find_min_temperature(spec: MachineSpec, t_max: float, solver: str = "auto",
                         evolver: Evolver | None = None) -> tuple[float, Temperature]:
    """Time and value of the lowest cold-qubit temperature on [0, t_max].

    A coarse grid (at least 2000 points, pitch no coarser than
    min(pi/(20g), 1/sum p)) locates the dip, then golden-section search refines
    it to relative time tolerance 1e-4. Lowest temperature is taken as lowest
    excited population, which is the same ordering in the cooling regime and
    keeps full precision.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    ev = evolver or Evolver(spec, solver)
    n = max(MIN_GRID, min(MAX_GRID, math.ceil(t_max / search_pitch(spec)) + 1))
    grid = np.linspace(0.0, t_max, n)
    exc = cold_excited(ev.states(grid))
    i = int(np.argmin(exc))
    if exc[i] >= exc[0] - 1e-14 * max(exc[0], 1e-300):
        i = 0
    if 0 < i < n - 1:
        t_star = _golden_section(lambda t: float(cold_excited(ev.state(t))), grid[i - 1], grid[i + 1], GOLDEN_RTOL)
        if cold_excited(ev.state(t_star)) > exc[i]:
            t_star = float(grid[i])
    else:
        t_star = float(grid[i])
    excited = float(cold_excited(ev.state(t_star)))
    ground = 1.0 - excited
    return t_star, temperature_from_populations(ground, excited, spec.E_C)


def local_minima(values: np.ndarray, atol: float = 0.0) -> np.ndarray:
    """Indices of strict interior local minima deeper than ``atol`` on both sides."""
    v = np.asarray(values)
    idx = []
    for i in range(1, len(v) - 1):
        if v[i] < v[i - 1] - atol and v[i] < v[i + 1] - atol:
            idx.append(i)
        elif v[i] < v[i - 1] - atol and v[i] == v[i + 1]:
            j = i
            while j < len(v) - 1 and v[j + 1] == v[i]:
                j += 1
            if j < len(v) - 1 and v[j + 1] > v[i] + atol:
                idx.append(i)
    return np.array(idx, dtype=int)


def fit_decay_rate(series: TimeSeries, window: tuple[float, float],
                   damping_rate: float | None = None) -> float:
    """Decay rate from a least-squares fit of log D over ``window``.

    The window must start after the coherent transient (t1 >= 5/damping_rate),
    taken from the series' spectrum when not given.
    """
    t1, t2 = window
    if not t2 > t1:
        raise ValueError("window must satisfy t1 < t2")
    if damping_rate is None and series.classification is not None:
        damping_rate = series.classification.damping_rate
    if damping_rate is not None and t1 < 5.0 / damping_rate:
        raise ValueError(
            f"window starts at {t1:g}, inside the coherent regime (needs t1 >= {5.0 / damping_rate:g})"
        )
    mask = (series.times >= t1) & (series.times <= t2)
    if mask.sum() < 3:
        raise ValueError("fewer than three samples inside the fit window")
    D = series.D[mask]
    if not np.all(np.isfinite(D)) or np.any(D <= 1e-12):
        raise FloatingPointError("trace distance below 1e-12 in the fit window; nothing to fit")
    slope = np.polyfit(series.times[mask], np.log(D), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class SweepRow:
    value: float
    steady_T_c: float = math.nan
    min_T_c: float = math.nan
    t_min: float = math.nan
    damping_rate: float = math.nan
    oscillation_angular_frequency: float = math.nan
    decay_rate: float = math.nan
    W_max_R_CH: float = math.nan
    W_max_genuine: float = math.nan
    solver: str = ""
    error: str | None = None


SWEEP_COLUMNS = ("value", "steady_T_c", "min_T_c", "t_min", "damping_rate",
                 "oscillation_angular_frequency", "decay_rate", "W_max_R_CH",
                 "W_max_genuine", "solver", "error")


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)


def summarize(spec: MachineSpec, value: float, t_max: float, solver: str = "auto") -> SweepRow:
    ev = Evolver(spec, solver)
    steady = math.nan
    if ev.v_inf is not None:
        exc = float(cold_excited(ev.v_inf))
        steady = temperature_from_populations(1.0 - exc, exc, spec.E_C).value
    t_min, T_min = find_min_temperature(spec, t_max, evolver=ev)
    cls = ev.classification
    return SweepRow(
        value=value,
        steady_T_c=steady,
        min_T_c=T_min.value,
        t_min=t_min,
        damping_rate=math.nan if cls is None else cls.damping_rate,
        oscillation_angular_frequency=math.nan if cls is None else cls.oscillation_angular_frequency,
        decay_rate=math.nan if cls is None else cls.decay_rate,
        W_max_R_CH=max_entanglement(spec, "R|CH"),
        W_max_genuine=max_entanglement(spec, "genuine"),
        solver=ev.solver,
    )


def _sweep_row(template: MachineSpec, parameter: str, value: float, t_max: float, solver: str) -> SweepRow:
    try:
        spec = template.replace(**{parameter: float(value)})
        return summarize(spec, float(value), t_max, solver)
    except (SpecError, SpectralError, ArithmeticError, ValueError) as exc:
        return SweepRow(value=float(value), error=f"{type(exc).__name__}: {exc}")


def sweep(template: MachineSpec, parameter: str, values, t_max: float = 500.0,
          solver: str = "auto", workers: int = 1) -> SweepResult:
    """One independent summary per value; failures are recorded per row."""
    if parameter not in SWEEPABLE:
        raise ValueError(f"cannot sweep {parameter!r}; choose from {SWEEPABLE}")
    values = np.sort(np.asarray(values, dtype=float))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _sweep_row(template, parameter, v, t_max, solver), values))
    else:
        rows = [_sweep_row(template, parameter, v, t_max, solver) for v in values]
    return SweepResult(parameter=parameter, values=values, rows=rows)
