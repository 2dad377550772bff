"""
Time-domain evolution of the master equations on the tortoise line.

Method of lines for d_t^2 Phi - d_*^2 Phi + V_eff Phi = 0 written as the first-order
pair (Phi, Pi = d_t Phi), classical RK4 in time, outflow conditions
d_t Phi = +d_* Phi (horizon end) and d_t Phi = -d_* Phi (outer end).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import least_squares

from .background import inverse_tortoise
from .errors import ConvergenceError, DomainError
from .master import MasterProblem
from .tools.finite_diff import diff_matrices

logger = logging.getLogger(__name__)

MAX_CFL = 0.9


@dataclass
class EvolutionRun:
    """Parameters of a single 1+1 run."""

    problem: MasterProblem
    rstar_min: float = -300.0
    rstar_max: float = 2300.0
    h: float = 0.1
    cfl: float = 0.5
    duration: float = 2000.0
    pulse_center: float = 10.0
    pulse_width: float = 3.0
    observers: List[float] = field(default_factory=lambda: [50.0])
    order: int = 2
    energy_every: int = 20
    initial_data: Optional[Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]] = None

    @property
    def dt(self) -> float:
        return self.cfl * self.h

    @property
    def scheme(self) -> str:
        return f'FD{self.order}'

    def check(self):
        if not 0 < self.cfl <= MAX_CFL:
            raise DomainError(f"CFL factor must lie in (0, {MAX_CFL}], got {self.cfl}")
        if self.order not in (2, 4):
            raise DomainError(f"finite-difference order must be 2 or 4, got {self.order}")
        if self.h <= 0 or self.duration <= 0:
            raise DomainError("grid spacing and duration must be positive")
        for obs in self.observers:
            if not self.rstar_min < obs < self.rstar_max:
                raise DomainError(f"observer r_* = {obs} lies outside the grid")

    def reflection_free_until(self) -> float:
        """Earliest time at which a boundary signal can reach an observer."""
        lo, hi = self.pulse_center - 3 * self.pulse_width, self.pulse_center + 3 * self.pulse_width
        times = []
        for obs in self.observers:
            times.append((lo - self.rstar_min) + (obs - self.rstar_min))
            times.append((self.rstar_max - hi) + (self.rstar_max - obs))
        return min(times)


@dataclass
class EvolutionResult:
    run: EvolutionRun
    times: np.ndarray
    series: Dict[float, np.ndarray]
    energy_times: np.ndarray
    energy: np.ndarray
    steps: int

    def to_rows(self, observer: float) -> List[Tuple[float, float, float]]:
        phi = self.series[observer]
        return [(float(t), float(np.real(p)), float(np.imag(p))) for t, p in zip(self.times, phi)]


def _potential_on_grid(problem: MasterProblem, rstar: np.ndarray) -> np.ndarray:
    r = inverse_tortoise(problem.params, rstar)
    inside = r > 2 * problem.mass * (1 + 1e-12)
    v = np.zeros_like(rstar)
    if problem.custom is not None:
        v[inside] = problem.custom(r[inside])
    else:
        v[inside] = problem.effective_potential(r[inside])
    return v


def gaussian_data(center: float, width: float) -> Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]:
    """Time-symmetric Gaussian pulse."""
    def data(x):
        return np.exp(-((x - center) / width) ** 2 / 2), np.zeros_like(x)
    return data


def discrete_energy(phi: np.ndarray, pi: np.ndarray, D1, v: np.ndarray, h: float) -> float:
    dphi = D1 @ phi
    return float(np.sum(np.abs(pi) ** 2 + np.abs(dphi) ** 2 + v * np.abs(phi) ** 2) * h)


def evolve(run: EvolutionRun, progress_callback: Optional[Callable[[str], None]] = None) -> EvolutionResult:
    """
    Evolve the run and record Phi at every observer after every step.

    Raises:
        DomainError: If the run parameters are inadmissible
        ConvergenceError: If the solution develops NaN or overflows
    """
    run.check()
    n = int(round((run.rstar_max - run.rstar_min) / run.h)) + 1
    x = run.rstar_min + run.h * np.arange(n)
    v = _potential_on_grid(run.problem, x)
    D = diff_matrices(x, run.scheme)
    D1, D2 = D[1], D[2]
    data = run.initial_data or gaussian_data(run.pulse_center, run.pulse_width)
    phi, pi = (np.asarray(a, dtype=float).copy() for a in data(x))

    obs_idx = {obs: int(round((obs - run.rstar_min) / run.h)) for obs in run.observers}
    steps = int(np.ceil(run.duration / run.dt))
    dt = run.dt

    d_left = D1[0].toarray().ravel()
    d_right = D1[-1].toarray().ravel()

    def rhs(phi, pi):
        dphi = pi.copy()
        dpi = D2 @ phi - v * phi
        dphi[0], dpi[0] = d_left @ phi, d_left @ pi
        dphi[-1], dpi[-1] = -(d_right @ phi), -(d_right @ pi)
        return dphi, dpi

    logger.info(f"Evolving {run.problem.describe()}: {n} points, {steps} steps, dt={dt:g}")
    times = np.empty(steps + 1)
    series = {obs: np.empty(steps + 1) for obs in run.observers}
    e_times, energy = [], []
    times[0] = 0.0
    for obs, i in obs_idx.items():
        series[obs][0] = phi[i]
    for step in range(1, steps + 1):
        k1 = rhs(phi, pi)
        k2 = rhs(phi + dt / 2 * k1[0], pi + dt / 2 * k1[1])
        k3 = rhs(phi + dt / 2 * k2[0], pi + dt / 2 * k2[1])
        k4 = rhs(phi + dt * k3[0], pi + dt * k3[1])
        phi = phi + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        pi = pi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        times[step] = step * dt
        for obs, i in obs_idx.items():
            series[obs][step] = phi[i]
        if not np.all(np.isfinite(phi)):
            bad = int(np.argmax(~np.isfinite(phi)))
            raise ConvergenceError(f"non-finite field at t={step * dt:g}, r_*={x[bad]:g}")
        if step % run.energy_every == 0:
            e_times.append(step * dt)
            energy.append(discrete_energy(phi, pi, D1, v, run.h))
        if progress_callback and step % max(steps // 10, 1) == 0:
            progress_callback(f"⏱️  t = {step * dt:.1f} / {run.duration:g}")

    return EvolutionResult(run, times, series, np.array(e_times), np.array(energy), steps)


def energy_monitor(result: EvolutionResult, start: Optional[float] = None,
                   end: Optional[float] = None, tolerance: float = 1e-6) -> Dict:
    """
    Relative energy drift per 10^3 steps between start and end.

    Returns:
        Dict with 'drift', 'max_increase', 'monotone' and 'growing'
    """
    t, e = result.energy_times, result.energy
    if len(e) < 2:
        raise DomainError("energy series too short; evolve longer or sample more often")
    start = t[0] if start is None else start
    end = t[-1] if end is None else end
    mask = (t >= start) & (t <= end)
    t, e = t[mask], e[mask]
    scale = max(abs(e[0]), 1e-300)
    increments = np.diff(e) / scale
    span = t[-1] - t[0]
    drift = float((e[-1] - e[0]) / scale * 1000 * result.run.dt / span) if span > 0 else 0.0
    max_inc = float(np.max(increments)) if len(increments) else 0.0
    return {
        'drift': drift,
        'max_increase': max_inc,
        'monotone': max_inc <= tolerance,
        'growing': bool(e[-1] > e[0] * (1 + 1e-3)),
    }


@dataclass
class TailFit:
    power: float
    uncertainty: float
    local_index: np.ndarray
    times: np.ndarray
    in_tail: bool


def fit_tail(times: np.ndarray, phi: np.ndarray, window: Tuple[float, float]) -> TailFit:
    """
    Local power index p(t) = t d log|Phi| / dt and its least-squares estimate over a window.

    A window with sign changes of Phi is flagged as oscillation-dominated.
    """
    times = np.asarray(times, dtype=float)
    phi = np.asarray(phi)
    mask = (times >= window[0]) & (times <= window[1])
    if np.count_nonzero(mask) < 5:
        raise DomainError(f"tail window {window} holds fewer than 5 samples")
    t, y = times[mask], np.abs(phi[mask])
    if np.any(y == 0):
        raise DomainError("field vanishes inside the tail window")
    logt, logy = np.log(t), np.log(y)
    local = t * np.gradient(logy, t)
    coeffs, cov = np.polyfit(logt, logy, 1, cov=True)
    real = np.real(phi[mask])
    crossings = int(np.count_nonzero(np.diff(np.sign(real)) != 0))
    return TailFit(float(coeffs[0]), float(np.sqrt(cov[0, 0])), local, t, crossings == 0)


def matrix_pencil(samples: np.ndarray, dt: float, n_modes: int) -> np.ndarray:
    """Complex frequencies sigma_k of sum_k A_k exp(-i sigma_k t) sampled at spacing dt."""
    y = np.asarray(samples, dtype=complex)
    N = len(y)
    L = N // 2
    if N - L < n_modes + 1:
        raise DomainError("too few samples for the requested number of modes")
    hankel = linalg.hankel(y[:N - L], y[N - L - 1:])
    _, _, vh = linalg.svd(hankel, full_matrices=False)
    V = vh[:n_modes].T
    z = linalg.eigvals(np.linalg.pinv(V[:-1]) @ V[1:])
    return 1j * np.log(z) / dt


def ringdown_fit(times: np.ndarray, phi: np.ndarray, window: Tuple[float, float],
                 decimate: int = 10) -> complex:
    """
    Fundamental ringdown frequency from a damped-sinusoid fit of a real series.

    Seeds A exp(omega_i t) cos(omega_r t + phase) with the matrix pencil and refines
    it with scipy least squares; returns omega_r + i omega_i.
    """
    times = np.asarray(times, dtype=float)
    mask = (times >= window[0]) & (times <= window[1])
    t = times[mask][::decimate]
    y = np.real(np.asarray(phi)[mask][::decimate])
    if len(t) < 8:
        raise DomainError(f"ringdown window {window} too short")
    dt = t[1] - t[0]
    seeds = matrix_pencil(y, dt, 2)
    seed = seeds[np.argmax(seeds.real)]
    t0 = t[0]
    scale = np.max(np.abs(y))

    def model(p):
        amp, phase, wr, wi = p
        return amp * np.exp(wi * (t - t0)) * np.cos(wr * (t - t0) + phase)

    p0 = [scale, 0.0, abs(seed.real), min(seed.imag, -1e-3)]
    best = None
    for phase in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        p0[1] = phase
        fit = least_squares(lambda p: (model(p) - y) / scale, p0, method='lm')
        if best is None or fit.cost < best.cost:
            best = fit
    amp, phase, wr, wi = best.x
    sigma = complex(abs(wr), wi)
    logger.info(f"Ringdown fit: sigma = {sigma.real:.6f} {sigma.imag:+.6f}i (pencil seed {seed:.4f})")
    return sigma


def convergence_order(run: EvolutionRun, observer: Optional[float] = None, levels: int = 3) -> float:
    """
    Self-convergence order log2(|u_h - u_h/2| / |u_h/2 - u_h/4|) at an observer.

    Each refinement halves h at fixed CFL, so coarse times coincide with every
    second fine time.
    """
    observer = run.observers[0] if observer is None else observer
    results = []
    for k in range(levels):
        r = replace(run, h=run.h / 2 ** k, observers=[observer], energy_every=10 ** 9)
        results.append(evolve(r).series[observer])
    n = len(results[0])
    coarse = [res[::2 ** k][:n] for k, res in enumerate(results)]
    e1 = np.max(np.abs(coarse[0] - coarse[1]))
    e2 = np.max(np.abs(coarse[1] - coarse[2]))
    if e2 == 0:
        raise ConvergenceError("identical solutions at the two finest levels")
    return float(np.log2(e1 / e2))
