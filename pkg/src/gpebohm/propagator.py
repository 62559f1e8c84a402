"""Split-operator propagation of the rescaled 1D GPE.

One step is the symmetric factorisation ``K(dt/2) V(dt) K(dt/2)``: half a
kinetic step applied in wavenumber space, a full potential + mean-field
phase in position space, and another half kinetic step.  The mean-field
density is taken after the first half kinetic step; the potential factor
leaves ``|psi|^2`` untouched, so the scheme stays second order and exactly
time-reversible.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import derivative
from .states import Wavefunction, norm
from .units import ScaledParams

log = logging.getLogger(__name__)

NORM_WARN = 1e-6
ENERGY_WARN = 1e-4
BOUNDARY_WARN = 1e-8


class PropagationError(RuntimeError):
    """Raised when the field stops being finite.

    Attributes:
        last_good: the last stored frame that was still finite.
    """

    def __init__(self, message: str, last_good: Wavefunction | None = None):
        super().__init__(message)
        self.last_good = last_good


@dataclass(frozen=True)
class StepperConfig:
    dt_ms: float = 1e-3
    n_steps: int = 1000
    store_every: int = 10

    def __post_init__(self):
        problems = []
        if not self.dt_ms > 0:
            problems.append("dt_ms must be > 0")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            problems.append("n_steps must be an integer >= 1")
        if int(self.store_every) != self.store_every or self.store_every < 1:
            problems.append("store_every must be an integer >= 1")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "store_every", int(self.store_every))

    @classmethod
    def for_duration(cls, t_final_ms: float, dt_ms: float = 1e-3, store_every: int = 10):
        return cls(dt_ms, int(round(t_final_ms / dt_ms)), store_every)

    @property
    def frame_spacing_ms(self) -> float:
        return self.dt_ms * self.store_every

    @property
    def t_final_ms(self) -> float:
        return self.dt_ms * self.n_steps


@dataclass(eq=False)
class FrameSeries:
    """Stored frames of one propagation plus per-frame diagnostics."""

    times: np.ndarray
    frames: list[Wavefunction]
    norms: np.ndarray
    energies: np.ndarray
    params: ScaledParams | None = None
    potential: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def grid(self):
        return self.frames[0].grid

    def amplitudes(self) -> np.ndarray:
        """Frame history as a ``(T, N)`` complex matrix."""
        return np.stack([f.amplitudes for f in self.frames])

    def densities(self) -> np.ndarray:
        return np.abs(self.amplitudes()) ** 2

    def frame_at(self, t_ms: float) -> Wavefunction:
        """Stored frame nearest to ``t_ms``."""
        return self.frames[int(np.argmin(np.abs(self.times - t_ms)))]

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))

    def energy_drift(self) -> float:
        """Largest relative deviation of the energy from its initial value."""
        e0 = self.energies[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.max(np.abs(self.energies - e0)) / scale)


def kinetic_phase(k: np.ndarray, s: ScaledParams, dt: float) -> np.ndarray:
    """Half-step kinetic factor ``exp(-i hbar k^2 dt / 4 m)``."""
    return np.exp(-1j * s.hbar_bar * k**2 * dt / (4.0 * s.m_bar))


def _advance(a: np.ndarray, half_k: np.ndarray, pot: np.ndarray, g: float, dt: float,
             hbar_bar: float) -> np.ndarray:
    a = np.fft.ifft(half_k * np.fft.fft(a))
    a = a * np.exp(-1j * (pot + g * (a.real**2 + a.imag**2)) * dt / hbar_bar)
    return np.fft.ifft(half_k * np.fft.fft(a))


def step(psi: Wavefunction, pot: np.ndarray, s: ScaledParams, dt: float) -> Wavefunction:
    """Advance ``psi`` by one split-operator step of length ``dt`` (ms).

    A negative ``dt`` runs the step backwards, which inverts a forward step
    of the same size up to rounding.
    """
    half_k = kinetic_phase(psi.grid.k_values, s, dt)
    a = _advance(psi.amplitudes, half_k, pot, s.g1d_bar, dt, s.hbar_bar)
    if not np.all(np.isfinite(a)):
        raise PropagationError(f"non-finite amplitudes at t = {psi.time_ms + dt:.6g} ms", psi)
    return Wavefunction(a, psi.grid, psi.time_ms + dt)


def energy(psi: Wavefunction, pot: np.ndarray, s: ScaledParams) -> float:
    """Gross-Pitaevskii energy functional (scaled units, rad/ms per atom).

    ``E = int [ hbar^2 |psi'|^2 / 2m + V |psi|^2 + g |psi|^4 / 2 ] dz`` with
    the kinetic term evaluated in wavenumber space.
    """
    grid = psi.grid
    a = psi.amplitudes
    n = np.abs(a) ** 2
    ahat = np.fft.fft(a)
    # Parseval: sum |a'|^2 dz = dz/N sum k^2 |ahat|^2
    kinetic = s.hbar_bar**2 / (2 * s.m_bar) * np.sum(grid.k_values**2 * np.abs(ahat) ** 2) / grid.n_points
    potential = np.sum(pot * n) + 0.5 * s.g1d_bar * np.sum(n**2)
    return float((kinetic + potential) * grid.dz_um)


def propagate(psi0: Wavefunction, pot: np.ndarray, s: ScaledParams, cfg: StepperConfig,
              check: bool = True) -> FrameSeries:
    """Run ``cfg.n_steps`` steps from ``psi0`` storing every ``cfg.store_every``-th frame.

    The initial frame is always stored; so is the final one.  With
    ``check`` set, drifts beyond the monitoring thresholds and density
    reaching the periodic boundary are reported with :mod:`warnings`.

    Raises:
        PropagationError: on non-finite amplitudes; carries the last good frame.
    """
    grid = psi0.grid
    pot = np.asarray(pot, dtype=float)
    half_k = kinetic_phase(grid.k_values, s, cfg.dt_ms)
    a = psi0.amplitudes.copy()
    t0 = psi0.time_ms

    frames = [psi0]
    for n in range(1, cfg.n_steps + 1):
        a = _advance(a, half_k, pot, s.g1d_bar, cfg.dt_ms, s.hbar_bar)
        if n % cfg.store_every == 0 or n == cfg.n_steps:
            if not np.all(np.isfinite(a)):
                raise PropagationError(
                    f"non-finite amplitudes at step {n} (t = {t0 + n * cfg.dt_ms:.6g} ms)", frames[-1]
                )
            frames.append(Wavefunction(a.copy(), grid, t0 + n * cfg.dt_ms))

    times = np.array([f.time_ms for f in frames])
    norms = np.array([norm(f.amplitudes, grid) for f in frames])
    energies = np.array([energy(f, pot, s) for f in frames])
    series = FrameSeries(times, frames, norms, energies, s, pot)

    if check:
        _monitor(series)
    return series


def _monitor(series: FrameSeries) -> None:
    if abs(series.norms[-1] - 1.0) > NORM_WARN or series.norm_drift() > NORM_WARN:
        warnings.warn(f"norm drifted to {series.norms[-1]:.12g}", RuntimeWarning, stacklevel=3)
    if series.energy_drift() > ENERGY_WARN:
        warnings.warn(f"relative energy drift {series.energy_drift():.3g}", RuntimeWarning, stacklevel=3)
    for f in (series.frames[len(series) // 2], series.frames[-1]):
        n = np.abs(f.amplitudes) ** 2
        edge = max(n[0], n[-1])
        if edge > BOUNDARY_WARN * n.max():
            warnings.warn(
                f"density at the periodic boundary is {edge / n.max():.2g} of the peak "
                f"at t = {f.time_ms:.4g} ms", RuntimeWarning, stacklevel=3,
            )
            break
    log.debug("propagated %d frames; norm drift %.3g, energy drift %.3g",
              len(series), series.norm_drift(), series.energy_drift())


def flux(psi: Wavefunction, s: ScaledParams) -> np.ndarray:
    """Quantum flux ``j = (hbar/m) Im(psi* dpsi/dz)``."""
    a = psi.amplitudes
    return s.hbar_bar / s.m_bar * np.imag(np.conj(a) * derivative(a, psi.grid))


def continuity_residual(series: FrameSeries, s: ScaledParams | None = None) -> float:
    """Max-norm of ``dn/dt + dj/dz`` over the interior stored frames.

    The time derivative is a central difference between neighbouring
    stored frames; the flux divergence is spectral.

    Raises:
        ValueError: with fewer than three frames or non-uniform spacing.
    """
    s = s or series.params
    if len(series) < 3:
        raise ValueError("need at least three stored frames")
    dts = np.diff(series.times)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0):
        raise ValueError("frame spacing must be uniform")
    h = dts[0]
    n = series.densities()
    grid = series.grid
    worst = 0.0
    for i in range(1, len(series) - 1):
        dndt = (n[i + 1] - n[i - 1]) / (2 * h)
        djdz = derivative(flux(series.frames[i], s), grid)
        worst = max(worst, float(np.max(np.abs(dndt + djdz))))
    return worst
