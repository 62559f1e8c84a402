"""Hydrodynamic fields and Bohmian flux trajectories.

The velocity field ``v = j / n = (hbar/m) Im(psi* psi') / |psi|^2`` is
singular at nodes of the order parameter.  Wherever the density falls below
``DENSITY_FLOOR`` times the current maximum the value is kept but clamped to
``+-VELOCITY_CLAMP`` and flagged in a mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .propagator import FrameSeries, step
from .spectral import SpectralSampler, derivative
from .states import Wavefunction
from .units import ScaledParams

DENSITY_FLOOR = 1e-12
VELOCITY_CLAMP = 25.0  # um/ms


@dataclass(frozen=True, eq=False)
class VelocityField:
    values: np.ndarray
    time_ms: float
    low_density_mask: np.ndarray


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Positions of ``M`` tracers at ``T`` stored times.

    Attributes:
        times: shape ``(T,)``.
        positions: shape ``(M, T)`` in um.
        initial_band: density threshold (fraction of the maximum) used for seeding.
        clamped: per-trajectory flag, set if the tracer ever entered a
            regularised low-density region.
    """

    times: np.ndarray
    positions: np.ndarray
    initial_band: float
    clamped: np.ndarray

    @property
    def n_trajectories(self) -> int:
        return self.positions.shape[0]

    def crossing_violations(self, tol: float) -> int:
        """Count adjacent pairs (per stored time) whose ordering reverses by more than ``tol``."""
        order = np.argsort(self.positions[:, 0], kind="stable")
        gaps = np.diff(self.positions[order], axis=0)
        return int(np.count_nonzero(gaps < -tol))

    def sign_changes(self, eps: float = 0.0) -> int:
        """Number of trajectories that visit both sides of z = 0 (beyond ``eps``)."""
        above = np.any(self.positions > eps, axis=1)
        below = np.any(self.positions < -eps, axis=1)
        return int(np.count_nonzero(above & below))


def _velocity_from(a: np.ndarray, da: np.ndarray, n_max: float, s: ScaledParams):
    n = np.abs(a) ** 2
    mask = n < DENSITY_FLOOR * n_max
    with np.errstate(divide="ignore", invalid="ignore"):
        v = s.hbar_bar / s.m_bar * np.imag(np.conj(a) * da) / n
    v = np.where(np.isfinite(v), v, 0.0)
    v = np.where(mask, np.clip(v, -VELOCITY_CLAMP, VELOCITY_CLAMP), v)
    return v, mask


def velocity_field(psi: Wavefunction, s: ScaledParams) -> VelocityField:
    """Bohmian velocity on the grid with the spectral derivative of ``psi``."""
    a = psi.amplitudes
    da = derivative(a, psi.grid)
    v, mask = _velocity_from(a, da, float(np.max(np.abs(a) ** 2)), s)
    return VelocityField(v, psi.time_ms, mask)


def velocity_matrix(series: FrameSeries, s: ScaledParams | None = None) -> np.ndarray:
    """Velocity field for every stored frame, shape ``(T, N)``."""
    s = s or series.params
    return np.stack([velocity_field(f, s).values for f in series.frames])


def quantum_potential(psi: Wavefunction, s: ScaledParams) -> np.ndarray:
    """Bohm potential ``-(hbar^2/4m) [n''/n - (n'/n)^2 / 2]`` from spectral derivatives of n.

    Values on the low-density mask are set to zero.
    """
    n = np.abs(psi.amplitudes) ** 2
    mask = n < DENSITY_FLOOR * n.max()
    dn = derivative(n, psi.grid)
    d2n = derivative(n, psi.grid, 2)
    safe = np.where(mask, 1.0, n)
    q = -(s.hbar_bar**2) / (4 * s.m_bar) * (d2n / safe - 0.5 * (dn / safe) ** 2)
    return np.where(mask, 0.0, q)


def quantum_potential_amplitude(psi: Wavefunction, s: ScaledParams) -> np.ndarray:
    """Equivalent form ``-(hbar^2/2m) (sqrt n)'' / sqrt n``; zero on the low-density mask."""
    n = np.abs(psi.amplitudes) ** 2
    mask = n < DENSITY_FLOOR * n.max()
    r = np.sqrt(n)
    d2r = derivative(r, psi.grid, 2)
    q = -(s.hbar_bar**2) / (2 * s.m_bar) * d2r / np.where(mask, 1.0, r)
    return np.where(mask, 0.0, q)


def _bands(n: np.ndarray, grid: Grid, level: float) -> list[tuple[float, float]]:
    """Intervals where ``n >= level``, edges refined by linear interpolation."""
    z = grid.z
    inside = n >= level
    bands = []
    i = 0
    npts = len(n)
    while i < npts:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < npts and inside[j + 1]:
            j += 1
        lo = z[i]
        if i > 0:
            lo = z[i - 1] + (level - n[i - 1]) / (n[i] - n[i - 1]) * grid.dz_um
        hi = z[j]
        if j + 1 < npts:
            hi = z[j] + (n[j] - level) / (n[j] - n[j + 1]) * grid.dz_um
        bands.append((lo, hi))
        i = j + 1
    return bands


def seed_positions(psi0: Wavefunction, m_count: int = 50, threshold_frac: float = 0.005) -> np.ndarray:
    """Equidistant seeds covering where ``n(z, 0) >= threshold_frac * n_max``.

    Seeds are spread uniformly over the total length of the (possibly
    disjoint) support bands, including both outer edges.

    Raises:
        ValueError: for a bad count/threshold or an empty support.
    """
    if int(m_count) != m_count or m_count < 1:
        raise ValueError("m_count must be an integer >= 1")
    if not 0 < threshold_frac <= 1:
        raise ValueError("threshold_frac must lie in (0, 1]")
    n = psi0.density()
    n_max = n.max()
    if not n_max > 0:
        raise ValueError("empty support: the density vanishes everywhere")
    if threshold_frac >= 1:
        return np.array([psi0.grid.z[int(np.argmax(n))]])
    bands = _bands(n, psi0.grid, threshold_frac * n_max)
    lengths = np.array([hi - lo for lo, hi in bands])
    total = lengths.sum()
    if not total > 0:
        return np.array([psi0.grid.z[int(np.argmax(n))]])
    if m_count == 1:
        arc = np.array([total / 2])
    else:
        arc = np.linspace(0.0, total, m_count)
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    idx = np.clip(np.searchsorted(starts, arc, side="right") - 1, 0, len(bands) - 1)
    # keep the last seed inside the last band despite rounding in cumsum
    los = np.array([b[0] for b in bands])
    return np.minimum(los[idx] + (arc - starts[idx]), np.array([b[1] for b in bands])[idx])


class _FrameVelocity:
    """Off-grid velocity from the plane-wave interpolant of one frame."""

    def __init__(self, psi: Wavefunction, s: ScaledParams):
        self._sample = SpectralSampler(psi.amplitudes, psi.grid)
        self._n_max = float(np.max(np.abs(psi.amplitudes) ** 2))
        self._s = s

    def __call__(self, x):
        a, da = self._sample(x)
        return _velocity_from(a, da, self._n_max, self._s)


def integrate_trajectories(series: FrameSeries, seeds, s: ScaledParams | None = None,
                           initial_band: float = float("nan"), tol_um: float = 1e-3,
                           max_depth: int = 12, field_dt_ms: float = 1e-3) -> TrajectorySet:
    """Advance tracers through the stored field history.

    Each stored interval ``[t_i, t_{i+1}]`` is one explicit-midpoint step.
    The midpoint velocity is the mean of the two bracketing frames'
    velocities evaluated at the predicted midpoint position.

    Tracers whose midpoint and Euler displacements differ by more than
    ``tol_um`` (fast flow through near-nodes) have their interval bisected,
    up to ``max_depth`` times.  Fields at the bisection times are rebuilt by
    propagating the earlier frame with steps no longer than ``field_dt_ms``,
    which needs ``series.potential``; without it there is no refinement.
    """
    s = s or series.params
    grid = series.grid
    pot = series.potential
    if pot is None:
        max_depth = 0
    x = np.asarray(seeds, dtype=float).copy()
    out = np.empty((x.size, len(series)))
    out[:, 0] = x
    clamped = np.zeros(x.size, dtype=bool)

    def midpoint(x, fa, fb, h):
        v1, m1 = fa(x)
        xm = x + 0.5 * h * v1
        va, ma = fa(xm)
        vb, mb = fb(xm)
        v = 0.5 * (va + vb)
        return x + h * v, np.abs(h * (v - v1)), m1 | ma | mb

    def advance(x, psi_a, fa, fb, h, depth):
        x_new, err, mask = midpoint(x, fa, fb, h)
        clamped_here = mask
        bad = err > tol_um
        if depth >= max_depth or not bad.any():
            return x_new, clamped_here
        n_sub = max(1, int(np.ceil(0.5 * h / field_dt_ms - 1e-9)))
        psi_m = psi_a
        for _ in range(n_sub):
            psi_m = step(psi_m, pot, s, 0.5 * h / n_sub)
        fm = _FrameVelocity(psi_m, s)
        xb, cb = advance(x[bad], psi_a, fa, fm, 0.5 * h, depth + 1)
        xb, cb2 = advance(xb, psi_m, fm, fb, 0.5 * h, depth + 1)
        x_new[bad] = xb
        clamped_here[bad] = cb | cb2
        return x_new, clamped_here

    current = _FrameVelocity(series.frames[0], s)
    for i in range(len(series) - 1):
        h = series.times[i + 1] - series.times[i]
        following = _FrameVelocity(series.frames[i + 1], s)
        x, m = advance(x, series.frames[i], current, following, h, 0)
        x = grid.wrap(x)
        clamped |= m
        out[:, i + 1] = x
        current = following
    return TrajectorySet(series.times.copy(), out, initial_band, clamped)


def left_quantiles(series: FrameSeries, traj: TrajectorySet) -> np.ndarray:
    """Fraction of the density lying left of each tracer at each stored time.

    Uses the trigonometric interpolant of the density on the grid, so the
    cumulative integral is exact for band-limited densities.
    """
    grid = series.grid
    out = np.empty_like(traj.positions)
    k = np.array(grid.k_values)
    nz = k != 0
    for i, f in enumerate(series.frames):
        n = np.abs(f.amplitudes) ** 2
        c = np.fft.fft(n) / grid.n_points
        # antiderivative of the interpolant measured from z_min
        x = traj.positions[:, i] - grid.z_min_um
        ph = np.exp(1j * np.outer(x, k[nz]))
        cum = c[0].real * x + np.real((ph - 1.0) @ (c[nz] / (1j * k[nz])))
        total = c[0].real * grid.length
        out[:, i] = cum / total
    return out
