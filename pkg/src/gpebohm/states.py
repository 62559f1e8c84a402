"""Initial and reference order parameters, and their polar observables."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid

# density below this fraction of the maximum makes the local phase ill-defined
BRANCH_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Complex order parameter sampled on a :class:`Grid` at ``time_ms``.

    Amplitudes carry units of um^-1/2 so that ``sum(|psi|^2) dz`` is the
    fraction of atoms on the mesh.
    """

    amplitudes: np.ndarray
    grid: Grid
    time_ms: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ValueError(f"amplitudes must have shape ({self.grid.n_points},)")
        object.__setattr__(self, "amplitudes", a)

    @property
    def z(self) -> np.ndarray:
        return self.grid.z

    def norm(self) -> float:
        return norm(self.amplitudes, self.grid)

    def density(self) -> np.ndarray:
        return density(self)

    def normalized(self) -> "Wavefunction":
        return replace(self, amplitudes=self.amplitudes / math.sqrt(self.norm()))

    def mirrored(self) -> "Wavefunction":
        """Reflect through z = 0; requires a grid symmetric about the origin."""
        if not math.isclose(self.grid.z_min_um, -self.grid.z_max_um):
            raise ValueError("mirroring needs a grid symmetric about z = 0")
        idx = (-np.arange(self.grid.n_points)) % self.grid.n_points
        return replace(self, amplitudes=self.amplitudes[idx])


def norm(amplitudes: np.ndarray, grid: Grid) -> float:
    """Discrete ``integral |psi|^2 dz`` on the periodic mesh."""
    return float(np.sum(np.abs(amplitudes) ** 2) * grid.dz_um)


def gaussian_superposition(grid: Grid, ell_um: float, sigma0_um: float, phi: float) -> Wavefunction:
    """Two identical Gaussian clouds at ``z = +-ell/2`` with relative phase ``phi``.

    The packet at ``-ell/2`` carries the factor ``exp(i phi)``.  The result is
    normalised numerically on the grid.

    Raises:
        ValueError: if ``sigma0_um`` is not positive or a cloud (out to five
            widths) would overlap the periodic boundary.
    """
    if not sigma0_um > 0:
        raise ValueError("sigma0 must be positive")
    reach = abs(ell_um) / 2 + 5 * sigma0_um
    if reach >= grid.z_max_um or -reach <= grid.z_min_um:
        raise ValueError(
            f"clouds extend to +-{reach:.3g} um, outside the domain "
            f"[{grid.z_min_um}, {grid.z_max_um})"
        )
    z = grid.z
    zp = ell_um / 2
    psi = np.exp(-((z - zp) ** 2) / (4 * sigma0_um**2)) + np.exp(1j * phi) * np.exp(
        -((z + zp) ** 2) / (4 * sigma0_um**2)
    )
    return Wavefunction(psi, grid).normalized()


def overlap_ratio(psi: Wavefunction) -> float:
    """Density at the grid point nearest z = 0 over the global density maximum."""
    n = density(psi)
    return float(n[psi.grid.index_of(0.0)] / n.max())


def dark_soliton_profile(grid: Grid, n0: float, g: float, m_bar: float, v: float = 0.0,
                         t: float = 0.0, hbar_bar: float = 1.0) -> Wavefunction:
    """Analytic moving dark soliton on a uniform background ``n0`` (unnormalised).

    Args:
        n0: background density (um^-1).
        g: 1D coupling in scaled units.
        m_bar: scaled mass.
        v: soliton velocity (um/ms), ``|v|`` no larger than the sound speed.
        t: evaluation time (ms).
    """
    if not n0 > 0:
        raise ValueError("background density must be positive")
    mu = n0 * g
    c = math.sqrt(mu / m_bar)
    if abs(v) > c:
        raise ValueError(f"|v| = {abs(v):.4g} exceeds the sound speed c = {c:.4g}")
    beta = math.sqrt(1.0 - (v / c) ** 2)
    chi = healing_length(n0, g, m_bar, hbar_bar)
    core = beta * np.tanh(beta * (grid.z - v * t) / chi) + 1j * v / c
    psi = math.sqrt(n0) * np.exp(-1j * mu * t / hbar_bar) * core
    return Wavefunction(psi, grid, t)


def healing_length(n0: float, g: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    return hbar_bar / math.sqrt(m_bar * n0 * g)


def sound_speed(n0: float, g: float, m_bar: float) -> float:
    return math.sqrt(n0 * g / m_bar)


def density(psi: Wavefunction) -> np.ndarray:
    return np.abs(psi.amplitudes) ** 2


def phase(psi: Wavefunction) -> tuple[np.ndarray, np.ndarray]:
    """Local phase unwrapped left to right.

    Returns:
        ``(theta, ambiguous)`` where ``ambiguous[i]`` marks the interval
        ``[z_i, z_{i+1}]`` as touching a (near) node of the density, across
        which the unwrapped phase jump carries no meaning.  The last entry
        refers to the periodic closing interval.
    """
    a = psi.amplitudes
    n = np.abs(a) ** 2
    low = n < BRANCH_FLOOR * n.max()
    ambiguous = low | np.roll(low, -1)
    theta = np.unwrap(np.angle(a))
    return theta, ambiguous
