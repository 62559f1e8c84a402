"""Periodic spatial mesh, external potentials and the effective-well model.

Potential fields are plain real ``numpy`` arrays sampled on
:attr:`Grid.z`, in scaled energy units (rad/ms, i.e. hbar/ms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.constants import hbar

from .units import PhysicalParams, ScaledParams


@dataclass(frozen=True)
class Grid:
    """Uniform periodic mesh on ``[z_min_um, z_max_um)``.

    ``z_max_um`` is identified with ``z_min_um``; the last sample sits one
    spacing short of it.
    """

    n_points: int = 1024
    z_min_um: float = -51.2
    z_max_um: float = 51.2

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 2 or (int(n) & (int(n) - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 2 (got {n})")
        if not self.z_max_um > self.z_min_um:
            raise ValueError("z_max_um must exceed z_min_um")
        object.__setattr__(self, "n_points", int(n))

    @property
    def length(self) -> float:
        return self.z_max_um - self.z_min_um

    @property
    def dz_um(self) -> float:
        return self.length / self.n_points

    @cached_property
    def z(self) -> np.ndarray:
        z = self.z_min_um + self.dz_um * np.arange(self.n_points)
        z.setflags(write=False)
        return z

    @cached_property
    def k_values(self) -> np.ndarray:
        """Wavenumbers (rad/um) in ``numpy.fft`` ordering."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dz_um)
        k.setflags(write=False)
        return k

    def index_of(self, z_um: float) -> int:
        """Nearest grid index to ``z_um`` (periodic)."""
        return int(round((z_um - self.z_min_um) / self.dz_um)) % self.n_points

    def wrap(self, z_um):
        """Fold positions back into ``[z_min_um, z_max_um)``."""
        return (np.asarray(z_um) - self.z_min_um) % self.length + self.z_min_um


def harmonic_trap(grid: Grid, s: ScaledParams) -> np.ndarray:
    """``V(z) = m omega_z^2 z^2 / 2`` on the grid."""
    return 0.5 * s.m_bar * s.omega_z_bar**2 * grid.z**2


def lattice(grid: Grid, v0_scaled: float, ell_um: float) -> np.ndarray:
    """Optical lattice ``V0 cos^2(pi z / ell)`` with barrier maximum at z = 0."""
    if not ell_um > 0:
        raise ValueError("lattice period must be positive")
    return v0_scaled * np.cos(np.pi * grid.z / ell_um) ** 2


def effective_omega(p: PhysicalParams) -> float:
    """Angular frequency (rad/s) of the harmonic fit to one lattice well."""
    if not (p.v0_over_h_hz > 0 and p.ell_um > 0):
        raise ValueError("effective well needs V0 > 0 and ell > 0")
    ell_m = p.ell_um * 1e-6
    return math.sqrt(2.0 * math.pi**2 * p.v0_joule / (p.mass_kg * ell_m**2))


def effective_frequency(p: PhysicalParams) -> float:
    """Effective well frequency ``f_eff = omega_eff / 2 pi`` in Hz."""
    return effective_omega(p) / (2.0 * math.pi)


def effective_width(f_eff_hz: float, mass_kg: float) -> float:
    """Ground-state width ``sqrt(hbar / (2 m omega))`` in um for a well at ``f_eff_hz``."""
    if not f_eff_hz > 0:
        raise ValueError("f_eff must be positive")
    omega = 2.0 * math.pi * f_eff_hz
    return math.sqrt(hbar / (2.0 * mass_kg * omega)) * 1e6
