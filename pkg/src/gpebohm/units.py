"""Laboratory parameters and the micron/millisecond working units.

All simulation quantities live in a unit system where lengths are in
micrometres, times in milliseconds and both sides of the 1D GPE have been
divided by hbar, so ``hbar_bar == 1`` and energies are angular frequencies
in rad/ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.constants import hbar, h

# 1 s/m^2 -> ms/um^2
_MASS_SCALE = 1e3 / 1e12
# 1 m/s -> um/ms
_VELOCITY_SCALE = 1e6 / 1e3


def wrap_phase(phi: float) -> float:
    """Map an angle onto the half-open interval (-pi, pi]."""
    wrapped = math.remainder(phi, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class PhysicalParams:
    """Condensate, trap and lattice constants in SI / laboratory units.

    Defaults are the rubidium cloud used throughout: 950 atoms,
    a_s = 4.76 nm, f_z = 50 Hz, f_perp = 408 Hz, V0/h = 850 Hz and a
    lattice period of 5.7 um.
    """

    mass_kg: float = 1.44e-25
    a_s_m: float = 4.76e-9
    n_atoms: int = 950
    f_z_hz: float = 50.0
    f_perp_hz: float = 408.0
    v0_over_h_hz: float = 850.0
    ell_um: float = 5.7
    phi_rad: float = 0.0

    def __post_init__(self):
        problems = []
        if not self.mass_kg > 0:
            problems.append(f"mass_kg must be > 0 (got {self.mass_kg})")
        if not self.a_s_m > 0:
            problems.append(f"a_s_m must be > 0, repulsive regime only (got {self.a_s_m})")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            problems.append(f"n_atoms must be an integer >= 1 (got {self.n_atoms})")
        if not self.f_z_hz >= 0:
            problems.append(f"f_z_hz must be >= 0 (got {self.f_z_hz})")
        if not self.f_perp_hz > 0:
            problems.append(f"f_perp_hz must be > 0 (got {self.f_perp_hz})")
        if not self.v0_over_h_hz >= 0:
            problems.append(f"v0_over_h_hz must be >= 0 (got {self.v0_over_h_hz})")
        if not self.ell_um > 0:
            problems.append(f"ell_um must be > 0 (got {self.ell_um})")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        object.__setattr__(self, "phi_rad", wrap_phase(float(self.phi_rad)))

    @property
    def omega_z(self) -> float:
        """Longitudinal trap angular frequency (rad/s)."""
        return 2.0 * math.pi * self.f_z_hz

    @property
    def omega_perp(self) -> float:
        """Transverse trap angular frequency (rad/s)."""
        return 2.0 * math.pi * self.f_perp_hz

    @property
    def v0_joule(self) -> float:
        return h * self.v0_over_h_hz

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ScaledParams:
    """Working constants of the rescaled 1D GPE (um, ms, hbar = 1)."""

    m_bar: float
    omega_z_bar: float
    g1d_bar: float
    a_perp_um: float
    hbar_bar: float = field(default=1.0)

    def free(self) -> "ScaledParams":
        """Copy with the longitudinal trap switched off."""
        return replace(self, omega_z_bar=0.0)

    def linear(self) -> "ScaledParams":
        """Copy with the nonlinear coupling switched off."""
        return replace(self, g1d_bar=0.0)


def derive_coupling(p: PhysicalParams) -> tuple[float, float]:
    """Effective 1D coupling and transverse oscillator length.

    Returns:
        ``(g1d, a_perp)`` with ``g1d = 2 hbar omega_perp a_s N`` in
        kg m^3/s^2 (J m) for a unit-normalised order parameter and
        ``a_perp = sqrt(hbar / (m omega_perp))`` in metres.
    """
    g1d = 2.0 * hbar * p.omega_perp * p.a_s_m * p.n_atoms
    a_perp = math.sqrt(hbar / (p.mass_kg * p.omega_perp))
    return g1d, a_perp


def rescale(p: PhysicalParams) -> ScaledParams:
    """Convert laboratory parameters to the um/ms/hbar working units."""
    g1d, a_perp = derive_coupling(p)
    return ScaledParams(
        m_bar=p.mass_kg / hbar * _MASS_SCALE,
        omega_z_bar=p.omega_z * 1e-3,
        g1d_bar=g1d / hbar * _VELOCITY_SCALE,
        a_perp_um=a_perp * 1e6,
    )


def to_si(s: ScaledParams) -> dict[str, float]:
    """Invert :func:`rescale` for the derived quantities.

    Returns a dict with ``mass_kg``, ``omega_z`` (rad/s), ``g1d``
    (kg m^3/s^2) and ``a_perp_m``.
    """
    hb = hbar * s.hbar_bar
    return {
        "mass_kg": s.m_bar * hb / _MASS_SCALE,
        "omega_z": s.omega_z_bar * 1e3,
        "g1d": s.g1d_bar * hb / _VELOCITY_SCALE,
        "a_perp_m": s.a_perp_um * 1e-6,
    }


def lattice_depth_scaled(p: PhysicalParams) -> float:
    """Lattice barrier height V0/hbar in rad/ms."""
    return 2.0 * math.pi * p.v0_over_h_hz * 1e-3
