"""Closed-form solutions of the linear (g = 0) problem.

Nothing here touches the split-operator code, so these functions act as
independent ground truth for the solver.  All quantities are in the scaled
units (um, ms, hbar_bar = 1 unless given).
"""

from __future__ import annotations

import math

import numpy as np


def spread_time(sigma0: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    """Spreading time ``tau = 2 m sigma0^2 / hbar`` of a free Gaussian (ms)."""
    if not sigma0 > 0:
        raise ValueError("sigma0 must be positive")
    return 2.0 * m_bar * sigma0**2 / hbar_bar


def width_at(t, sigma0: float, m_bar: float, hbar_bar: float = 1.0):
    """Free-packet width ``sigma0 sqrt(1 + (t/tau)^2)``."""
    tau = spread_time(sigma0, m_bar, hbar_bar)
    return sigma0 * np.sqrt(1.0 + (np.asarray(t) / tau) ** 2)


def free_packet(z, z0: float, sigma0: float, t: float, m_bar: float, hbar_bar: float = 1.0):
    """Unit-norm freely spreading Gaussian centred at ``z0`` (complex)."""
    tau = spread_time(sigma0, m_bar, hbar_bar)
    q = 1.0 + 1j * t / tau
    z = np.asarray(z, dtype=float)
    return (2 * np.pi * sigma0**2) ** -0.25 / np.sqrt(q) * np.exp(-((z - z0) ** 2) / (4 * sigma0**2 * q))


def _pair_norm(ell: float, sigma0: float, phi: float) -> float:
    # <psi+ + e^{i phi} psi- | same> for unit-norm packets a distance ell apart
    return 2.0 * (1.0 + math.cos(phi) * math.exp(-(ell**2) / (8 * sigma0**2)))


def free_superposition(z, ell: float, sigma0: float, phi: float, t: float, m_bar: float,
                       hbar_bar: float = 1.0):
    """Unit-norm ``psi+ + exp(i phi) psi-`` with packets released at ``+-ell/2``.

    Returns:
        ``(psi_plus, psi_minus)`` already divided by the pair normalisation,
        so that ``psi = psi_plus + exp(1j*phi) * psi_minus``.
    """
    c = 1.0 / math.sqrt(_pair_norm(ell, sigma0, phi))
    plus = c * free_packet(z, ell / 2, sigma0, t, m_bar, hbar_bar)
    minus = c * free_packet(z, -ell / 2, sigma0, t, m_bar, hbar_bar)
    return plus, minus


def free_superposition_density(z, ell: float, sigma0: float, phi: float, t: float, m_bar: float,
                               hbar_bar: float = 1.0) -> dict[str, np.ndarray]:
    """Density of the freely evolving pair split into its three contributions.

    Returns a dict with ``n_plus``, ``n_minus``, ``n_interference`` and their
    sum ``n``.
    """
    plus, minus = free_superposition(z, ell, sigma0, phi, t, m_bar, hbar_bar)
    n_plus = np.abs(plus) ** 2
    n_minus = np.abs(minus) ** 2
    n_int = 2.0 * np.real(plus * np.conj(minus) * np.exp(-1j * phi))
    return {"n_plus": n_plus, "n_minus": n_minus, "n_interference": n_int, "n": n_plus + n_minus + n_int}


def fringe_wavenumber(t: float, sigma0: float, ell: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    """Spatial angular frequency of the interference term at time ``t``."""
    st2 = width_at(t, sigma0, m_bar, hbar_bar) ** 2
    return hbar_bar * t * ell / (4 * m_bar * sigma0**2 * st2)


def interference_term(z, ell: float, sigma0: float, phi: float, t: float, m_bar: float,
                      hbar_bar: float = 1.0):
    """Closed form of the cross term, ``2 A exp(-(z^2 + ell^2/4)/2 sigma_t^2) cos(K z + phi)``.

    ``A`` is the peak density of one normalised packet.  With the
    ``exp(i phi)`` factor on the packet at ``-ell/2`` the phase enters as
    ``+phi``.
    """
    st = float(width_at(t, sigma0, m_bar, hbar_bar))
    amp = 1.0 / (math.sqrt(2 * math.pi) * st * _pair_norm(ell, sigma0, phi))
    z = np.asarray(z, dtype=float)
    kz = fringe_wavenumber(t, sigma0, ell, m_bar, hbar_bar)
    return 2 * amp * np.exp(-(z**2 + (ell / 2) ** 2) / (2 * st**2)) * np.cos(kz * z + phi)


def overlapped_density(z, ell: float, sigma0: float, phi: float, t: float, m_bar: float,
                       hbar_bar: float = 1.0):
    """Strong-overlap approximation ``exp(-z^2/2 sigma_t^2) cos^2((K z + phi)/2)``, unit norm."""
    st = float(width_at(t, sigma0, m_bar, hbar_bar))
    kz = fringe_wavenumber(t, sigma0, ell, m_bar, hbar_bar)
    z = np.asarray(z, dtype=float)
    shape = np.exp(-(z**2) / (2 * st**2)) * np.cos((kz * z + phi) / 2) ** 2
    total = 0.5 * math.sqrt(2 * math.pi) * st * (1.0 + math.cos(phi) * math.exp(-(kz * st) ** 2 / 2))
    return shape / total


def fringe_spacing(t: float, sigma0: float, ell: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    """Distance between consecutive interference maxima, ``8 pi m sigma0^2 sigma_t^2 / (hbar t ell)``."""
    if not t > 0:
        raise ValueError("fringe spacing is defined for t > 0")
    return 2 * math.pi / fringe_wavenumber(t, sigma0, ell, m_bar, hbar_bar)


def fringe_spacing_asymptotic(t: float, ell: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    """Long-time limit ``2 pi hbar t / (m ell)``, independent of the initial width."""
    if not t > 0:
        raise ValueError("fringe spacing is defined for t > 0")
    return 2 * math.pi * hbar_bar * t / (m_bar * ell)


def coherent_width(m_bar: float, omega_z: float, hbar_bar: float = 1.0) -> float:
    """Width ``sqrt(hbar / 2 m omega)`` of the shape-preserving trap packet."""
    return math.sqrt(hbar_bar / (2 * m_bar * omega_z))


def coherent_state(z, z0: float, t: float, omega_z: float, m_bar: float, hbar_bar: float = 1.0):
    """Unit-norm coherent state released at rest from ``z0`` in a harmonic trap."""
    s0 = coherent_width(m_bar, omega_z, hbar_bar)
    wt = omega_z * t
    z = np.asarray(z, dtype=float)
    env = -((z - z0 * math.cos(wt)) ** 2) / (4 * s0**2)
    ph = -wt / 2 - m_bar * omega_z * (4 * z * z0 * math.sin(wt) - z0**2 * math.sin(2 * wt)) / (4 * hbar_bar)
    return (2 * np.pi * s0**2) ** -0.25 * np.exp(env + 1j * ph)


def coherent_pair(z, ell: float, phi: float, t: float, omega_z: float, m_bar: float,
                  hbar_bar: float = 1.0):
    """Unit-norm superposition of coherent states released from ``+-ell/2``."""
    s0 = coherent_width(m_bar, omega_z, hbar_bar)
    c = 1.0 / math.sqrt(_pair_norm(ell, s0, phi))
    return c * (coherent_state(z, ell / 2, t, omega_z, m_bar, hbar_bar)
                + np.exp(1j * phi) * coherent_state(z, -ell / 2, t, omega_z, m_bar, hbar_bar))


def coherent_trajectory(z_start, z0: float, t, omega_z: float):
    """Bohmian path ``z(t) = z(0) - z0 + z0 cos(omega t)`` inside one coherent packet."""
    return np.asarray(z_start)[..., None] - z0 + z0 * np.cos(omega_z * np.asarray(t))


def coherent_velocity(t, z0: float, omega_z: float):
    """Spatially uniform velocity of the coherent packet, ``-z0 omega sin(omega t)``."""
    return -z0 * omega_z * np.sin(omega_z * np.asarray(t))


def quarter_period_width(omega_eff: float, omega_z: float, m_bar: float, hbar_bar: float = 1.0) -> float:
    """Width reached after a quarter trap period by a packet prepared at ``omega_eff``.

    ``sqrt(hbar omega_eff / (2 m omega_z^2))``; both frequencies in rad/ms.
    """
    if not (omega_eff > 0 and omega_z > 0):
        raise ValueError("frequencies must be positive")
    return math.sqrt(hbar_bar * omega_eff / (2 * m_bar * omega_z**2))
