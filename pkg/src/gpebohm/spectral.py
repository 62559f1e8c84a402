"""FFT helpers shared by the solver and the hydrodynamic diagnostics."""

from __future__ import annotations

import numpy as np

from .grid import Grid


def _k_no_nyquist(grid: Grid) -> np.ndarray:
    # the Nyquist mode has no well-defined odd derivative on an even mesh
    k = np.array(grid.k_values)
    k[grid.n_points // 2] = 0.0
    return k


def derivative(f: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    """Spectral derivative of a periodic field along the last axis.

    Real input gives real output.
    """
    k = grid.k_values if order % 2 == 0 else _k_no_nyquist(grid)
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(f, axis=-1), axis=-1)
    if np.isrealobj(f):
        return out.real
    return out


class SpectralSampler:
    """Evaluate a grid field and its first derivative at arbitrary positions.

    The field is represented by its trigonometric interpolant, i.e. the
    plane-wave sum implied by the discrete Fourier transform.  The Nyquist
    coefficient is split symmetrically between ``+k_N`` and ``-k_N`` so
    that real samples interpolate to a real function.

    Powers ``exp(i dk j x)`` are built by running products, restarted from
    an exact exponential every ``_BLOCK`` terms to bound rounding growth.
    """

    _BLOCK = 64

    def __init__(self, values: np.ndarray, grid: Grid):
        n = grid.n_points
        half = n // 2
        c = np.fft.fft(values) / n
        pos = np.empty(half + 1, dtype=complex)  # coefficients of exp(+i dk j x), j = 0..N/2
        pos[:half] = c[:half]
        pos[half] = c[half] / 2.0
        neg = np.empty(half, dtype=complex)  # coefficients of exp(-i dk j x), j = 1..N/2
        neg[: half - 1] = c[n - 1 : half : -1]
        neg[half - 1] = c[half] / 2.0
        self._dk = 2 * np.pi / grid.length
        j = np.arange(half + 1)
        self._pos = pos
        self._neg = neg
        self._dpos = 1j * self._dk * j * pos
        self._dneg = -1j * self._dk * j[1:] * neg
        self._half = half
        self._z0 = grid.z_min_um

    def _powers(self, x: np.ndarray) -> np.ndarray:
        b = self._BLOCK
        nb = -(-(self._half + 1) // b)
        theta = self._dk * (x - self._z0)
        step = np.broadcast_to(np.exp(1j * theta)[:, None], (x.size, b)).copy()
        step[:, 0] = 1.0
        run = np.cumprod(step, axis=1)
        base = np.exp(1j * theta[:, None] * (b * np.arange(nb)))
        return (base[:, :, None] * run[:, None, :]).reshape(x.size, nb * b)[:, : self._half + 1]

    def __call__(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(f(x), f'(x))`` for an array of positions ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = self._powers(x)
        wn = np.conj(w[:, 1:])
        return w @ self._pos + wn @ self._neg, w @ self._dpos + wn @ self._dneg
