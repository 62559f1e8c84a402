"""Dip detection, fringe measurements and velocity-flip timing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import median_filter
from scipy.signal import argrelmin

from .grid import Grid


@dataclass(frozen=True)
class Dip:
    position_um: float
    depth: float  # 1 - n_min / envelope; 1 for a black soliton
    width_um: float  # full width at half depth


@dataclass(frozen=True)
class DipReport:
    dips: list[Dip] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.dips)

    @property
    def positions(self) -> np.ndarray:
        return np.array([d.position_um for d in self.dips])

    @property
    def depths(self) -> np.ndarray:
        return np.array([d.depth for d in self.dips])

    @property
    def mean_spacing(self) -> float:
        if self.count < 2:
            return float("nan")
        return float(np.mean(np.diff(self.positions)))

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_spacing_um": None if self.count < 2 else self.mean_spacing,
            "dips": [
                {"position_um": d.position_um, "depth": d.depth, "width_um": d.width_um}
                for d in self.dips
            ],
        }


def _refine_minimum(n: np.ndarray, i: int) -> float:
    """Sub-grid offset (in points) of a minimum from a parabola through three samples."""
    a, b, c = n[i - 1], n[i], n[(i + 1) % len(n)]
    den = a - 2 * b + c
    if den <= 0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / den, -0.5, 0.5))


def _half_depth_width(n: np.ndarray, i: int, level: float, dz: float) -> float:
    npts = len(n)

    def walk(step):
        j = i
        for _ in range(npts // 2):
            nxt = (j + step) % npts
            if n[nxt] >= level:
                # interpolate between j and nxt
                frac = (level - n[j]) / (n[nxt] - n[j]) if n[nxt] != n[j] else 0.0
                return (abs((j - i + npts // 2) % npts - npts // 2) + frac) * dz
            j = nxt
        return np.nan

    return float(walk(-1) + walk(+1))


def detect_dips(n: np.ndarray, grid: Grid, envelope_window: float = 5.0, min_contrast: float = 0.3,
                min_envelope_frac: float = 0.01) -> DipReport:
    """Find local density minima standing out from a moving-median envelope.

    A minimum counts as a dip when ``1 - n_min/envelope >= min_contrast``.
    Minima sitting where the envelope itself is below ``min_envelope_frac``
    of the peak density (far tails) are ignored.  The mesh is treated as
    periodic throughout.
    """
    n = np.asarray(n, dtype=float)
    dz = grid.dz_um
    size = max(3, int(round(envelope_window / dz)) | 1)
    env = median_filter(n, size=size, mode="wrap")
    floor = min_envelope_frac * n.max()
    dips = []
    for i in argrelmin(n, mode="wrap")[0]:
        e = env[i]
        if e <= floor or e <= 0:
            continue
        depth = 1.0 - n[i] / e
        if depth < min_contrast:
            continue
        pos = grid.z[i] + _refine_minimum(n, i) * dz
        width = _half_depth_width(n, i, n[i] + 0.5 * (e - n[i]), dz)
        dips.append(Dip(float(pos), float(min(depth, 1.0)), width))
    dips.sort(key=lambda d: d.position_um)
    return DipReport(dips)


def central_fringe_width(report: DipReport) -> float:
    """Distance between the two dips enclosing z = 0 (nan if there are none)."""
    p = report.positions
    left = p[p < 0]
    right = p[p > 0]
    if not (left.size and right.size):
        return float("nan")
    return float(right.min() - left.max())


def outward_velocity(v: np.ndarray, z: np.ndarray, probe_z: float, density: np.ndarray | None = None) -> np.ndarray:
    """Band average of ``sign(z) v`` over ``|z| < probe_z`` for each row of ``v``.

    Positive values mean the flow in the band points away from the centre.
    With ``density`` given, the average is density weighted (the mean flux
    divided by the mean density), which suppresses the clamped values near
    nodes.
    """
    band = np.abs(z) < probe_z
    signed = np.sign(z[band]) * v[:, band]
    if density is None:
        return signed.mean(axis=1)
    w = density[:, band]
    return (signed * w).sum(axis=1) / w.sum(axis=1)


def sign_flips(signal: np.ndarray, times: np.ndarray, persist: int = 3) -> list[tuple[float, int]]:
    """Zero crossings of ``signal`` that persist for at least ``persist`` samples.

    Returns ``(time, direction)`` pairs; direction is ``+1`` for a crossing
    from negative to positive.  Interior runs of one sign shorter than
    ``persist`` samples are absorbed into the preceding run; too-short
    leading and final runs are absorbed into their neighbour.
    """
    sgn = np.sign(signal).astype(int)
    for i in range(1, len(sgn)):
        if sgn[i] == 0:
            sgn[i] = sgn[i - 1]
    runs: list[list[int]] = []  # [sign, start, stop)
    for i, v in enumerate(sgn):
        if runs and runs[-1][0] == v:
            runs[-1][2] = i + 1
        else:
            runs.append([int(v), i, i + 1])
    # a leading zero run or one too short to count joins the run after it
    if len(runs) > 1 and (runs[0][0] == 0 or runs[0][2] - runs[0][1] < persist):
        runs[1][1] = runs[0][1]
        del runs[0]

    merged: list[list[int]] = []
    for r, run in enumerate(runs):
        short = run[2] - run[1] < persist and 0 < r < len(runs) - 1
        if merged and (short or merged[-1][0] == run[0]):
            merged[-1][2] = run[2]
        else:
            merged.append(list(run))
    if len(merged) > 1 and merged[-1][2] - merged[-1][1] < persist:
        merged[-2][2] = merged[-1][2]
        del merged[-1]

    flips = []
    for prev, nxt in zip(merged, merged[1:]):
        i = nxt[1]
        j = i - 1
        s0, s1 = signal[j], signal[i]
        frac = float(np.clip(s0 / (s0 - s1), 0.0, 1.0)) if s0 != s1 else 0.5
        flips.append((float(times[j] + frac * (times[i] - times[j])), int(nxt[0])))
    return flips


def velocity_flip_times(v: np.ndarray, times: np.ndarray, z: np.ndarray, probe_z: float = 10.0,
                        density: np.ndarray | None = None, persist: int = 3,
                        direction: str = "any") -> np.ndarray:
    """Times at which the central-band flow reverses.

    Args:
        v: velocity spacetime matrix ``(T, N)``.
        times: uniform frame times ``(T,)``.
        z: grid positions ``(N,)``.
        probe_z: half width of the central band (um).
        density: optional density matrix for flux weighting.
        persist: minimum number of frames a new sign must hold.
        direction: ``"outward"`` keeps inflow-to-outflow reversals (the
            bounce of the two swarms), ``"inward"`` the opposite, ``"any"``
            both.
    """
    if direction not in ("any", "outward", "inward"):
        raise ValueError(f"unknown direction {direction!r}")
    v = np.asarray(v)
    if not np.any(v):
        return np.array([])
    signal = outward_velocity(v, np.asarray(z), probe_z, density)
    flips = sign_flips(signal, np.asarray(times), persist)
    want = {"any": (-1, 1), "outward": (1,), "inward": (-1,)}[direction]
    return np.array([t for t, d in flips if d in want])


def nearest_offsets(found, anchors) -> np.ndarray:
    """Distance from each anchor to the nearest found time (inf if none found)."""
    found = np.asarray(found, dtype=float)
    if found.size == 0:
        return np.full(len(anchors), np.inf)
    return np.array([np.min(np.abs(found - a)) for a in anchors])


def gradient_peaks_near(dv: np.ndarray, grid: Grid, positions, window_um: float = 1.0) -> np.ndarray:
    """Location of the largest ``|dv|`` within ``window_um`` of each given position."""
    z = grid.z
    out = []
    for p in positions:
        sel = np.abs(z - p) <= window_um
        out.append(z[sel][int(np.argmax(np.abs(dv[sel])))])
    return np.array(out)
