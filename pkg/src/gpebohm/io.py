"""File outputs: CSV tables and matrices, binary PGM heatmaps.

CSV files are comma separated with LF line endings and 17 significant
digits, which round-trips every float64 exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grid import Grid
from .states import Wavefunction, density, phase

FLOAT_FMT = "%.17g"


def _fmt_row(values) -> str:
    return ",".join(FLOAT_FMT % v for v in values)


def write_table(path: Path, header: list[str], columns) -> None:
    """Write equal-length columns under a one-line header."""
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(_fmt_row(row) + "\n")


def write_spacetime(path: Path, times, z, matrix) -> None:
    """Matrix CSV: header ``t_ms,z_0,...``; one row per time, first column the time."""
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="\n") as fh:
        fh.write("t_ms," + _fmt_row(z) + "\n")
        for t, row in zip(times, matrix):
            fh.write(FLOAT_FMT % t + "," + _fmt_row(row) + "\n")


def read_spacetime(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(path) as fh:
        z = np.array(fh.readline().strip().split(",")[1:], dtype=float)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], z, data[:, 1:]


def write_snapshot(path: Path, psi: Wavefunction) -> None:
    """One frame as rows of ``z_um, re_psi, im_psi, density, phase``."""
    theta, _ = phase(psi)
    write_table(
        path,
        ["z_um", "re_psi", "im_psi", "density", "phase"],
        [psi.z, psi.amplitudes.real, psi.amplitudes.imag, density(psi), theta],
    )


def read_snapshot(path: Path, grid: Grid, time_ms: float = 0.0) -> Wavefunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Wavefunction(data[:, 1] + 1j * data[:, 2], grid, time_ms)


def write_trajectories(path: Path, times, positions) -> None:
    """Header ``t_ms, x_1 ... x_M``; one row per stored time."""
    positions = np.asarray(positions)
    header = ["t_ms"] + [f"x_{i + 1}" for i in range(positions.shape[0])]
    write_table(path, header, [times, *positions])


def gray_levels(matrix, clip_lo: float, clip_hi: float) -> np.ndarray:
    """Map ``[clip_lo, clip_hi]`` linearly onto 0..255, saturating outside.

    Rounds half up, so a value exactly halfway lands on 128.
    """
    if not clip_lo < clip_hi:
        raise ValueError(f"clip_lo ({clip_lo}) must be below clip_hi ({clip_hi})")
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("heatmap input must be finite")
    scaled = (np.clip(m, clip_lo, clip_hi) - clip_lo) / (clip_hi - clip_lo) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def render_heatmap(path: Path, matrix, clip_lo: float, clip_hi: float) -> np.ndarray:
    """Write a binary (P5) PGM; row 0 of the matrix (earliest time) is the top row."""
    levels = np.atleast_2d(gray_levels(matrix, clip_lo, clip_hi))
    rows, cols = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())
    return levels


def read_pgm(path: Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
