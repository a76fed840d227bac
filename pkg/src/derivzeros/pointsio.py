"""Plain-text point files: one point per line, ``re im [weight]``."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidSpec, IoError


def load_points(path) -> tuple[np.ndarray, np.ndarray | None]:
    try:
        data = np.loadtxt(path, ndmin=2, comments="#", encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    except ValueError as exc:
        raise InvalidSpec(f"{path}: {exc}") from exc
    if data.shape[1] not in (2, 3):
        raise InvalidSpec(f"{path}: expected 2 or 3 columns, got {data.shape[1]}")
    pts = data[:, 0] + 1j * data[:, 1]
    return pts, (data[:, 2] if data.shape[1] == 3 else None)


def save_points(path, points, weights=None) -> Path:
    pts = np.asarray(getattr(points, "roots", points), np.complex128).reshape(-1)
    cols = [pts.real, pts.imag] + ([np.asarray(weights, float)] if weights is not None else [])
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.column_stack(cols), fmt="%.17g", encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path
