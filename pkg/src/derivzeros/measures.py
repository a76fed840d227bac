"""Base measures on the plane and deterministic sequences distributed like them.

Every measure is represented by a map ``transform`` from the unit square to
the plane that pushes Lebesgue measure forward to the target.  I.i.d. samples
and stratified (low-discrepancy) sequences then share one code path: feed
uniform or Halton points through the same map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.stats import qmc

from .errors import InvalidSpec
from .rng import stream

TWO_PI = 2.0 * math.pi


def _angle(u: np.ndarray) -> np.ndarray:
    return np.exp(1j * TWO_PI * u)


class MeasureSpec:
    """Common interface; concrete measures are frozen dataclasses below."""

    kind: ClassVar[str] = ""
    symmetric: ClassVar[bool] = False      # invariant under z -> -z
    bounded_density: ClassVar[bool] = False
    atomic: ClassVar[bool] = False

    def transform(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.transform(rng.random((int(size), 2)))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformDisk(MeasureSpec):
    radius: float = 1.0
    kind: ClassVar[str] = "uniform_disk"
    symmetric: ClassVar[bool] = True
    bounded_density: ClassVar[bool] = True

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidSpec("radius must be positive")

    def transform(self, u):
        u = np.asarray(u, float)
        return self.radius * np.sqrt(u[:, 0]) * _angle(u[:, 1])

    def radial_cdf(self, r):
        return np.clip((np.asarray(r, float) / self.radius) ** 2, 0.0, 1.0)

    def to_dict(self):
        return {"type": self.kind, "radius": self.radius}


@dataclass(frozen=True)
class UniformCircle(MeasureSpec):
    radius: float = 1.0
    kind: ClassVar[str] = "uniform_circle"
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidSpec("radius must be positive")

    def transform(self, u):
        u = np.asarray(u, float)
        return self.radius * _angle(u[:, 1])

    def to_dict(self):
        return {"type": self.kind, "radius": self.radius}


@dataclass(frozen=True)
class ComplexGaussian(MeasureSpec):
    """Rotation-invariant Gaussian with ``E|z|^2 = sigma^2``."""

    sigma: float = 1.0
    kind: ClassVar[str] = "complex_gaussian"
    symmetric: ClassVar[bool] = True
    bounded_density: ClassVar[bool] = True

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidSpec("sigma must be positive")

    def transform(self, u):
        u = np.asarray(u, float)
        # |z|^2 / sigma^2 is Exp(1)
        return self.sigma * np.sqrt(-np.log1p(-u[:, 0])) * _angle(u[:, 1])

    def to_dict(self):
        return {"type": self.kind, "sigma": self.sigma}


@dataclass(frozen=True)
class UniformAnnulus(MeasureSpec):
    r_in: float = 0.5
    r_out: float = 1.0
    kind: ClassVar[str] = "uniform_annulus"
    symmetric: ClassVar[bool] = True
    bounded_density: ClassVar[bool] = True

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise InvalidSpec("need 0 <= r_in < r_out")

    def transform(self, u):
        u = np.asarray(u, float)
        a, b = self.r_in ** 2, self.r_out ** 2
        return np.sqrt(a + u[:, 0] * (b - a)) * _angle(u[:, 1])

    def to_dict(self):
        return {"type": self.kind, "r_in": self.r_in, "r_out": self.r_out}


def _split(u0: np.ndarray, cum: np.ndarray):
    """Component index for each u0 and the rescaled residual in [0, 1)."""
    idx = np.searchsorted(cum, u0, side="right")
    idx = np.minimum(idx, cum.size - 1)
    lo = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    width = cum[idx] - lo
    rest = np.where(width > 0, (u0 - lo) / np.where(width > 0, width, 1.0), 0.0)
    return idx, np.clip(rest, 0.0, np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class AtomMixture(MeasureSpec):
    """Point masses plus an optional continuous component.

    ``sum(weights) + continuous_weight`` must be 1.
    """

    atoms: tuple = ()
    weights: tuple = ()
    continuous: MeasureSpec | None = None
    continuous_weight: float = 0.0
    kind: ClassVar[str] = "atom_mixture"
    atomic: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(complex(a) for a in self.atoms))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.atoms) != len(self.weights) or not self.atoms:
            raise InvalidSpec("atoms and weights must be non-empty and of equal length")
        if min(self.weights) < 0 or self.continuous_weight < 0:
            raise InvalidSpec("weights must be non-negative")
        if self.continuous_weight > 0 and self.continuous is None:
            raise InvalidSpec("continuous_weight > 0 needs a continuous component")
        if abs(sum(self.weights) + self.continuous_weight - 1.0) > 1e-12:
            raise InvalidSpec("mixture weights must sum to 1")

    def transform(self, u):
        u = np.asarray(u, float)
        w = list(self.weights) + ([self.continuous_weight] if self.continuous is not None else [])
        cum = np.cumsum(w)
        cum[-1] = 1.0
        idx, rest = _split(u[:, 0], cum)
        out = np.empty(u.shape[0], np.complex128)
        na = len(self.atoms)
        is_atom = idx < na
        out[is_atom] = np.asarray(self.atoms)[idx[is_atom]]
        if self.continuous is not None and (~is_atom).any():
            sub = np.column_stack([rest[~is_atom], u[~is_atom, 1]])
            out[~is_atom] = self.continuous.transform(sub)
        return out

    def to_dict(self):
        d = {"type": self.kind,
             "atoms": [[a.real, a.imag] for a in self.atoms],
             "weights": list(self.weights),
             "continuous_weight": self.continuous_weight}
        if self.continuous is not None:
            d["continuous"] = self.continuous.to_dict()
        return d


@dataclass(frozen=True, eq=False)
class CustomGrid(MeasureSpec):
    """Piecewise-constant density on a rectangular grid of cells.

    ``values[i, j]`` is the (unnormalized) density on the cell with real part
    in the i-th x-interval and imaginary part in the j-th y-interval.
    """

    x_range: tuple = (-1.0, 1.0)
    y_range: tuple = (-1.0, 1.0)
    values: np.ndarray = field(default_factory=lambda: np.ones((1, 1)))
    kind: ClassVar[str] = "custom_grid"
    bounded_density: ClassVar[bool] = True

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise InvalidSpec("grid values must be a non-empty 2-d array")
        if not np.all(np.isfinite(v)) or v.min() < 0 or v.sum() <= 0:
            raise InvalidSpec("grid density must be finite, non-negative and not all zero")
        if not (self.x_range[0] < self.x_range[1] and self.y_range[0] < self.y_range[1]):
            raise InvalidSpec("empty grid rectangle")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def transform(self, u):
        u = np.asarray(u, float)
        v = self.values
        nx, ny = v.shape
        cum = np.cumsum(v.reshape(-1)) / v.sum()
        cum[-1] = 1.0
        idx, rest = _split(u[:, 0], cum)
        ix, iy = np.divmod(idx, ny)
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        x = x0 + (ix + rest) * (x1 - x0) / nx
        y = y0 + (iy + u[:, 1]) * (y1 - y0) / ny
        return x + 1j * y

    def to_dict(self):
        return {"type": self.kind, "x_range": list(self.x_range),
                "y_range": list(self.y_range), "values": self.values.tolist()}


_MEASURES = {cls.kind: cls for cls in
             (UniformDisk, UniformCircle, ComplexGaussian, UniformAnnulus, AtomMixture, CustomGrid)}


def measure_from_dict(d: dict) -> MeasureSpec:
    d = dict(d)
    kind = d.pop("type", None)
    if kind not in _MEASURES:
        raise InvalidSpec(f"unknown measure type {kind!r}")
    if kind == "atom_mixture":
        d["atoms"] = [complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a)
                      for a in d.get("atoms", [])]
        if "continuous" in d:
            d["continuous"] = measure_from_dict(d["continuous"])
    try:
        return _MEASURES[kind](**d)
    except TypeError as exc:
        raise InvalidSpec(f"bad parameters for {kind}: {exc}") from None


# ---------------------------------------------------------------- sequences

SEQUENCE_KINDS = ("stratified", "explicit", "iid")


@dataclass(frozen=True, eq=False)
class SequenceSpec:
    """A deterministic sequence z_1, z_2, ... distributed like ``measure``.

    ``stratified`` pushes the unscrambled Halton sequence (bases 2 and 3)
    through the measure's inverse-CDF map after a seeded Cranley-Patterson
    shift; ``iid`` is a frozen seeded i.i.d. draw; ``explicit`` is a given
    list.  With ``triangular=True`` row n of the array is regenerated from a
    stream keyed by n instead of being the length-n prefix of one sequence.
    """

    kind: str = "stratified"
    measure: MeasureSpec | None = None
    seed: int = 0
    points: tuple = ()
    triangular: bool = False

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise InvalidSpec(f"sequence kind must be one of {SEQUENCE_KINDS}")
        if self.kind == "explicit":
            pts = np.asarray(self.points, dtype=np.complex128).reshape(-1)
            if pts.size == 0 or not np.all(np.isfinite(pts)):
                raise InvalidSpec("explicit sequence needs finite points")
            object.__setattr__(self, "points", tuple(pts.tolist()))
        elif self.measure is None:
            raise InvalidSpec(f"{self.kind} sequence needs a measure")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")

    def row(self, n: int) -> np.ndarray:
        """The first n terms (or row n of the triangular array)."""
        n = int(n)
        if self.kind == "explicit":
            if n > len(self.points):
                raise InvalidSpec(f"explicit sequence has {len(self.points)} points, need {n}")
            return np.array(self.points[:n], dtype=np.complex128)
        key = (self.seed, n) if self.triangular else (self.seed,)
        rng = stream(0x5E0, *key)
        if self.kind == "iid":
            u = rng.random((n, 2))
        else:
            shift = rng.random(2)
            u = (qmc.Halton(d=2, scramble=False).random(n) + shift) % 1.0
        return self.measure.transform(u)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed, "triangular": self.triangular}
        if self.kind == "explicit":
            d["points"] = [[z.real, z.imag] for z in self.points]
        else:
            d["measure"] = self.measure.to_dict()
        return d


def sequence_from_dict(d: dict) -> SequenceSpec:
    d = dict(d)
    if "measure" in d:
        d["measure"] = measure_from_dict(d["measure"])
    if "points" in d:
        d["points"] = tuple(complex(p[0], p[1]) if isinstance(p, (list, tuple)) else complex(p)
                            for p in d["points"])
    try:
        return SequenceSpec(**d)
    except TypeError as exc:
        raise InvalidSpec(f"bad sequence spec: {exc}") from None
