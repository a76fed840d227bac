"""Root-set polynomials and the normalized derivative functional.

A polynomial ``P(z) = prod_i (z - w_i)`` is carried by its roots only.  The
quantity ``L^k(z) = P^(k)(z) / (k! P(z))`` is the k-th elementary symmetric
function of the reciprocals ``u_i = 1/(z - w_i)`` and is computed with the
subtraction-free recurrence ``e_j <- e_j + e_{j-1} u_i`` in O(n k).

Coefficient expansion (``expand_from_roots`` / ``differentiate_coeffs``) is a
test oracle only and refuses degrees above 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DegreeTooLarge, DerivativeZero, ExactRootHit, OrderTooLarge
from .scaled import ScaledComplex

MAX_EXPAND_DEGREE = 64


@dataclass(frozen=True, eq=False)
class RootSet:
    """Multiset of complex roots; the order of ``roots`` carries no meaning."""

    roots: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.array(self.roots, dtype=np.complex128).reshape(-1)
        if r.size < 1:
            raise ValueError("a RootSet needs at least one root")
        if not np.all(np.isfinite(r)):
            raise ValueError("roots must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "roots", r)

    @property
    def degree(self) -> int:
        return int(self.roots.size)

    def __len__(self) -> int:
        return self.degree

    def __repr__(self) -> str:
        return f"RootSet(degree={self.degree})"

    def conjugate(self) -> "RootSet":
        return RootSet(self.roots.conj())

    def centroid(self) -> complex:
        return complex(self.roots.mean())


def as_rootset(p) -> RootSet:
    return p if isinstance(p, RootSet) else RootSet(p)


@dataclass(frozen=True)
class ElemSymTable:
    values: tuple[ScaledComplex, ...]
    order: int
    center: complex

    def __getitem__(self, j: int) -> ScaledComplex:
        return self.values[j]


def _fill(z: complex, roots: np.ndarray, m: int):
    mant = np.empty(m + 1, np.complex128)
    expo = np.empty(m + 1, np.int64)
    status, _ = _kernels.esf(complex(z), roots, m, False, mant, expo)
    if status >= 0:
        raise ExactRootHit(complex(z), int(status))
    return mant, expo


def log_abs_poly(z: complex, p) -> float:
    """``log|P(z)| = sum_i log|z - w_i|``, exactly-rounded summation."""
    p = as_rootset(p)
    d = complex(z) - p.roots
    hit = np.flatnonzero(d == 0)
    if hit.size:
        raise ExactRootHit(complex(z), int(hit[0]))
    return math.fsum(np.log(np.abs(d)).tolist())


def elem_sym_reciprocals(z: complex, p, m: int) -> ElemSymTable:
    p = as_rootset(p)
    if m < 0 or m > p.degree:
        raise OrderTooLarge(f"order {m} outside [0, {p.degree}]")
    mant, expo = _fill(z, p.roots, m)
    values = tuple(ScaledComplex(complex(mant[j]), int(expo[j])) for j in range(m + 1))
    return ElemSymTable(values=values, order=m, center=complex(z))


def lnk(z: complex, p, k: int) -> ScaledComplex:
    """``L^k(z) = P^(k)(z) / (k! P(z))``."""
    p = as_rootset(p)
    if k < 1 or k > p.degree:
        raise OrderTooLarge(f"k={k} outside [1, {p.degree}]")
    return elem_sym_reciprocals(z, p, k)[k]


def log_abs_lnk(z: complex, p, k: int) -> float:
    return lnk(z, p, k).log_abs()


def log_abs_lnk_many(points, p, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``ln|L^k|`` at many points.

    Returns ``(values, hits)``; ``hits[i]`` is the index of the root that
    ``points[i]`` equals exactly, else ``-1`` (and then ``values[i]`` is nan).
    """
    p = as_rootset(p)
    if k < 0 or k > p.degree:
        raise OrderTooLarge(f"k={k} outside [0, {p.degree}]")
    pts = np.ascontiguousarray(points, dtype=np.complex128).reshape(-1)
    out = np.empty(pts.size)
    hit = np.empty(pts.size, np.int64)
    _kernels.log_abs_esf_batch(pts, p.roots, k, out, hit)
    return out, hit


def newton_ratio(z: complex, p, k: int) -> complex:
    """``P^(k)(z) / P^(k+1)(z) = e_k / ((k+1) e_{k+1})``.

    Valid at roots of ``P`` too: exact hits are divided out analytically, so
    no perturbation is needed (``P^(k)`` is finite there for ``k >= 1``).
    """
    p = as_rootset(p)
    if k < 0 or k + 1 > p.degree:
        raise OrderTooLarge(f"need 0 <= k and k+1 <= {p.degree}, got k={k}")
    mant = np.empty(k + 2, np.complex128)
    expo = np.empty(k + 2, np.int64)
    r, status = _kernels.newton_ratio(complex(z), p.roots, k, mant, expo)
    if status:
        raise DerivativeZero(f"P^({k + 1}) vanishes at {z!r}")
    return complex(r)


def expand_from_roots(p) -> np.ndarray:
    """Monic coefficients, highest degree first (``numpy.polyval`` order)."""
    p = as_rootset(p)
    if p.degree > MAX_EXPAND_DEGREE:
        raise DegreeTooLarge(f"degree {p.degree} > {MAX_EXPAND_DEGREE}")
    c = np.array([1.0 + 0j])
    for w in p.roots:
        c = np.convolve(c, np.array([1.0, -w]))
    if not np.any(p.roots.imag):
        c = c.real.astype(np.complex128)
    return c


def differentiate_coeffs(coeffs: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128)
    deg = c.size - 1
    if deg < 1:
        return np.zeros(1, np.complex128)
    return c[:-1] * np.arange(deg, 0, -1)


def eval_coeffs(coeffs: Sequence[complex], z) -> np.ndarray:
    return np.polyval(np.asarray(coeffs, dtype=np.complex128), z)


def derivative_coeffs(p, k: int) -> np.ndarray:
    c = expand_from_roots(p)
    for _ in range(k):
        c = differentiate_coeffs(c)
    return c


def roots_from_points(points: Iterable[complex]) -> RootSet:
    return RootSet(np.fromiter(points, dtype=np.complex128))
