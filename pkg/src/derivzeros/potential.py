"""Empirical measures, logarithmic potentials and radial equilibrium measures.

Conventions: ``U^mu(z) = int log 1/|z - w|^2 dmu(w)`` and
``I[mu] = int int log 1/|z - w|^2 dmu dmu``.  For a discrete measure the
diagonal of the double sum is excluded (``ENERGY_CONVENTION``).

For a radial potential ``Q(z) = g(|z|)`` write ``h(r) = r g'(r)``.  The
equilibrium measure is supported on the annulus ``r_in <= |z| <= r_out`` with
``h(r_in) = 0`` (or ``r_in = 0``) and ``h(r_out) = h(r_in) + 2``, has density
``Delta Q / (4 pi) = h'(r) / (4 pi r)`` there, and puts mass
``(h(r) - h(r_in)) / 2`` inside radius r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import AtomHit, CoincidentAtoms, NoDroplet
from .radial import MittagLeffler, RadialPotential, droplet_radii

ENERGY_CONVENTION = "off-diagonal"


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        p = np.array(getattr(self.points, "roots", self.points), dtype=np.complex128).reshape(-1)
        if p.size == 0:
            raise ValueError("an empirical measure needs at least one point")
        if self.weights is None:
            w = np.full(p.size, 1.0 / p.size)
            uniform = True
        else:
            w = np.array(self.weights, dtype=float).reshape(-1)
            if w.size != p.size:
                raise ValueError("points and weights differ in length")
            if np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be positive and finite")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1")
            uniform = False
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "uniform", uniform)

    def __len__(self):
        return self.points.size

    @classmethod
    def normalized(cls, points, weights) -> "EmpiricalMeasure":
        w = np.asarray(weights, float)
        return cls(points, w / w.sum())

    def map(self, fn) -> "EmpiricalMeasure":
        """Push forward by ``fn`` (applied to the points, weights kept)."""
        return EmpiricalMeasure(fn(self.points), None if self.uniform else self.weights)


def as_measure(x) -> EmpiricalMeasure:
    return x if isinstance(x, EmpiricalMeasure) else EmpiricalMeasure(x)


def log_potential(mu, z):
    """``U^mu(z)``; ``z`` may be a scalar or an array."""
    mu = as_measure(mu)
    zz = np.asarray(z, dtype=np.complex128)
    d = np.abs(zz.reshape(-1)[:, None] - mu.points[None, :])
    if not d.all():
        raise AtomHit("evaluation point is an atom of the measure")
    out = -2.0 * (np.log(d) @ mu.weights)
    return float(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)


def energy(mu) -> float:
    mu = as_measure(mu)
    p, w = mu.points, mu.weights
    d = np.abs(p[:, None] - p[None, :])
    np.fill_diagonal(d, 1.0)
    if not d.all():
        raise CoincidentAtoms("discrete energy needs pairwise distinct atoms")
    return float(-2.0 * (w @ np.log(d) @ w))


def weighted_energy(mu, Q) -> float:
    mu = as_measure(mu)
    return energy(mu) + 2.0 * float(np.asarray(Q(mu.points), float) @ mu.weights)


# ---------------------------------------------------------------- equilibrium

@dataclass(frozen=True, eq=False)
class EquilibriumMeasure:
    r_inner: float
    r_outer: float
    robin_constant: float
    potential: RadialPotential = field(repr=False)

    def h(self, r):
        return np.asarray(r, float) * self.potential.dg(r)

    def density(self, r):
        """``Delta Q / (4 pi)`` on the droplet, 0 off it."""
        r = np.asarray(r, float)
        inside = (r >= self.r_inner) & (r <= self.r_outer) & (r > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.potential.rdg_prime(r) / (4 * math.pi * r)
        return np.where(inside, val, 0.0)

    def _h_in(self) -> float:
        return 0.0 if self.r_inner == 0 else float(self.h(self.r_inner))

    def radial_cdf(self, r):
        """Mass inside radius r, from the antiderivative ``(h(r) - h(r_in)) / 2``."""
        r = np.asarray(r, float)
        rc = np.clip(r, max(self.r_inner, 1e-300), self.r_outer)
        with np.errstate(divide="ignore", invalid="ignore"):
            m = 0.5 * (self.h(rc) - self._h_in())
        m = np.where(r <= self.r_inner, 0.0, np.where(r >= self.r_outer, 1.0, m))
        return np.clip(m, 0.0, 1.0)

    def radial_cdf_quad(self, r: float) -> float:
        """Same as ``radial_cdf`` by direct quadrature of ``2 pi r density``."""
        hi = min(max(r, self.r_inner), self.r_outer)
        if hi <= self.r_inner:
            return 0.0
        val, _ = integrate.quad(lambda s: 2 * math.pi * s * float(self.density(s)),
                                self.r_inner, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def total_mass(self) -> float:
        return self.radial_cdf_quad(self.r_outer)

    def inverse_radial_cdf(self, u):
        u = np.asarray(u, float)
        pot = self.potential
        if isinstance(pot, MittagLeffler):
            return ((pot.nu + u) / pot.alpha) ** (1 / (2 * pot.alpha))
        h_in = self._h_in()
        lo = max(self.r_inner, 1e-12)

        def one(v):
            if v <= 0:
                return self.r_inner
            if v >= 1:
                return self.r_outer
            return optimize.bisect(lambda r: 0.5 * (float(self.h(r)) - h_in) - v,
                                   lo, self.r_outer, xtol=1e-15)

        return np.vectorize(one, otypes=[float])(u)

    def transform(self, u):
        """Push the unit square forward to the equilibrium measure."""
        u = np.asarray(u, float)
        return self.inverse_radial_cdf(u[:, 0]) * np.exp(2j * math.pi * u[:, 1])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.transform(rng.random((int(size), 2)))

    def log_potential_radial(self, r: float) -> float:
        """``U^sigma`` at any point of modulus r, by the circle-average identity

        ``int log|z - w| dtheta/(2 pi) = log max(|z|, |w|)``.
        """
        a, b = self.r_inner, self.r_outer
        dm = lambda s: 2 * math.pi * s * float(self.density(s))
        if r >= b:
            return -2.0 * math.log(r)
        lo = max(r, a)
        tail, _ = integrate.quad(lambda s: math.log(s) * dm(s), lo, b,
                                 epsabs=1e-13, epsrel=1e-13, limit=200)
        inner = float(self.radial_cdf(r)) * math.log(r) if r > a else 0.0
        return -2.0 * (inner + tail)

    def to_dict(self) -> dict:
        return {"r_inner": self.r_inner, "r_outer": self.r_outer,
                "robin_constant": self.robin_constant, "potential": self.potential.to_dict()}


def equilibrium_radial(pot: RadialPotential, bracket_hi: float | None = None) -> EquilibriumMeasure:
    """Droplet, density and modified Robin constant for a radial potential.

    The parametric family uses closed forms; custom potentials are solved by
    bisection on ``h(r) = r g'(r)`` (which must be non-decreasing).
    """
    if isinstance(pot, MittagLeffler):
        r_in, r_out = droplet_radii(pot)
    else:
        h = lambda r: float(r * pot.dg(r))
        lo = 1e-9
        hi = bracket_hi if bracket_hi is not None else 10.0
        if not h(hi) > h(lo):
            raise NoDroplet("r g'(r) does not increase on the bracket")
        if h(lo) < 0:
            if h(hi) <= 0:
                raise NoDroplet("r g'(r) = 0 has no root in the bracket")
            r_in = optimize.bisect(h, lo, hi, xtol=1e-15)
            h_in = 0.0
        else:
            r_in, h_in = 0.0, max(h(lo), 0.0)
        if h(hi) < h_in + 2:
            raise NoDroplet("mass condition r g'(r) = 2 not reached in the bracket")
        r_out = optimize.bisect(lambda r: h(r) - h_in - 2, max(r_in, lo), hi, xtol=1e-15)
    f_q = float(pot.g(r_out)) - 2.0 * math.log(r_out)
    return EquilibriumMeasure(r_inner=float(r_in), r_outer=float(r_out),
                              robin_constant=f_q, potential=pot)


def frostman_check(eq: EquilibriumMeasure, radii) -> np.ndarray:
    """``U^sigma + Q - F_Q`` on the given radii (0 on the droplet, >= 0 off it)."""
    out = []
    for r in np.asarray(radii, float):
        out.append(eq.log_potential_radial(r) + float(eq.potential.g(r)) - eq.robin_constant)
    return np.array(out)


def ks_radial(points, eq) -> float:
    """Kolmogorov-Smirnov distance between the radii of ``points`` and ``eq``.

    ``eq`` is anything with a vectorized ``radial_cdf``.
    """
    r = np.sort(np.abs(np.asarray(getattr(points, "roots", points), np.complex128).reshape(-1)))
    n = r.size
    f = np.asarray(eq.radial_cdf(r), float)
    i = np.arange(1, n + 1)
    return float(max((i / n - f).max(), (f - (i - 1) / n).max()))
