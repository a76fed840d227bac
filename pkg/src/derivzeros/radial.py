"""Radial external potentials ``Q(z) = g(|z|)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np

from .errors import InvalidSpec


class RadialPotential:
    kind: ClassVar[str] = ""

    def g(self, r):
        raise NotImplementedError

    def dg(self, r):
        raise NotImplementedError

    def rdg_prime(self, r):
        """``d/dr (r g'(r))``; the radial Laplacian is this divided by r."""
        # five-point stencil: O(h^4) truncation, roundoff ~ 1e-16 / h
        h = 1e-3 * np.maximum(1.0, np.abs(r)) if np.all(np.asarray(r) > 2e-3) else 1e-3 * np.abs(r) + 1e-12
        f = lambda s: s * self.dg(s)
        return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)

    def Q(self, z):
        return self.g(np.abs(z))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MittagLeffler(RadialPotential):
    """``Q(z) = |z|^(2 alpha) - 2 nu log|z|``; alpha = 1, nu = 0 is Ginibre."""

    alpha: float = 1.0
    nu: float = 0.0
    kind: ClassVar[str] = "mittag_leffler"

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise InvalidSpec("alpha must be >= 1")
        if not self.nu >= 0.0:
            raise InvalidSpec("nu must be >= 0")

    def g(self, r):
        r = np.asarray(r, float)
        out = r ** (2 * self.alpha)
        if self.nu:
            with np.errstate(divide="ignore"):
                out = out - 2 * self.nu * np.log(r)
        return out

    def dg(self, r):
        r = np.asarray(r, float)
        with np.errstate(divide="ignore"):
            return 2 * self.alpha * r ** (2 * self.alpha - 1) - 2 * self.nu / r

    def rdg_prime(self, r):
        r = np.asarray(r, float)
        return 4 * self.alpha ** 2 * r ** (2 * self.alpha - 1)

    def to_dict(self):
        return {"type": self.kind, "alpha": self.alpha, "nu": self.nu}


@dataclass(frozen=True, eq=False)
class CustomRadial(RadialPotential):
    """User-supplied ``g`` and ``g'`` (vectorized callables).

    ``r g'(r)`` must be non-decreasing for the droplet computation to apply.
    """

    g_fn: Callable = None
    dg_fn: Callable = None
    name: str = "custom"
    kind: ClassVar[str] = "custom"

    def __post_init__(self):
        if not (callable(self.g_fn) and callable(self.dg_fn)):
            raise InvalidSpec("custom potential needs callables g and g'")

    def g(self, r):
        return np.asarray(self.g_fn(np.asarray(r, float)), float)

    def dg(self, r):
        return np.asarray(self.dg_fn(np.asarray(r, float)), float)

    def to_dict(self):
        return {"type": self.kind, "name": self.name}


def potential_from_dict(d: dict) -> RadialPotential:
    d = dict(d)
    kind = d.pop("type", MittagLeffler.kind)
    if kind != MittagLeffler.kind:
        raise InvalidSpec("only the mittag_leffler family can be given in a config document")
    try:
        return MittagLeffler(**d)
    except TypeError as exc:
        raise InvalidSpec(f"bad potential parameters: {exc}") from None


def droplet_radii(pot: RadialPotential) -> tuple[float, float]:
    """Closed-form droplet radii for the parametric family."""
    if not isinstance(pot, MittagLeffler):
        raise TypeError("closed form only for MittagLeffler")
    a, v = pot.alpha, pot.nu
    r_in = (v / a) ** (1 / (2 * a)) if v > 0 else 0.0
    return r_in, ((1 + v) / a) ** (1 / (2 * a))

