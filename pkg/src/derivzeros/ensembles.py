"""Random-polynomial models, each sampled as a ``RootSet``.

Six models are provided, plus a fixed-roots model used for negative controls:

* ``IidZeros``      zeros i.i.d. from mu
* ``PairedChoice``  zero i is a_i or b_i with equal probability
* ``Perturbed``     zero i is z_i - sigma_i X_i with symmetric noise X_i
* ``RemoveOne``     z_0..z_n with one index, uniform on {0..n}, removed
* ``Augmented``     z_1..z_n plus k_extra independent zeros with bounded density
* ``CoulombGas``    2D Coulomb gas with a radial potential, via Metropolis
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from . import _kernels
from .errors import CoincidentPoints, InvalidSpec
from .measures import (MeasureSpec, SequenceSpec, UniformCircle, measure_from_dict,
                       sequence_from_dict)
from .polycore import RootSet
from .radial import MittagLeffler, RadialPotential, droplet_radii, potential_from_dict
from .rng import stream


class EnsembleSpec:
    kind: ClassVar[str] = ""
    n: int

    @property
    def degree(self) -> int:
        return self.n

    def sample(self, seed: int) -> RootSet:
        return RootSet(self._draw(stream(0xE45, int(seed))))

    def _draw(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def target(self):
        """Limit of the zero distribution (a measure with ``transform``), or None."""
        return None

    def regime_note(self) -> str | None:
        """Set when the instance lies outside the regime covered by theory."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_n(self, minimum: int = 2):
        if int(self.n) < minimum:
            raise InvalidSpec(f"n must be >= {minimum}")


def _seq_target(seq: SequenceSpec):
    return seq.measure


@dataclass(frozen=True)
class IidZeros(EnsembleSpec):
    mu: MeasureSpec
    n: int
    kind: ClassVar[str] = "iid"

    def __post_init__(self):
        self._check_n()

    def _draw(self, rng):
        return self.mu.sample(rng, self.n)

    def target(self):
        return self.mu

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "mu": self.mu.to_dict()}


@dataclass(frozen=True)
class PairedChoice(EnsembleSpec):
    """Zero i is a_i or b_i with probability 1/2 each, independently.

    Generated (non-explicit) pairs closer than ``exp(-sqrt(n))`` but not equal
    are pushed apart to that separation, which keeps the triangular-array
    condition ``sum log+ 1/|a_i - b_i| = o(n^2)`` true by construction.
    Explicit lists are left alone; ``separation_stat`` reports the sum.
    """

    a_seq: SequenceSpec
    b_seq: SequenceSpec
    n: int
    kind: ClassVar[str] = "paired"

    def __post_init__(self):
        self._check_n()

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.a_seq.row(self.n)
        b = self.b_seq.row(self.n)
        if self.a_seq.kind != "explicit" and self.b_seq.kind != "explicit":
            sep = math.exp(-math.sqrt(self.n))
            d = b - a
            close = (np.abs(d) > 0) & (np.abs(d) < sep)
            b = b.copy()
            b[close] = a[close] + sep * d[close] / np.abs(d[close])
        return a, b

    def separation_stat(self) -> tuple[float, int]:
        """``(sum over a_i != b_i of log+ 1/|a_i - b_i|, number of equal pairs)``."""
        a, b = self.pairs()
        d = np.abs(a - b)
        ne = d > 0
        return float(np.maximum(-np.log(d[ne]), 0.0).sum()), int((~ne).sum())

    def _draw(self, rng):
        a, b = self.pairs()
        pick_a = rng.random(self.n) < 0.5
        return np.where(pick_a, a, b)

    def target(self):
        return _seq_target(self.a_seq)

    def to_dict(self):
        return {"type": self.kind, "n": self.n,
                "a_seq": self.a_seq.to_dict(), "b_seq": self.b_seq.to_dict()}


@dataclass(frozen=True)
class Perturbed(EnsembleSpec):
    """Zeros ``z_i - sigma_i X_i`` with ``sigma_i = scale * i^(-exponent)``."""

    z_seq: SequenceSpec
    noise: MeasureSpec
    n: int
    scale: float = 1.0
    exponent: float = 0.5
    kind: ClassVar[str] = "perturbed"

    def __post_init__(self):
        self._check_n()
        if not self.noise.symmetric:
            raise InvalidSpec("perturbation noise must be symmetric")
        if not (self.scale > 0 and self.exponent > 0):
            raise InvalidSpec("sigma_i must decrease strictly to 0: need scale > 0, exponent > 0")

    def sigmas(self) -> np.ndarray:
        return self.scale * np.arange(1, self.n + 1, dtype=float) ** -self.exponent

    def _draw(self, rng):
        return self.z_seq.row(self.n) - self.sigmas() * self.noise.sample(rng, self.n)

    def target(self):
        return _seq_target(self.z_seq)

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "z_seq": self.z_seq.to_dict(),
                "noise": self.noise.to_dict(), "scale": self.scale, "exponent": self.exponent}


@dataclass(frozen=True)
class RemoveOne(EnsembleSpec):
    """Degree n: the n+1 points z_0..z_n with one of them removed uniformly."""

    z_seq: SequenceSpec
    n: int
    kind: ClassVar[str] = "remove_one"

    def __post_init__(self):
        self._check_n()

    def _draw(self, rng):
        z = self.z_seq.row(self.n + 1)
        s = int(rng.integers(0, self.n + 1))
        return np.delete(z, s)

    def target(self):
        return _seq_target(self.z_seq)

    def regime_note(self):
        m = self.z_seq.measure
        if self.z_seq.kind == "explicit" or (m is not None and m.atomic):
            return "outside proven regime: base measure may have atoms"
        return None

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "z_seq": self.z_seq.to_dict()}


@dataclass(frozen=True)
class Augmented(EnsembleSpec):
    """z_1..z_n plus ``k_extra`` independent zeros drawn from ``extra``."""

    z_seq: SequenceSpec
    n: int
    k_extra: int
    extra: MeasureSpec
    kind: ClassVar[str] = "augmented"

    def __post_init__(self):
        self._check_n()
        if self.k_extra < 1:
            raise InvalidSpec("k_extra must be >= 1")
        if not self.extra.bounded_density:
            raise InvalidSpec("extra zeros need a bounded density")

    @property
    def degree(self):
        return self.n + self.k_extra

    def _draw(self, rng):
        return np.concatenate([self.z_seq.row(self.n), self.extra.sample(rng, self.k_extra)])

    def target(self):
        return _seq_target(self.z_seq)

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "z_seq": self.z_seq.to_dict(),
                "k_extra": self.k_extra, "extra": self.extra.to_dict()}


@dataclass(frozen=True)
class FixedRoots(EnsembleSpec):
    """Deterministic zeros: the n-th roots of unity or an explicit list."""

    n: int
    points: tuple = ()
    kind: ClassVar[str] = "fixed"

    def __post_init__(self):
        self._check_n(1)
        if self.points and len(self.points) != self.n:
            raise InvalidSpec("explicit fixed roots must have length n")

    def _draw(self, rng):
        if self.points:
            return np.asarray(self.points, np.complex128)
        return np.exp(2j * np.pi * np.arange(self.n) / self.n)

    def target(self):
        return None if self.points else UniformCircle(1.0)

    def to_dict(self):
        d = {"type": self.kind, "n": self.n}
        if self.points:
            d["points"] = [[complex(p).real, complex(p).imag] for p in self.points]
        return d


# ---------------------------------------------------------------- Coulomb gas

@dataclass(frozen=True)
class McmcConfig:
    sweeps: int = 2000
    burn_in: int = 500
    step: float | None = None          # None: 0.5 * droplet radius / sqrt(n)
    target_acceptance: float = 0.30
    adapt: bool = True
    thin: int = 1
    seed: int | None = None            # None: derive from the sample seed

    def __post_init__(self):
        if self.sweeps < 1 or self.burn_in < 0 or self.thin < 1:
            raise InvalidSpec("sweeps >= 1, burn_in >= 0 and thin >= 1 required")
        if not 0 < self.target_acceptance < 1:
            raise InvalidSpec("target acceptance must lie in (0, 1)")
        if self.step is not None and self.step < 0:
            raise InvalidSpec("step must be >= 0")

    def to_dict(self):
        return {"sweeps": self.sweeps, "burn_in": self.burn_in, "step": self.step,
                "target_acceptance": self.target_acceptance, "adapt": self.adapt,
                "thin": self.thin, "seed": self.seed}


def outer_radius(pot: RadialPotential) -> float:
    if isinstance(pot, MittagLeffler):
        return droplet_radii(pot)[1]
    from .potential import equilibrium_radial
    return equilibrium_radial(pot).r_outer


def coulomb_energy(points, potential: RadialPotential, n_scale: int) -> float:
    """``H = 2 sum_{j<k} log 1/|z_j - z_k| + n_scale sum_i Q(z_i)``."""
    z = np.ascontiguousarray(np.asarray(getattr(points, "roots", points), np.complex128).reshape(-1))
    pair = _kernels.pair_log_sum(z)
    if math.isnan(pair):
        raise CoincidentPoints("two points coincide")
    return -2.0 * pair + n_scale * math.fsum(np.asarray(potential.Q(z), float).tolist())


@dataclass
class SweepResult:
    points: np.ndarray
    acceptance: float
    delta_energy: float


def _sweep_numpy(z, pot, n_scale, beta, step, normals, uniforms):
    accepted = 0
    dh_total = 0.0
    n = z.size
    for i in range(n):
        old = z[i]
        new = old + step * complex(normals[i, 0], normals[i, 1])
        if new == old:
            accepted += 1
            continue
        q_new = float(pot.Q(new))
        if not math.isfinite(q_new):
            continue
        others = np.delete(z, i)
        dn = np.abs(new - others)
        if not dn.all():
            continue
        dh = n_scale * (q_new - float(pot.Q(old))) - 2.0 * float(
            np.sum(np.log(dn) - np.log(np.abs(old - others))))
        x = -beta * dh
        if x >= 0 or uniforms[i] < math.exp(x):
            z[i] = new
            accepted += 1
            dh_total += dh
    return accepted, dh_total


def coulomb_sweep(points, potential: RadialPotential, beta: float, step: float,
                  rng: np.random.Generator, n_scale: int | None = None) -> SweepResult:
    """One Metropolis sweep: every particle proposes one Gaussian move in turn.

    Moves are accepted with probability ``min(1, exp(-beta dH))``; proposals
    onto another particle or onto a pole of Q are rejected.  ``points`` is
    copied, not modified.
    """
    z = np.array(getattr(points, "roots", points), dtype=np.complex128).reshape(-1)
    n = z.size
    n_scale = n if n_scale is None else n_scale
    normals = rng.standard_normal((n, 2)) / math.sqrt(2.0)
    uniforms = rng.random(n)
    if isinstance(potential, MittagLeffler):
        acc, dh = _kernels.coulomb_sweep_ml(z, potential.alpha, potential.nu, float(n_scale),
                                            float(beta), float(step), normals, uniforms)
    else:
        acc, dh = _sweep_numpy(z, potential, n_scale, beta, step, normals, uniforms)
    return SweepResult(points=z, acceptance=acc / n, delta_energy=float(dh))


@dataclass
class ChainResult:
    points: np.ndarray
    snapshots: list
    acceptance: list
    step: float
    energy: float
    energy_drift: float = field(default=0.0)


def run_chain(potential: RadialPotential, beta: float, n: int, cfg: McmcConfig,
              rng: np.random.Generator) -> ChainResult:
    """Burn in (adapting the step toward the target acceptance), then sample.

    The step is frozen after burn-in.  ``snapshots`` holds every ``thin``-th
    post-burn-in state.  ``energy_drift`` compares the running sum of accepted
    dH against a full recomputation at the end.
    """
    r_out = outer_radius(potential)
    rad = (r_out + 1.0) * np.sqrt(rng.random(n))
    z = rad * np.exp(2j * np.pi * rng.random(n))
    step = cfg.step if cfg.step is not None else 0.5 * r_out / math.sqrt(n)
    h0 = coulomb_energy(z, potential, n)
    running = h0
    acc_hist = []
    snaps = []
    for s in range(cfg.burn_in + cfg.sweeps):
        res = coulomb_sweep(z, potential, beta, step, rng)
        z = res.points
        running += res.delta_energy
        acc_hist.append(res.acceptance)
        if s < cfg.burn_in:
            if cfg.adapt and step > 0:
                step *= math.exp(res.acceptance - cfg.target_acceptance)
        elif (s - cfg.burn_in + 1) % cfg.thin == 0:
            snaps.append(z.copy())
    h = coulomb_energy(z, potential, n)
    return ChainResult(points=z, snapshots=snaps, acceptance=acc_hist, step=step,
                       energy=h, energy_drift=abs(running - h))


@dataclass(frozen=True)
class CoulombGas(EnsembleSpec):
    potential: RadialPotential
    beta: float
    n: int
    mcmc: McmcConfig = McmcConfig()
    kind: ClassVar[str] = "coulomb"

    def __post_init__(self):
        self._check_n()
        if not self.beta > 0:
            raise InvalidSpec("beta must be positive")

    def sample(self, seed: int) -> RootSet:
        key = self.mcmc.seed if self.mcmc.seed is not None else int(seed)
        return RootSet(run_chain(self.potential, self.beta, self.n, self.mcmc,
                                 stream(0xC0, key)).points)

    def target(self):
        from .potential import equilibrium_radial
        return equilibrium_radial(self.potential)

    def to_dict(self):
        return {"type": self.kind, "n": self.n, "beta": self.beta,
                "potential": self.potential.to_dict(), "mcmc": self.mcmc.to_dict()}


def sample(spec: EnsembleSpec, seed: int) -> RootSet:
    return spec.sample(seed)


def log_cesaro_stat(points) -> float:
    """``(1/n) sum_i log+ |w_i|``."""
    w = np.abs(np.asarray(getattr(points, "roots", points), np.complex128).reshape(-1))
    with np.errstate(divide="ignore"):
        return float(np.maximum(np.log(w), 0.0).mean())


_ENSEMBLES = {c.kind: c for c in
              (IidZeros, PairedChoice, Perturbed, RemoveOne, Augmented, CoulombGas, FixedRoots)}


def ensemble_from_dict(d: dict, n: int | None = None) -> EnsembleSpec:
    """Build a spec from a config document; ``n`` overrides the document's."""
    d = dict(d)
    kind = d.pop("type", None)
    if kind not in _ENSEMBLES:
        raise InvalidSpec(f"unknown ensemble type {kind!r}")
    if n is not None:
        d["n"] = n
    for key in ("mu", "noise", "extra"):
        if key in d:
            d[key] = measure_from_dict(d[key])
    for key in ("a_seq", "b_seq", "z_seq"):
        if key in d:
            d[key] = sequence_from_dict(d[key])
    if "potential" in d:
        d["potential"] = potential_from_dict(d["potential"])
    if "mcmc" in d:
        d["mcmc"] = McmcConfig(**d["mcmc"])
    if "points" in d:
        d["points"] = tuple(complex(p[0], p[1]) if isinstance(p, (list, tuple)) else complex(p)
                            for p in d["points"])
    try:
        return _ENSEMBLES[kind](**d)
    except TypeError as exc:
        raise InvalidSpec(f"bad parameters for {kind}: {exc}") from None
