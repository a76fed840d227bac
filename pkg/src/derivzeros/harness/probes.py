"""Probe statistics for the normalized derivative ``L^k = P^(k) / (k! P)``.

* small values: how often ``log|L^k(z)| < -n eps`` at fixed points z
* tightness: Monte Carlo estimate of ``(1/n^2) int_{D_r} log^2 |P^(k)/P| dm``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..polycore import log_abs_lnk_many
from ..rng import child_seed, stream
from .config import ExperimentConfig

_Z, _MC = 11, 12


def _nudge(z):
    return z + 2.0 ** -40 * (1.0 + np.abs(z))


def probe_points(cfg: ExperimentConfig) -> np.ndarray:
    """The fixed probe points plus seeded uniform draws from the disk of radius 2."""
    fixed = np.asarray(cfg.probe.z_points, np.complex128)
    m = cfg.probe.extra_random_z
    if m == 0:
        return fixed
    rng = stream(cfg.master_seed, _Z)
    u = rng.random((m, 2))
    extra = 2.0 * np.sqrt(u[:, 0]) * np.exp(2j * math.pi * u[:, 1])
    return np.concatenate([fixed, extra])


def _log_lnk(points, roots, k):
    """``log|L^k|`` at points; exact root hits are nudged once, the count returned."""
    vals, hit = log_abs_lnk_many(points, roots, k)
    bad = hit >= 0
    if bad.any():
        vals[bad], hit2 = log_abs_lnk_many(_nudge(points[bad]), roots, k)
        vals[bad] = np.where(hit2 >= 0, -math.inf, vals[bad])
    return vals, int(bad.sum())


@dataclass
class SmallValueRow:
    z: complex
    n: int
    k: int
    eps: float
    trials: int
    count: int
    retries: int

    @property
    def frequency(self) -> float:
        return self.count / self.trials

    def as_dict(self):
        return {"z_re": self.z.real, "z_im": self.z.imag, "n": self.n, "k": self.k,
                "eps": self.eps, "trials": self.trials, "count": self.count,
                "frequency": self.frequency, "retries": self.retries}


def probe_small_values(cfg: ExperimentConfig, k: int | None = None, z_points=None,
                       eps: float | None = None) -> list[SmallValueRow]:
    """Fraction of trials with ``log|L_n^k(z)| < -n eps``, per (z, n).

    Trial t at degree n reuses the polynomial of the convergence study
    (same seed), so the two experiments describe the same samples.
    """
    k = cfg.k_list[0] if k is None else k
    eps = cfg.probe.eps if eps is None else eps
    z = probe_points(cfg) if z_points is None else np.asarray(z_points, np.complex128).reshape(-1)
    rows = []
    for n in cfg.n_grid:
        spec = cfg.spec(n)
        count = np.zeros(z.size, int)
        retries = 0
        for t in range(cfg.trials):
            roots = spec.sample(child_seed(cfg.master_seed, n, t)).roots
            vals, r = _log_lnk(z, roots, k)
            retries += r
            count += vals < -n * eps
        for i in range(z.size):
            rows.append(SmallValueRow(complex(z[i]), n, k, eps, cfg.trials, int(count[i]), retries))
    return rows


@dataclass
class TightnessRow:
    n: int
    k: int
    trial: int
    estimate: float
    stderr: float
    resampled: int

    def as_dict(self):
        return dict(n=self.n, k=self.k, trial=self.trial, estimate=self.estimate,
                    stderr=self.stderr, resampled=self.resampled)


def probe_tightness(cfg: ExperimentConfig, k: int | None = None, r: float | None = None,
                    mc_points: int | None = None) -> list[TightnessRow]:
    """Uniform Monte Carlo on the disk of radius r, one row per (n, trial)."""
    k = cfg.k_list[0] if k is None else k
    r = cfg.probe.r if r is None else r
    m = cfg.probe.mc_points if mc_points is None else mc_points
    area = math.pi * r * r
    rows = []
    for n in cfg.n_grid:
        spec = cfg.spec(n)
        for t in range(cfg.trials):
            if k == 0:
                rows.append(TightnessRow(n, 0, t, 0.0, 0.0, 0))
                continue
            roots = spec.sample(child_seed(cfg.master_seed, n, t)).roots
            rng = stream(cfg.master_seed, n, t, _MC)
            u = rng.random((m, 2))
            z = r * np.sqrt(u[:, 0]) * np.exp(2j * math.pi * u[:, 1])
            vals, hits = _log_lnk(z, roots, k)
            # P^(k)/P = k! L^k
            f = (vals + math.lgamma(k + 1)) ** 2
            est = area * f.mean() / n ** 2
            se = area * f.std(ddof=1) / math.sqrt(m) / n ** 2
            rows.append(TightnessRow(n, k, t, float(est), float(se), hits))
    return rows


def tightness_medians(rows) -> dict:
    by_n: dict = {}
    for row in rows:
        by_n.setdefault(row.n, []).append(row.estimate)
    return {n: float(np.median(v)) for n, v in sorted(by_n.items())}
