"""Convergence studies: sample, differentiate, measure distances.

Work is split into units (n, trial).  A unit samples its polynomial once
(seed derived from (master_seed, n, trial)) and then handles every k in
``k_list``, so the derivative orders of one trial share the same zeros.
Units run on a thread pool; the compiled kernels release the GIL.  Records
are sorted by (n, k, trial) afterwards, and wall-clock times are kept out of
the records so the reports are byte-identical for any thread count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..errors import DerivZerosError
from ..potential import ENERGY_CONVENTION
from ..rng import child_seed, stream
from ..rootfind import kth_derivative_roots
from ..transport import wasserstein1_estimate, wasserstein1_exact
from .config import ExperimentConfig

REPORT_SCHEMA = "derivzeros-report/1"
UNCONVERGED_LIMIT = 0.10

# stream-key tags, so that different uses of one master seed never collide
_TARGET, _FLOOR, _W1 = 1, 2, 3


@dataclass
class Record:
    n: int
    k: int
    trial: int
    degree: int
    seed: int
    w1_target: float
    w1_target_stderr: float
    w1_parent: float
    residual_max: float
    residual_median: float
    unconverged: int
    clustered: int
    iterations: int
    status: str
    note: str = ""

    FIELDS = ("n", "k", "trial", "degree", "seed", "w1_target", "w1_target_stderr", "w1_parent",
              "residual_max", "residual_median", "unconverged", "clustered", "iterations",
              "status", "note")

    def row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELDS}


@dataclass
class Report:
    config: dict
    master_seed: int
    records: list
    aggregates: list
    target_floor: dict | None
    schema_version: str = REPORT_SCHEMA
    timings: dict = field(default_factory=dict)       # not part of the serialized report
    showcase: dict | None = None                      # one instance, for the scatter plot

    @property
    def unconverged_fraction(self) -> float:
        total = sum(r.degree - r.k for r in self.records)
        bad = sum(r.unconverged for r in self.records)
        return bad / total if total else 0.0

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "master_seed": self.master_seed,
            "config": self.config,
            "energy_convention": ENERGY_CONVENTION,
            "target_floor": self.target_floor,
            "aggregates": self.aggregates,
            "records": [r.as_dict() for r in self.records],
        }

    def median(self, n: int, k: int, key: str = "w1_parent") -> float:
        for a in self.aggregates:
            if a["n"] == n and a["k"] == k:
                return a[key]["median"]
        raise KeyError((n, k))


def target_cloud(measure, n_ref: int, seed: int) -> np.ndarray:
    """Stratified cloud: shifted Halton points pushed through the measure's map."""
    shift = stream(seed).random(2)
    u = (qmc.Halton(d=2, scramble=False).random(n_ref) + shift) % 1.0
    return measure.transform(u)


def _w1_target(child, cloud, cfg: ExperimentConfig, seed: int):
    d = cfg.distance
    if d.target_method == "exact":
        return wasserstein1_exact(child, cloud, max_points=child.size + cloud.size), 0.0
    est = wasserstein1_estimate(child, cloud, d.target_method, pairs=d.target_pairs,
                                size=d.target_size, eps=d.target_eps, seed=seed)
    return est.value, est.stderr


def _w1_parent(child, parent, cfg: ExperimentConfig, seed: int):
    d = cfg.distance
    if d.parent_method == "exact":
        return wasserstein1_exact(child, parent, max_points=d.parent_max_points)
    return wasserstein1_estimate(child, parent, d.parent_method, pairs=d.target_pairs,
                                 size=d.target_size, eps=d.target_eps, seed=seed).value


def _unit(cfg: ExperimentConfig, n: int, trial: int, cloud):
    spec = cfg.spec(n)
    seed = child_seed(cfg.master_seed, n, trial)
    note = spec.regime_note() or ""
    out = []
    times = {}
    parent = spec.sample(seed)
    for k in cfg.k_list:
        t0 = time.perf_counter()
        w_seed = child_seed(cfg.master_seed, n, k, trial, _W1)
        base = dict(n=n, k=k, trial=trial, degree=parent.degree, seed=seed, note=note)
        try:
            res = kth_derivative_roots(parent, k, cfg.aberth, raise_on_failure=False)
            child = res.roots.roots
            status = "ok" if res.all_converged else "unconverged"
            w_t, w_se = _w1_target(child, cloud, cfg, w_seed) if cloud is not None else (math.nan, math.nan)
            w_p = _w1_parent(child, parent.roots, cfg, w_seed)
            rec = Record(**base, w1_target=w_t, w1_target_stderr=w_se, w1_parent=w_p,
                         residual_max=res.residual_stats["max"],
                         residual_median=res.residual_stats["median"],
                         unconverged=res.n_unconverged, clustered=res.residual_stats["clustered"],
                         iterations=res.iterations, status=status)
        except DerivZerosError as exc:
            # a failed trial becomes a flagged record; the sweep goes on
            rec = Record(**base, w1_target=math.nan, w1_target_stderr=math.nan, w1_parent=math.nan,
                         residual_max=math.nan, residual_median=math.nan,
                         unconverged=parent.degree - k, clustered=0, iterations=0,
                         status=f"error: {type(exc).__name__}")
        out.append(rec)
        times[(n, k, trial)] = time.perf_counter() - t0
    return out, times


def _quantiles(vals) -> dict:
    v = np.asarray([x for x in vals if not math.isnan(x)], float)
    if v.size == 0:
        return {"median": math.nan, "q25": math.nan, "q75": math.nan}
    q25, med, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    return {"median": float(med), "q25": float(q25), "q75": float(q75)}


def aggregate(records) -> list:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.n, r.k), []).append(r)
    out = []
    for (n, k) in sorted(groups):
        rs = groups[(n, k)]
        out.append({
            "n": n, "k": k, "trials": len(rs),
            "w1_parent": _quantiles(r.w1_parent for r in rs),
            "w1_target": _quantiles(r.w1_target for r in rs),
            "unconverged": int(sum(r.unconverged for r in rs)),
            "flagged": int(sum(r.status != "ok" for r in rs)),
        })
    return out


def run_convergence(cfg: ExperimentConfig, threads: int | None = None) -> Report:
    threads = cfg.threads if threads is None else threads
    target = cfg.spec(cfg.n_grid[0]).target() if cfg.distance.target else None
    cloud = floor = None
    if target is not None:
        cloud = target_cloud(target, cfg.distance.n_ref, child_seed(cfg.master_seed, _TARGET))
        other = target_cloud(target, cfg.distance.n_ref, child_seed(cfg.master_seed, _FLOOR))
        est = wasserstein1_estimate(cloud, other, "subsample", pairs=cfg.distance.target_pairs,
                                    size=cfg.distance.target_size,
                                    seed=child_seed(cfg.master_seed, _FLOOR, _W1))
        floor = {"value": est.value, "stderr": est.stderr, "n_ref": cfg.distance.n_ref}
    units = [(n, t) for n in cfg.n_grid for t in range(cfg.trials)]
    # big units first keeps the pool busy
    units.sort(key=lambda u: -u[0])
    if threads == 1:
        results = [_unit(cfg, n, t, cloud) for n, t in units]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda u: _unit(cfg, u[0], u[1], cloud), units))
    records, timings = [], {}
    for recs, times in results:
        records.extend(recs)
        timings.update(times)
    records.sort(key=lambda r: (r.n, r.k, r.trial))
    return Report(config=cfg.to_dict(), master_seed=cfg.master_seed, records=records,
                  aggregates=aggregate(records), target_floor=floor,
                  timings={f"{n},{k},{t}": v for (n, k, t), v in sorted(timings.items())},
                  showcase=_showcase(cfg))


def _showcase(cfg: ExperimentConfig) -> dict:
    """Zeros and critical points of trial 0 at the smallest n (for plotting)."""
    n = cfg.n_grid[0]
    parent = cfg.spec(n).sample(child_seed(cfg.master_seed, n, 0))
    res = kth_derivative_roots(parent, cfg.k_list[0], cfg.aberth, raise_on_failure=False)
    return {"n": n, "k": cfg.k_list[0], "zeros": parent.roots, "critical": res.roots.roots}


def is_nonincreasing(report: Report, k: int, key: str = "w1_parent") -> bool:
    meds = [report.median(n, k, key) for n in sorted(set(r.n for r in report.records))]
    return all(b <= a for a, b in zip(meds, meds[1:]))


def run_coulomb(cfg: ExperimentConfig, n: int | None = None) -> dict:
    """One Coulomb-gas chain checked against its equilibrium measure.

    KS is reported for the final state and for all thinned post-burn-in
    states pooled; W1 compares the final state with the target cloud.
    """
    from ..ensembles import CoulombGas, run_chain
    from ..potential import ks_radial

    n = cfg.n_grid[0] if n is None else n
    spec = cfg.spec(n)
    if not isinstance(spec, CoulombGas):
        raise TypeError("run_coulomb needs a coulomb ensemble")
    seed = child_seed(cfg.master_seed, n, 0)
    key = spec.mcmc.seed if spec.mcmc.seed is not None else seed
    chain = run_chain(spec.potential, spec.beta, n, spec.mcmc, stream(0xC0, key))
    eq = spec.target()
    cloud = target_cloud(eq, cfg.distance.n_ref, child_seed(cfg.master_seed, _TARGET))
    w_t, w_se = _w1_target(chain.points, cloud, cfg, child_seed(cfg.master_seed, n, _W1))
    pooled = np.concatenate(chain.snapshots) if chain.snapshots else chain.points
    burn = spec.mcmc.burn_in
    return {
        "n": n, "beta": spec.beta, "seed": seed,
        "r_inner": eq.r_inner, "r_outer": eq.r_outer,
        "ks_final": ks_radial(chain.points, eq),
        "ks_pooled": ks_radial(pooled, eq),
        "w1_target": w_t, "w1_target_stderr": w_se,
        "acceptance": float(np.mean(chain.acceptance[burn:])),
        "step": chain.step,
        "energy": chain.energy,
        "energy_drift": chain.energy_drift,
        "points": chain.points,
    }
