"""Wasserstein-1 distances between planar point clouds.

The exact distance is a network-simplex solve (POT's ``emd``) on the
Euclidean cost matrix.  Uniform measures of sizes n and m are given integer
masses m and n, so both sides total n*m exactly and the optimal vertex is
found without rounding in the marginals.  Larger problems go through
``wasserstein1_estimate``, which says which method produced the number.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

# POT probes every installed array backend on import; only numpy is used here.
for _b in ("TORCH", "PYTORCH", "TENSORFLOW", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_b}", "1")

import numpy as np
import ot
from scipy.special import logsumexp

from .errors import NoConvergence, NonConvergence, SizeTooLarge
from .potential import EmpiricalMeasure, as_measure
from .rng import stream

EXACT_BUDGET = 1100


def _xy(z: np.ndarray) -> np.ndarray:
    return np.column_stack([z.real, z.imag])


def _canonical(mu: EmpiricalMeasure):
    """Points and weights sorted lexicographically by (re, im, weight)."""
    p, w = mu.points, mu.weights
    order = np.lexsort((w, p.imag, p.real))
    return p[order], w[order]


def _canonical_measure(mu: EmpiricalMeasure) -> EmpiricalMeasure:
    p, w = _canonical(mu)
    return EmpiricalMeasure(p) if mu.uniform else EmpiricalMeasure(p, w)


def _same(a, b) -> bool:
    return a[0].shape == b[0].shape and np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def _pair_key(c):
    return (c[0].size, c[0].real.tobytes(), c[0].imag.tobytes(), c[1].tobytes())


def wasserstein1_exact(mu, nu, max_points: int = EXACT_BUDGET) -> float:
    """Exact W1 with Euclidean ground cost.

    Symmetric bit for bit: the pair is put in a canonical order before
    solving.  Identical weighted multisets return 0 without a solve.
    """
    mu, nu = as_measure(mu), as_measure(nu)
    if len(mu) + len(nu) > max_points:
        raise SizeTooLarge(f"{len(mu)} + {len(nu)} points exceed the exact budget {max_points}")
    a, b = _canonical(mu), _canonical(nu)
    if _same(a, b):
        return 0.0
    if _pair_key(a) > _pair_key(b):
        a, b = b, a
    (pa, wa), (pb, wb) = a, b
    n, m = pa.size, pb.size
    if n == 1 or m == 1:
        # every coupling is the product coupling
        return float(wa @ np.abs(pa[:, None] - pb[None, :]) @ wb)
    if mu.uniform and nu.uniform:
        ma, mb, scale = np.full(n, float(m)), np.full(m, float(n)), float(n) * m
    else:
        ma, mb, scale = wa.copy(), wb * (wa.sum() / wb.sum()), 1.0
    cost = ot.dist(_xy(pa), _xy(pb), metric="euclidean")
    val, log = ot.emd2(ma, mb, cost, numItermax=max(100_000, 50 * (n + m) ** 2), log=True)
    if log.get("result_code", 1) != 1:
        raise NoConvergence(f"network simplex stopped: {log.get('warning')}")
    return max(float(val) / scale, 0.0)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: str
    params: dict = field(default_factory=dict)


def _subsample(mu: EmpiricalMeasure, size: int, rng) -> EmpiricalMeasure:
    if len(mu) <= size:
        return mu
    if mu.uniform:
        idx = rng.choice(len(mu), size=size, replace=False)
    else:
        idx = rng.choice(len(mu), size=size, replace=True, p=mu.weights)
    return EmpiricalMeasure(mu.points[np.sort(idx)])


def _anneal(diam: float, eps: float) -> list[float]:
    stages = []
    e = max(diam, eps)
    while e > eps:
        stages.append(e)
        e *= 0.5
    return stages + [eps]


def _sinkhorn_cost(x, y, a, b, eps, max_iter, tol):
    """Entropic OT value ``<f, a> + <g, b>`` by log-domain Sinkhorn.

    The regularization is annealed from the cloud diameter down to ``eps``
    (halving per stage, potentials warm-started), which cuts the iteration
    count by orders of magnitude at small ``eps``.
    """
    c = np.abs(x[:, None] - y[None, :])
    la, lb = np.log(a), np.log(b)
    f = np.zeros(x.size)
    g = np.zeros(y.size)
    used = 0
    for e in _anneal(float(c.max()), eps):
        stage_tol = tol if e == eps else max(tol, 1e-3)
        while True:
            f = -e * logsumexp((g[None, :] - c) / e + lb[None, :], axis=1)
            g = -e * logsumexp((f[:, None] - c) / e + la[:, None], axis=0)
            used += 1
            if used % 5 == 0:
                row = np.exp((f[:, None] + g[None, :] - c) / e + la[:, None] + lb[None, :]).sum(axis=1)
                if np.abs(row - a).sum() < stage_tol:
                    break
            if used >= max_iter:
                raise NonConvergence(f"Sinkhorn did not reach marginal error {tol} "
                                     f"in {max_iter} iterations")
    return float(f @ a + g @ b)


def _sinkhorn_self(x, a, eps, max_iter, tol):
    """``OT_eps(mu, mu) = 2 <f, a>`` via the averaged symmetric fixed point."""
    c = np.abs(x[:, None] - x[None, :])
    la = np.log(a)
    f = np.zeros(x.size)
    used = 0
    for e in _anneal(float(c.max()), eps):
        stage_tol = tol if e == eps else max(tol, 1e-3)
        while True:
            t = -e * logsumexp((f[None, :] - c) / e + la[None, :], axis=1)
            f = 0.5 * (f + t)
            used += 1
            row = np.exp((f[:, None] + f[None, :] - c) / e + la[:, None] + la[None, :]).sum(axis=1)
            if np.abs(row - a).sum() < stage_tol:
                break
            if used >= max_iter:
                raise NonConvergence(f"symmetric Sinkhorn did not reach marginal error {tol} "
                                     f"in {max_iter} iterations")
    return float(2.0 * (f @ a))


def sinkhorn_divergence(mu, nu, eps: float = 0.05, max_iter: int = 5000, tol: float = 1e-6) -> float:
    """Debiased entropic cost ``S = OT(mu,nu) - (OT(mu,mu) + OT(nu,nu)) / 2``."""
    mu, nu = as_measure(mu), as_measure(nu)
    if _same(_canonical(mu), _canonical(nu)):
        return 0.0
    ab = _sinkhorn_cost(mu.points, nu.points, mu.weights, nu.weights, eps, max_iter, tol)
    aa = _sinkhorn_self(mu.points, mu.weights, eps, max_iter, tol)
    bb = _sinkhorn_self(nu.points, nu.weights, eps, max_iter, tol)
    return max(ab - 0.5 * (aa + bb), 0.0)


def wasserstein1_estimate(mu, nu, method: str = "subsample", *, pairs: int = 8,
                          size: int = 512, eps: float = 0.05, max_iter: int = 5000,
                          tol: float = 1e-6, seed: int = 0) -> Estimate:
    """W1 for clouds beyond the exact budget.

    ``subsample``: mean and standard error of exact W1 over ``pairs``
    independent pairs of ``size``-point subsamples (biased upward at fixed
    size, since each subsample is itself a noisy copy of its cloud).
    ``entropic``: debiased Sinkhorn divergence at regularization ``eps``.
    """
    mu, nu = as_measure(mu), as_measure(nu)
    if _same(_canonical(mu), _canonical(nu)):
        return Estimate(0.0, 0.0, method, {"identical": True})
    if method == "subsample":
        cmu, cnu = _canonical_measure(mu), _canonical_measure(nu)
        if _pair_key(_canonical(cmu)) > _pair_key(_canonical(cnu)):
            cmu, cnu = cnu, cmu
        rng = stream(0x0D15, seed)
        vals = []
        for _ in range(pairs):
            vals.append(wasserstein1_exact(_subsample(cmu, size, rng), _subsample(cnu, size, rng),
                                           max_points=2 * size))
        v = np.array(vals)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        return Estimate(float(v.mean()), se, method, {"pairs": pairs, "size": size, "seed": seed})
    if method == "entropic":
        val = sinkhorn_divergence(mu, nu, eps=eps, max_iter=max_iter, tol=tol)
        return Estimate(val, 0.0, method, {"eps": eps})
    raise ValueError(f"unknown method {method!r}")


def wasserstein1(mu, nu, method: str = "exact", max_points: int = EXACT_BUDGET, **kw):
    """Exact when ``method == 'exact'`` (raising past the budget), else an Estimate."""
    if method == "exact":
        return Estimate(wasserstein1_exact(mu, nu, max_points=max_points), 0.0, "exact",
                        {"max_points": max_points})
    return wasserstein1_estimate(mu, nu, method, **kw)
