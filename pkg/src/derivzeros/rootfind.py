"""Zeros of ``P^(k)`` for root-set polynomials via Ehrlich-Aberth iteration.

The derivative is never expanded: each Newton correction
``P^(k)/P^(k+1) = e_k / ((k+1) e_{k+1})`` comes from the O(nk) recurrence in
``polycore``.  Sweeps are Jacobi style (all corrections from the previous
approximations) and converged approximations are frozen.

Multiple roots converge only linearly under Aberth and, worse, sit inside a
region where ``P^(k)`` is numerically indistinguishable from zero.  Every
``cluster_check_every`` sweeps the still-active approximations are grouped by
single linkage; a group of size m is collapsed to one m-fold root when Newton
on ``P^(k+m-1)`` (for which the m-fold root is simple) converges from the
group centroid to a point inside the group, and the local Newton quotient of
``P^(k)`` confirms multiplicity m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import _kernels
from .errors import DegenerateInput, DerivativeZero, NoConvergence
from .polycore import RootSet, as_rootset, newton_ratio

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AberthConfig:
    tol: float = 1e-12
    max_iters: int = 200
    # None means 1e-8 * (1 + max|root|), resolved per input
    cluster_eps: float | None = None
    retry_perturb: float = 2.0 ** -40
    cluster_check_every: int = 25

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.cluster_eps is not None and self.cluster_eps < 0:
            raise ValueError("cluster_eps must be >= 0")

    def eps_for(self, p: RootSet) -> float:
        if self.cluster_eps is not None:
            return self.cluster_eps
        return 1e-8 * (1.0 + float(np.abs(p.roots).max()))


@dataclass
class RootResult:
    roots: RootSet
    residual_stats: dict
    iterations: int
    converged_flags: np.ndarray
    clusters: list = field(default_factory=list)
    residuals: np.ndarray | None = None

    @property
    def n_unconverged(self) -> int:
        return int((~self.converged_flags).sum())

    @property
    def all_converged(self) -> bool:
        return bool(self.converged_flags.all())


def _phases(count: int) -> np.ndarray:
    return np.exp(2j * np.pi * ((np.arange(1, count + 1) * GOLDEN) % 1.0))


def initial_guesses(p, k: int, cluster_eps: float | None = None) -> np.ndarray:
    """Parent roots minus the k closest to the centroid, jittered.

    Gauss-Lucas keeps every zero of P^(k) inside the parent hull, and zeros of
    P^(k) sit close to zeros of P, so the parent roots are a good start.
    """
    p = as_rootset(p)
    n = p.degree
    if not 0 <= k < n:
        raise DegenerateInput(f"need 0 <= k < degree, got k={k}, degree={n}")
    eps = 1e-8 * (1.0 + float(np.abs(p.roots).max())) if cluster_eps is None else cluster_eps
    c = p.centroid()
    if n - k == 1:
        return np.array([c + eps * _phases(1)[0]])
    order = np.argsort(np.abs(p.roots - c), kind="stable")
    keep = np.sort(order[k:])
    return p.roots[keep] + eps * _phases(n - k)


def _newton_order(z: complex, roots: np.ndarray, order: int) -> complex | None:
    try:
        return newton_ratio(z, roots, order)
    except DerivativeZero:
        return None


def _probe_multiplicity(c: complex, radius: float, roots, k: int):
    """Local multiplicity estimates ``(z - c) / N_k(z)`` on a small circle."""
    out = []
    for ph in (1.0, 1j, -1.0, -1j):
        z = c + radius * ph
        nr = _newton_order(z, roots, k)
        if nr is None or nr == 0:
            return None
        out.append((z - c) / nr)
    return np.array(out)


def _refine_center(c0: complex, roots, k: int, m: int, tol: float):
    """Newton on P^(k+m-1), where an m-fold zero of P^(k) is simple."""
    order = k + m - 1
    c = c0
    for _ in range(60):
        step = _newton_order(c, roots, order)
        if step is None:
            return None
        c -= step
        if not np.isfinite(c):
            return None
        if abs(step) <= tol * (1.0 + abs(c)):
            return c
    return None


def _try_cluster(approx, locked, members, roots, k, tol, eps):
    """Find an m-fold zero near a group of approximations.

    The group from linkage need not have exactly m members (a stray
    approximation may sit outside, or look converged by accident), so m is
    read off the Newton quotient and the m nearest unlocked approximations are
    taken.  Returns ``(center, indices)`` or None.
    """
    pts = approx[members]
    c0 = complex(pts.mean())
    rad = float(np.abs(pts - c0).max())
    probe = 4.0 * rad + eps
    est = _probe_multiplicity(c0, probe, roots, k)
    candidates = [members.size]
    if est is not None:
        m_star = int(round(float(est.real.mean())))
        if m_star != members.size:
            candidates.insert(0, m_star)
    free = np.flatnonzero(~locked)
    dist = np.abs(approx[free] - c0)
    order = np.argsort(dist, kind="stable")
    n = roots.size
    for m in candidates:
        if m < 2 or k + m > n or m > free.size:
            continue
        chosen = free[order[:m]]
        if dist[order[m - 1]] > 2.0 * rad + eps:
            continue
        c = _refine_center(c0, roots, k, m, tol)
        if c is None or abs(c - c0) > rad + eps:
            continue
        check = _probe_multiplicity(c, probe, roots, k)
        # A circle around parent zeros sees the far field, where any P^(k)
        # looks like (z-c)^(n-k) up to O(1/sqrt(n)); only a near-exact match counts.
        slack = 1e-6 * m if np.abs(roots - c).min() < probe else 0.25 * m + 0.5
        if check is None or np.abs(check - m).max() > slack:
            continue
        return c, chosen
    return None


def _components(tree, radius, size):
    """Single-linkage groups at distance ``radius``."""
    pairs = tree.query_pairs(radius, output_type="ndarray")
    adj = csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(size, size))
    return connected_components(adj, directed=False)


def _collapse_clusters(approx, active, locked, roots, k, tol, eps, clusters):
    act = np.flatnonzero(active)
    if act.size < 2:
        return
    pa = approx[act]
    tree = cKDTree(np.column_stack([pa.real, pa.imag]))
    nn = tree.query(tree.data, k=2)[0][:, 1]
    tau = max(eps, 4.0 * float(np.median(nn)))
    ncomp, labels = _components(tree, tau, act.size)
    for comp in range(ncomp):
        members = act[labels == comp]
        if members.size < 2 or locked[members].any():
            continue
        found = _try_cluster(approx, locked, members, roots, k, tol, eps)
        if found is None:
            continue
        c, chosen = found
        approx[chosen] = c
        active[chosen] = False
        locked[chosen] = True
        clusters.append((complex(c), int(chosen.size)))


def _report_coincident(approx, active, locked, eps, clusters):
    """Converged approximations within eps of each other: a multiple zero that
    Aberth resolved without collapsing.  Reported, not moved."""
    idx = np.flatnonzero(~active & ~locked)
    if idx.size < 2:
        return
    pts = approx[idx]
    ncomp, labels = _components(cKDTree(np.column_stack([pts.real, pts.imag])), eps, idx.size)
    for comp in range(ncomp):
        members = idx[labels == comp]
        if members.size >= 2:
            locked[members] = True
            clusters.append((complex(approx[members].mean()), int(members.size)))


def _clamp_to_hull(approx, active, hull):
    """Project active approximations that left the parent hull back onto it."""
    if hull.size < 3:
        return
    idx = np.flatnonzero(active)
    q = approx[idx]
    outside = hull_distance(hull, q) > 0
    if outside.any():
        approx[idx[outside]] = project_to_hull(hull, q[outside])


def kth_derivative_roots(p, k: int, cfg: AberthConfig | None = None,
                         raise_on_failure: bool = True) -> RootResult:
    """All n-k zeros of ``P^(k)``, counted with multiplicity."""
    p = as_rootset(p)
    cfg = cfg or AberthConfig()
    n = p.degree
    if not 1 <= k < n:
        raise DegenerateInput(f"need 1 <= k < degree, got k={k}, degree={n}")
    eps = cfg.eps_for(p)
    roots = p.roots
    approx = initial_guesses(p, k, eps)
    m = approx.size
    active = np.ones(m, bool)
    locked = np.zeros(m, bool)
    hull = convex_hull(roots)
    corr = np.zeros(m, np.complex128)
    status = np.zeros(m, np.int64)
    clusters: list = []
    perturb_phase = _phases(m)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        _kernels.aberth_sweep(approx, active, roots, k, corr, status)
        bad = status != 0
        if bad.any():
            # P^(k+1) vanished at the approximation: nudge and retry next sweep
            approx[bad] += cfg.retry_perturb * (1.0 + np.abs(approx[bad])) * perturb_phase[bad]
        approx[active] -= corr[active]
        _clamp_to_hull(approx, active, hull)
        done = active & ~bad & (np.abs(corr) <= cfg.tol * (1.0 + np.abs(approx)))
        active &= ~done
        if not active.any():
            break
        if cfg.cluster_check_every and it % cfg.cluster_check_every == 0:
            _collapse_clusters(approx, active, locked, roots, k, cfg.tol, eps, clusters)
            if not active.any():
                break
    if active.any():
        _collapse_clusters(approx, active, locked, roots, k, cfg.tol, eps, clusters)

    _report_coincident(approx, active, locked, eps, clusters)
    in_cluster = locked
    residuals = np.full(m, np.nan)
    simple = ~in_cluster
    if simple.any():
        pts = np.ascontiguousarray(approx[simple])
        nr = np.empty(pts.size, np.complex128)
        st = np.empty(pts.size, np.int64)
        _kernels.newton_ratios(pts, roots, k, nr, st)
        res = np.abs(nr) / (1.0 + np.abs(pts))
        res[st != 0] = np.inf
        residuals[simple] = res
    flags = ~active
    good = residuals[flags & simple]
    stats = {
        "max": float(good.max()) if good.size else 0.0,
        "median": float(np.median(good)) if good.size else 0.0,
        "unconverged": int(active.sum()),
        "clustered": int(in_cluster.sum()),
    }
    result = RootResult(roots=RootSet(approx), residual_stats=stats, iterations=it,
                        converged_flags=flags, clusters=clusters, residuals=residuals)
    if raise_on_failure and not flags.all():
        raise NoConvergence(f"{int(active.sum())} of {m} zeros of P^({k}) unconverged "
                            f"after {cfg.max_iters} sweeps", result)
    return result


def derivative_chain(p, k_max: int, cfg: AberthConfig | None = None,
                     raise_on_failure: bool = True) -> list[RootResult]:
    """Zeros of P', P'', ..., P^(k_max), each computed from P itself."""
    return [kth_derivative_roots(p, k, cfg, raise_on_failure) for k in range(1, k_max + 1)]


# ---------------------------------------------------------------- coefficient oracle

def coeff_roots_oracle(coeffs, cfg: AberthConfig | None = None) -> RootSet:
    """Aberth on explicit coefficients (highest degree first), Horner evaluation.

    Independent of the root-set machinery; meant for tests at degree <= 64.
    """
    cfg = cfg or AberthConfig()
    a = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "f")
    d = a.size - 1
    if d < 1:
        raise DegenerateInput("polynomial of degree < 1 has no roots")
    if d > 64:
        raise DegenerateInput(f"degree {d} exceeds the oracle limit of 64")
    if d == 1:
        return RootSet([-a[1] / a[0]])
    da = a[:-1] * np.arange(d, 0, -1)
    center = -a[1] / (d * a[0])
    r = abs(np.polyval(a, center) / a[0]) ** (1.0 / d) or 1.0
    z = center + r * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
    active = np.ones(d, bool)
    for _ in range(max(cfg.max_iters, 500)):
        zi = z[active]
        pv = np.polyval(a, zi)
        dv = np.polyval(da, zi)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = pv / dv
            diff = zi[:, None] - z[None, :]
            inv = np.where(diff == 0, 0, 1.0 / np.where(diff == 0, 1, diff))
            s = inv.sum(axis=1)
            step = newton / (1.0 - newton * s)
        step = np.where(np.isfinite(step), step, 0)
        step[pv == 0] = 0
        z[active] = zi - step
        done = np.abs(step) <= cfg.tol * (1.0 + np.abs(z[active]))
        ids = np.flatnonzero(active)
        active[ids[done]] = False
        if not active.any():
            break
    absa = np.abs(a)
    scale = np.array([np.polyval(absa, abs(w)) for w in z])
    resid = np.abs(np.polyval(a, z))
    if active.any() and np.any(resid > 10 * d * max(cfg.tol, 1e-15) * scale):
        raise NoConvergence("coefficient oracle did not converge", RootSet(z))
    return RootSet(z)


# ---------------------------------------------------------------- geometry

def _cross(o, a, b):
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain, collinear points dropped).

    Degenerate inputs give one vertex (all points equal) or two (collinear).
    """
    pts = np.unique(np.asarray(points, dtype=np.complex128).reshape(-1))
    pts = pts[np.lexsort((pts.imag, pts.real))]
    if pts.size <= 2:
        return pts

    def half(seq):
        out = []
        for q in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], q) <= 0:
                out.pop()
            out.append(q)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def _segment_nearest(q, a, b):
    ab = b - a
    den = (ab * ab.conjugate()).real
    t = np.where(den > 0, ((q - a) * np.conj(ab)).real / np.where(den > 0, den, 1), 0.0)
    return a + np.clip(t, 0.0, 1.0) * ab


def _segment_distance(q, a, b):
    return np.abs(q - _segment_nearest(q, a, b))


def project_to_hull(hull: np.ndarray, points) -> np.ndarray:
    """Nearest point of the convex polygon ``hull`` (boundary) for each point."""
    q = np.asarray(points, dtype=np.complex128).reshape(-1)
    h = np.asarray(hull, dtype=np.complex128)
    if h.size == 1:
        return np.full(q.shape, h[0])
    a = h[None, :]
    b = np.roll(h, -1)[None, :]
    near = _segment_nearest(q[:, None], a, b)
    best = np.abs(q[:, None] - near).argmin(axis=1)
    return near[np.arange(q.size), best]


def hull_distance(hull: np.ndarray, points) -> np.ndarray:
    """Euclidean distance from each point to the convex polygon ``hull`` (0 inside)."""
    q = np.asarray(points, dtype=np.complex128).reshape(-1)
    h = np.asarray(hull, dtype=np.complex128)
    if h.size == 1:
        return np.abs(q - h[0])
    if h.size == 2:
        return _segment_distance(q, h[0], h[1])
    a = h[None, :]
    b = np.roll(h, -1)[None, :]
    qq = q[:, None]
    cross = _cross(a, b, qq)
    inside = np.all(cross >= 0, axis=1)
    d = _segment_distance(qq, a, b).min(axis=1)
    return np.where(inside, 0.0, d)


def verify_gauss_lucas(parent, child, slack: float = 0.0) -> tuple[bool, float]:
    """Every child root within ``slack`` of the parent hull?  Returns (ok, worst)."""
    parent = as_rootset(parent)
    child = as_rootset(child)
    d = hull_distance(convex_hull(parent.roots), child.roots)
    worst = float(d.max())
    return worst <= slack, worst


def interlaces(parent, child, tol: float = 1e-9) -> bool:
    """Sorted real child roots lie between consecutive sorted parent roots."""
    p = np.sort(as_rootset(parent).roots.real)
    c = np.sort(as_rootset(child).roots.real)
    if c.size != p.size - 1:
        return False
    return bool(np.all(c >= p[:-1] - tol) and np.all(c <= p[1:] + tol))


def hausdorff(a, b) -> float:
    a = as_rootset(a).roots
    b = as_rootset(b).roots
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def matching_distance(a, b) -> float:
    """Largest pair distance in the optimal one-to-one matching of two multisets."""
    a = as_rootset(a).roots
    b = as_rootset(b).roots
    d = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(d)
    return float(d[r, c].max())
