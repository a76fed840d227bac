"""Compiled inner loops.

Every kernel here is ``nogil`` and single threaded: parallelism happens one
level up (independent trials), which keeps results identical for any worker
count.  Elementary symmetric values are returned as ``(mantissa, exponent)``
pairs meaning ``mantissa * 2**exponent``; mantissas are *not* normalized here,
``polycore`` does that when it builds public ``ScaledComplex`` values.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Guard for the plain double fast path: every partial sum is bounded by
# C(n, m) * max|u|^m and every product by min|u|^m, so staying inside
# 2^(+-GUARD_LOG2) means no overflow or gradual underflow can occur.
GUARD_LOG2 = 960.0
LN2 = math.log(2.0)


@njit(nogil=True, cache=True)
def _renorm(s, se):
    a = max(abs(s.real), abs(s.imag))
    if a == 0.0:
        return 0j, 0
    _, e = math.frexp(a)
    return s * math.ldexp(1.0, -e), se + e


@njit(nogil=True, cache=True)
def _log2_binom(n, m):
    return (math.lgamma(n + 1.0) - math.lgamma(m + 1.0) - math.lgamma(n - m + 1.0)) / LN2


@njit(nogil=True, cache=True)
def _esf_plain(z, roots, m, skip_hits, mant, expo):
    """Returns (status, hits): status -1 ok, -2 guard tripped, i >= 0 exact hit."""
    mant[0] = 1.0
    expo[0] = 0
    for j in range(1, m + 1):
        mant[j] = 0.0
        expo[j] = 0
    n = roots.shape[0]
    # extremes tracked on |d|^2 = 1/|u|^2: no sqrt or complex division per root
    big = 0.0
    small = math.inf
    hits = 0
    used = 0
    for i in range(n):
        dr = z.real - roots[i].real
        di = z.imag - roots[i].imag
        a2 = dr * dr + di * di
        if a2 == 0.0:
            if dr == 0.0 and di == 0.0:
                if skip_hits:
                    hits += 1
                    continue
                return i, hits
            return -2, hits
        if a2 > big:
            big = a2
        if a2 < small:
            small = a2
        u = complex(dr / a2, -di / a2)
        top = min(used + 1, m)
        used += 1
        for j in range(top, 0, -1):
            mant[j] += mant[j - 1] * u
    if used == 0 or m == 0:
        return -1, hits
    mm = min(m, used)
    if not math.isfinite(big) or small == 0.0:
        return -2, hits
    hi = -0.5 * mm * math.log2(small) + _log2_binom(used, mm)
    lo = -0.5 * mm * math.log2(big)
    if hi > GUARD_LOG2 or lo < -GUARD_LOG2:
        return -2, hits
    for j in range(m + 1):
        if not (math.isfinite(mant[j].real) and math.isfinite(mant[j].imag)):
            return -2, hits
    return -1, hits


@njit(nogil=True, cache=True)
def _esf_scaled(z, roots, m, skip_hits, mant, expo):
    mant[0] = 1.0
    expo[0] = 0
    for j in range(1, m + 1):
        mant[j] = 0.0
        expo[j] = 0
    n = roots.shape[0]
    hits = 0
    used = 0
    for i in range(n):
        d = z - roots[i]
        a = max(abs(d.real), abs(d.imag))
        if a == 0.0:
            if skip_hits:
                hits += 1
                continue
            return i, hits
        _, de = math.frexp(a)
        um = 1.0 / (d * math.ldexp(1.0, -de))
        ue = -de
        top = min(used + 1, m)
        used += 1
        for j in range(top, 0, -1):
            pm = mant[j - 1] * um
            if pm.real == 0.0 and pm.imag == 0.0:
                continue
            pe = expo[j - 1] + ue
            cm = mant[j]
            ce = expo[j]
            if cm.real == 0.0 and cm.imag == 0.0:
                mant[j], expo[j] = _renorm(pm, pe)
                continue
            if pe == ce:
                s = cm + pm
                se = ce
            elif pe > ce:
                s = pm + cm * math.ldexp(1.0, max(ce - pe, -1100))
                se = pe
            else:
                s = cm + pm * math.ldexp(1.0, max(pe - ce, -1100))
                se = ce
            mant[j], expo[j] = _renorm(s, se)
    return -1, hits


@njit(nogil=True, cache=True)
def esf(z, roots, m, skip_hits, mant, expo):
    """Fill e_0..e_m of {1/(z - w_i)}; returns (status, number of skipped hits)."""
    status, hits = _esf_plain(z, roots, m, skip_hits, mant, expo)
    if status == -2:
        status, hits = _esf_scaled(z, roots, m, skip_hits, mant, expo)
    return status, hits


@njit(nogil=True, cache=True)
def newton_ratio(z, roots, k, mant, expo):
    """P^(k)(z) / P^(k+1)(z) with exact root hits removed analytically.

    If z equals h roots, e_j = u^h e'_{j-h} + lower order in u, so the ratio
    tends to e'_{k-h} / ((k+1) e'_{k+1-h}).  Status 0 ok, 1 derivative zero.
    """
    status, h = esf(z, roots, k + 1, True, mant, expo)
    num = k - h
    den = k + 1 - h
    if den < 0:
        return 0j, 1
    dm = mant[den]
    if dm.real == 0.0 and dm.imag == 0.0:
        return 0j, 1
    if num < 0:
        return 0j, 0
    r = mant[num] / ((k + 1) * dm)
    shift = expo[num] - expo[den]
    if shift > 1000:
        shift = 1000
    elif shift < -1100:
        shift = -1100
    return r * math.ldexp(1.0, shift), 0


@njit(nogil=True, cache=True)
def aberth_sweep(approx, active, roots, k, corr, status):
    """One Jacobi Ehrlich-Aberth sweep for the zeros of P^(k)."""
    m = approx.shape[0]
    mant = np.empty(k + 2, np.complex128)
    expo = np.empty(k + 2, np.int64)
    for i in range(m):
        corr[i] = 0j
        status[i] = 0
        if not active[i]:
            continue
        z = approx[i]
        nr, st = newton_ratio(z, roots, k, mant, expo)
        if st != 0:
            status[i] = 1
            continue
        s = 0j
        for j in range(m):
            if j != i:
                dd = z - approx[j]
                if dd.real != 0.0 or dd.imag != 0.0:
                    s += 1.0 / dd
        den = 1.0 - nr * s
        if den.real == 0.0 and den.imag == 0.0:
            corr[i] = nr
        else:
            corr[i] = nr / den
        if not (math.isfinite(corr[i].real) and math.isfinite(corr[i].imag)):
            corr[i] = 0j
            status[i] = 1


@njit(nogil=True, cache=True)
def newton_ratios(points, roots, k, out, status):
    mant = np.empty(k + 2, np.complex128)
    expo = np.empty(k + 2, np.int64)
    for i in range(points.shape[0]):
        out[i], status[i] = newton_ratio(points[i], roots, k, mant, expo)


@njit(nogil=True, cache=True)
def log_abs_esf_batch(points, roots, k, out, hit):
    """ln|e_k(z)| for many z; hit[i] is the root index for an exact hit else -1."""
    mant = np.empty(k + 1, np.complex128)
    expo = np.empty(k + 1, np.int64)
    for i in range(points.shape[0]):
        status, _ = esf(points[i], roots, k, False, mant, expo)
        hit[i] = status
        if status >= 0:
            out[i] = math.nan
            continue
        a = abs(mant[k])
        if a == 0.0:
            out[i] = -math.inf
        else:
            out[i] = math.log(a) + expo[k] * LN2


# ---------------------------------------------------------------- Coulomb gas

@njit(nogil=True, cache=True)
def _ml_potential(z, alpha, nu):
    r = abs(z)
    if nu == 0.0:
        return r ** (2.0 * alpha)
    if r == 0.0:
        return math.inf
    return r ** (2.0 * alpha) - 2.0 * nu * math.log(r)


@njit(nogil=True, cache=True)
def coulomb_sweep_ml(points, alpha, nu, n_scale, beta, step, normals, uniforms):
    """Metropolis sweep for Q(z) = |z|^(2 alpha) - 2 nu log|z|.

    Returns (accepted moves, summed Delta H of the accepted moves).
    """
    n = points.shape[0]
    accepted = 0
    dh_total = 0.0
    for i in range(n):
        old = points[i]
        new = old + step * complex(normals[i, 0], normals[i, 1])
        if new == old:
            accepted += 1
            continue
        q_new = _ml_potential(new, alpha, nu)
        if not math.isfinite(q_new):
            continue
        dh = n_scale * (q_new - _ml_potential(old, alpha, nu))
        coincident = False
        for j in range(n):
            if j == i:
                continue
            dn = abs(new - points[j])
            if dn == 0.0:
                coincident = True
                break
            dh -= 2.0 * (math.log(dn) - math.log(abs(old - points[j])))
        if coincident:
            continue
        x = -beta * dh
        if x >= 0.0 or uniforms[i] < math.exp(x):
            points[i] = new
            accepted += 1
            dh_total += dh
    return accepted, dh_total


@njit(nogil=True, cache=True)
def pair_log_sum(points):
    """sum_{j<k} log|z_j - z_k|; nan if two points coincide."""
    n = points.shape[0]
    s = 0.0
    for j in range(n):
        for l in range(j + 1, n):
            d = abs(points[j] - points[l])
            if d == 0.0:
                return math.nan
            s += math.log(d)
    return s
