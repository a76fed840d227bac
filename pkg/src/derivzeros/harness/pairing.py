"""Exploratory pairing of zeros with nearby derivative zeros (report only)."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

HIST_EDGES = tuple(float(x) for x in np.r_[np.arange(0.0, 10.5, 0.5), np.inf])


def pairing_stats(parent, child) -> dict:
    """Nearest derivative-zero distance per parent zero, plus matchings.

    Each child zero is matched to a distinct parent zero.  ``greedy`` takes
    closest pairs first; ``optimal`` minimizes the total distance (the
    transport problem between the two counting measures).  Both report the
    mean matched distance.  The histogram is of ``n * nearest``.
    """
    p = np.asarray(getattr(parent, "roots", parent), np.complex128).reshape(-1)
    c = np.asarray(getattr(child, "roots", child), np.complex128).reshape(-1)
    n = p.size
    d = np.abs(p[:, None] - c[None, :])
    nearest = d.min(axis=1)

    rows, cols = linear_sum_assignment(d)
    optimal = float(d[rows, cols].mean())

    order = np.argsort(d, axis=None, kind="stable")
    used_p = np.zeros(n, bool)
    used_c = np.zeros(c.size, bool)
    total, matched = 0.0, 0
    for flat in order:
        i, j = divmod(int(flat), c.size)
        if used_p[i] or used_c[j]:
            continue
        used_p[i] = used_c[j] = True
        total += d[i, j]
        matched += 1
        if matched == c.size:
            break
    scaled = n * nearest
    counts, _ = np.histogram(scaled, bins=np.asarray(HIST_EDGES))
    return {
        "n": n,
        "nearest": nearest,
        "greedy_mean": total / matched,
        "optimal_mean": optimal,
        "hist_edges": list(HIST_EDGES),
        "hist_counts": counts.tolist(),
        "frac_scaled_below_10": float((scaled <= 10).mean()),
    }
