"""Slow, obviously-correct reference implementations used as test oracles."""

import numpy as np


def brute_best_split(rows, g, h, lam, mcw):
    """Enumerate every (column, threshold, default direction) split.

    ``rows`` is a list of ``{column: value}`` dicts with positive values.
    Candidates per column are the midpoints between consecutive distinct
    present values, preceded by the midpoint between 0 and the smallest.
    Returns ``(gain, column, threshold, default_left)`` of the first
    strictly best candidate in (column, threshold, left-then-right) order.
    """
    n = len(rows)
    G, H = sum(g), sum(h)
    parent = G * G / (H + lam)
    cols = sorted({c for r in rows for c in r})
    best = None
    for c in cols:
        vals = sorted({r[c] for r in rows if c in r})
        thresholds = [(a + b) / 2.0 for a, b in zip([0.0] + vals[:-1], vals)]
        for thr in thresholds:
            for default_left in (True, False):
                left = [i for i in range(n) if (rows[i][c] < thr if c in rows[i] else default_left)]
                right = [i for i in range(n) if i not in set(left)]
                if not left or not right:
                    continue
                GL = sum(g[i] for i in left)
                HL = sum(h[i] for i in left)
                GR = sum(g[i] for i in right)
                HR = sum(h[i] for i in right)
                if HL < mcw or HR < mcw:
                    continue
                gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent)
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, c, thr, default_left)
    return best


def random_split_problem(rng):
    """A small sparse dataset with dyadic g and h so all sums are exact."""
    n = int(rng.integers(2, 51))
    d = int(rng.integers(1, 11))
    rows = []
    for _ in range(n):
        row = {}
        for c in range(d):
            if rng.random() < 0.6:
                row[c] = float(rng.integers(1, 5))
        rows.append(row)
    g = (rng.integers(-8, 9, size=n) / 8.0).tolist()
    h = (rng.integers(1, 5, size=n) / 16.0).tolist()
    return rows, g, h


def to_csr(rows):
    indptr, indices, data = [0], [], []
    for row in rows:
        for c in sorted(row):
            indices.append(c)
            data.append(row[c])
        indptr.append(len(indices))
    return np.array(indptr), np.array(indices, dtype=np.int64), np.array(data)


def finite_difference_grad_hess(pred, label, eps=1e-4):
    """Central first and second differences of the logistic loss."""
    def loss(x):
        return np.logaddexp(0.0, -x) if label == 1 else np.logaddexp(0.0, x)

    g = (loss(pred + eps) - loss(pred - eps)) / (2 * eps)
    h = (loss(pred + eps) - 2 * loss(pred) + loss(pred - eps)) / (eps * eps)
    return g, h


def brute_mined(ranking, useful, variant):
    """Mined premises as set-builder expressions over 0-based ranks."""
    rank = {p: i for i, p in enumerate(ranking)}
    if variant == "negmin_1":
        cutoff = len(useful)
    else:
        cutoff = max((rank[p] for p in useful if p in rank), default=0)
    return {p for p in ranking if rank[p] < cutoff and p not in useful}
