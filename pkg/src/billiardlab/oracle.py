"""Direction-scan oracle for diagonal counts.

Independent of the beam engine: directions leaving a vertex are sampled
densely, every sample is bounced around the folded table (numpy, many rays at
once), and each change of the itinerary prefix between neighbouring samples
marks one generalized diagonal. Gaps with a change are refined recursively so
that the count is of change *points*, not of coarse gaps.
"""

from __future__ import annotations

import numpy as np

from .geometry import DEFAULT_TOL, Tolerances, polygon_of

VERTEX_CODE = 100


def itinerary_codes(shape, apex: int, thetas, steps: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Side hit at each of ``steps`` boundary hits, per sampled relative direction.

    A vertex hit is coded ``VERTEX_CODE + vertex``; entries after it are -1.
    """
    poly = polygon_of(shape)
    V = np.asarray(poly.vertices, dtype=float)
    nv = len(V)
    A = V
    B = np.roll(V, -1, axis=0)
    E = B - A
    elen = np.hypot(E[:, 0], E[:, 1])
    U = E / elen[:, None]
    diam = poly.diameter()
    eps_v = tol.vertex_rel * diam
    eps_l = tol.line_rel * diam

    thetas = np.asarray(thetas, dtype=float)
    n = thetas.size
    ang = poly.vertex_frame(apex) + thetas
    D = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    P = np.repeat(V[apex][None, :], n, axis=0)
    cur = np.full(n, -1)
    alive = np.ones(n, dtype=bool)
    codes = np.full((n, steps), -1, dtype=np.int64)

    for step in range(steps):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        p, d = P[idx], D[idx]
        best_t = np.full(idx.size, np.inf)
        best_s = np.full(idx.size, -1)
        for j in range(nv):
            denom = d[:, 0] * E[j, 1] - d[:, 1] * E[j, 0]
            w = A[j] - p
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (w[:, 0] * E[j, 1] - w[:, 1] * E[j, 0]) / denom
                u = (w[:, 0] * d[:, 1] - w[:, 1] * d[:, 0]) / denom
            slack = eps_v / elen[j]
            ok = (denom != 0) & (t > eps_l) & (u >= -slack) & (u <= 1 + slack) & (cur[idx] != j)
            better = ok & (t < best_t)
            best_t[better] = t[better]
            best_s[better] = j
        if np.any(best_s < 0):
            raise RuntimeError("oracle ray failed to leave the table")
        hit = p + best_t[:, None] * d
        dist = np.hypot(hit[:, None, 0] - V[None, :, 0], hit[:, None, 1] - V[None, :, 1])
        nearest = dist.argmin(axis=1)
        at_vertex = dist[np.arange(idx.size), nearest] <= eps_v
        codes[idx, step] = np.where(at_vertex, VERTEX_CODE + nearest, best_s)
        alive[idx[at_vertex]] = False
        go = ~at_vertex
        gi = idx[go]
        s = best_s[go]
        u = U[s]
        dd = D[gi]
        k = 2.0 * (dd[:, 0] * u[:, 0] + dd[:, 1] * u[:, 1])
        D[gi] = k[:, None] * u - dd
        P[gi] = hit[go]
        cur[gi] = s
    return codes


def _changes(codes: np.ndarray, prefix: int):
    """Indices ``i`` (into the non-vertex samples) where sample i and i+1 differ."""
    pre = codes[:, :prefix]
    clean = ~np.any(pre >= VERTEX_CODE, axis=1)
    keep = np.nonzero(clean)[0]
    c = pre[keep]
    diff = np.any(c[1:] != c[:-1], axis=1)
    return keep, np.nonzero(diff)[0]


def _refine(poly, apex, lo, hi, prefix, refine, min_width, tol) -> int:
    total = 0
    while lo.size:
        narrow = (hi - lo) < min_width
        total += int(narrow.sum())
        lo, hi = lo[~narrow], hi[~narrow]
        if lo.size == 0:
            break
        frac = np.linspace(0.0, 1.0, refine + 1)
        grid = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        sub = itinerary_codes(poly, apex, grid.ravel(), prefix, tol).reshape(lo.size, refine + 1, -1)
        new_lo, new_hi = [], []
        for g, c in zip(grid, sub):
            k, chg = _changes(c, prefix)
            a, b = k[chg], k[chg + 1]
            # every interior sample sits on the vertex: the gap is one diagonal
            stuck = (b - a) == refine
            total += int(stuck.sum())
            new_lo.append(g[a[~stuck]])
            new_hi.append(g[b[~stuck]])
        lo = np.concatenate(new_lo)
        hi = np.concatenate(new_hi)
    return total


def scan_counts(shape, apex: int, n_max: int, samples: int = 1 << 17, refine: int = 16,
                min_width: float = 1e-11, tol: Tolerances = DEFAULT_TOL) -> list:
    """Oracle diagonal counts from ``apex`` for every ``n`` in ``0..n_max``."""
    poly = polygon_of(shape)
    angle = poly.vertex_angle(apex)
    edge = 1e-7 * angle
    thetas = np.linspace(edge, angle - edge, samples)
    codes = itinerary_codes(poly, apex, thetas, n_max + 1, tol)
    out = []
    for n in range(n_max + 1):
        keep, ch = _changes(codes, n + 1)
        out.append(_refine(poly, apex, thetas[keep[ch]], thetas[keep[ch + 1]],
                           n + 1, refine, min_width, tol))
    return out


def scan_count(shape, apex: int, n: int, **kw) -> int:
    """Count diagonals from ``apex`` with at most ``n`` reflections by direction scanning."""
    return scan_counts(shape, apex, n, **kw)[-1]
