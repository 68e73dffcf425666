"""Pure-numpy implementations of the hot geometry kernels.

Every function here has a twin in ``_numba`` with the same signature and
the same results (bit-for-bit where the arithmetic order allows it).
"""
import numpy as np


def encounter_batch(dp, dv, radius_sum):
    n = dp.shape[0]
    a = dv[:, 0] * dv[:, 0] + dv[:, 1] * dv[:, 1]
    pv = dp[:, 0] * dv[:, 0] + dp[:, 1] * dv[:, 1]
    pp = dp[:, 0] * dp[:, 0] + dp[:, 1] * dp[:, 1]
    c = pp - radius_sum * radius_sum
    disc = pv * pv - a * c

    ttc = np.full(n, np.nan)
    ttc[c <= 0.0] = 0.0
    hit = (c > 0.0) & (pv < 0.0) & (a > 0.0) & (disc >= 0.0)
    # smaller root as c / q, stable when the gap is small
    ttc[hit] = c[hit] / (-pv[hit] + np.sqrt(disc[hit]))

    closing = (pv < 0.0) & (a > 0.0)
    ttce = np.zeros(n)
    ttce[closing] = -pv[closing] / a[closing]
    qx = dp[:, 0] + ttce * dv[:, 0]
    qy = dp[:, 1] + ttce * dv[:, 1]
    d_ttce = np.maximum(np.sqrt(qx * qx + qy * qy) - radius_sum, 0.0)
    return ttc, ttce, d_ttce, closing


def project_to_polyline(points, poly):
    """Distance, signed left offset and arc-length station of each point."""
    a = poly[:-1]
    seg = poly[1:] - a
    seg_len2 = seg[:, 0] * seg[:, 0] + seg[:, 1] * seg[:, 1]
    seg_len = np.sqrt(seg_len2)
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))[:-1]

    rx = points[:, None, 0] - a[None, :, 0]
    ry = points[:, None, 1] - a[None, :, 1]
    safe = np.where(seg_len2 > 0.0, seg_len2, 1.0)
    u_raw = (rx * seg[None, :, 0] + ry * seg[None, :, 1]) / safe
    u = np.where(seg_len2 > 0.0, np.clip(u_raw, 0.0, 1.0), 0.0)
    ex = rx - u * seg[None, :, 0]
    ey = ry - u * seg[None, :, 1]
    cross = seg[None, :, 0] * ry - seg[None, :, 1] * rx
    # perpendicular foot inside the segment: |cross| / length is exact for collinear points
    interior = (seg_len2 > 0.0) & (u_raw > 0.0) & (u_raw < 1.0)
    dist = np.where(interior, np.abs(cross) / np.where(seg_len > 0.0, seg_len, 1.0),
                    np.sqrt(ex * ex + ey * ey))

    k = np.argmin(dist, axis=1)
    rows = np.arange(points.shape[0])
    best = dist[rows, k]
    signed = np.where(cross[rows, k] < 0.0, -best, best)
    station = cum[k] + u[rows, k] * seg_len[k]
    return best, signed, station


def nearest_distance(a, b):
    dx = a[:, None, 0] - b[None, :, 0]
    dy = a[:, None, 1] - b[None, :, 1]
    return np.sqrt(dx * dx + dy * dy).min(axis=1)


def _clip(poly, p, q):
    ex, ey = q[0] - p[0], q[1] - p[1]
    out = []
    n = len(poly)
    for i in range(n):
        cur = poly[i]
        nxt = poly[(i + 1) % n]
        sc = ex * (cur[1] - p[1]) - ey * (cur[0] - p[0])
        sn = ex * (nxt[1] - p[1]) - ey * (nxt[0] - p[0])
        if sc >= 0.0:
            out.append(cur)
        if (sc >= 0.0) != (sn >= 0.0):
            t = sc / (sc - sn)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def convex_intersection_area(P, Q):
    """Area of the intersection of two convex counter-clockwise polygons."""
    poly = [(P[i, 0], P[i, 1]) for i in range(P.shape[0])]
    m = Q.shape[0]
    for j in range(m):
        if len(poly) < 3:
            return 0.0
        poly = _clip(poly, Q[j], Q[(j + 1) % m])
    if len(poly) < 3:
        return 0.0
    arr = np.asarray(poly)
    x, y = arr[:, 0], arr[:, 1]
    return max(0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)), 0.0)
