"""numba-compiled versions of the geometry kernels (see ``_numpy``)."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def encounter_batch(dp, dv, radius_sum):
    n = dp.shape[0]
    ttc = np.empty(n)
    ttce = np.empty(n)
    d_ttce = np.empty(n)
    closing = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        px, py = dp[i, 0], dp[i, 1]
        vx, vy = dv[i, 0], dv[i, 1]
        r = radius_sum[i]
        a = vx * vx + vy * vy
        pv = px * vx + py * vy
        c = px * px + py * py - r * r
        disc = pv * pv - a * c

        if c <= 0.0:
            ttc[i] = 0.0
        elif pv < 0.0 and a > 0.0 and disc >= 0.0:
            ttc[i] = c / (-pv + math.sqrt(disc))
        else:
            ttc[i] = np.nan

        t = 0.0
        if pv < 0.0 and a > 0.0:
            closing[i] = True
            t = -pv / a
        ttce[i] = t
        qx = px + t * vx
        qy = py + t * vy
        d_ttce[i] = max(math.sqrt(qx * qx + qy * qy) - r, 0.0)
    return ttc, ttce, d_ttce, closing


@njit(cache=True)
def project_to_polyline(points, poly):
    n = points.shape[0]
    m = poly.shape[0] - 1
    best = np.empty(n)
    signed = np.empty(n)
    station = np.empty(n)
    cum = np.zeros(m)
    for j in range(1, m):
        dx = poly[j, 0] - poly[j - 1, 0]
        dy = poly[j, 1] - poly[j - 1, 1]
        cum[j] = cum[j - 1] + math.sqrt(dx * dx + dy * dy)

    for i in range(n):
        bd = np.inf
        bs = 0.0
        bst = 0.0
        for j in range(m):
            sx = poly[j + 1, 0] - poly[j, 0]
            sy = poly[j + 1, 1] - poly[j, 1]
            l2 = sx * sx + sy * sy
            rx = points[i, 0] - poly[j, 0]
            ry = points[i, 1] - poly[j, 1]
            cross = sx * ry - sy * rx
            u = 0.0
            interior = False
            if l2 > 0.0:
                u = (rx * sx + ry * sy) / l2
                if u <= 0.0:
                    u = 0.0
                elif u >= 1.0:
                    u = 1.0
                else:
                    interior = True
            if interior:
                d = abs(cross) / math.sqrt(l2)
            else:
                ex = rx - u * sx
                ey = ry - u * sy
                d = math.sqrt(ex * ex + ey * ey)
            if d < bd:
                bd = d
                bs = -d if cross < 0.0 else d
                bst = cum[j] + u * math.sqrt(l2)
        best[i] = bd
        signed[i] = bs
        station[i] = bst
    return best, signed, station


@njit(cache=True)
def nearest_distance(a, b):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        bd = np.inf
        for j in range(b.shape[0]):
            dx = a[i, 0] - b[j, 0]
            dy = a[i, 1] - b[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < bd:
                bd = d
        out[i] = bd
    return out


@njit(cache=True)
def convex_intersection_area(P, Q):
    cap = P.shape[0] + Q.shape[0] + 1
    cur = np.empty((cap, 2))
    nxt = np.empty((cap, 2))
    n = P.shape[0]
    cur[:n] = P
    m = Q.shape[0]
    for j in range(m):
        if n < 3:
            return 0.0
        px, py = Q[j, 0], Q[j, 1]
        ex = Q[(j + 1) % m, 0] - px
        ey = Q[(j + 1) % m, 1] - py
        k = 0
        for i in range(n):
            cx, cy = cur[i, 0], cur[i, 1]
            nx, ny = cur[(i + 1) % n, 0], cur[(i + 1) % n, 1]
            sc = ex * (cy - py) - ey * (cx - px)
            sn = ex * (ny - py) - ey * (nx - px)
            if sc >= 0.0:
                nxt[k, 0] = cx
                nxt[k, 1] = cy
                k += 1
            if (sc >= 0.0) != (sn >= 0.0):
                t = sc / (sc - sn)
                nxt[k, 0] = cx + t * (nx - cx)
                nxt[k, 1] = cy + t * (ny - cy)
                k += 1
        cur, nxt = nxt, cur
        n = k
    if n < 3:
        return 0.0
    s = 0.0
    for i in range(n):
        s += cur[i, 0] * cur[(i + 1) % n, 1] - cur[(i + 1) % n, 0] * cur[i, 1]
    return max(0.5 * s, 0.0)
