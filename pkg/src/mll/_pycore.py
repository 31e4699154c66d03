"""Pure-Python evaluation kernel.

Decodes cube points to segment arrays and evaluates masked capacity plus the
crossing penalty, and runs spans of hill-climbing iterations.  The compiled
kernel in ``_core.pyx`` mirrors this module statement for statement; both
must produce bitwise-identical results, so keep every arithmetic expression
in the same shape in the two files.

Engines hold per-instance scratch buffers: use one engine per worker.
"""

from __future__ import annotations

import math

INF = float("inf")

CENTER_BOX = 0
CENTER_ABS = 1
CENTER_CONTAIN_RIGHT = 2
CENTER_CONTAIN_LEFT = 3


class PureEngine:
    backend = "pure"

    def __init__(self, lay):
        self.n = int(lay.n)
        self.j = int(lay.j)
        self.cyclic = bool(lay.cyclic)
        self.K = int(lay.K)
        self.L = int(lay.L)
        self.quads = int(lay.quads)
        self.pitch_lo = [float(v) for v in lay.pitch_lo]
        self.pitch_hi = [float(v) for v in lay.pitch_hi]
        self.pitch_var = [int(v) for v in lay.pitch_var]
        self.len_var = [int(v) for v in lay.len_var]
        self.center_kind = [int(v) for v in lay.center_kind]
        self.center_var1 = [int(v) for v in lay.center_var1]
        self.center_var2 = [int(v) for v in lay.center_var2]
        self.source_seg = [int(v) for v in lay.source_seg]
        self.ref_cx = [float(v) for v in lay.ref_cx]
        self.ref_cy = [float(v) for v in lay.ref_cy]
        self.h_var1 = [int(v) for v in lay.h_var1]
        self.h_var2 = [int(v) for v in lay.h_var2]
        self.sign_slot = [int(v) for v in lay.sign_slot]
        self.order = [int(v) for v in lay.decode_order]
        self.poly_x = [float(v) for v in lay.poly_x]
        self.poly_y = [float(v) for v in lay.poly_y]
        self.pen_i = int(lay.pen_i)
        self.pen_j = int(lay.pen_j)
        self.pen_alpha = int(lay.pen_alpha)
        self.pen_mu = float(lay.pen_mu)
        self.frozen = bool(lay.heights_frozen)
        self.lmax = float(lay.lmax)
        self.r0 = None if lay.r0 is None else [float(v) for v in lay.r0]
        n = self.n
        self.fx = [0.0] * n
        self.fy = [0.0] * n
        self.fz = [0.0] * n
        self.sx = [0.0] * n
        self.sy = [0.0] * n
        self.sz = [0.0] * n
        self.slope = [0.0] * n

    # -- decode -------------------------------------------------------------

    def _t_interval(self, b):
        px, py = self.poly_x, self.poly_y
        m = len(px)
        tlo = INF
        thi = -INF
        for i in range(m):
            x1 = px[i]
            y1 = py[i]
            i2 = i + 1 if i + 1 < m else 0
            x2 = px[i2]
            y2 = py[i2]
            if x1 == x2:
                if x1 == b:
                    if y1 < tlo:
                        tlo = y1
                    if y1 > thi:
                        thi = y1
                    if y2 < tlo:
                        tlo = y2
                    if y2 > thi:
                        thi = y2
            elif (x1 - b) * (x2 - b) <= 0.0:
                tt = y1 + (b - x1) * (y2 - y1) / (x2 - x1)
                if tt < tlo:
                    tlo = tt
                if tt > thi:
                    thi = tt
        if tlo > thi:
            return None
        return tlo, thi

    def decode_segments(self, r, signs):
        """Decode to a list of (fx, fy, fz, sx, sy, sz) tuples, or None."""
        rl = [float(v) for v in r]
        sl = [int(v) for v in signs]
        if not self._decode_impl(rl, sl):
            return None
        return [
            (self.fx[k], self.fy[k], self.fz[k], self.sx[k], self.sy[k], self.sz[k])
            for k in range(self.n)
        ]

    def _decode_impl(self, r, signs) -> bool:
        fx, fy, fz = self.fx, self.fy, self.fz
        sx, sy, sz = self.sx, self.sy, self.sz
        slope = self.slope
        b = BETA * r[0]
        iv = self._t_interval(b)
        if iv is None:
            return False
        tlo, thi = iv
        t = tlo + (thi - tlo) * r[1]
        x = r[2] / 18.0
        y = -1.0 / 30.0 + (2.0 / 30.0) * r[3]
        j = self.j

        blen = math.sqrt(1.0 + b * b)
        fx[0] = -blen
        fy[0] = 0.0
        fz[0] = 0.0
        sx[0] = 0.0
        sy[0] = 0.0
        sz[0] = 0.0
        slope[0] = b

        half = 0.5 * math.sqrt(1.0 + t * t)
        fx[j] = x
        fy[j] = y - half
        fz[j] = 0.0
        sx[j] = x
        sy[j] = y + half
        sz[j] = 0.0
        slope[j] = -t

        lspan = self.lmax - 1.0
        for idx in range(len(self.order)):
            k = self.order[idx]
            pv = self.pitch_var[k]
            if pv >= 0:
                th = self.pitch_lo[k] + (self.pitch_hi[k] - self.pitch_lo[k]) * r[pv]
            else:
                th = self.pitch_lo[k]
            ln = 1.0 + lspan * r[self.len_var[k]]
            if self.frozen:
                z1 = 0.0
                z2 = 0.0
            else:
                z1 = r[self.h_var1[k]] - 0.5
                z2 = r[self.h_var2[k]] - 0.5
            dz = z2 - z1
            p2 = ln * ln - dz * dz
            p = math.sqrt(p2) if p2 > 0.0 else 0.0
            ux = math.cos(th)
            uy = math.sin(th)
            ck = self.center_kind[k]
            if ck == CENTER_BOX:
                cx = self.ref_cx[k] + (r[self.center_var1[k]] - 0.5)
                cy = self.ref_cy[k] + (r[self.center_var2[k]] - 0.5)
                fx[k] = cx - 0.5 * p * ux
                fy[k] = cy - 0.5 * p * uy
                sx[k] = cx + 0.5 * p * ux
                sy[k] = cy + 0.5 * p * uy
            elif ck == CENTER_ABS:
                cx = 2.0 * r[self.center_var1[k]] - 1.0
                cy = 2.0 * r[self.center_var2[k]] - 1.0
                fx[k] = cx - 0.5 * p * ux
                fy[k] = cy - 0.5 * p * uy
                sx[k] = cx + 0.5 * p * ux
                sy[k] = cy + 0.5 * p * uy
            else:
                src = self.source_seg[k]
                if fx[src] > sx[src]:
                    tipx = fx[src]
                    tipy = fy[src]
                    alt_x = sx[src]
                    alt_y = sy[src]
                else:
                    tipx = sx[src]
                    tipy = sy[src]
                    alt_x = fx[src]
                    alt_y = fy[src]
                if ck == CENTER_CONTAIN_LEFT:
                    tipx = alt_x
                    tipy = alt_y
                rc = r[self.center_var1[k]]
                fx[k] = tipx - rc * p * ux
                fy[k] = tipy - rc * p * uy
                sx[k] = fx[k] + p * ux
                sy[k] = fy[k] + p * uy
            fz[k] = z1
            sz[k] = z2
            l2 = ln * ln - 1.0
            slope[k] = signs[self.sign_slot[k]] * (math.sqrt(l2) if l2 > 0.0 else 0.0)
        return True

    # -- evaluation ---------------------------------------------------------

    def _capacity(self, mask) -> float:
        fx, fy, fz = self.fx, self.fy, self.fz
        sx, sy, sz = self.sx, self.sy, self.sz
        slope = self.slope
        n = self.n
        total = 0.0
        for q in range(self.quads):
            kb = q
            if q == n - 1:
                # wrap quadrilateral: top is the first segment, ends swapped
                tfx = sx[0]
                tfy = sy[0]
                tfz = sz[0]
                tsx = fx[0]
                tsy = fy[0]
                tsz = fz[0]
                ts = slope[0]
            else:
                kt = q + 1
                tfx = fx[kt]
                tfy = fy[kt]
                tfz = fz[kt]
                tsx = sx[kt]
                tsy = sy[kt]
                tsz = sz[kt]
                ts = slope[kt]
            dxl = tfx - fx[kb]
            dyl = tfy - fy[kb]
            dzl = tfz - fz[kb]
            ll = math.sqrt(dxl * dxl + dyl * dyl + dzl * dzl)
            dxr = tsx - sx[kb]
            dyr = tsy - sy[kb]
            dzr = tsz - sz[kb]
            rr = math.sqrt(dxr * dxr + dyr * dyr + dzr * dzr)
            d = slope[kb] - ts
            a = 2.0 * ll - d
            c = 2.0 * rr + d
            kap = a if a > c else c
            u = mask[q]
            total += (1.0 - u) * (ll + rr) + u * kap
        return total

    def _penalty(self) -> float:
        i = self.pen_i
        j = self.pen_j
        v1x = self.fx[i]
        v1y = self.fy[i]
        v2x = self.sx[i]
        v2y = self.sy[i]
        v3x = self.fx[j]
        v3y = self.fy[j]
        v4x = self.sx[j]
        v4y = self.sy[j]
        den = _tri4(v1x, v1y, v4x, v4y, v2x, v2y, v3x, v3y)
        if den == 0.0:
            return 0.0
        s = _tri(v1x, v1y, v4x, v4y, v3x, v3y) / den
        one_s = _tri(v2x, v2y, v3x, v3y, v4x, v4y) / den
        t = _tri(v1x, v1y, v2x, v2y, v3x, v3y) / den
        one_t = _tri(v2x, v2y, v1x, v1y, v4x, v4y) / den
        a = self.pen_alpha
        if a == 0:
            m = s
            if one_s < m:
                m = one_s
            if t < m:
                m = t
            if one_t < m:
                m = one_t
        elif a == 1:
            m = s if s < t else t
            if one_t < m:
                m = one_t
        elif a == 2:
            m = one_s if one_s < t else t
            if one_t < m:
                m = one_t
        elif a == 3:
            m = s if s < one_s else one_s
            if t < m:
                m = t
        else:
            m = s if s < one_s else one_s
            if one_t < m:
                m = one_t
        if m < 0.0:
            m = 0.0
        return 2.0 * m

    def eval_point(self, r, signs, mask) -> float:
        rl = [float(v) for v in r]
        sl = [int(v) for v in signs]
        ml = [float(v) for v in mask]
        return self._eval_impl(rl, sl, ml)

    def _eval_impl(self, r, signs, mask) -> float:
        if not self._decode_impl(r, signs):
            return INF
        total = self._capacity(mask)
        if self.pen_i >= 0:
            total += self.pen_mu * self._penalty()
        if total != total:  # nan guard
            return INF
        return total

    # -- hill climbing ------------------------------------------------------

    def run_span(self, r, value, best, signs, U, step_max, coercion, mask):
        """Run len(U) hill-climbing iterations from state (r, value).

        r is a numpy array updated in place; U has a row of K+1 uniforms per
        iteration.  Returns (value, best, accepts, decode_failures,
        improvements) where improvements is a list of (iteration offset,
        value) entries recorded whenever the running best improves.
        """
        K = self.K
        rl = [float(v) for v in r]
        sl = [int(v) for v in signs]
        ml = [float(v) for v in mask]
        rows = U.tolist()
        r0 = self.r0
        cu = coercion
        opu = 1.0 + cu
        cand = [0.0] * K
        accepts = 0
        fails = 0
        improvements = []
        for i in range(len(rows)):
            row = rows[i]
            s = step_max * (1.0 - row[0])
            for k in range(K):
                v = (1.0 - s) * rl[k] + s * (2.0 * row[1 + k] - 1.0)
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                if cu > 0.0:
                    v = (v + cu * r0[k]) / opu
                cand[k] = v
            val = self._eval_impl(cand, sl, ml)
            if val == INF:
                fails += 1
            if val < value:
                for k in range(K):
                    rl[k] = cand[k]
                value = val
                accepts += 1
                if val < best:
                    best = val
                    improvements.append((i, val))
        for k in range(K):
            r[k] = rl[k]
        return value, best, accepts, fails, improvements

    def initial_point(self, uniforms, coercion):
        """Initial cube point from K uniforms, coerced toward r0 when
        coercion is positive."""
        r0 = self.r0
        cu = coercion
        opu = 1.0 + cu
        out = []
        for k in range(self.K):
            v = float(uniforms[k])
            if cu > 0.0:
                v = (v + cu * r0[k]) / opu
            out.append(v)
        return out


def _tri(ax, ay, bx, by, cx, cy):
    """Cyclic determinant sum of three points (twice the signed area)."""
    return (ax * by - ay * bx) + (bx * cy - by * cx) + (cx * ay - cy * ax)


def _tri4(ax, ay, bx, by, cx, cy, dx, dy):
    """Cyclic determinant sum of four points."""
    return (ax * by - ay * bx) + (bx * cy - by * cx) + (cx * dy - cy * dx) + (dx * ay - dy * ax)


BETA = (math.sqrt(27.0) - math.sqrt(11.0)) / 4.0
