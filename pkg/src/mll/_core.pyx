# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evaluation kernel.

Statement-for-statement mirror of ``_pycore.PureEngine``; the two must give
bitwise-identical results (the extension is built with -ffp-contract=off to
keep FMA contraction from changing rounding).
"""

from libc.math cimport cos, sin, sqrt, INFINITY

import numpy as np


cdef double BETA = (sqrt(27.0) - sqrt(11.0)) / 4.0

cdef int CENTER_BOX = 0
cdef int CENTER_ABS = 1
cdef int CENTER_CONTAIN_RIGHT = 2
cdef int CENTER_CONTAIN_LEFT = 3


cdef inline double _tri(double ax, double ay, double bx, double by,
                        double cx, double cy) nogil:
    return (ax * by - ay * bx) + (bx * cy - by * cx) + (cx * ay - cy * ax)


cdef inline double _tri4(double ax, double ay, double bx, double by,
                         double cx, double cy, double dx, double dy) nogil:
    return (ax * by - ay * bx) + (bx * cy - by * cx) + (cx * dy - cy * dx) + (dx * ay - dy * ax)


cdef class Engine:
    cdef public str backend
    cdef int n, j, K, L, quads, npoly
    cdef bint cyclic, frozen, has_r0
    cdef int pen_i, pen_j, pen_alpha
    cdef double pen_mu, lmax
    cdef double[::1] pitch_lo, pitch_hi, ref_cx, ref_cy, poly_x, poly_y, r0
    cdef int[::1] pitch_var, len_var, center_kind, center_var1, center_var2
    cdef int[::1] source_seg, h_var1, h_var2, sign_slot, order
    cdef double[::1] fx, fy, fz, sx, sy, sz, slope
    cdef double[::1] cand, rl, ml
    cdef signed char[::1] sl

    def __init__(self, lay):
        self.backend = "compiled"
        self.n = int(lay.n)
        self.j = int(lay.j)
        self.cyclic = bool(lay.cyclic)
        self.K = int(lay.K)
        self.L = int(lay.L)
        self.quads = int(lay.quads)
        self.pitch_lo = np.ascontiguousarray(lay.pitch_lo, dtype=np.float64)
        self.pitch_hi = np.ascontiguousarray(lay.pitch_hi, dtype=np.float64)
        self.pitch_var = np.ascontiguousarray(lay.pitch_var, dtype=np.int32)
        self.len_var = np.ascontiguousarray(lay.len_var, dtype=np.int32)
        self.center_kind = np.ascontiguousarray(lay.center_kind, dtype=np.int32)
        self.center_var1 = np.ascontiguousarray(lay.center_var1, dtype=np.int32)
        self.center_var2 = np.ascontiguousarray(lay.center_var2, dtype=np.int32)
        self.source_seg = np.ascontiguousarray(lay.source_seg, dtype=np.int32)
        self.ref_cx = np.ascontiguousarray(lay.ref_cx, dtype=np.float64)
        self.ref_cy = np.ascontiguousarray(lay.ref_cy, dtype=np.float64)
        self.h_var1 = np.ascontiguousarray(lay.h_var1, dtype=np.int32)
        self.h_var2 = np.ascontiguousarray(lay.h_var2, dtype=np.int32)
        self.sign_slot = np.ascontiguousarray(lay.sign_slot, dtype=np.int32)
        self.order = np.ascontiguousarray(lay.decode_order, dtype=np.int32)
        self.poly_x = np.ascontiguousarray(lay.poly_x, dtype=np.float64)
        self.poly_y = np.ascontiguousarray(lay.poly_y, dtype=np.float64)
        self.npoly = len(lay.poly_x)
        self.pen_i = int(lay.pen_i)
        self.pen_j = int(lay.pen_j)
        self.pen_alpha = int(lay.pen_alpha)
        self.pen_mu = float(lay.pen_mu)
        self.frozen = bool(lay.heights_frozen)
        self.lmax = float(lay.lmax)
        if lay.r0 is not None:
            self.r0 = np.ascontiguousarray(lay.r0, dtype=np.float64)
            self.has_r0 = True
        else:
            self.r0 = np.zeros(self.K, dtype=np.float64)
            self.has_r0 = False
        n = self.n
        self.fx = np.zeros(n)
        self.fy = np.zeros(n)
        self.fz = np.zeros(n)
        self.sx = np.zeros(n)
        self.sy = np.zeros(n)
        self.sz = np.zeros(n)
        self.slope = np.zeros(n)
        self.cand = np.zeros(self.K)
        self.rl = np.zeros(self.K)
        self.ml = np.zeros(self.quads)
        self.sl = np.zeros(self.L if self.L > 0 else 1, dtype=np.int8)

    # -- decode -------------------------------------------------------------

    cdef bint _t_interval(self, double b, double* out_lo, double* out_hi) nogil:
        cdef int m = self.npoly
        cdef double tlo = INFINITY
        cdef double thi = -INFINITY
        cdef int i, i2
        cdef double x1, y1, x2, y2, tt
        for i in range(m):
            x1 = self.poly_x[i]
            y1 = self.poly_y[i]
            i2 = i + 1 if i + 1 < m else 0
            x2 = self.poly_x[i2]
            y2 = self.poly_y[i2]
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
            return False
        out_lo[0] = tlo
        out_hi[0] = thi
        return True

    cdef bint _decode_impl(self, double[::1] r, signed char[::1] signs) nogil:
        cdef double[::1] fx = self.fx
        cdef double[::1] fy = self.fy
        cdef double[::1] fz = self.fz
        cdef double[::1] sx = self.sx
        cdef double[::1] sy = self.sy
        cdef double[::1] sz = self.sz
        cdef double[::1] slope = self.slope
        cdef double b = BETA * r[0]
        cdef double tlo, thi
        if not self._t_interval(b, &tlo, &thi):
            return False
        cdef double t = tlo + (thi - tlo) * r[1]
        cdef double x = r[2] / 18.0
        cdef double y = -1.0 / 30.0 + (2.0 / 30.0) * r[3]
        cdef int j = self.j

        cdef double blen = sqrt(1.0 + b * b)
        fx[0] = -blen
        fy[0] = 0.0
        fz[0] = 0.0
        sx[0] = 0.0
        sy[0] = 0.0
        sz[0] = 0.0
        slope[0] = b

        cdef double half = 0.5 * sqrt(1.0 + t * t)
        fx[j] = x
        fy[j] = y - half
        fz[j] = 0.0
        sx[j] = x
        sy[j] = y + half
        sz[j] = 0.0
        slope[j] = -t

        cdef double lspan = self.lmax - 1.0
        cdef int idx, k, pv, ck, src
        cdef double th, ln, z1, z2, dz, p2, p, ux, uy, cx, cy
        cdef double tipx, tipy, alt_x, alt_y, rc, l2
        for idx in range(self.order.shape[0]):
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
            p = sqrt(p2) if p2 > 0.0 else 0.0
            ux = cos(th)
            uy = sin(th)
            ck = self.center_kind[k]
            if ck == 0:  # CENTER_BOX
                cx = self.ref_cx[k] + (r[self.center_var1[k]] - 0.5)
                cy = self.ref_cy[k] + (r[self.center_var2[k]] - 0.5)
                fx[k] = cx - 0.5 * p * ux
                fy[k] = cy - 0.5 * p * uy
                sx[k] = cx + 0.5 * p * ux
                sy[k] = cy + 0.5 * p * uy
            elif ck == 1:  # CENTER_ABS
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
                if ck == 3:  # CENTER_CONTAIN_LEFT
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
            slope[k] = signs[self.sign_slot[k]] * (sqrt(l2) if l2 > 0.0 else 0.0)
        return True

    def decode_segments(self, r, signs):
        cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
        cdef signed char[::1] sv = np.ascontiguousarray(signs, dtype=np.int8)
        if not self._decode_impl(rv, sv):
            return None
        return [
            (self.fx[k], self.fy[k], self.fz[k], self.sx[k], self.sy[k], self.sz[k])
            for k in range(self.n)
        ]

    # -- evaluation ---------------------------------------------------------

    cdef double _capacity(self, double[::1] mask) nogil:
        cdef double[::1] fx = self.fx
        cdef double[::1] fy = self.fy
        cdef double[::1] fz = self.fz
        cdef double[::1] sx = self.sx
        cdef double[::1] sy = self.sy
        cdef double[::1] sz = self.sz
        cdef double[::1] slope = self.slope
        cdef int n = self.n
        cdef double total = 0.0
        cdef int q, kb, kt
        cdef double tfx, tfy, tfz, tsx, tsy, tsz, ts
        cdef double dxl, dyl, dzl, ll, dxr, dyr, dzr, rr, d, a, c, kap, u
        for q in range(self.quads):
            kb = q
            if q == n - 1:
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
            ll = sqrt(dxl * dxl + dyl * dyl + dzl * dzl)
            dxr = tsx - sx[kb]
            dyr = tsy - sy[kb]
            dzr = tsz - sz[kb]
            rr = sqrt(dxr * dxr + dyr * dyr + dzr * dzr)
            d = slope[kb] - ts
            a = 2.0 * ll - d
            c = 2.0 * rr + d
            kap = a if a > c else c
            u = mask[q]
            total += (1.0 - u) * (ll + rr) + u * kap
        return total

    cdef double _penalty(self) nogil:
        cdef int i = self.pen_i
        cdef int j = self.pen_j
        cdef double v1x = self.fx[i]
        cdef double v1y = self.fy[i]
        cdef double v2x = self.sx[i]
        cdef double v2y = self.sy[i]
        cdef double v3x = self.fx[j]
        cdef double v3y = self.fy[j]
        cdef double v4x = self.sx[j]
        cdef double v4y = self.sy[j]
        cdef double den = _tri4(v1x, v1y, v4x, v4y, v2x, v2y, v3x, v3y)
        if den == 0.0:
            return 0.0
        cdef double s = _tri(v1x, v1y, v4x, v4y, v3x, v3y) / den
        cdef double one_s = _tri(v2x, v2y, v3x, v3y, v4x, v4y) / den
        cdef double t = _tri(v1x, v1y, v2x, v2y, v3x, v3y) / den
        cdef double one_t = _tri(v2x, v2y, v1x, v1y, v4x, v4y) / den
        cdef int a = self.pen_alpha
        cdef double m
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

    cdef double _eval_impl(self, double[::1] r, signed char[::1] signs,
                           double[::1] mask) nogil:
        if not self._decode_impl(r, signs):
            return INFINITY
        cdef double total = self._capacity(mask)
        if self.pen_i >= 0:
            total += self.pen_mu * self._penalty()
        if total != total:
            return INFINITY
        return total

    def eval_point(self, r, signs, mask):
        cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
        cdef signed char[::1] sv = np.ascontiguousarray(signs, dtype=np.int8)
        cdef double[::1] mv = np.ascontiguousarray(mask, dtype=np.float64)
        return self._eval_impl(rv, sv, mv)

    # -- hill climbing ------------------------------------------------------

    def run_span(self, r, double value, double best, signs, U,
                 double step_max, double coercion, mask):
        """Mirror of PureEngine.run_span; r is updated in place."""
        cdef double[::1] rv = r
        cdef signed char[::1] sv = np.ascontiguousarray(signs, dtype=np.int8)
        cdef double[:, ::1] Uv = U
        cdef double[::1] mv = np.ascontiguousarray(mask, dtype=np.float64)
        cdef int K = self.K
        cdef int nit = Uv.shape[0]
        cdef double[::1] rl = self.rl
        cdef double[::1] cand = self.cand
        cdef int i, k
        cdef double s, v, val
        cdef double cu = coercion
        cdef double opu = 1.0 + cu
        cdef double[::1] r0 = self.r0
        cdef long accepts = 0
        cdef long fails = 0
        imp_idx = np.empty(nit, dtype=np.int64)
        imp_val = np.empty(nit, dtype=np.float64)
        cdef long[::1] iiv = imp_idx
        cdef double[::1] ivv = imp_val
        cdef long nimp = 0
        for k in range(K):
            rl[k] = rv[k]
        with nogil:
            for i in range(nit):
                s = step_max * (1.0 - Uv[i, 0])
                for k in range(K):
                    v = (1.0 - s) * rl[k] + s * (2.0 * Uv[i, 1 + k] - 1.0)
                    if v < 0.0:
                        v = 0.0
                    elif v > 1.0:
                        v = 1.0
                    if cu > 0.0:
                        v = (v + cu * r0[k]) / opu
                    cand[k] = v
                val = self._eval_impl(cand, sv, mv)
                if val == INFINITY:
                    fails += 1
                if val < value:
                    for k in range(K):
                        rl[k] = cand[k]
                    value = val
                    accepts += 1
                    if val < best:
                        best = val
                        iiv[nimp] = i
                        ivv[nimp] = val
                        nimp += 1
        for k in range(K):
            rv[k] = rl[k]
        improvements = [(int(imp_idx[i]), float(imp_val[i])) for i in range(nimp)]
        return value, best, int(accepts), int(fails), improvements

    def initial_point(self, uniforms, double coercion):
        cdef double cu = coercion
        cdef double opu = 1.0 + cu
        cdef double[::1] r0 = self.r0
        out = []
        cdef int k
        cdef double v
        for k in range(self.K):
            v = float(uniforms[k])
            if cu > 0.0:
                v = (v + cu * r0[k]) / opu
            out.append(v)
        return out

