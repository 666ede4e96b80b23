# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: constraint ODE march and null-slice diamond march.

Mirrors ewkg._kernels._fallback exactly; the test suite checks the two
backends agree to round-off.
"""

from libc.math cimport exp, isfinite

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline void _rhs(double rr, double a, double bb, double c,
                      double yb, double ya, double* out) noexcept nogil:
    cdef double common = exp(2.0 * (yb - ya)) * a + bb
    cdef double mass = exp(2.0 * yb) * c
    out[0] = rr * (common + mass)
    out[1] = rr * (common - mass)


def constraint_march(double dr,
                     double[::1] A, double[::1] B, double[::1] C,
                     double a4, double b4, double c4, double cap):
    cdef Py_ssize_t n = (A.shape[0] - 1) // 2
    beta_arr = np.empty(n)
    alpha_arr = np.empty(n)
    cdef double[::1] beta = beta_arr
    cdef double[::1] alpha = alpha_arr
    cdef double yb = 0.0, ya = 0.0
    cdef double h, rc, rf, rn, r4
    cdef double k1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef Py_ssize_t i, jc
    cdef int flag = 0

    h = 0.5 * dr
    r4 = 0.25 * dr
    _rhs(r4, a4, b4, c4, yb, ya, k2)
    _rhs(r4, a4, b4, c4, yb + 0.5 * h * k2[0], ya + 0.5 * h * k2[1], k3)
    _rhs(0.5 * dr, A[1], B[1], C[1], yb + h * k3[0], ya + h * k3[1], k4)
    yb += h / 6.0 * (2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    ya += h / 6.0 * (2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    beta[0] = yb
    alpha[0] = ya
    if not (yb <= cap):
        return beta_arr, alpha_arr, 1

    h = dr
    for i in range(n - 1):
        jc = 2 * i + 1
        rc = 0.5 * dr * jc
        rf = rc + 0.5 * dr
        rn = rc + dr
        _rhs(rc, A[jc], B[jc], C[jc], yb, ya, k1)
        _rhs(rf, A[jc + 1], B[jc + 1], C[jc + 1],
             yb + 0.5 * h * k1[0], ya + 0.5 * h * k1[1], k2)
        _rhs(rf, A[jc + 1], B[jc + 1], C[jc + 1],
             yb + 0.5 * h * k2[0], ya + 0.5 * h * k2[1], k3)
        _rhs(rn, A[jc + 2], B[jc + 2], C[jc + 2],
             yb + h * k3[0], ya + h * k3[1], k4)
        yb += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        ya += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        beta[i + 1] = yb
        alpha[i + 1] = ya
        if not (yb <= cap):
            flag = 1
            break
    return beta_arr, alpha_arr, flag


def march_null_slice(prev, seed, boundary, sub, double h, double m2):
    """Inward value march / outward geometry march for one null slice.

    See the pure-Python reference in ewkg._kernels._fallback for the full
    description of the scheme.
    """
    cdef double[::1] pr = prev[0]
    cdef double[::1] pl = prev[1]
    cdef double[::1] pg = prev[2]
    cdef double[::1] pp = prev[3]
    cdef double[::1] pru = prev[4]
    cdef double[::1] prv = prev[5]

    cdef Py_ssize_t npts_prev = pr.shape[0]
    cdef Py_ssize_t n = npts_prev + 2
    out = tuple(np.empty(n) for _ in range(10))
    cdef double[::1] r = out[0]
    cdef double[::1] lam = out[1]
    cdef double[::1] gm = out[2]
    cdef double[::1] ph = out[3]
    cdef double[::1] ru = out[4]
    cdef double[::1] rv = out[5]
    cdef double[::1] gu = out[6]
    cdef double[::1] gv = out[7]
    cdef double[::1] pu = out[8]
    cdef double[::1] pv = out[9]

    r[0] = 0.0
    lam[0] = 0.0
    gm[0] = <double> seed[0]
    ph[0] = <double> seed[1]
    ru[0] = -0.5
    rv[0] = 0.5
    gu[0] = gv[0] = 0.5 * (<double> seed[2])
    pu[0] = pv[0] = 0.5 * (<double> seed[3])

    r[n - 1] = <double> boundary[0]
    lam[n - 1] = <double> boundary[1]
    gm[n - 1] = <double> boundary[2]
    ph[n - 1] = <double> boundary[3]
    ru[n - 1] = <double> boundary[4]
    rv[n - 1] = <double> boundary[5]
    gu[n - 1] = <double> boundary[6]
    gv[n - 1] = <double> boundary[7]
    pu[n - 1] = <double> boundary[8]
    pv[n - 1] = <double> boundary[9]

    r[n - 2] = <double> sub[0]
    lam[n - 2] = <double> sub[1]
    gm[n - 2] = <double> sub[2]
    ph[n - 2] = <double> sub[3]
    ru[n - 2] = <double> sub[4]
    rv[n - 2] = <double> sub[5]

    cdef Py_ssize_t j
    cdef int it, flag = 0
    cdef double gE, gW, gS, fE, fW, fS, ex_c, r_c, ph_c
    cdef double ru_c, rv_c, gu_c, gv_c, pu_c, pv_c
    cdef double sg_c, sp_c, g_uv, p_uv, s_lam, srE, src_c
    cdef double gT_c, pT_c, ex_ax, ph_axc, gmT, phT

    # predictor: linear parallelogram extrapolation inward
    for j in range(n - 3, 0, -1):
        r[j] = r[j + 1] + pr[j - 1] - pr[j]
        lam[j] = lam[j + 1] + pl[j - 1] - pl[j]
        gm[j] = gm[j + 1] + pg[j - 1] - pg[j]
        ph[j] = ph[j + 1] + pp[j - 1] - pp[j]
        ru[j] = pru[j - 1]
        rv[j] = rv[j + 1]

    for it in range(2):
        # inward value sweep: E = new[j+1], W = prev[j-1], S = prev[j]
        for j in range(n - 3, 0, -1):
            gE = gm[j + 1]; gW = pg[j - 1]; gS = pg[j]
            fE = ph[j + 1]; fW = pp[j - 1]; fS = pp[j]
            ex_c = exp(0.5 * (lam[j] + lam[j + 1] + pl[j - 1] + pl[j])
                       - 0.5 * (gm[j] + gE + gW + gS))
            r_c = 0.25 * (r[j] + r[j + 1] + pr[j - 1] + pr[j])
            ph_c = 0.25 * (ph[j] + fE + fW + fS)
            ru_c = 0.25 * (ru[j] + ru[j + 1] + pru[j - 1] + pru[j])
            rv_c = 0.25 * (rv[j] + rv[j + 1] + prv[j - 1] + prv[j])
            gu_c = (gm[j] + gW - gE - gS) / (2.0 * h)
            gv_c = (gm[j] + gE - gW - gS) / (2.0 * h)
            pu_c = (ph[j] + fW - fE - fS) / (2.0 * h)
            pv_c = (ph[j] + fE - fW - fS) / (2.0 * h)
            sg_c = 0.25 * m2 * r_c * ex_c * ph_c * ph_c
            sp_c = -0.5 * m2 * r_c * ex_c * ph_c
            g_uv = (sg_c - ru_c * gv_c - rv_c * gu_c) / (2.0 * r_c)
            p_uv = (sp_c - ru_c * pv_c - rv_c * pu_c) / (2.0 * r_c)
            gm[j] = gE + gW - gS + h * h * g_uv
            ph[j] = fE + fW - fS + h * h * p_uv

        if n >= 5:
            gm[0] = 3.0 * gm[1] - 3.0 * gm[2] + gm[3]
            ph[0] = 3.0 * ph[1] - 3.0 * ph[2] + ph[3]

        # outward geometry sweep anchored on the axis normalizations
        for j in range(1, n - 1):
            srE = 0.25 * m2 * r[j] * exp(2.0 * (lam[j] - gm[j])) * ph[j] * ph[j]
            rv[j] = rv[j - 1] - 0.5 * h * (
                0.25 * m2 * r[j - 1] * exp(2.0 * (lam[j - 1] - gm[j - 1]))
                * ph[j - 1] * ph[j - 1] + srE)
            if j == 1:
                r[j] = pr[0] + 0.5 * h * (prv[0] + rv[j])
                gT_c = (gm[0] - pg[0]) / h
                pT_c = (ph[0] - pp[0]) / h
                ex_ax = exp(-(gm[0] + pg[0]))
                ph_axc = 0.5 * (ph[0] + pp[0])
                s_lam = (-0.25 * gT_c * gT_c - 0.125 * pT_c * pT_c
                         + 0.125 * m2 * ex_ax * ph_axc * ph_axc)
                lam[j] = 0.5 * (lam[0] + pl[0] - h * h * s_lam)
            else:
                ex_c = exp(0.5 * (lam[j - 1] + pl[j - 1] + pl[j - 2] + lam[j])
                           - 0.5 * (gm[j - 1] + pg[j - 1] + pg[j - 2] + gm[j]))
                r_c = 0.25 * (r[j - 1] + pr[j - 1] + pr[j - 2] + r[j])
                ph_c = 0.25 * (ph[j - 1] + pp[j - 1] + pp[j - 2] + ph[j])
                src_c = 0.25 * m2 * r_c * ex_c * ph_c * ph_c
                if j < n - 1:
                    r[j] = r[j - 1] + pr[j - 1] - pr[j - 2] - h * h * src_c
                gu_c = (gm[j - 1] + pg[j - 2] - gm[j] - pg[j - 1]) / (2.0 * h)
                gv_c = (gm[j - 1] + gm[j] - pg[j - 1] - pg[j - 2]) / (2.0 * h)
                pu_c = (ph[j - 1] + pp[j - 2] - ph[j] - pp[j - 1]) / (2.0 * h)
                pv_c = (ph[j - 1] + ph[j] - pp[j - 1] - pp[j - 2]) / (2.0 * h)
                s_lam = (-gu_c * gv_c - 0.5 * pu_c * pv_c
                         + 0.125 * m2 * ex_c * ph_c * ph_c)
                lam[j] = lam[j - 1] + pl[j - 1] - pl[j - 2] - h * h * s_lam

        # r_u by differences of the marched radius (gauge-invariant anchor)
        for j in range(1, n - 1):
            ru[j] = (r[j - 1] - r[j + 1]) / (2.0 * h)

    if n >= 5:
        gmT = (5.0 * gm[1] - 8.0 * gm[2] + 3.0 * gm[3]) / h
        phT = (5.0 * ph[1] - 8.0 * ph[2] + 3.0 * ph[3]) / h
        gu[0] = gv[0] = 0.5 * gmT
        pu[0] = pv[0] = 0.5 * phT

    for j in range(1, n - 1):
        gu[j] = (gm[j - 1] - gm[j + 1]) / (2.0 * h)
        pu[j] = (ph[j - 1] - ph[j + 1]) / (2.0 * h)
        gv[j] = (gm[j] - pg[j - 1]) / h
        pv[j] = (ph[j] - pp[j - 1]) / h

    for j in range(1, n - 1):
        if not (r[j] > r[j - 1]):
            flag = 1
            break

    if flag == 0:
        for j in range(n):
            if not (isfinite(r[j]) and isfinite(lam[j]) and isfinite(gm[j])
                    and isfinite(ph[j]) and isfinite(gu[j]) and isfinite(gv[j])
                    and isfinite(pu[j]) and isfinite(pv[j])):
                flag = 2
                break
    return out, flag
