# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled recurrent kernels.

Same contract as the pure-numpy fallback: inputs are (T, B, n) float64
C-contiguous tensors, parameters are dicts of C-contiguous float64 arrays,
and caches are interchangeable between backends. The shapes here are tiny
(n <= 6, B <= 32), so hand loops beat per-step array dispatch by a wide
margin.
"""

import numpy as np

from libc.math cimport exp, tanh

BACKEND = "cython"


cdef inline double _sig(double a) noexcept nogil:
    return 1.0 / (1.0 + exp(-a))


def gru_forward(dict arrays, double[:, :, ::1] x):
    cdef Py_ssize_t T = x.shape[0], B = x.shape[1], n = x.shape[2]
    cdef double[:, ::1] wz = arrays["wz"], uz = arrays["uz"]
    cdef double[:, ::1] wr = arrays["wr"], ur = arrays["ur"]
    cdef double[:, ::1] wh = arrays["wh"], uh = arrays["uh"]
    cdef double[:, ::1] dw = arrays["dec_w"]
    cdef double[::1] bz = arrays["bz"], br = arrays["br"], bh = arrays["bh"]
    cdef double[::1] db = arrays["dec_b"]

    hs_a = np.zeros((T + 1, B, n))
    z_a = np.empty((T, B, n))
    r_a = np.empty((T, B, n))
    hhat_a = np.empty((T, B, n))
    logits_a = np.empty((T, B, n))
    cdef double[:, :, ::1] hs = hs_a, z = z_a, r = r_a, hhat = hhat_a, lg = logits_a

    cdef Py_ssize_t t, bi, j, k
    cdef double az, ar, ah, acc, hh
    for t in range(T):
        for bi in range(B):
            for j in range(n):
                az = bz[j]
                ar = br[j]
                for k in range(n):
                    az += wz[j, k] * x[t, bi, k] + uz[j, k] * hs[t, bi, k]
                    ar += wr[j, k] * x[t, bi, k] + ur[j, k] * hs[t, bi, k]
                z[t, bi, j] = _sig(az)
                r[t, bi, j] = _sig(ar)
            for j in range(n):
                ah = bh[j]
                for k in range(n):
                    ah += wh[j, k] * x[t, bi, k] \
                        + uh[j, k] * r[t, bi, k] * hs[t, bi, k]
                hh = tanh(ah)
                hhat[t, bi, j] = hh
                hs[t + 1, bi, j] = (1.0 - z[t, bi, j]) * hs[t, bi, j] \
                    + z[t, bi, j] * hh
            for j in range(n):
                acc = db[j]
                for k in range(n):
                    acc += dw[j, k] * hs[t + 1, bi, k]
                lg[t, bi, j] = acc
    return logits_a, {"hs": hs_a, "z": z_a, "r": r_a, "hhat": hhat_a}


def gru_backward(dict arrays, double[:, :, ::1] x, dict cache,
                 double[:, :, ::1] dlogits):
    cdef Py_ssize_t T = x.shape[0], B = x.shape[1], n = x.shape[2]
    cdef double[:, ::1] uz = arrays["uz"], ur = arrays["ur"], uh = arrays["uh"]
    cdef double[:, ::1] dw = arrays["dec_w"]
    cdef double[:, :, ::1] hs = cache["hs"], z = cache["z"]
    cdef double[:, :, ::1] r = cache["r"], hhat = cache["hhat"]

    grads = {name: np.zeros_like(val) for name, val in arrays.items()}
    cdef double[:, ::1] gwz = grads["wz"], guz = grads["uz"]
    cdef double[:, ::1] gwr = grads["wr"], gur = grads["ur"]
    cdef double[:, ::1] gwh = grads["wh"], guh = grads["uh"]
    cdef double[:, ::1] gdw = grads["dec_w"]
    cdef double[::1] gbz = grads["bz"], gbr = grads["br"], gbh = grads["bh"]
    cdef double[::1] gdb = grads["dec_b"]

    dh_a = np.zeros((B, n))
    cdef double[:, ::1] dh = dh_a
    scratch = np.empty((6, n))
    cdef double[:, ::1] s = scratch
    # scratch rows: 0 dht, 1 dah, 2 daz, 3 dar, 4 drh, 5 dhp

    cdef Py_ssize_t t, bi, j, k
    cdef double acc, dlj, zt, rt, hh, hp
    for t in range(T - 1, -1, -1):
        for bi in range(B):
            for j in range(n):
                dlj = dlogits[t, bi, j]
                gdb[j] += dlj
                for k in range(n):
                    gdw[j, k] += dlj * hs[t + 1, bi, k]
            for k in range(n):
                acc = dh[bi, k]
                for j in range(n):
                    acc += dlogits[t, bi, j] * dw[j, k]
                s[0, k] = acc
            for j in range(n):
                zt = z[t, bi, j]
                hh = hhat[t, bi, j]
                hp = hs[t, bi, j]
                s[1, j] = s[0, j] * zt * (1.0 - hh * hh)
                s[2, j] = s[0, j] * (hh - hp) * zt * (1.0 - zt)
                s[5, j] = s[0, j] * (1.0 - zt)
            for k in range(n):
                acc = 0.0
                for j in range(n):
                    acc += s[1, j] * uh[j, k]
                s[4, k] = acc
            for k in range(n):
                rt = r[t, bi, k]
                hp = hs[t, bi, k]
                s[5, k] += s[4, k] * rt
                s[3, k] = s[4, k] * hp * rt * (1.0 - rt)
            for j in range(n):
                gbh[j] += s[1, j]
                gbz[j] += s[2, j]
                gbr[j] += s[3, j]
                for k in range(n):
                    gwh[j, k] += s[1, j] * x[t, bi, k]
                    guh[j, k] += s[1, j] * r[t, bi, k] * hs[t, bi, k]
                    gwz[j, k] += s[2, j] * x[t, bi, k]
                    guz[j, k] += s[2, j] * hs[t, bi, k]
                    gwr[j, k] += s[3, j] * x[t, bi, k]
                    gur[j, k] += s[3, j] * hs[t, bi, k]
            for k in range(n):
                acc = s[5, k]
                for j in range(n):
                    acc += s[2, j] * uz[j, k] + s[3, j] * ur[j, k]
                dh[bi, k] = acc
    return grads


def lstm_forward(dict arrays, double[:, :, ::1] x):
    cdef Py_ssize_t T = x.shape[0], B = x.shape[1], n = x.shape[2]
    cdef double[:, ::1] wi = arrays["wi"], ui = arrays["ui"]
    cdef double[:, ::1] wf = arrays["wf"], uf = arrays["uf"]
    cdef double[:, ::1] wo = arrays["wo"], uo = arrays["uo"]
    cdef double[:, ::1] wg = arrays["wg"], ug = arrays["ug"]
    cdef double[:, ::1] dw = arrays["dec_w"]
    cdef double[::1] bi_ = arrays["bi"], bf = arrays["bf"]
    cdef double[::1] bo = arrays["bo"], bg = arrays["bg"]
    cdef double[::1] db = arrays["dec_b"]

    hs_a = np.zeros((T + 1, B, n))
    cs_a = np.zeros((T + 1, B, n))
    i_a = np.empty((T, B, n))
    f_a = np.empty((T, B, n))
    o_a = np.empty((T, B, n))
    g_a = np.empty((T, B, n))
    tc_a = np.empty((T, B, n))
    logits_a = np.empty((T, B, n))
    cdef double[:, :, ::1] hs = hs_a, cs = cs_a
    cdef double[:, :, ::1] iv = i_a, fv = f_a, ov = o_a, gv = g_a, tc = tc_a
    cdef double[:, :, ::1] lg = logits_a

    cdef Py_ssize_t t, b, j, k
    cdef double ai, af, ao, ag, acc, cv
    for t in range(T):
        for b in range(B):
            for j in range(n):
                ai = bi_[j]
                af = bf[j]
                ao = bo[j]
                ag = bg[j]
                for k in range(n):
                    ai += wi[j, k] * x[t, b, k] + ui[j, k] * hs[t, b, k]
                    af += wf[j, k] * x[t, b, k] + uf[j, k] * hs[t, b, k]
                    ao += wo[j, k] * x[t, b, k] + uo[j, k] * hs[t, b, k]
                    ag += wg[j, k] * x[t, b, k] + ug[j, k] * hs[t, b, k]
                iv[t, b, j] = _sig(ai)
                fv[t, b, j] = _sig(af)
                ov[t, b, j] = _sig(ao)
                gv[t, b, j] = tanh(ag)
                cv = fv[t, b, j] * cs[t, b, j] + iv[t, b, j] * gv[t, b, j]
                cs[t + 1, b, j] = cv
                tc[t, b, j] = tanh(cv)
                hs[t + 1, b, j] = ov[t, b, j] * tc[t, b, j]
            for j in range(n):
                acc = db[j]
                for k in range(n):
                    acc += dw[j, k] * hs[t + 1, b, k]
                lg[t, b, j] = acc
    return logits_a, {"hs": hs_a, "cs": cs_a, "i": i_a, "f": f_a,
                      "o": o_a, "g": g_a, "tc": tc_a}


def lstm_backward(dict arrays, double[:, :, ::1] x, dict cache,
                  double[:, :, ::1] dlogits):
    cdef Py_ssize_t T = x.shape[0], B = x.shape[1], n = x.shape[2]
    cdef double[:, ::1] ui = arrays["ui"], uf = arrays["uf"]
    cdef double[:, ::1] uo = arrays["uo"], ug = arrays["ug"]
    cdef double[:, ::1] dw = arrays["dec_w"]
    cdef double[:, :, ::1] hs = cache["hs"], cs = cache["cs"]
    cdef double[:, :, ::1] iv = cache["i"], fv = cache["f"]
    cdef double[:, :, ::1] ov = cache["o"], gv = cache["g"], tc = cache["tc"]

    grads = {name: np.zeros_like(val) for name, val in arrays.items()}
    cdef double[:, ::1] gwi = grads["wi"], gui = grads["ui"]
    cdef double[:, ::1] gwf = grads["wf"], guf = grads["uf"]
    cdef double[:, ::1] gwo = grads["wo"], guo = grads["uo"]
    cdef double[:, ::1] gwg = grads["wg"], gug = grads["ug"]
    cdef double[:, ::1] gdw = grads["dec_w"]
    cdef double[::1] gbi = grads["bi"], gbf = grads["bf"]
    cdef double[::1] gbo = grads["bo"], gbg = grads["bg"]
    cdef double[::1] gdb = grads["dec_b"]

    dh_a = np.zeros((B, n))
    dc_a = np.zeros((B, n))
    cdef double[:, ::1] dh = dh_a, dc = dc_a
    scratch = np.empty((6, n))
    cdef double[:, ::1] s = scratch
    # scratch rows: 0 dht, 1 dct, 2 dai, 3 daf, 4 dao, 5 dag

    cdef Py_ssize_t t, b, j, k
    cdef double acc, dlj, it, ft, ot, gt, tct, dot
    for t in range(T - 1, -1, -1):
        for b in range(B):
            for j in range(n):
                dlj = dlogits[t, b, j]
                gdb[j] += dlj
                for k in range(n):
                    gdw[j, k] += dlj * hs[t + 1, b, k]
            for k in range(n):
                acc = dh[b, k]
                for j in range(n):
                    acc += dlogits[t, b, j] * dw[j, k]
                s[0, k] = acc
            for j in range(n):
                it = iv[t, b, j]
                ft = fv[t, b, j]
                ot = ov[t, b, j]
                gt = gv[t, b, j]
                tct = tc[t, b, j]
                dot = s[0, j] * tct
                s[1, j] = dc[b, j] + s[0, j] * ot * (1.0 - tct * tct)
                s[2, j] = s[1, j] * gt * it * (1.0 - it)
                s[3, j] = s[1, j] * cs[t, b, j] * ft * (1.0 - ft)
                s[4, j] = dot * ot * (1.0 - ot)
                s[5, j] = s[1, j] * it * (1.0 - gt * gt)
                dc[b, j] = s[1, j] * ft
            for j in range(n):
                gbi[j] += s[2, j]
                gbf[j] += s[3, j]
                gbo[j] += s[4, j]
                gbg[j] += s[5, j]
                for k in range(n):
                    gwi[j, k] += s[2, j] * x[t, b, k]
                    gui[j, k] += s[2, j] * hs[t, b, k]
                    gwf[j, k] += s[3, j] * x[t, b, k]
                    guf[j, k] += s[3, j] * hs[t, b, k]
                    gwo[j, k] += s[4, j] * x[t, b, k]
                    guo[j, k] += s[4, j] * hs[t, b, k]
                    gwg[j, k] += s[5, j] * x[t, b, k]
                    gug[j, k] += s[5, j] * hs[t, b, k]
            for k in range(n):
                acc = 0.0
                for j in range(n):
                    acc += s[2, j] * ui[j, k] + s[3, j] * uf[j, k] \
                        + s[4, j] * uo[j, k] + s[5, j] * ug[j, k]
                dh[b, k] = acc
    return grads
