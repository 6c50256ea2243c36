"""Pure-numpy recurrent kernels.

Fallback used when the compiled extension is unavailable. Both backends
implement the same contract: forward takes a parameter dict and an input
tensor of shape (T, B, n) and returns (logits, cache); backward takes the
same plus the per-step logit gradients and returns a gradient dict keyed
like the parameter dict. Caches are interchangeable between backends.
"""

import numpy as np

BACKEND = "python"


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def gru_forward(arrays, x):
    T, B, n = x.shape
    wz, uz, bz = arrays["wz"], arrays["uz"], arrays["bz"]
    wr, ur, br = arrays["wr"], arrays["ur"], arrays["br"]
    wh, uh, bh = arrays["wh"], arrays["uh"], arrays["bh"]
    dec_w, dec_b = arrays["dec_w"], arrays["dec_b"]

    hs = np.zeros((T + 1, B, n))
    z = np.empty((T, B, n))
    r = np.empty((T, B, n))
    hhat = np.empty((T, B, n))
    logits = np.empty((T, B, n))

    for t in range(T):
        xt, hp = x[t], hs[t]
        z[t] = _sigmoid(xt @ wz.T + hp @ uz.T + bz)
        r[t] = _sigmoid(xt @ wr.T + hp @ ur.T + br)
        hhat[t] = np.tanh(xt @ wh.T + (r[t] * hp) @ uh.T + bh)
        hs[t + 1] = (1.0 - z[t]) * hp + z[t] * hhat[t]
        logits[t] = hs[t + 1] @ dec_w.T + dec_b
    return logits, {"hs": hs, "z": z, "r": r, "hhat": hhat}


def gru_backward(arrays, x, cache, dlogits):
    T, B, n = x.shape
    uz, ur, uh = arrays["uz"], arrays["ur"], arrays["uh"]
    dec_w = arrays["dec_w"]
    hs, z, r, hhat = cache["hs"], cache["z"], cache["r"], cache["hhat"]

    g = {k: np.zeros_like(v) for k, v in arrays.items()}
    dh = np.zeros((B, n))
    for t in range(T - 1, -1, -1):
        g["dec_w"] += dlogits[t].T @ hs[t + 1]
        g["dec_b"] += dlogits[t].sum(axis=0)
        dh = dh + dlogits[t] @ dec_w

        hp, zt, rt, hh = hs[t], z[t], r[t], hhat[t]
        dz = dh * (hh - hp)
        dhp = dh * (1.0 - zt)
        dah = dh * zt * (1.0 - hh * hh)
        g["wh"] += dah.T @ x[t]
        g["uh"] += dah.T @ (rt * hp)
        g["bh"] += dah.sum(axis=0)

        drh = dah @ uh          # grad wrt the gated state r*h_prev
        dhp = dhp + drh * rt
        daz = dz * zt * (1.0 - zt)
        dar = drh * hp * rt * (1.0 - rt)
        g["wz"] += daz.T @ x[t]
        g["uz"] += daz.T @ hp
        g["bz"] += daz.sum(axis=0)
        g["wr"] += dar.T @ x[t]
        g["ur"] += dar.T @ hp
        g["br"] += dar.sum(axis=0)
        dh = dhp + daz @ uz + dar @ ur
    return g


def lstm_forward(arrays, x):
    T, B, n = x.shape
    wi, ui, bi = arrays["wi"], arrays["ui"], arrays["bi"]
    wf, uf, bf = arrays["wf"], arrays["uf"], arrays["bf"]
    wo, uo, bo = arrays["wo"], arrays["uo"], arrays["bo"]
    wg, ug, bg = arrays["wg"], arrays["ug"], arrays["bg"]
    dec_w, dec_b = arrays["dec_w"], arrays["dec_b"]

    hs = np.zeros((T + 1, B, n))
    cs = np.zeros((T + 1, B, n))
    i = np.empty((T, B, n))
    f = np.empty((T, B, n))
    o = np.empty((T, B, n))
    gg = np.empty((T, B, n))
    tc = np.empty((T, B, n))
    logits = np.empty((T, B, n))

    for t in range(T):
        xt, hp = x[t], hs[t]
        i[t] = _sigmoid(xt @ wi.T + hp @ ui.T + bi)
        f[t] = _sigmoid(xt @ wf.T + hp @ uf.T + bf)
        o[t] = _sigmoid(xt @ wo.T + hp @ uo.T + bo)
        gg[t] = np.tanh(xt @ wg.T + hp @ ug.T + bg)
        cs[t + 1] = f[t] * cs[t] + i[t] * gg[t]
        tc[t] = np.tanh(cs[t + 1])
        hs[t + 1] = o[t] * tc[t]
        logits[t] = hs[t + 1] @ dec_w.T + dec_b
    return logits, {"hs": hs, "cs": cs, "i": i, "f": f, "o": o, "g": gg, "tc": tc}


def lstm_backward(arrays, x, cache, dlogits):
    T, B, n = x.shape
    ui, uf, uo, ug = arrays["ui"], arrays["uf"], arrays["uo"], arrays["ug"]
    dec_w = arrays["dec_w"]
    hs, cs = cache["hs"], cache["cs"]
    i, f, o, gg, tc = cache["i"], cache["f"], cache["o"], cache["g"], cache["tc"]

    g = {k: np.zeros_like(v) for k, v in arrays.items()}
    dh = np.zeros((B, n))
    dc = np.zeros((B, n))
    for t in range(T - 1, -1, -1):
        g["dec_w"] += dlogits[t].T @ hs[t + 1]
        g["dec_b"] += dlogits[t].sum(axis=0)
        dh = dh + dlogits[t] @ dec_w

        do = dh * tc[t]
        dc = dc + dh * o[t] * (1.0 - tc[t] * tc[t])
        di = dc * gg[t]
        df = dc * cs[t]
        dg = dc * i[t]

        dai = di * i[t] * (1.0 - i[t])
        daf = df * f[t] * (1.0 - f[t])
        dao = do * o[t] * (1.0 - o[t])
        dag = dg * (1.0 - gg[t] * gg[t])

        hp = hs[t]
        for da, w, u, b in ((dai, "wi", "ui", "bi"), (daf, "wf", "uf", "bf"),
                            (dao, "wo", "uo", "bo"), (dag, "wg", "ug", "bg")):
            g[w] += da.T @ x[t]
            g[u] += da.T @ hp
            g[b] += da.sum(axis=0)
        dh = dai @ ui + daf @ uf + dao @ uo + dag @ ug
        dc = dc * f[t]
    return g
