# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot recursions in _pyloops.py.

Must stay bit-compatible with the pure-Python versions; tests enforce
parity on randomized inputs.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def arima_css_innovations(w, phi, theta, sphi, stheta, int s, double intercept,
                          Py_ssize_t offset=0):
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] ph = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[::1] sph = np.ascontiguousarray(sphi, dtype=np.float64)
    cdef double[::1] sth = np.ascontiguousarray(stheta, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    cdef Py_ssize_t np_ = ph.shape[0], nq = th.shape[0]
    cdef Py_ssize_t nsp = sph.shape[0], nsq = sth.shape[0]
    e_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] e = e_arr
    cdef Py_ssize_t t, i, lag
    cdef double acc
    for t in range(offset, n):
        acc = intercept
        for i in range(np_):
            lag = t - (i + 1)
            if lag >= 0:
                acc += ph[i] * wv[lag]
        for i in range(nsp):
            lag = t - (i + 1) * s
            if lag >= 0:
                acc += sph[i] * wv[lag]
        for i in range(nq):
            lag = t - (i + 1)
            if lag >= 0:
                acc += th[i] * e[lag]
        for i in range(nsq):
            lag = t - (i + 1) * s
            if lag >= 0:
                acc += sth[i] * e[lag]
        e[t] = wv[t] - acc
    return e_arr


def ets_smooth(y, double alpha, double beta, double gamma, double phi,
               int period, double init_level, double init_trend,
               init_seasonals, bint has_trend, bint has_seasonal):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    pred_arr = np.empty(n, dtype=np.float64)
    resid_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] pred = pred_arr
    cdef double[::1] resid = resid_arr
    cdef double level = init_level
    cdef double trend = init_trend if has_trend else 0.0
    if not has_seasonal:
        period = 1
        seas_arr = np.zeros(1, dtype=np.float64)
    else:
        seas_arr = np.array(init_seasonals, dtype=np.float64)
    cdef double[::1] seas = seas_arr
    cdef Py_ssize_t t
    cdef double damped_trend, p, e
    for t in range(n):
        damped_trend = phi * trend if has_trend else 0.0
        p = level + damped_trend
        if has_seasonal:
            p += seas[t % period]
        e = yv[t] - p
        pred[t] = p
        resid[t] = e
        level = level + damped_trend + alpha * e
        if has_trend:
            trend = damped_trend + beta * e
        if has_seasonal:
            seas[t % period] += gamma * e
    if has_seasonal:
        final_seas = np.roll(seas_arr, -(n % period))
    else:
        final_seas = np.zeros(0, dtype=np.float64)
    return pred_arr, resid_arr, level, trend, final_seas
