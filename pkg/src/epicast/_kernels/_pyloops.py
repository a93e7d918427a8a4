"""Pure-Python reference kernels.

These sequential recursions sit inside the simplex optimizer's objective,
so the compiled twin in _fastloops.pyx carries the production load; this
module is the always-available fallback and the parity oracle.
"""

import numpy as np


def arima_css_innovations(w, phi, theta, sphi, stheta, s, intercept, offset=0):
    """One-step innovations e_t with pre-sample e terms zeroed.

    e_t = w_t - c - sum phi_i w_{t-i} - sum Phi_j w_{t-j*s}
              - sum theta_k e_{t-k} - sum Theta_m e_{t-m*s}

    Innovations before `offset` (the observations the AR side conditions
    on) are pinned to zero rather than computed against invented zero
    pre-sample observations.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    e = np.zeros(n)
    for t in range(offset, n):
        acc = intercept
        for i in range(len(phi)):
            lag = t - (i + 1)
            if lag >= 0:
                acc += phi[i] * w[lag]
        for j in range(len(sphi)):
            lag = t - (j + 1) * s
            if lag >= 0:
                acc += sphi[j] * w[lag]
        for k in range(len(theta)):
            lag = t - (k + 1)
            if lag >= 0:
                acc += theta[k] * e[lag]
        for m in range(len(stheta)):
            lag = t - (m + 1) * s
            if lag >= 0:
                acc += stheta[m] * e[lag]
        e[t] = w[t] - acc
    return e


def ets_smooth(y, alpha, beta, gamma, phi, period, init_level, init_trend,
               init_seasonals, has_trend, has_seasonal):
    """Additive-error exponential smoothing pass.

    Returns (one-step predictions, residuals, final level, final trend,
    final seasonal states ordered so index 0 applies to the next step).
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    pred = np.empty(n)
    resid = np.empty(n)
    level = float(init_level)
    trend = float(init_trend) if has_trend else 0.0
    if has_seasonal:
        seas = np.asarray(init_seasonals, dtype=float).copy()
    else:
        seas = np.zeros(1)
        period = 1
    for t in range(n):
        damped_trend = phi * trend if has_trend else 0.0
        p = level + damped_trend
        if has_seasonal:
            p += seas[t % period]
        e = y[t] - p
        pred[t] = p
        resid[t] = e
        level = level + damped_trend + alpha * e
        if has_trend:
            trend = damped_trend + beta * e
        if has_seasonal:
            seas[t % period] += gamma * e
    if has_seasonal:
        # rotate so entry 0 is the state used at step n + 1
        final_seas = np.roll(seas, -(n % period))
    else:
        final_seas = np.zeros(0)
    return pred, resid, level, trend, final_seas
