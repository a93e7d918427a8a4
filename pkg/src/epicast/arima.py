"""Seasonal/non-seasonal ARIMA by conditional-sum-of-squares estimation.

The model on the differenced series w is additive in seasonal terms:

    w_t = c + sum phi_i w_{t-i} + sum Phi_j w_{t-j*s}
            + sum theta_k e_{t-k} + sum Theta_m e_{t-m*s} + e_t

with pre-sample w and e treated as zero.  Coefficients are found by a
Nelder-Mead search on the summed squared innovations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from ._kernels import arima_css_innovations
from .errors import ContractError, NumericalError
from .optimize import minimize_simplex
from .series_core import ForecastResult, difference, integrate

Z80 = 1.2816
Z95 = 1.9600

_SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class ArimaOrder:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 1

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q"):
            if getattr(self, name) < 0:
                raise ContractError(f"order component {name} must be >= 0")
        if self.s < 1:
            raise ContractError("season length s must be >= 1")
        if self.p + self.q + self.P + self.Q > 10:
            raise ContractError("p+q+P+Q must be <= 10")
        if (self.P or self.D or self.Q) and self.s < 2:
            raise ContractError("seasonal terms require s >= 2")

    @property
    def n_coeffs(self) -> int:
        return self.p + self.q + self.P + self.Q

    def __str__(self):
        base = f"({self.p},{self.d},{self.q})"
        if self.s > 1:
            base += f"({self.P},{self.D},{self.Q})[{self.s}]"
        return base


@dataclass(frozen=True)
class ArimaFit:
    order: ArimaOrder
    phi: tuple
    theta: tuple
    seasonal_phi: tuple
    seasonal_theta: tuple
    intercept: float
    sigma2: float
    aic: float
    residuals: tuple = field(repr=False)
    converged: bool
    n_obs: int

    def to_json(self) -> str:
        o = self.order
        return json.dumps({
            "order": {"p": o.p, "d": o.d, "q": o.q,
                      "P": o.P, "D": o.D, "Q": o.Q, "s": o.s},
            "phi": list(self.phi),
            "theta": list(self.theta),
            "seasonal_phi": list(self.seasonal_phi),
            "seasonal_theta": list(self.seasonal_theta),
            "intercept": self.intercept,
            "sigma2": self.sigma2,
            "aic": self.aic,
            "converged": self.converged,
        })


def _split_params(params, order: ArimaOrder, include_intercept: bool):
    p, q, P, Q = order.p, order.q, order.P, order.Q
    expected = p + q + P + Q + (1 if include_intercept else 0)
    params = np.asarray(params, dtype=float)
    if params.size != expected:
        raise ContractError(f"expected {expected} parameters, got {params.size}")
    phi = params[:p]
    theta = params[p:p + q]
    sphi = params[p + q:p + q + P]
    stheta = params[p + q + P:p + q + P + Q]
    intercept = float(params[-1]) if include_intercept else 0.0
    return phi, theta, sphi, stheta, intercept


def css_objective(params, y, order: ArimaOrder, include_intercept: bool = True) -> float:
    """Conditional sum of squared one-step innovations on the already
    differenced series `y`, pre-sample y and e terms zeroed.

    The zero pre-sample is load-bearing: it mildly shrinks spurious AR
    coefficients, which keeps AIC selection honest on noise.  It assumes
    `y` is roughly centered; `fit` centers before calling."""
    params = np.asarray(params, dtype=float)
    if not np.all(np.isfinite(params)):
        raise ContractError("non-finite parameters")
    phi, theta, sphi, stheta, c = _split_params(params, order, include_intercept)
    e = arima_css_innovations(np.asarray(y, dtype=float), phi, theta,
                              sphi, stheta, order.s, c)
    sse = float(np.dot(e, e))
    return sse if np.isfinite(sse) else 1e300


def _ar_poly(fit_or_parts, order: ArimaOrder, include_differencing: bool):
    """Coefficients (ascending in the lag operator) of the AR side,
    optionally multiplied by the differencing operators."""
    phi, sphi = fit_or_parts
    poly = np.zeros(max(order.p, order.P * order.s) + 1)
    poly[0] = 1.0
    for i, v in enumerate(phi, start=1):
        poly[i] -= v
    for j, v in enumerate(sphi, start=1):
        poly[j * order.s] -= v
    if include_differencing:
        for _ in range(order.d):
            poly = np.convolve(poly, [1.0, -1.0])
        seasonal_diff = np.zeros(order.s + 1)
        seasonal_diff[0], seasonal_diff[-1] = 1.0, -1.0
        for _ in range(order.D):
            poly = np.convolve(poly, seasonal_diff)
    return poly


def _ma_poly(theta, stheta, order: ArimaOrder):
    poly = np.zeros(max(order.q, order.Q * order.s) + 1)
    poly[0] = 1.0
    for k, v in enumerate(theta, start=1):
        poly[k] += v
    for m, v in enumerate(stheta, start=1):
        poly[m * order.s] += v
    return poly


def _roots(poly):
    if poly.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.polynomial.polynomial.polyroots(poly)


def _valid_fit(phi, theta, sphi, stheta, order: ArimaOrder) -> bool:
    """Stationarity, invertibility, and no near-canceling AR/MA factors.

    CSS happily rewards redundant near-unit-root ARMA pairs on noise;
    rejecting them keeps AIC selection honest."""
    ar_roots = _roots(_ar_poly((phi, sphi), order, include_differencing=False))
    ma_roots = _roots(_ma_poly(theta, stheta, order))
    if ar_roots.size and float(np.min(np.abs(ar_roots))) <= 1.001:
        return False
    if ma_roots.size and float(np.min(np.abs(ma_roots))) <= 1.001:
        return False
    for ra in ar_roots:
        if ma_roots.size and float(np.min(np.abs(ma_roots - ra))) < 0.15:
            return False
    return True


def _ar_mean_factor(phi, sphi) -> float:
    """1 - sum(phi) - sum(Phi): converts process mean to intercept."""
    return float(1.0 - np.sum(phi) - np.sum(sphi))


def fit(y, order: ArimaOrder, include_intercept: bool = True) -> ArimaFit:
    """Difference per the order and minimize the CSS objective.

    Estimation runs on the mean-centered differenced series so the zero
    pre-sample convention stays sensible far from the origin, then the
    intercept is mapped back to the raw scale."""
    y = np.asarray(y, dtype=float)
    min_len = 3 * order.n_coeffs + order.d + order.D * order.s + 10
    if y.size < min_len:
        raise ContractError(f"series length {y.size} < required {min_len} for order {order}")
    w = difference(y, order.d, order.D, order.s)
    w_mean = float(np.mean(w)) if include_intercept else 0.0
    wc = w - w_mean

    k = order.n_coeffs + (1 if include_intercept else 0)
    x0 = np.zeros(k)
    steps = np.full(k, 0.1)
    if include_intercept:
        steps[-1] = max(0.1, 0.1 * float(np.std(wc)))

    def objective(params):
        return css_objective(params, wc, order, include_intercept)

    if k > 0:
        with np.errstate(over="ignore", invalid="ignore"):
            best, sse, ok = minimize_simplex(objective, x0, steps=steps)
    else:
        best, sse, ok = x0, objective(x0), True

    phi, theta, sphi, stheta, c_centered = _split_params(best, order,
                                                         include_intercept)
    c = c_centered + w_mean * _ar_mean_factor(phi, sphi)
    e = arima_css_innovations(wc, phi, theta, sphi, stheta, order.s, c_centered)
    n_eff = w.size
    sigma2 = float(np.dot(e, e)) / n_eff
    aic = n_eff * np.log(max(sigma2, _SIGMA2_FLOOR)) + 2.0 * (k + 1)
    converged = ok and _valid_fit(phi, theta, sphi, stheta, order)
    return ArimaFit(
        order=order,
        phi=tuple(phi), theta=tuple(theta),
        seasonal_phi=tuple(sphi), seasonal_theta=tuple(stheta),
        intercept=c, sigma2=sigma2, aic=float(aic),
        residuals=tuple(e), converged=converged, n_obs=int(y.size),
    )


def _select_d(y, max_d: int = 2) -> int:
    """Successive-differencing variance reduction with a margin: take
    another difference only while it cuts the variance below a quarter
    of the current level.  The margin stops borderline-stationary AR
    series from being overdifferenced into a unit MA root."""
    d = 0
    v = float(np.var(y))
    while d < max_d and y.size > d + 2:
        if v <= 1e-12:
            break
        v_next = float(np.var(difference(y, d=d + 1)))
        if v_next >= 0.25 * v:
            break
        d += 1
        v = v_next
    return d


def auto_fit(y, seasonal: bool = False, s: int = 7,
             max_p: int = 3, max_q: int = 3) -> ArimaFit:
    """AIC grid search over p,q in {0..max}, seasonal P,Q in {0,1},
    D in {0,1}; d picked first by differencing-variance minimization."""
    y = np.asarray(y, dtype=float)
    d = _select_d(y)
    candidates = []
    seasonal_grid = [(0, 0, 0)]
    if seasonal and s >= 2:
        seasonal_grid = [(P, D, Q) for D in (0, 1) for P in (0, 1) for Q in (0, 1)]
    for P, D, Q in seasonal_grid:
        for p in range(max_p + 1):
            for q in range(max_q + 1):
                try:
                    candidates.append(ArimaOrder(p, d, q, P, D, Q, s if (P or D or Q) else 1))
                except ContractError:
                    continue

    fits = []
    attempted = []
    for order in candidates:
        attempted.append(str(order))
        try:
            f = fit(y, order)
        except ContractError:
            continue
        if f.converged:
            fits.append(f)
    if not fits:
        raise NumericalError("no ARIMA candidate converged; attempted orders: "
                             + ", ".join(attempted))
    fits.sort(key=lambda f: (f.aic, f.order.n_coeffs,
                             (f.order.p, f.order.q, f.order.P, f.order.Q)))
    return fits[0]


def psi_weights(fit: ArimaFit, h: int):
    """First h weights (psi_1..psi_h) of the MA(inf) expansion, with the
    differencing operators folded into the AR side; psi_0 = 1 implicit."""
    if h < 0:
        raise ContractError("h must be >= 0")
    order = fit.order
    ar = _ar_poly((fit.phi, fit.seasonal_phi), order, include_differencing=True)
    ma = np.zeros(max(order.q, order.Q * order.s) + 1)
    ma[0] = 1.0
    for k, v in enumerate(fit.theta, start=1):
        ma[k] += v
    for m, v in enumerate(fit.seasonal_theta, start=1):
        ma[m * order.s] += v

    psi = np.zeros(h + 1)
    psi[0] = 1.0
    for j in range(1, h + 1):
        acc = ma[j] if j < ma.size else 0.0
        for i in range(1, min(j, ar.size - 1) + 1):
            acc -= ar[i] * psi[j - i]
        psi[j] = acc
    return psi[1:]


def forecast(fit: ArimaFit, history, h: int,
             start_date: date | None = None,
             allow_unconverged: bool = False,
             clamp_zero: bool = True) -> ForecastResult:
    """Multi-step forecast on the original scale with Gaussian intervals
    built from the psi-weight variance accumulation."""
    if h < 1:
        raise ContractError("horizon must be >= 1")
    if not fit.converged and not allow_unconverged:
        raise ContractError("fit did not converge; pass allow_unconverged to override")
    y = np.asarray(history, dtype=float)
    order = fit.order
    w = difference(y, order.d, order.D, order.s)
    # Work on the centered scale matching the estimator's zero pre-sample
    # convention: mu is the process mean implied by the intercept.
    factor = _ar_mean_factor(fit.phi, fit.seasonal_phi)
    mu = fit.intercept / factor if abs(factor) > 1e-8 else float(np.mean(w))
    wc = w - mu
    e = arima_css_innovations(wc, np.asarray(fit.phi), np.asarray(fit.theta),
                              np.asarray(fit.seasonal_phi),
                              np.asarray(fit.seasonal_theta),
                              order.s, fit.intercept - mu * factor)
    n = w.size
    wext = np.concatenate([wc, np.zeros(h)])
    eext = np.concatenate([e, np.zeros(h)])
    for step in range(h):
        t = n + step
        acc = fit.intercept - mu * factor
        for i, v in enumerate(fit.phi, start=1):
            acc += v * wext[t - i]
        for j, v in enumerate(fit.seasonal_phi, start=1):
            acc += v * wext[t - j * order.s]
        for kk, v in enumerate(fit.theta, start=1):
            if t - kk < n:
                acc += v * eext[t - kk]
        for m, v in enumerate(fit.seasonal_theta, start=1):
            if t - m * order.s < n:
                acc += v * eext[t - m * order.s]
        wext[t] = acc
    points = integrate(wext[n:] + mu, y, order.d, order.D, order.s)

    psi = np.concatenate([[1.0], psi_weights(fit, h - 1)])
    se = np.sqrt(fit.sigma2 * np.cumsum(psi ** 2))
    lo80, hi80 = points - Z80 * se, points + Z80 * se
    lo95, hi95 = points - Z95 * se, points + Z95 * se
    if clamp_zero:
        lo80 = np.minimum(points, np.maximum(lo80, 0.0))
        lo95 = np.minimum(points, np.maximum(lo95, 0.0))
    if start_date is None:
        start_date = date(1970, 1, 1)
    dates = tuple(start_date + timedelta(days=i) for i in range(h))
    return ForecastResult(dates, tuple(points), tuple(lo80), tuple(hi80),
                          tuple(lo95), tuple(hi95), f"arima{fit.order}")
