"""Decomposable forecaster: piecewise-linear trend with changepoints plus
Fourier weekly/yearly seasonality, fit by ridge-regularized least squares
on a normalized scale."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np
import scipy.linalg

from .errors import ContractError, NumericalError
from .series_core import EvalReport, ForecastResult, evaluate

Z80 = 1.2816
Z95 = 1.9600

_EPOCH = date(1970, 1, 1)


@dataclass(frozen=True)
class AdditiveConfig:
    n_changepoints: int = 25
    changepoint_range: float = 0.8
    weekly_order: int = 3
    yearly_order: int = 10
    trend_ridge: float = 20.0
    season_ridge: float = 0.1

    def __post_init__(self):
        if self.n_changepoints < 0:
            raise ContractError("n_changepoints must be >= 0")
        if not 0.0 < self.changepoint_range <= 1.0:
            raise ContractError("changepoint_range must be in (0, 1]")
        if self.weekly_order < 0 or self.yearly_order < 0:
            raise ContractError("Fourier orders must be >= 0")
        if self.trend_ridge < 0 or self.season_ridge < 0:
            raise ContractError("ridge penalties must be >= 0")


@dataclass(frozen=True)
class AdditiveFit:
    base_slope: float
    base_offset: float
    delta: tuple
    beta: tuple
    changepoint_times: tuple
    weekly_order: int
    yearly_order: int
    start: date
    t_scale: float
    y_scale: float
    sigma2: float          # residual variance on the normalized scale
    residuals: tuple = field(repr=False)

    def to_json(self) -> str:
        return json.dumps({
            "base_slope": self.base_slope,
            "base_offset": self.base_offset,
            "delta": list(self.delta),
            "beta": list(self.beta),
            "changepoint_times": list(self.changepoint_times),
            "weekly_order": self.weekly_order,
            "yearly_order": self.yearly_order,
            "start": self.start.isoformat(),
            "t_scale": self.t_scale,
            "y_scale": self.y_scale,
            "sigma2": self.sigma2,
        })


def _scaled_time(dates, start: date, t_scale: float):
    return np.array([(d - start).days for d in dates], dtype=float) / t_scale


def _epoch_days(dates):
    return np.array([(d - _EPOCH).days for d in dates], dtype=float)


def design_matrix(dates, start: date, t_scale: float, changepoint_times,
                  weekly_order: int, yearly_order: int):
    """Columns: [1, t, relu(t - cp_j)..., weekly sin/cos pairs,
    yearly sin/cos pairs]."""
    if not len(dates):
        raise ContractError("need at least one date")
    t = _scaled_time(dates, start, t_scale)
    d = _epoch_days(dates)
    cols = [np.ones_like(t), t]
    for cp in changepoint_times:
        cols.append(np.maximum(t - cp, 0.0))
    for k in range(1, weekly_order + 1):
        arg = 2.0 * math.pi * k * d / 7.0
        cols.append(np.sin(arg))
        cols.append(np.cos(arg))
    for k in range(1, yearly_order + 1):
        arg = 2.0 * math.pi * k * d / 365.25
        cols.append(np.sin(arg))
        cols.append(np.cos(arg))
    return np.column_stack(cols)


def _design_for_fit(fit: AdditiveFit, dates):
    return design_matrix(dates, fit.start, fit.t_scale, fit.changepoint_times,
                         fit.weekly_order, fit.yearly_order)


def _weights(fit: AdditiveFit):
    return np.concatenate([[fit.base_offset, fit.base_slope],
                           fit.delta, fit.beta])


def _place_changepoints(t_sorted, n_changepoints: int, changepoint_range: float):
    n = t_sorted.size
    limit = int(math.floor(changepoint_range * (n - 1)))
    if n_changepoints == 0 or limit < 1:
        return np.zeros(0)
    idx = np.unique(np.linspace(1, limit, n_changepoints).round().astype(int))
    return t_sorted[idx]


def fit(dates, y, config: AdditiveConfig | None = None) -> AdditiveFit:
    """Solve the ridge system (X'X + L) w = X'y on the normalized scale."""
    config = config or AdditiveConfig()
    y = np.asarray(y, dtype=float)
    n = y.size
    if n != len(dates):
        raise ContractError("dates and values must align")
    if n < 2 + config.n_changepoints:
        raise ContractError(
            f"need at least {2 + config.n_changepoints} points for "
            f"{config.n_changepoints} changepoints")

    start = dates[0]
    span_days = (dates[-1] - start).days
    t_scale = float(max(span_days, 1))
    yearly_order = config.yearly_order if span_days >= 730 else 0
    y_scale = float(np.max(np.abs(y)))
    if y_scale == 0.0:
        y_scale = 1.0

    t = _scaled_time(dates, start, t_scale)
    cps = _place_changepoints(t, config.n_changepoints, config.changepoint_range)
    X = design_matrix(dates, start, t_scale, cps,
                      config.weekly_order, yearly_order)
    n_cp = cps.size
    n_beta = 2 * (config.weekly_order + yearly_order)
    lam = np.concatenate([
        np.zeros(2),
        np.full(n_cp, config.trend_ridge),
        np.full(n_beta, config.season_ridge),
    ])

    yn = y / y_scale
    gram = X.T @ X + np.diag(lam)
    rhs = X.T @ yn
    try:
        c, low = scipy.linalg.cho_factor(gram)
        w = scipy.linalg.cho_solve((c, low), rhs)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"ridge system is singular: {exc}")

    resid = yn - X @ w
    sigma2 = float(np.dot(resid, resid)) / n
    return AdditiveFit(
        base_offset=float(w[0]), base_slope=float(w[1]),
        delta=tuple(w[2:2 + n_cp]), beta=tuple(w[2 + n_cp:]),
        changepoint_times=tuple(cps),
        weekly_order=config.weekly_order, yearly_order=yearly_order,
        start=start, t_scale=t_scale, y_scale=y_scale,
        sigma2=sigma2, residuals=tuple(resid),
    )


def trend_component(fit: AdditiveFit, dates):
    """Piecewise-linear trend on the original scale."""
    t = _scaled_time(dates, fit.start, fit.t_scale)
    out = fit.base_offset + fit.base_slope * t
    for cp, dl in zip(fit.changepoint_times, fit.delta):
        out = out + dl * np.maximum(t - cp, 0.0)
    return out * fit.y_scale


def seasonal_component(fit: AdditiveFit, dates, which: str = "weekly"):
    """Weekly or yearly Fourier component on the original scale."""
    d = _epoch_days(dates)
    beta = np.asarray(fit.beta)
    out = np.zeros(d.size)
    offset = 0 if which == "weekly" else 2 * fit.weekly_order
    order = fit.weekly_order if which == "weekly" else fit.yearly_order
    period = 7.0 if which == "weekly" else 365.25
    for k in range(1, order + 1):
        arg = 2.0 * math.pi * k * d / period
        out += beta[offset + 2 * (k - 1)] * np.sin(arg)
        out += beta[offset + 2 * (k - 1) + 1] * np.cos(arg)
    return out * fit.y_scale


def predict(fit: AdditiveFit, future_dates, clamp_zero: bool = True) -> ForecastResult:
    """Point forecasts with a constant-variance Gaussian residual band."""
    if not len(future_dates):
        raise ContractError("future_dates must be non-empty")
    X = _design_for_fit(fit, future_dates)
    points = (X @ _weights(fit)) * fit.y_scale
    se = math.sqrt(max(fit.sigma2, 0.0)) * fit.y_scale
    lo80, hi80 = points - Z80 * se, points + Z80 * se
    lo95, hi95 = points - Z95 * se, points + Z95 * se
    if clamp_zero:
        lo80 = np.minimum(points, np.maximum(lo80, 0.0))
        lo95 = np.minimum(points, np.maximum(lo95, 0.0))
    return ForecastResult(tuple(future_dates), tuple(points),
                          tuple(lo80), tuple(hi80), tuple(lo95), tuple(hi95),
                          "additive")


def cross_validate(dates, y, config: AdditiveConfig, horizon: int, n_folds: int):
    """Rolling-origin evaluation.  Returns (per-fold reports, mean report)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if horizon < 1 or n_folds < 1:
        raise ContractError("horizon and n_folds must be >= 1")
    min_train = 2 + config.n_changepoints
    if n - n_folds * horizon < min_train:
        raise ContractError(
            f"series length {n} cannot support {n_folds} folds of horizon {horizon}")
    folds = []
    for i in range(1, n_folds + 1):
        cut = n - horizon * (n_folds - i + 1)
        f = fit(dates[:cut], y[:cut], config)
        fc = predict(f, dates[cut:cut + horizon])
        folds.append(evaluate(y[cut:cut + horizon], fc.point))
    mean = EvalReport(
        rmse=float(np.mean([r.rmse for r in folds])),
        me=float(np.mean([r.me for r in folds])),
        mae=float(np.mean([r.mae for r in folds])),
        n=int(sum(r.n for r in folds)),
    )
    return folds, mean
