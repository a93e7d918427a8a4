"""Additive-error exponential smoothing (level / trend / seasonal).

Smoothing parameters and initial states are estimated jointly by
minimizing the one-step squared-error sum; box constraints are enforced
through a logistic reparameterization so the simplex search stays
unconstrained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from ._kernels import ets_smooth
from .errors import ContractError, NumericalError
from .optimize import minimize_simplex
from .series_core import ForecastResult

Z80 = 1.2816
Z95 = 1.9600

_SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class EtsSpec:
    trend: str = "none"        # none | additive
    seasonal: str = "none"     # none | additive
    period: int = 0
    damped: bool = False

    def __post_init__(self):
        if self.trend not in ("none", "additive"):
            raise ContractError(f"unknown trend type {self.trend!r}")
        if self.seasonal not in ("none", "additive"):
            raise ContractError(f"unknown seasonal type {self.seasonal!r}")
        if self.seasonal == "additive" and self.period < 2:
            raise ContractError("seasonal component requires period >= 2")
        if self.damped and self.trend == "none":
            raise ContractError("damping requires a trend component")

    @property
    def has_trend(self) -> bool:
        return self.trend == "additive"

    @property
    def has_seasonal(self) -> bool:
        return self.seasonal == "additive"

    def __str__(self):
        parts = ["level"]
        if self.has_trend:
            parts.append("damped-trend" if self.damped else "trend")
        if self.has_seasonal:
            parts.append(f"seasonal[{self.period}]")
        return "+".join(parts)


@dataclass(frozen=True)
class EtsFit:
    spec: EtsSpec
    alpha: float
    beta: float
    gamma: float
    phi_damp: float
    init_level: float
    init_trend: float
    init_seasonals: tuple
    sigma2: float
    sse: float
    aic: float
    residuals: tuple = field(repr=False)
    converged: bool
    final_level: float
    final_trend: float
    final_seasonals: tuple
    n_obs: int

    def to_json(self) -> str:
        return json.dumps({
            "spec": {"trend": self.spec.trend, "seasonal": self.spec.seasonal,
                     "period": self.spec.period, "damped": self.spec.damped},
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
            "phi_damp": self.phi_damp,
            "init_level": self.init_level, "init_trend": self.init_trend,
            "init_seasonals": list(self.init_seasonals),
            "sigma2": self.sigma2, "aic": self.aic,
            "converged": self.converged,
        })


def _check_params(spec: EtsSpec, alpha, beta, gamma, phi_damp):
    if not 0.0 < alpha < 1.0:
        raise ContractError(f"alpha {alpha} outside (0, 1)")
    if spec.has_trend and not 0.0 < beta < alpha:
        raise ContractError(f"beta {beta} outside (0, alpha)")
    if spec.has_seasonal and not 0.0 < gamma < 1.0 - alpha:
        raise ContractError(f"gamma {gamma} outside (0, 1 - alpha)")
    if spec.damped and not 0.8 <= phi_damp <= 0.99:
        raise ContractError(f"damping {phi_damp} outside [0.8, 0.99]")


def smooth_pass(y, spec: EtsSpec, alpha, beta=0.0, gamma=0.0, phi_damp=1.0,
                init_level=0.0, init_trend=0.0, init_seasonals=()):
    """One full filtering pass.  Returns (one-step predictions,
    residuals, (final level, final trend, final seasonal states))."""
    _check_params(spec, alpha, beta, gamma, phi_damp)
    y = np.asarray(y, dtype=float)
    if spec.has_seasonal:
        seas = np.asarray(init_seasonals, dtype=float)
        if seas.size != spec.period:
            raise ContractError(f"need {spec.period} initial seasonal states")
    else:
        seas = np.zeros(0)
    phi = phi_damp if spec.damped else 1.0
    pred, resid, lvl, trd, final_seas = ets_smooth(
        y, alpha, beta, gamma, phi, max(spec.period, 1),
        float(init_level), float(init_trend), seas,
        spec.has_trend, spec.has_seasonal)
    return pred, resid, (lvl, trd, tuple(final_seas))


def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _logit(p):
    return math.log(p / (1.0 - p))


def _unpack(vec, spec: EtsSpec):
    """Transformed optimizer vector -> natural-scale params and states."""
    i = 0
    alpha = _sigmoid(vec[i]); i += 1
    beta = 0.0
    if spec.has_trend:
        beta = alpha * _sigmoid(vec[i]); i += 1
    gamma = 0.0
    if spec.has_seasonal:
        gamma = (1.0 - alpha) * _sigmoid(vec[i]); i += 1
    phi_damp = 1.0
    if spec.damped:
        phi_damp = 0.8 + 0.19 * _sigmoid(vec[i]); i += 1
    level = vec[i]; i += 1
    trend = 0.0
    if spec.has_trend:
        trend = vec[i]; i += 1
    seas = np.zeros(0)
    if spec.has_seasonal:
        free = np.asarray(vec[i:i + spec.period - 1], dtype=float)
        seas = np.concatenate([free, [-free.sum()]])
        i += spec.period - 1
    return alpha, beta, gamma, phi_damp, level, trend, seas


def _start_vector(y, spec: EtsSpec):
    m = spec.period if spec.has_seasonal else 0
    level0 = float(np.mean(y[:m])) if m else float(y[0])
    trend0 = float(np.mean(np.diff(y))) if y.size > 1 else 0.0
    vec = [_logit(0.3)]
    steps = [0.5]
    scale = max(1e-3, 0.1 * float(np.std(y)))
    if spec.has_trend:
        vec.append(_logit(1.0 / 3.0)); steps.append(0.5)
    if spec.has_seasonal:
        vec.append(_logit(0.15)); steps.append(0.5)
    if spec.damped:
        vec.append(_logit((0.95 - 0.8) / 0.19)); steps.append(0.5)
    vec.append(level0); steps.append(scale)
    if spec.has_trend:
        vec.append(trend0); steps.append(scale)
    if spec.has_seasonal:
        seas0 = np.asarray(y[:m], dtype=float) - np.mean(y[:m])
        vec.extend(seas0[:-1]); steps.extend([scale] * (m - 1))
    return np.asarray(vec, dtype=float), np.asarray(steps, dtype=float)


def fit(y, spec: EtsSpec) -> EtsFit:
    """Joint simplex estimation of smoothing parameters and initial states."""
    y = np.asarray(y, dtype=float)
    min_len = 10 + (2 * spec.period if spec.has_seasonal else 0)
    if y.size < min_len:
        raise ContractError(f"series length {y.size} < required {min_len} for {spec}")

    def objective(vec):
        alpha, beta, gamma, phi_damp, level, trend, seas = _unpack(vec, spec)
        phi = phi_damp if spec.damped else 1.0
        _, resid, *_ = ets_smooth(y, alpha, beta, gamma, phi,
                                  max(spec.period, 1), level, trend, seas,
                                  spec.has_trend, spec.has_seasonal)
        sse = float(np.dot(resid, resid))
        return sse if np.isfinite(sse) else 1e300

    x0, steps = _start_vector(y, spec)
    with np.errstate(over="ignore", invalid="ignore"):
        best, sse, ok = minimize_simplex(objective, x0, steps=steps)

    alpha, beta, gamma, phi_damp, level, trend, seas = _unpack(best, spec)
    phi = phi_damp if spec.damped else 1.0
    _, resid, lvl, trd, final_seas = ets_smooth(
        y, alpha, beta, gamma, phi, max(spec.period, 1),
        level, trend, seas, spec.has_trend, spec.has_seasonal)
    final_seas = np.asarray(final_seas, dtype=float)
    if spec.has_seasonal and final_seas.size:
        # renormalize: the level absorbs the seasonal mean, forecasts unchanged
        shift = float(np.mean(final_seas))
        final_seas = final_seas - shift
        lvl = lvl + shift

    n = y.size
    sse = float(np.dot(resid, resid))
    sigma2 = sse / n
    k = best.size
    aic = n * math.log(max(sigma2, _SIGMA2_FLOOR)) + 2.0 * (k + 1)
    return EtsFit(
        spec=spec, alpha=alpha, beta=beta, gamma=gamma, phi_damp=phi_damp,
        init_level=level, init_trend=trend, init_seasonals=tuple(seas),
        sigma2=sigma2, sse=sse, aic=float(aic), residuals=tuple(resid),
        converged=bool(ok), final_level=float(lvl), final_trend=float(trd),
        final_seasonals=tuple(final_seas), n_obs=int(n),
    )


def forecast(fit: EtsFit, h: int, start_date: date | None = None,
             allow_unconverged: bool = False,
             clamp_zero: bool = True) -> ForecastResult:
    """Extrapolate the final states h steps with Gaussian intervals from
    the additive-error forecast-variance recursion."""
    if h < 1:
        raise ContractError("horizon must be >= 1")
    if not fit.converged and not allow_unconverged:
        raise ContractError("fit did not converge; pass allow_unconverged to override")
    spec = fit.spec
    phi = fit.phi_damp if spec.damped else 1.0
    m = spec.period if spec.has_seasonal else 0

    points = np.empty(h)
    var = np.empty(h)
    phi_cum = 0.0          # phi + phi^2 + ... + phi^j
    cj_sq_sum = 0.0        # sum of c_j^2 for j = 1..h-1
    for j in range(1, h + 1):
        phi_cum += phi ** j
        p = fit.final_level + (phi_cum * fit.final_trend if spec.has_trend else 0.0)
        if m:
            p += fit.final_seasonals[(j - 1) % m]
        points[j - 1] = p
        var[j - 1] = fit.sigma2 * (1.0 + cj_sq_sum)
        cj = fit.alpha
        if spec.has_trend:
            cj += fit.beta * phi_cum
        if m and j % m == 0:
            cj += fit.gamma
        cj_sq_sum += cj * cj

    se = np.sqrt(np.maximum(var, 0.0))
    lo80, hi80 = points - Z80 * se, points + Z80 * se
    lo95, hi95 = points - Z95 * se, points + Z95 * se
    if clamp_zero:
        lo80 = np.minimum(points, np.maximum(lo80, 0.0))
        lo95 = np.minimum(points, np.maximum(lo95, 0.0))
    if start_date is None:
        start_date = date(1970, 1, 1)
    dates = tuple(start_date + timedelta(days=i) for i in range(h))
    return ForecastResult(dates, tuple(points), tuple(lo80), tuple(hi80),
                          tuple(lo95), tuple(hi95), f"ets({fit.spec})")


def auto_fit(y, period: int = 7) -> EtsFit:
    """Try the component ladder and keep the converged fit with lowest AIC."""
    y = np.asarray(y, dtype=float)
    specs = [
        EtsSpec(),
        EtsSpec(trend="additive"),
        EtsSpec(trend="additive", damped=True),
    ]
    if period >= 2:
        specs.append(EtsSpec(seasonal="additive", period=period))
        specs.append(EtsSpec(trend="additive", seasonal="additive", period=period))
    fits = []
    attempted = []
    for spec in specs:
        attempted.append(str(spec))
        try:
            f = fit(y, spec)
        except ContractError:
            continue
        if f.converged:
            fits.append(f)
    if not fits:
        raise NumericalError("no ETS candidate converged; attempted: "
                             + ", ".join(attempted))
    return min(fits, key=lambda f: f.aic)
