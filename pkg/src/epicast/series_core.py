"""Shared series transforms (differencing / integration), accuracy
metrics, and forecast averaging."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class ForecastResult:
    """Per-horizon point forecasts with 80% and 95% interval bounds."""

    horizon_dates: tuple
    point: tuple
    lower80: tuple
    upper80: tuple
    lower95: tuple
    upper95: tuple
    model_name: str

    def __post_init__(self):
        fields = ("point", "lower80", "upper80", "lower95", "upper95")
        arrays = {f: tuple(float(v) for v in getattr(self, f)) for f in fields}
        for f, arr in arrays.items():
            object.__setattr__(self, f, arr)
        object.__setattr__(self, "horizon_dates", tuple(self.horizon_dates))
        n = len(self.horizon_dates)
        if any(len(arr) != n for arr in arrays.values()):
            raise ContractError("forecast arrays must all match horizon length")
        for lo, pt, hi in zip(self.lower80, self.point, self.upper80):
            if not lo <= pt + 1e-9 or not pt <= hi + 1e-9:
                raise ContractError("80% band must bracket the point forecast")
        for lo80, hi80, lo95, hi95 in zip(self.lower80, self.upper80,
                                          self.lower95, self.upper95):
            if lo95 > lo80 + 1e-9 or hi95 < hi80 - 1e-9:
                raise ContractError("95% band must contain the 80% band")

    def __len__(self):
        return len(self.horizon_dates)

    def to_csv_rows(self):
        yield "date,point,lo80,hi80,lo95,hi95"
        for d, p, l8, u8, l9, u9 in zip(self.horizon_dates, self.point,
                                        self.lower80, self.upper80,
                                        self.lower95, self.upper95):
            yield f"{d.isoformat()},{p:.6f},{l8:.6f},{u8:.6f},{l9:.6f},{u9:.6f}"


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    me: float
    mae: float
    n: int

    def __post_init__(self):
        if self.rmse < 0 or self.mae < 0:
            raise ContractError("rmse and mae must be non-negative")
        tol = 1e-9 * max(1.0, self.rmse)
        if abs(self.me) > self.mae + tol or self.mae > self.rmse + tol:
            raise ContractError("metric ordering violated: |me| <= mae <= rmse")

    def to_csv_row(self, model: str, region: str, measure: str) -> str:
        return (f"{model},{region},{measure},"
                f"{self.rmse:.6f},{self.me:.6f},{self.mae:.6f},{self.n}")

    def to_json(self) -> str:
        return json.dumps({"rmse": self.rmse, "me": self.me,
                           "mae": self.mae, "n": self.n})


def _check_pair(actual, predicted):
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise ContractError("actual and predicted must be 1-D and equal length")
    if a.size == 0:
        raise ContractError("metrics need at least one point")
    return a, p


def rmse(actual, predicted) -> float:
    a, p = _check_pair(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def me(actual, predicted) -> float:
    a, p = _check_pair(actual, predicted)
    return float(np.mean(a - p))


def mae(actual, predicted) -> float:
    a, p = _check_pair(actual, predicted)
    return float(np.mean(np.abs(a - p)))


def evaluate(actual, predicted) -> EvalReport:
    a, p = _check_pair(actual, predicted)
    return EvalReport(rmse(a, p), me(a, p), mae(a, p), int(a.size))


def difference(values, d: int = 0, D: int = 0, s: int = 1):
    """Seasonal differencing (lag s) D times, then ordinary differencing
    d times.  Output length is n - d - D*s."""
    if d < 0 or D < 0 or s < 1:
        raise ContractError("need d >= 0, D >= 0, s >= 1")
    x = np.asarray(values, dtype=float)
    if x.size <= d + D * s:
        raise ContractError(f"series length {x.size} too short for d={d}, D={D}, s={s}")
    for _ in range(D):
        x = x[s:] - x[:-s]
    for _ in range(d):
        x = x[1:] - x[:-1]
    return x


def integrate(forecast_diffs, history, d: int = 0, D: int = 0, s: int = 1):
    """Undo `difference`: given the last d + D*s original observations,
    map differenced forecasts back to the original scale."""
    if d < 0 or D < 0 or s < 1:
        raise ContractError("need d >= 0, D >= 0, s >= 1")
    need = d + D * s
    hist = np.asarray(history, dtype=float)
    if hist.size < need:
        raise ContractError(f"history must supply the last {need} observations")
    x = np.asarray(forecast_diffs, dtype=float)
    if x.size == 0:
        return x.copy()

    # Record each differencing stage's tail so it can be unwound in reverse.
    stages = []
    cur = hist[hist.size - need:] if need else hist[:0]
    for _ in range(D):
        stages.append(("seasonal", cur))
        cur = cur[s:] - cur[:-s]
    for _ in range(d):
        stages.append(("ordinary", cur))
        cur = cur[1:] - cur[:-1]

    for kind, prev_tail in reversed(stages):
        if kind == "ordinary":
            x = prev_tail[-1] + np.cumsum(x)
        else:
            out = np.empty_like(x)
            seed = prev_tail[prev_tail.size - s:]
            for i in range(x.size):
                prev = seed[i] if i < s else out[i - s]
                out[i] = x[i] + prev
            x = out
    return x


def average_forecasts(a: ForecastResult, b: ForecastResult) -> ForecastResult:
    """Pointwise mean of two forecasts sharing the same horizon."""
    if a.horizon_dates != b.horizon_dates:
        raise ContractError("forecast horizons do not match")

    def mean(xs, ys):
        return tuple((x + y) / 2.0 for x, y in zip(xs, ys))

    return ForecastResult(
        horizon_dates=a.horizon_dates,
        point=mean(a.point, b.point),
        lower80=mean(a.lower80, b.lower80),
        upper80=mean(a.upper80, b.upper80),
        lower95=mean(a.lower95, b.lower95),
        upper95=mean(a.upper95, b.upper95),
        model_name="average",
    )
