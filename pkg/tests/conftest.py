"""Shared fixtures: synthetic CSSE-style datasets and small helpers."""

from __future__ import annotations

import math
import os
from datetime import date, timedelta

import numpy as np
import pytest

START = date(2020, 1, 22)

# (province, country, lat, long, K, r, t0) for synthetic logistic outbreaks
SYNTH_REGIONS = [
    ("Los Angeles", "US", 34.05, -118.24, 40000.0, 0.11, 55.0),
    ("New York", "US", 40.71, -74.01, 320000.0, 0.16, 62.0),
    ("", "Sweden", 60.13, 18.64, 21000.0, 0.09, 70.0),
]


def synth_cumulative(n_days: int, K: float, r: float, t0: float,
                     seed: int = 0) -> list:
    """Monotone cumulative counts: logistic curve + weekly ripple + noise."""
    rng = np.random.default_rng(seed)
    vals = []
    high = 0.0
    for t in range(n_days):
        level = K / (1.0 + math.exp(-r * (t - t0)))
        ripple = 1.0 + 0.05 * math.sin(2 * math.pi * t / 7.0)
        v = level * ripple + rng.normal(0.0, 0.002 * K)
        high = max(high, max(0.0, round(v)))
        vals.append(high)
    return vals


def make_wide_csv(n_days: int = 120, regions=SYNTH_REGIONS, start: date = START,
                  scale: float = 1.0, seed: int = 0) -> str:
    header = "Province/State,Country/Region,Lat,Long"
    for i in range(n_days):
        d = start + timedelta(days=i)
        header += f",{d.month}/{d.day}/{d.year % 100}"
    lines = [header]
    for i, (prov, ctry, lat, lon, K, r, t0) in enumerate(regions):
        vals = synth_cumulative(n_days, K * scale, r, t0, seed=seed + i)
        lines.append(f"{prov},{ctry},{lat},{lon}," +
                     ",".join("%d" % v for v in vals))
    return "\n".join(lines) + "\n"


def make_weather_csv(n_days: int = 120, start: date = START, seed: int = 7) -> str:
    rng = np.random.default_rng(seed)
    lines = ["region,date,temp_avg_c"]
    for name, base in (("LAX", 16.0), ("NYC", 4.0), ("Stockholm", -1.0)):
        for i in range(n_days):
            d = start + timedelta(days=i)
            t = base + 8.0 * math.sin(2 * math.pi * (i - 30) / 365.25) \
                + rng.normal(0, 1.5)
            lines.append(f"{name},{d.isoformat()},{t:.1f}")
    return "\n".join(lines) + "\n"


NAME_MAP_CSV = (
    "case_region,weather_region\n"
    "\"los angeles, us\",LAX\n"
    "\"new york, us\",NYC\n"
    "sweden,Stockholm\n"
)


@pytest.fixture()
def synth_dataset(tmp_path):
    """Write a full synthetic dataset to disk and return its paths."""
    paths = {
        "cases": tmp_path / "cases.csv",
        "deaths": tmp_path / "deaths.csv",
        "weather": tmp_path / "weather.csv",
        "name_map": tmp_path / "name_map.csv",
        "dir": tmp_path,
    }
    paths["cases"].write_text(make_wide_csv(seed=0))
    paths["deaths"].write_text(make_wide_csv(scale=0.05, seed=100))
    paths["weather"].write_text(make_weather_csv())
    paths["name_map"].write_text(NAME_MAP_CSV)
    return paths


def write_config(tmp_path, paths, **run_overrides) -> str:
    run = {
        "regions": [],
        "measures": ["confirmed"],
        "models": ["arima", "ets", "average"],
        "holdout_days": 10,
        "horizon": 5,
        "seed": 0,
        "jobs": 1,
        "out_dir": str(tmp_path / "out"),
    }
    run.update(run_overrides)

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return str(v)
        if isinstance(v, str):
            return f'"{v}"'
        return "[" + ", ".join(fmt(x) for x in v) + "]"

    text = "[data]\n"
    for k in ("cases", "deaths", "weather", "name_map"):
        if k in paths:
            text += f'{k} = "{paths[k]}"\n'
    text += "\n[run]\n"
    for k, v in run.items():
        text += f"{k} = {fmt(v)}\n"
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text(text)
    return str(cfg_path)


def archive_present() -> bool:
    from epicast.runner import _archive_dir
    return os.path.exists(os.path.join(_archive_dir(), "confirmed.csv"))
