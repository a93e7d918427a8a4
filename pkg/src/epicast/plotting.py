"""Static SVG emission for actual-vs-forecast plots, with a sibling CSV
of the plotted points.  Hand-rolled SVG keeps the output byte-stable."""

from __future__ import annotations

import os

from .series_core import ForecastResult

_W, _H = 800, 400
_MARGIN = 50


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _polyline(xs, ys, stroke, dash=""):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{extra} points="{pts}"/>'


def _band(xs, los, his, fill, opacity):
    pts = [f"{x:.2f},{y:.2f}" for x, y in zip(xs, his)]
    pts += [f"{x:.2f},{y:.2f}" for x, y in zip(reversed(xs), reversed(los))]
    return f'<polygon fill="{fill}" fill-opacity="{opacity}" stroke="none" points="{" ".join(pts)}"/>'


def emit_plot(actual_dates, actual_values, forecast: ForecastResult | None,
              path: str) -> None:
    """Write an SVG (actual line, forecast line, shaded 80/95 bands) plus
    a sibling CSV of every plotted point."""
    actual_dates = list(actual_dates)
    actual_values = [float(v) for v in actual_values]
    fc_len = len(forecast) if forecast is not None else 0

    all_dates = actual_dates + (list(forecast.horizon_dates) if fc_len else [])
    all_values = list(actual_values)
    if fc_len:
        all_values += list(forecast.point) + list(forecast.lower95) + list(forecast.upper95)
    if not all_dates:
        raise ValueError("nothing to plot")

    d0 = min(all_dates)
    day = [(d - d0).days for d in all_dates]
    x_lo, x_hi = min(day), max(day)
    y_lo, y_hi = min(all_values), max(all_values)

    def xs(dates):
        return _scale([(d - d0).days for d in dates], x_lo, x_hi, _MARGIN, _W - _MARGIN)

    def ys(values):
        return _scale(values, y_lo, y_hi, _H - _MARGIN, _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
    ]
    if fc_len:
        fx = xs(forecast.horizon_dates)
        parts.append(_band(fx, ys(forecast.lower95), ys(forecast.upper95),
                           "#9ecae1", "0.35"))
        parts.append(_band(fx, ys(forecast.lower80), ys(forecast.upper80),
                           "#4292c6", "0.35"))
        parts.append(_polyline(fx, ys(forecast.point), "#d62728", dash="5,3"))
    if actual_dates:
        parts.append(_polyline(xs(actual_dates), ys(actual_values), "#1f77b4"))
    parts.append("</svg>")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")

    csv_path = os.path.splitext(path)[0] + ".csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("date,kind,value,lo80,hi80,lo95,hi95\n")
        for d, v in zip(actual_dates, actual_values):
            fh.write(f"{d.isoformat()},actual,{v:.6f},,,,\n")
        if fc_len:
            for d, p, l8, u8, l9, u9 in zip(forecast.horizon_dates, forecast.point,
                                            forecast.lower80, forecast.upper80,
                                            forecast.lower95, forecast.upper95):
                fh.write(f"{d.isoformat()},forecast,{p:.6f},{l8:.6f},{u8:.6f},"
                         f"{l9:.6f},{u9:.6f}\n")
