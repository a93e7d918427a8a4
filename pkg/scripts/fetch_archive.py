#!/usr/bin/env python3
"""Download the public JHU CSSE COVID-19 US time series and extract the
two regions the reproduction recipes need (Los Angeles county and New
York state, the latter aggregated across counties).

Writes `confirmed.csv` and `deaths.csv` in the four-column wide layout
(`Province/State,Country/Region,Lat,Long,<dates...>`) that `epicast
ingest` and `epicast reproduce` consume.

Weather data is not fetched: the temperature source is not freely
redistributable.  To enable the AUC recipe, place your own
`weather.csv` (columns `region,date,temp_avg_c`) and `name_map.csv`
(columns `case_region,weather_region`) in the same output directory.

Usage: python scripts/fetch_archive.py [--out data/archive]
"""

import argparse
import csv
import io
import os
import re
import urllib.request

BASE = ("https://raw.githubusercontent.com/CSSEGISandData/COVID-19/master/"
        "csse_covid_19_data/csse_covid_19_time_series/")
FILES = {"confirmed": "time_series_covid19_confirmed_US.csv",
         "deaths": "time_series_covid19_deaths_US.csv"}
DATE_RE = re.compile(r"^\d{1,2}/\d{1,2}/\d{2,4}$")


def fetch(url: str) -> str:
    print(f"downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read().decode("utf-8")


def extract(text: str):
    """Returns (date_headers, rows) where each row is
    (province, country, lat, long, values)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    col = {name: i for i, name in enumerate(header)}
    date_idx = [i for i, name in enumerate(header) if DATE_RE.match(name)]
    dates = [header[i] for i in date_idx]

    la = None
    ny_lat = ny_lon = None
    ny_total = [0.0] * len(date_idx)
    for row in reader:
        if not row:
            continue
        state = row[col["Province_State"]]
        values = [float(row[i] or 0) for i in date_idx]
        if state == "California" and row[col["Admin2"]] == "Los Angeles":
            la = ("Los Angeles", "US", row[col["Lat"]], row[col["Long_"]],
                  values)
        elif state == "New York":
            ny_total = [a + b for a, b in zip(ny_total, values)]
            if row[col["Admin2"]] == "New York":  # NYC county, for coords
                ny_lat, ny_lon = row[col["Lat"]], row[col["Long_"]]
    if la is None:
        raise SystemExit("Los Angeles county row not found in the download")
    ny = ("New York", "US", ny_lat or "40.71", ny_lon or "-74.01", ny_total)
    return dates, [la, ny]


def write_wide(path: str, dates, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["Province/State", "Country/Region", "Lat", "Long"]
                     + dates)
        for prov, ctry, lat, lon, values in rows:
            out.writerow([prov, ctry, lat, lon]
                         + [f"{v:.0f}" for v in values])
    print(f"wrote {path} ({len(rows)} regions, {len(dates)} days)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join("data", "archive"),
                    help="output directory (default: data/archive)")
    opts = ap.parse_args()
    os.makedirs(opts.out, exist_ok=True)
    for measure, filename in FILES.items():
        dates, rows = extract(fetch(BASE + filename))
        write_wide(os.path.join(opts.out, f"{measure}.csv"), dates, rows)
    print("done; point EPICAST_ARCHIVE at this directory (or keep the "
          "default data/archive)")


if __name__ == "__main__":
    main()
