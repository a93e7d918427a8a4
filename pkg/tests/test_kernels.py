"""Backend parity: the compiled kernels must match the pure-Python
reference bit for bit on randomized inputs."""

import numpy as np
import pytest

from epicast import _kernels
from epicast._kernels import _pyloops

try:
    from epicast._kernels import _fastloops
    HAVE_FAST = True
except ImportError:
    HAVE_FAST = False

needs_fast = pytest.mark.skipif(not HAVE_FAST,
                                reason="compiled kernel not built")


def test_backend_reports_something_sensible():
    assert _kernels.BACKEND in ("cython", "python")
    if HAVE_FAST:
        assert _kernels.BACKEND == "cython"


@needs_fast
def test_arima_innovations_parity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(5, 120))
        w = rng.normal(scale=rng.uniform(0.1, 100.0), size=n)
        p, q, P, Q = (int(rng.integers(0, 4)), int(rng.integers(0, 4)),
                      int(rng.integers(0, 2)), int(rng.integers(0, 2)))
        s = int(rng.integers(2, 13))
        phi = rng.uniform(-0.9, 0.9, p)
        theta = rng.uniform(-0.9, 0.9, q)
        sphi = rng.uniform(-0.9, 0.9, P)
        stheta = rng.uniform(-0.9, 0.9, Q)
        c = float(rng.normal())
        offset = int(rng.integers(0, 4))
        a = _pyloops.arima_css_innovations(w, phi, theta, sphi, stheta, s, c,
                                           offset)
        b = _fastloops.arima_css_innovations(w, phi, theta, sphi, stheta, s, c,
                                             offset)
        assert np.array_equal(a, np.asarray(b)), "bitwise mismatch"


@needs_fast
def test_ets_smooth_parity():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(5, 120))
        y = rng.normal(scale=rng.uniform(0.1, 100.0), size=n)
        period = int(rng.integers(2, 13))
        has_trend = bool(rng.integers(0, 2))
        has_seasonal = bool(rng.integers(0, 2))
        alpha = float(rng.uniform(0.01, 0.99))
        beta = float(rng.uniform(0.0, alpha)) if has_trend else 0.0
        gamma = float(rng.uniform(0.0, 1 - alpha)) if has_seasonal else 0.0
        phi = float(rng.uniform(0.8, 1.0))
        seas = rng.normal(size=period) if has_seasonal else np.zeros(0)
        a = _pyloops.ets_smooth(y, alpha, beta, gamma, phi, period,
                                1.0, 0.5, seas, has_trend, has_seasonal)
        b = _fastloops.ets_smooth(y, alpha, beta, gamma, phi, period,
                                  1.0, 0.5, seas, has_trend, has_seasonal)
        for x, z in zip(a, b):
            assert np.array_equal(np.asarray(x), np.asarray(z)), "bitwise mismatch"


def test_pure_python_env_var_selects_fallback(tmp_path):
    import subprocess
    import sys
    code = ("import epicast._kernels as k; print(k.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"PATH": "/usr/bin:/bin",
                              "EPICAST_PURE_PYTHON": "1"},
                         capture_output=True, text=True, cwd=str(tmp_path))
    assert out.stdout.strip() == "python"
