"""Kernel backend selection.

The compiled extension is preferred; set EPICAST_PURE_PYTHON=1 (or fail
to build the extension) to get the pure-Python fallback.  Both expose
the same two functions with identical semantics.
"""

import os

if os.environ.get("EPICAST_PURE_PYTHON"):
    from ._pyloops import arima_css_innovations, ets_smooth
    BACKEND = "python"
else:
    try:
        from ._fastloops import arima_css_innovations, ets_smooth
        BACKEND = "cython"
    except ImportError:
        from ._pyloops import arima_css_innovations, ets_smooth
        BACKEND = "python"

__all__ = ["arima_css_innovations", "ets_smooth", "BACKEND"]
