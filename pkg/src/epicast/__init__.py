"""epicast: epidemic case-count forecasting and weather-effect testing.

Subpackages: ingest (CSV normalization), series_core (transforms and
metrics), arima / ets / additive (forecasters), classify (logistic and
random-forest weather classifiers), runner + cli (orchestration).
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
