"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI:
  ConfigError -> 1, DataError (and subclasses) -> 2, NumericalError -> 3.
"""


class EpicastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EpicastError):
    """Invalid run configuration (bad paths, empty model list, ...)."""


class DataError(EpicastError):
    """Malformed or insufficient input data."""


class FormatError(DataError):
    """Structurally invalid file (bad header, non-numeric cell, ...)."""


class RegionLookupError(DataError):
    """A region name could not be resolved through the name map."""

    def __init__(self, name, candidates=()):
        self.name = name
        self.candidates = list(candidates)
        hint = ""
        if self.candidates:
            hint = " (known names: %s)" % ", ".join(sorted(self.candidates))
        super().__init__(f"cannot resolve region {name!r} via name map{hint}")


class ContractError(EpicastError, ValueError):
    """A call violated an operation precondition."""


class NumericalError(EpicastError):
    """Numerical failure: no model converged, singular system, divergence."""
