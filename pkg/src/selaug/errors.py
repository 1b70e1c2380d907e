"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
InternalError (and anything unexpected) -> 4.
"""


class SelaugError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SelaugError):
    """Invalid configuration or parameter values (usage errors)."""


class DataError(SelaugError):
    """Malformed or inconsistent data: files, labels, probability maps."""


class TruthUnavailableError(DataError):
    """Ground-truth labels were requested but never retained."""


class InternalError(SelaugError):
    """An internal invariant was violated; indicates a bug."""
