class TaylorLPError(Exception):
    """Base class; ``kind`` is the machine-readable error class used by the CLI."""

    kind = "error"


class ConfigError(TaylorLPError):
    kind = "config_error"


class DataError(TaylorLPError, ValueError):
    kind = "data_error"


class EstimationError(TaylorLPError, ValueError):
    kind = "estimation_error"


class RankDeficientError(EstimationError):
    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)
