"""Exception hierarchy shared by all modules."""


class TickCointError(Exception):
    """Base class for package errors."""


class ParameterError(TickCointError, ValueError):
    """A model parameter is outside its admissible range."""


class ValidationError(TickCointError, ValueError):
    """A configuration or schedule violates a structural constraint."""


class ConfigError(ValidationError):
    """Malformed or inconsistent run configuration."""


class InputError(TickCointError, ValueError):
    """Malformed input data (durations, ticks, CSV rows)."""


class DegenerateInputError(TickCointError, ValueError):
    """An estimator denominator vanished."""


class ResourceError(TickCointError, RuntimeError):
    """A computation would exceed the supported problem size."""


class ConsistencyError(TickCointError, AssertionError):
    """An exact internal identity failed."""


class ExperimentError(TickCointError, RuntimeError):
    """Too many replications failed in a Monte Carlo experiment."""
