"""Exception types shared across the pipeline.

The CLI maps these onto distinct exit codes: ConfigError -> 2,
DataError -> 3, ConvergenceError -> 4.
"""


class TradefitError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(TradefitError):
    """Invalid or inconsistent run configuration."""


class DataError(TradefitError):
    """Malformed, missing, or degenerate input data."""


class ConvergenceError(TradefitError):
    """An iterative solve did not reach its stopping condition."""


class ScenarioSkipped(TradefitError):
    """A counterfactual scenario cannot be formed (e.g. no products to add)."""
