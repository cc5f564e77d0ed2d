"""Exception types shared across the package."""


class InfeasibleError(ValueError):
    """The requested meter jump exceeds the total power of the fleet."""


class EstimationError(ValueError):
    """A per-appliance statistic cannot be estimated from the given data."""


class DataError(ValueError):
    """Malformed or inconsistent input data (CSV files, config files)."""
