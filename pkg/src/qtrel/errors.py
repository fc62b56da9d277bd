class ConfigError(ValueError):
    """Invalid configuration or out-of-domain physical parameter."""


class EstimationError(RuntimeError):
    """An estimator has no usable data (e.g. every run was truncated)."""


class StateSpaceTooLarge(RuntimeError):
    """Exhaustive enumeration would exceed its configured size guard."""
