class ConvergenceError(ArithmeticError):
    """An iterative numerical routine hit its iteration cap."""


class TrainingDivergedError(ArithmeticError):
    """Training produced a non-finite loss."""


class ConfigError(ValueError):
    """Invalid or unresolvable run configuration."""
