"""Exception types raised across the package."""


class ContractError(ValueError):
    """An input violates a documented precondition (wrong basis, bad shape...)."""


class EigenSolverError(RuntimeError):
    pass


class SingularGeometryError(ValueError):
    """Capacitance network with C_sigma1 * C_sigma2 - C_m**2 <= 0."""


class GridSizeError(ValueError):
    """A requested grid, basis or step count exceeds its size guard."""


class ConfigError(ContractError):
    """Malformed or inconsistent sweep configuration."""


class SweepPointError(RuntimeError):
    """A model error raised while evaluating one sweep grid point."""

    def __init__(self, coords: dict, cause: Exception):
        self.coords = coords
        where = ", ".join(f"{k}={v!r}" for k, v in coords.items())
        super().__init__(f"at grid point ({where}): {type(cause).__name__}: {cause}")
