"""Shared exception types."""


class SupercriticalCouplingError(ValueError):
    """Coupling at or above the critical Hardy constant (n-2)^2/4."""

    def __init__(self, lam: float, lam_star: float, n: int):
        self.lam = lam
        self.lam_star = lam_star
        self.dimension = n
        super().__init__(
            f"coupling {lam} is not subcritical: requires lambda < "
            f"lambda_star({n}) = {lam_star}"
        )


class IllPosedTruncationError(RuntimeError):
    """Least-squares certificate refused: sigma_min below the trust floor."""
