"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Two points (or a point and a measure) disagree on the ambient index n."""


class SingularityError(ValueError):
    """Kernel or fundamental solution evaluated at the group identity."""


class DensityBelowThreshold(ValueError):
    """A cube handed to the high-density selection has density below M."""

    def __init__(self, theta, m):
        super().__init__(f"cube density {theta!r} is below the threshold M={m!r}")
        self.theta = theta
        self.m = m


class ConfigError(ValueError):
    """Experiment configuration failed validation; `field` names the offender."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
