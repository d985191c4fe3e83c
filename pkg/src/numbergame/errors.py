"""Exception hierarchy shared across the package."""


class NumberGameError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NumberGameError):
    """Unknown task/domain cell or invalid run configuration."""


class ConstructionError(NumberGameError):
    """Hypothesis-space construction produced an empty family."""


class InputError(NumberGameError):
    """Malformed caller input (examples outside domain, duplicates, ...)."""


class NoCompatibleHypothesisError(NumberGameError):
    """The observed examples fall outside every hypothesis in the space."""


class DegenerateInputError(NumberGameError):
    """A curve with zero total mass where positive mass is required."""


class MissingTargetError(NumberGameError):
    """A counts-based curve has targets with no valid responses."""

    def __init__(self, targets):
        self.targets = list(targets)
        super().__init__(f"no valid responses for targets: {self.targets}")


class EmptyReadoutError(NumberGameError):
    """A label readout with no positive-weight entries."""


class ProjectionUndefinedError(NumberGameError):
    """A label readout with zero matched mass cannot be projected."""
