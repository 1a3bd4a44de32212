"""Exception types shared across the package."""


class StabilityError(ValueError):
    """A diagonal state-transition entry has |a| >= 1."""


class DomainError(ValueError):
    """A closed-form expression was evaluated outside its valid regime."""


class ConfigError(ValueError):
    """An experiment configuration is malformed; ``field`` names the offender."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
