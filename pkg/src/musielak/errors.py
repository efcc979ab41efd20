"""Exception types shared across the package."""


class MusielakError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MusielakError):
    """Config file unreadable, missing keys or structurally wrong."""


class MalformedFieldError(ConfigError):
    """A scalar-field expression failed to parse or evaluate."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"field {field!r}: {message}")


class DomainError(MusielakError, ValueError):
    """Argument outside the domain of a pointwise function."""


class SingularPointError(MusielakError, ValueError):
    """Derivative requested at t = 0 where it blows up."""


class CriticalExponentError(MusielakError):
    """p(x) >= N somewhere, so the Sobolev exponent is undefined."""


class HypothesisInconsistencyError(MusielakError):
    """No admissible perturbation parameter could be found."""


class BracketOverflowError(MusielakError, OverflowError):
    """Bracket growth for a root or supremum exceeded the cap."""


class AccuracyError(MusielakError):
    """An iterative method failed to reach its tolerance."""


class PreconditionError(MusielakError):
    """Operation called outside its admissible parameter range."""
