"""Exception hierarchy shared across the package."""


class AdaptiveIdsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AdaptiveIdsError):
    """A KDD-format line could not be turned into a record."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MalformedRecord(ParseError):
    """Wrong field count or otherwise unusable line."""


class MalformedField(ParseError):
    """A field failed numeric conversion or domain validation."""


class EmptyDataset(AdaptiveIdsError):
    """An operation that needs at least one record got none."""


class InvalidArchitecture(AdaptiveIdsError):
    """Network layer sizes are unusable (a layer smaller than one neuron)."""


class DimensionError(AdaptiveIdsError):
    """Input width does not match what the model expects."""


class EmptyBatch(AdaptiveIdsError):
    """Gradient or training was asked to run on an empty batch."""


class ModelTooLarge(AdaptiveIdsError):
    """Parameter count exceeds the configured cap for the trainer."""


class NumericalFailure(AdaptiveIdsError):
    """A linear system stayed unsolvable even after damping escalation."""


class DegenerateLabels(AdaptiveIdsError):
    """Training data contains only one class."""


class NoNewEvidence(AdaptiveIdsError):
    """Retraining was requested without any confirmed records."""


class CorruptArtifact(AdaptiveIdsError):
    """Serialized model bytes failed magic, version, or length checks."""


class ProtocolError(AdaptiveIdsError):
    """A wire message violated the message schema."""


class UnknownMessage(ProtocolError):
    """A wire message carried an unrecognized message type."""


class IntegrityError(AdaptiveIdsError):
    """A model update's digest does not match its payload."""


class AlarmNotFound(AdaptiveIdsError):
    """A verdict referenced an alarm id that is not stored."""


class AlarmAlreadyDecided(AdaptiveIdsError):
    """A verdict arrived for an alarm that is no longer pending."""


class RetrainInProgress(AdaptiveIdsError):
    """A retrain was requested while another one is still running."""


class ScenarioConfigError(AdaptiveIdsError):
    """A scenario configuration value is missing or out of range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
