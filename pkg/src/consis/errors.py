"""Exception hierarchy shared across the package."""


class ConsisError(Exception):
    """Base class for all errors raised by this package."""


class DatasetError(ConsisError):
    """A dataset file or pair collection is structurally unusable."""


class SampleLogError(ConsisError):
    """A sample log violates uniqueness or index-contiguity rules."""


class UndefinedMetricError(ConsisError):
    """A metric has no defined value for the given inputs."""


class EstimationError(ConsisError):
    """An outcome sequence or (k, k_c) state is invalid for the estimator."""


class BackendError(ConsisError):
    """Base class for answer-generator failures."""


class ConfigurationError(BackendError):
    """Backend configuration is incomplete (e.g. missing API key)."""


class TransportError(BackendError):
    """HTTP request failed with a non-2xx status."""

    def __init__(self, status: int, message: str = ""):
        super().__init__(f"HTTP {status}: {message}" if message else f"HTTP {status}")
        self.status = status


class GenerationTimeout(BackendError):
    """HTTP request did not complete within the configured timeout."""


class ProtocolError(BackendError):
    """Response body did not match the chat-completions wire format."""


class CampaignError(ConsisError):
    """A sampling campaign cannot start or continue."""


class SandboxUnavailableError(ConsisError):
    """The code-check runner executable was not found on PATH."""
