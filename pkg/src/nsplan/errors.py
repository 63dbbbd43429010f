"""Exception types shared across more than one module."""


class ConfigError(ValueError):
    """A run or pipeline configuration is unusable (missing file, empty
    admissible set, bad field value)."""


class TransportError(RuntimeError):
    """A remote provider call failed at the HTTP level.

    Carries the endpoint and, when a response was received, its status code.
    """

    def __init__(self, message, endpoint=None, status=None):
        super().__init__(message)
        self.endpoint = endpoint
        self.status = status

    def __str__(self):
        base = super().__str__()
        parts = [base]
        if self.endpoint:
            parts.append(f"endpoint={self.endpoint}")
        if self.status is not None:
            parts.append(f"status={self.status}")
        return " ".join(parts)
