"""Exception hierarchy.

Everything that signals bad input derives from :class:`ValidationError`
(itself a ``ValueError``); the CLI maps it to exit status 1 and ``OSError``
to exit status 2.
"""


class ValidationError(ValueError):
    pass


class MeshError(ValidationError):
    """Malformed OBJ input or a violated mesh invariant."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ChartError(ValidationError):
    pass


class DisconnectedMeshError(ValidationError):
    pass


class DegeneratePartError(ValidationError):
    pass


class TensorFormatError(ValidationError):
    pass
