"""
Protocol Exceptions
"""


class ProtocolError(Exception):
    """Base class for protocol failures."""


class InvalidProtocolConfig(ProtocolError):
    """A protocol parameter is out of range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class RoundParityError(ProtocolError):
    """The odd/even example protocol needs an even, positive number of rounds."""


class LengthViolation(ProtocolError):
    """Requested hash output or seed length does not fit the key."""


class NoTestRounds(ProtocolError):
    """A transcript has no X-basis test rounds to estimate the phase error from."""


class TranscriptSchemaError(ProtocolError):
    """A serialized transcript is malformed or has an unsupported schema version."""
