"""
Quantum Core Exceptions
"""


class QuantumStateError(Exception):
    """Base class for state algebra failures."""


class InvalidState(QuantumStateError):
    """A state, projector or operator violates its structural invariants."""


class UnknownLabel(QuantumStateError):
    """A register label is not present in the state."""

    def __init__(self, label, available):
        self.label = label
        self.available = tuple(available)
        super().__init__(f"Unknown register label {label!r}; state holds {list(self.available)}")


class ZeroProbabilityBranch(QuantumStateError):
    """A deterministic projection was requested onto a branch of probability zero."""

    def __init__(self, label, outcome):
        self.label = label
        self.outcome = outcome
        super().__init__(f"Outcome {outcome} on register {label!r} has probability zero")


class ChannelError(QuantumStateError):
    """A channel is incomplete or does not match the registers it is applied to."""
