"""
Devices Exceptions
"""


class DeviceError(Exception):
    """Base class for device model failures."""


class LabelMismatch(DeviceError):
    """A behaviour produced a state or channel on the wrong registers."""


class RoundCountMismatch(DeviceError):
    """The number of inputs does not match the device's round count."""


class MemoryNotTrivial(DeviceError):
    """The behaviour carries memory across rounds, so it has no Process 1 form."""

    def __init__(self, behaviour, party, round_index):
        self.behaviour = behaviour
        self.party = party
        self.round_index = round_index
        super().__init__(
            f"{behaviour.name}: memory channel of party {party} in round {round_index} "
            f"depends on the memory register"
        )


class EnumerationBudgetExceeded(DeviceError):
    """Exact branch enumeration would exceed the configured budget."""


class UnknownDevice(DeviceError):
    """No device is registered under the requested id."""

    def __init__(self, device_id, known):
        self.device_id = device_id
        super().__init__(f"Unknown device id {device_id!r}; known ids: {', '.join(known)}")
