"""
Devices Registry - String ids used by experiment configs
"""
from django.db import models

from devices import behaviours
from devices.exceptions import UnknownDevice


class DeviceId(models.TextChoices):
    IID_BELL = 'iid_bell', 'Fresh Bell pair per round'
    NOISY_BELL = 'noisy_bell', 'Depolarized Bell pair per round'
    ECHO = 'echo', 'Echoes the previous input'
    RETAIN_REMEASURE = 'retain_remeasure', 'Re-measures the retained post-measurement state'
    EVEN_COPIER = 'even_copier', 'Copies odd-round outputs into even rounds'
    CLASSICAL_COPY = 'classical_copy', 'Classical all-equal mixture (Process 1)'
    BELL_PAIRS = 'bell_pairs', 'Bell pair on every round (Process 1)'


_FACTORIES = {
    DeviceId.IID_BELL: lambda n_rounds, **params: behaviours.iid_bell(),
    DeviceId.NOISY_BELL: lambda n_rounds, **params: behaviours.noisy_bell(**params),
    DeviceId.ECHO: lambda n_rounds, **params: behaviours.echo_signalling(**params),
    DeviceId.RETAIN_REMEASURE: lambda n_rounds, **params: behaviours.retain_remeasure(),
    DeviceId.EVEN_COPIER: lambda n_rounds, **params: behaviours.even_round_copier(),
    DeviceId.CLASSICAL_COPY: lambda n_rounds, **params: behaviours.classical_copy(n_rounds, **params),
    DeviceId.BELL_PAIRS: lambda n_rounds, **params: behaviours.bell_pairs(n_rounds),
}


def get_device(device_id, n_rounds, **params):
    """Build the device registered under `device_id` for `n_rounds` rounds."""
    if device_id not in DeviceId.values:
        raise UnknownDevice(device_id, DeviceId.values)
    return _FACTORIES[DeviceId(device_id)](n_rounds, **params)
