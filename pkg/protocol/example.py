"""
Protocol Example - Odd/even protocol whose even rounds repeat the odd-round
measurement and publish the outcomes
"""
from devices.process import execute, is_process1
from devices.records import PARTIES
from protocol.config import ProtocolConfig
from protocol.exceptions import RoundParityError
from protocol.postprocessing import finish_protocol
from protocol.transcripts import Announcement, AnnouncementKind
from quantum_core.states import Basis

PROTOCOL_ID = 'example_protocol'


def example_config(n_pairs, key_basis=Basis.Z, pa_output_length='auto'):
    if not isinstance(n_pairs, int) or n_pairs < 1:
        raise RoundParityError(f"n_pairs must be a positive integer, got {n_pairs!r}")
    return ProtocolConfig(
        n_rounds=2 * n_pairs,
        key_basis=key_basis,
        test_selection=None,
        pa_output_length=pa_output_length,
    )


def classify_odd_rounds(inputs, key_basis=Basis.Z):
    """(test rounds, key rounds) among the odd rounds of an input sequence."""
    key_basis = Basis(key_basis)
    odd = [(j, a, b) for j, (a, b) in enumerate(inputs, start=1) if j % 2]
    return (
        tuple(j for j, a, b in odd if a == b == key_basis.other),
        tuple(j for j, a, b in odd if a == b == key_basis),
    )


def _uniform_basis(rng):
    return Basis.X if rng.random() < 0.5 else Basis.Z


def run_example_protocol(n_pairs, device, rng, config=None):
    """
    Odd rounds: independent uniform X/Z per party. Even rounds: repeat the
    preceding basis and announce both outputs straight away. Postprocessing
    uses odd rounds only: matched key-basis rounds form the key, matched X
    rounds are test rounds. Even-round bases are never announced.
    """
    config = config or example_config(n_pairs)
    if config.n_rounds != 2 * n_pairs:
        raise RoundParityError(f"{n_pairs} pairs need {2 * n_pairs} rounds, config has {config.n_rounds}")
    if is_process1(device) and device.n_rounds != 2 * n_pairs:
        raise RoundParityError(f"{device.name} has {device.n_rounds} rounds; the protocol needs {2 * n_pairs}")

    def inputs():
        for _ in range(n_pairs):
            pair = (_uniform_basis(rng), _uniform_basis(rng))
            yield pair
            yield pair

    trace = execute(device, inputs(), rng)
    early = [
        Announcement(j, AnnouncementKind.OUTPUT, trace.rounds[j - 1].output_of(party), j, party)
        for j in range(2, trace.n_rounds + 1, 2)
        for party in PARTIES
    ]
    key_basis = Basis(config.key_basis)
    test_rounds, key_rounds = classify_odd_rounds(trace.inputs(), key_basis)
    return finish_protocol(
        PROTOCOL_ID, str(device.name), config, trace, rng,
        test_rounds=test_rounds,
        key_rounds=key_rounds,
        basis_rounds=range(1, trace.n_rounds + 1, 2),
        early_announcements=early,
        test_basis=key_basis.other,
    )
