"""
Protocol BB84 - Entanglement-based BB84 driven through a device executor
"""
import logging

from devices.exceptions import RoundCountMismatch
from devices.process import execute, is_process1
from protocol.exceptions import InvalidProtocolConfig
from protocol.postprocessing import finish_protocol, select_test_rounds
from quantum_core.states import Basis

logger = logging.getLogger(__name__)

PROTOCOL_ID = 'bb84'


def _key_round_basis(config, rng):
    return config.key_basis if rng.random() < config.basis_bias else config.key_basis.other


def run_bb84(config, device, rng):
    """
    Test rounds are measured in X by both parties; other rounds use the key
    basis with probability `basis_bias`, independently per party. With a
    fixed subset every input is committed before the first round; with spot
    checking each round's test decision is drawn just before it runs.
    """
    selection = config.test_selection
    if selection is None:
        raise InvalidProtocolConfig('test_selection', 'BB84 needs a test-round selection')
    if is_process1(device) and device.n_rounds != config.n_rounds:
        raise RoundCountMismatch(f"{device.name} has {device.n_rounds} rounds, config asks for {config.n_rounds}")

    test_rounds = []
    if selection.is_spot_check:
        def inputs():
            for j in range(1, config.n_rounds + 1):
                if rng.random() < selection.gamma:
                    test_rounds.append(j)
                    yield Basis.X, Basis.X
                else:
                    yield _key_round_basis(config, rng), _key_round_basis(config, rng)
        stream = inputs()
    else:
        test_rounds.extend(select_test_rounds(selection, config.n_rounds, rng))
        chosen = set(test_rounds)
        stream = [
            (Basis.X, Basis.X) if j in chosen else (_key_round_basis(config, rng), _key_round_basis(config, rng))
            for j in range(1, config.n_rounds + 1)
        ]

    trace = execute(device, stream, rng)
    if trace.n_rounds != config.n_rounds:
        raise RoundCountMismatch(f"Device ran {trace.n_rounds} rounds, config asks for {config.n_rounds}")

    tests = set(test_rounds)
    key_rounds = [
        r.round_index for r in trace.rounds
        if r.round_index not in tests and r.input_a == r.input_b == config.key_basis
    ]
    return finish_protocol(
        PROTOCOL_ID, str(device.name), config, trace, rng,
        test_rounds=tuple(test_rounds),
        key_rounds=tuple(key_rounds),
        basis_rounds=range(1, trace.n_rounds + 1),
    )
