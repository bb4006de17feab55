"""
Devices Behaviours - Honest baselines and memory-exploiting device behaviours
"""
import math

import numpy as np
from django.conf import settings

from devices.process import MEMORY, Process1Spec, Process2Behaviour, register_label, trusted_instrument
from devices.records import PARTIES
from quantum_core.operations import apply_channel, basis_state, bell_state, random_density, random_state
from quantum_core.states import Basis, Channel, Ensemble, Instrument


def _retain(party):
    """Keep the post-measurement register as the next round's memory."""
    return Channel.reduction((party,), (party,), (MEMORY[party],))


def _recall(party):
    """Discard the fresh register and measure the retained memory instead."""
    return Channel.reduction((MEMORY[party], party), (MEMORY[party],), (party,))


def _forget(party):
    return Channel.reduction((MEMORY[party], party), (party,))


class IidBell(Process2Behaviour):
    """Fresh |Phi+> every round, no memory."""

    name = 'iid_bell'

    def eve_prepare(self, round_index, eve_memory):
        return bell_state(PARTIES), eve_memory

    def ebit_budget(self, n_rounds):
        return n_rounds


class NoisyBell(IidBell):
    """Fresh |Phi+> with Alice's half depolarized in transit; no memory."""

    name = 'noisy_bell'

    def __init__(self, depolarizing=0.1):
        self.depolarizing = depolarizing
        self._prepared = apply_channel(Channel.depolarizing('A', depolarizing), bell_state(PARTIES))

    def eve_prepare(self, round_index, eve_memory):
        return self._prepared, eve_memory


class MemorylessBehaviour(Process2Behaviour):
    """
    Trivial-memory behaviour: each device retains its post-measurement
    register, but the memory channel traces it out before acting on the
    fresh register.
    """

    name = 'memoryless'

    def __init__(self, preparations, channels):
        self.preparations = tuple(preparations)
        self.channels = dict(channels)

    def eve_prepare(self, round_index, eve_memory):
        return self.preparations[(round_index - 1) % len(self.preparations)], eve_memory

    def memory_channel(self, party, round_index):
        return self.channels[party].ignoring(MEMORY[party])

    def emit_memory(self, party, round_index, basis, outcome):
        return _retain(party)


class EchoSignalling(Process2Behaviour):
    """
    Round 1 outputs uniform bits; round j > 1 outputs the encoding of the
    device's own round j-1 input. Both inputs apply the same Z measurement.
    """

    name = 'echo'

    def __init__(self, encoding=None):
        self.encoding = {Basis(k): int(v) for k, v in (encoding or settings.ECHO_BASIS_ENCODING).items()}

    def eve_prepare(self, round_index, eve_memory):
        return basis_state([0, 0], PARTIES, Basis.X), eve_memory

    def memory_channel(self, party, round_index):
        return _recall(party)

    def emit_memory(self, party, round_index, basis, outcome):
        return Channel.replacement((party,), basis_state([self.encoding[basis]], [MEMORY[party]]))

    def instrument(self, party, basis):
        return Instrument.for_basis(Basis.Z)


class RetainRemeasure(Process2Behaviour):
    """One |Phi+> in round 1; afterwards each device re-measures its retained post-measurement qubit."""

    name = 'retain_remeasure'

    def eve_prepare(self, round_index, eve_memory):
        if round_index == 1:
            return bell_state(PARTIES), eve_memory
        return basis_state([0, 0], PARTIES), eve_memory

    def memory_channel(self, party, round_index):
        return _recall(party)

    def emit_memory(self, party, round_index, basis, outcome):
        return _retain(party)

    def ebit_budget(self, n_rounds):
        return 1


class EvenRoundCopier(Process2Behaviour):
    """
    Odd rounds measure a fresh |Phi+> and keep the post-measurement qubit;
    even rounds measure that kept qubit again, so repeating the odd-round
    basis reproduces the odd-round output.
    """

    name = 'even_copier'

    def eve_prepare(self, round_index, eve_memory):
        if round_index % 2:
            return bell_state(PARTIES), eve_memory
        return basis_state([0, 0], PARTIES), eve_memory

    def memory_channel(self, party, round_index):
        return _forget(party) if round_index % 2 else _recall(party)

    def emit_memory(self, party, round_index, basis, outcome):
        return _retain(party) if round_index % 2 else None

    def ebit_budget(self, n_rounds):
        return math.ceil(n_rounds / 2)


def iid_bell():
    return IidBell()


def noisy_bell(depolarizing=0.1):
    return NoisyBell(depolarizing)


def echo_signalling(encoding=None):
    return EchoSignalling(encoding)


def retain_remeasure():
    return RetainRemeasure()


def even_round_copier():
    return EvenRoundCopier()


def random_memoryless(rng, period=2):
    """Random trivial-memory behaviour: random two-qubit preparations and random memory-ignoring channels."""
    preparations = []
    for _ in range(period):
        if rng.random() < 0.5:
            preparations.append(random_state(PARTIES, rng))
        else:
            preparations.append(random_density(PARTIES, rng, rank=2))
    channels = {party: Channel.random((party,), (party,), rng, num_kraus=2) for party in PARTIES}
    return MemorylessBehaviour(preparations, channels)


def depolarized_memoryless(probability=0.2):
    """|Phi+> preparations passed through a depolarizing, memory-ignoring channel from round 2 on."""
    channels = {party: Channel.depolarizing(party, probability) for party in PARTIES}
    return MemorylessBehaviour([bell_state(PARTIES)], channels)


# Process 1 specs

def bell_pairs(n_rounds):
    """|Phi+> on every round's pair of registers."""
    factors = tuple(
        bell_state((register_label('A', j), register_label('B', j))) for j in range(1, n_rounds + 1)
    )
    return Process1Spec(factors=factors, n_rounds=n_rounds, name='bell_pairs', ebits=n_rounds)


def _always_z(party, round_index, basis):
    return Instrument.for_basis(Basis.Z)


def classical_copy(n_rounds, always_z=False):
    """
    (|0...0><0...0| + |1...1><1...1|)/2 over all 2n registers. With
    `always_z` the untrusted devices measure Z whatever the input.
    """
    labels = tuple(register_label(p, j) for p in PARTIES for j in range(1, n_rounds + 1))
    zeros = basis_state([0] * len(labels), labels)
    ones = basis_state([1] * len(labels), labels)
    mixture = Ensemble(((0.5, zeros), (0.5, ones)), labels)
    return Process1Spec(
        factors=(mixture,), n_rounds=n_rounds, name='classical_copy', ebits=0,
        instrument_map=_always_z if always_z else trusted_instrument,
    )


def random_process1_spec(n_rounds, rng):
    """Random mixed joint state over all registers with trusted X/Z instruments."""
    labels = tuple(register_label(p, j) for p in PARTIES for j in range(1, n_rounds + 1))
    if rng.random() < 0.5:
        state = random_density(labels, rng, rank=int(rng.integers(1, 4)))
    else:
        state = random_state(labels, rng)
    return Process1Spec(factors=(state,), n_rounds=n_rounds, name='random_process1')


def mixed_instrument_spec(n_rounds, rng):
    """Random joint state where each register's instrument is an arbitrary rank-1 projective measurement."""
    spec = random_process1_spec(n_rounds, rng)
    rotations = {}
    for party in PARTIES:
        for j in range(1, n_rounds + 1):
            for basis in Basis:
                vector = random_state(['q'], rng).amplitudes
                orthogonal = np.array([-vector[1].conjugate(), vector[0].conjugate()])
                rotations[party, j, basis] = Instrument(
                    basis=basis,
                    projectors=(np.outer(vector, vector.conj()), np.outer(orthogonal, orthogonal.conj())),
                )

    def instrument_map(party, round_index, basis):
        return rotations[party, round_index, basis]

    return Process1Spec(factors=spec.factors, n_rounds=n_rounds, instrument_map=instrument_map,
                        name='random_untrusted_process1')
