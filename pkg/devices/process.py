"""
Devices Process Models - Memoryless joint-state devices and sequential devices with memory

Process 1: a fixed joint state over registers A1..An, B1..Bn, each round
measured on its own tensor factor.

Process 2: per round, Eve prepares registers A, B; each device feeds its
memory register from the previous round (MA / MB) together with the fresh
register through a memory channel, measures, and emits a new memory register.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from django.conf import settings

from devices.exceptions import (
    EnumerationBudgetExceeded,
    LabelMismatch,
    MemoryNotTrivial,
    RoundCountMismatch,
)
from devices.records import PARTIES, DeviceTrace, RoundRecord
from quantum_core.operations import (
    apply_channel,
    basis_state,
    measure,
    measure_all_branches,
    outcome_distribution,
    partial_trace,
    permute,
    relabel,
    tensor,
)
from quantum_core.states import Basis, Instrument

logger = logging.getLogger(__name__)

MEMORY = {'A': 'MA', 'B': 'MB'}


def register_label(party, round_index):
    """Process 1 label of a party's register in a round, e.g. 'A3'."""
    return f"{party}{round_index}"


def trusted_instrument(party, round_index, basis):
    return Instrument.for_basis(basis)


def _check_budget(n_rounds):
    if n_rounds > settings.ENUMERATION_MAX_ROUNDS:
        raise EnumerationBudgetExceeded(
            f"{n_rounds} rounds exceed the enumeration limit of {settings.ENUMERATION_MAX_ROUNDS}"
        )


def _check_branches(count):
    if count > settings.ENUMERATION_MAX_BRANCHES:
        raise EnumerationBudgetExceeded(
            f"{count} live branches exceed the enumeration limit of {settings.ENUMERATION_MAX_BRANCHES}"
        )


def _normalize_inputs(inputs):
    return tuple((Basis(a), Basis(b)) for a, b in inputs)


# Process 1

@dataclass(frozen=True, eq=False)
class Process1Spec:
    """
    Joint pre-measurement state as a tensor product of `factors`, plus the
    instrument applied for each (party, round, input).
    """

    factors: tuple
    n_rounds: int
    instrument_map: object = trusted_instrument
    name: str = 'process1'
    ebits: int = 0

    def __post_init__(self):
        factors = tuple(self.factors)
        labels = [label for factor in factors for label in factor.register_labels]
        expected = {register_label(p, j) for p in PARTIES for j in range(1, self.n_rounds + 1)}
        if len(labels) != len(set(labels)) or set(labels) != expected:
            raise LabelMismatch(
                f"Process 1 factors must cover exactly A1..A{self.n_rounds}, B1..B{self.n_rounds}; got {sorted(labels)}"
            )
        object.__setattr__(self, 'factors', factors)

    @property
    def labels(self):
        return tuple(register_label(p, j) for p in PARTIES for j in range(1, self.n_rounds + 1))

    @property
    def joint_state(self):
        """Dense joint state over A1..An, B1..Bn (only sensible for small n)."""
        joint = self.factors[0]
        for factor in self.factors[1:]:
            joint = tensor(joint, factor)
        return permute(joint, self.labels).to_density()

    def instrument(self, party, round_index, basis):
        return self.instrument_map(party, round_index, Basis(basis))

    def ebit_budget(self, n_rounds=None):
        return self.ebits


def _factor_index(factors, label):
    for index, factor in enumerate(factors):
        if label in factor.register_labels:
            return index
    raise LabelMismatch(f"No factor holds register {label!r}")


def _process1_inputs(spec, inputs):
    inputs = _normalize_inputs(inputs)
    if len(inputs) != spec.n_rounds:
        raise RoundCountMismatch(f"{spec.name} has {spec.n_rounds} rounds, got {len(inputs)} inputs")
    return inputs


def _measurement_order(spec, order):
    order = tuple(order) if order is not None else tuple(range(1, spec.n_rounds + 1))
    if sorted(order) != list(range(1, spec.n_rounds + 1)):
        raise RoundCountMismatch(f"Measurement order {order} is not a permutation of the rounds")
    return order


def run_process1(spec, inputs, rng, order=None):
    """Sample one run, measuring rounds in `order` (default 1..n)."""
    inputs = _process1_inputs(spec, inputs)
    factors = list(spec.factors)
    outputs = {}
    for round_index in _measurement_order(spec, order):
        for party, basis in zip(PARTIES, inputs[round_index - 1]):
            label = register_label(party, round_index)
            index = _factor_index(factors, label)
            instrument = spec.instrument(party, round_index, basis)
            branch = measure(factors[index], label, instrument, rng.random())
            factors[index] = branch.post_state
            outputs[label] = branch.outcome
    records = tuple(
        RoundRecord(j, a, b, outputs[register_label('A', j)], outputs[register_label('B', j)])
        for j, (a, b) in enumerate(inputs, start=1)
    )
    return DeviceTrace(records)


def _assemble(spec, assignment):
    return tuple(
        (assignment[register_label('A', j)], assignment[register_label('B', j)])
        for j in range(1, spec.n_rounds + 1)
    )


def enumerate_process1(spec, inputs, order=None):
    """
    Exact output distribution {((a1, b1), ..., (an, bn)): probability}.

    Without `order` the per-factor joint distribution is computed in one
    shot; with `order` the rounds are measured branch by branch in that order.
    """
    inputs = _process1_inputs(spec, inputs)
    _check_budget(spec.n_rounds)
    instruments = {
        register_label(party, j): spec.instrument(party, j, basis)
        for j, pair in enumerate(inputs, start=1)
        for party, basis in zip(PARTIES, pair)
    }
    if order is None:
        assignments = [({}, 1.0)]
        for factor in spec.factors:
            distribution = outcome_distribution(factor, instruments)
            _check_branches(len(assignments) * len(distribution))
            assignments = [
                ({**assignment, **dict(zip(factor.register_labels, bits))}, p * q)
                for assignment, p in assignments
                for bits, q in distribution.items()
            ]
        return _collect((_assemble(spec, a), p) for a, p in assignments)

    nodes = [(1.0, tuple(spec.factors), {})]
    for round_index in _measurement_order(spec, order):
        for party in PARTIES:
            label = register_label(party, round_index)
            grown = []
            for probability, factors, assignment in nodes:
                index = _factor_index(factors, label)
                for branch in measure_all_branches(factors[index], label, instruments[label]):
                    if branch.is_null:
                        continue
                    updated = factors[:index] + (branch.post_state,) + factors[index + 1:]
                    grown.append((probability * branch.probability, updated, {**assignment, label: branch.outcome}))
            _check_branches(len(grown))
            nodes = grown
    return _collect((_assemble(spec, a), p) for p, _, a in nodes)


def _collect(pairs):
    distribution = {}
    for outputs, probability in pairs:
        distribution[outputs] = distribution.get(outputs, 0.0) + probability
    return distribution


# Process 2

class Process2Behaviour:
    """
    Sequential device behaviour. Subclasses override the hooks below; the
    executor alone decides when each hook is called, so a behaviour never
    sees inputs of rounds that have not started.

    Eve's preparation sees only the round index and her own memory, never
    the devices' memory registers. Memory registers live only between
    consecutive rounds.
    """

    name = 'process2'
    initial_eve_memory = None

    def eve_prepare(self, round_index, eve_memory):
        """Return (state on registers A, B; updated Eve memory)."""
        raise NotImplementedError

    def memory_channel(self, party, round_index):
        """Channel (M'_{j-1}, Q_j) -> Q_j for rounds j > 1, or None to drop the memory."""
        return None

    def emit_memory(self, party, round_index, basis, outcome):
        """Channel Q_j -> M'_j applied after measurement, or None for no memory."""
        return None

    def instrument(self, party, basis):
        """Instrument applied for an input; trusted devices measure the named basis."""
        return Instrument.for_basis(basis)

    def ebit_budget(self, n_rounds):
        """Maximally entangled pairs consumed over `n_rounds` rounds."""
        return 0

    def __str__(self):
        return self.name


def _placeholder(label):
    return basis_state([0], [label])


def _prepare_round(behaviour, round_index, memory, eve_memory):
    prepared, eve_memory = behaviour.eve_prepare(round_index, eve_memory)
    if set(prepared.register_labels) != set(PARTIES):
        raise LabelMismatch(f"{behaviour.name} prepared registers {list(prepared.register_labels)}, expected A, B")
    joint = prepared if memory is None else tensor(memory, prepared)
    if round_index == 1:
        return joint, eve_memory
    for party in PARTIES:
        memory_label = MEMORY[party]
        channel = behaviour.memory_channel(party, round_index)
        if channel is None:
            if memory_label in joint.register_labels:
                joint = partial_trace(joint, [l for l in joint.register_labels if l != memory_label])
            continue
        if set(channel.input_labels) != {memory_label, party} or channel.output_labels != (party,):
            raise LabelMismatch(f"{behaviour.name}: memory channel {channel!r} must map ({memory_label}, {party}) -> {party}")
        if memory_label not in joint.register_labels:
            joint = tensor(_placeholder(memory_label), joint)
        joint = apply_channel(channel, joint)
    return joint, eve_memory


def _emit(behaviour, joint, round_index, inputs, outcomes):
    for party, basis, outcome in zip(PARTIES, inputs, outcomes):
        channel = behaviour.emit_memory(party, round_index, basis, outcome)
        if channel is None:
            joint = partial_trace(joint, [l for l in joint.register_labels if l != party])
            continue
        if channel.input_labels != (party,) or channel.output_labels != (MEMORY[party],):
            raise LabelMismatch(f"{behaviour.name}: memory emission {channel!r} must map {party} -> {MEMORY[party]}")
        joint = apply_channel(channel, joint)
    return joint if joint.register_labels else None


def run_process2(behaviour, inputs, rng, snapshots=False):
    """
    Execute rounds strictly in order: prepare, memory channel, measure, emit.
    `inputs` may be any iterable; input j is requested only after round j-1 completes.
    """
    records = []
    states = []
    memory = None
    eve_memory = behaviour.initial_eve_memory
    for round_index, pair in enumerate(inputs, start=1):
        basis_a, basis_b = Basis(pair[0]), Basis(pair[1])
        joint, eve_memory = _prepare_round(behaviour, round_index, memory, eve_memory)
        if snapshots:
            states.append(joint)
        branch_a = measure(joint, 'A', behaviour.instrument('A', basis_a), rng.random())
        branch_b = measure(branch_a.post_state, 'B', behaviour.instrument('B', basis_b), rng.random())
        outcomes = (branch_a.outcome, branch_b.outcome)
        memory = _emit(behaviour, branch_b.post_state, round_index, (basis_a, basis_b), outcomes)
        records.append(RoundRecord(round_index, basis_a, basis_b, *outcomes))
        logger.debug("%s round %d: inputs %s/%s outputs %d/%d",
                     behaviour.name, round_index, basis_a, basis_b, *outcomes)
    if not records:
        raise RoundCountMismatch(f"{behaviour.name} needs at least one round of inputs")
    return DeviceTrace(tuple(records), tuple(states))


def enumerate_process2(behaviour, inputs):
    """Exact output distribution of a sequential behaviour under fixed inputs."""
    inputs = _normalize_inputs(inputs)
    if not inputs:
        raise RoundCountMismatch(f"{behaviour.name} needs at least one round of inputs")
    _check_budget(len(inputs))
    nodes = [(1.0, (), None, behaviour.initial_eve_memory)]
    for round_index, (basis_a, basis_b) in enumerate(inputs, start=1):
        grown = []
        for probability, outputs, memory, eve_memory in nodes:
            joint, next_eve = _prepare_round(behaviour, round_index, memory, eve_memory)
            for branch_a in measure_all_branches(joint, 'A', behaviour.instrument('A', basis_a)):
                if branch_a.is_null:
                    continue
                for branch_b in measure_all_branches(branch_a.post_state, 'B', behaviour.instrument('B', basis_b)):
                    if branch_b.is_null:
                        continue
                    outcomes = (branch_a.outcome, branch_b.outcome)
                    emitted = _emit(behaviour, branch_b.post_state, round_index, (basis_a, basis_b), outcomes)
                    grown.append((
                        probability * branch_a.probability * branch_b.probability,
                        outputs + (outcomes,),
                        emitted,
                        next_eve,
                    ))
        _check_branches(len(grown))
        nodes = grown
    return _collect((outputs, p) for p, outputs, _, _ in nodes)


def compile_trivial_memory(behaviour, n_rounds):
    """
    Defer every measurement to the end: a behaviour whose memory channels
    ignore the memory registers becomes a Process 1 spec with one factor
    per round (Eve's preparation followed by the memory channel's action).
    """
    factors = []
    eve_memory = behaviour.initial_eve_memory
    for round_index in range(1, n_rounds + 1):
        prepared, eve_memory = behaviour.eve_prepare(round_index, eve_memory)
        if set(prepared.register_labels) != set(PARTIES):
            raise LabelMismatch(f"{behaviour.name} prepared registers {list(prepared.register_labels)}")
        state = prepared
        if round_index > 1:
            for party in PARTIES:
                channel = behaviour.memory_channel(party, round_index)
                if channel is None:
                    continue
                if not channel.ignores(MEMORY[party]):
                    raise MemoryNotTrivial(behaviour, party, round_index)
                state = apply_channel(channel, tensor(_placeholder(MEMORY[party]), state))
        factors.append(relabel(state, {p: register_label(p, round_index) for p in PARTIES}))

    def instrument_map(party, round_index, basis):
        return behaviour.instrument(party, basis)

    logger.debug("Compiled %s over %d rounds into a Process 1 spec", behaviour.name, n_rounds)
    return Process1Spec(
        factors=tuple(factors),
        n_rounds=n_rounds,
        instrument_map=instrument_map,
        name=f"compiled:{behaviour.name}",
        ebits=behaviour.ebit_budget(n_rounds),
    )


# Dispatch over both device kinds

def is_process1(device):
    return isinstance(device, Process1Spec)


def execute(device, inputs, rng):
    """Run either device kind; Process 1 specs need every input upfront."""
    if is_process1(device):
        return run_process1(device, list(inputs), rng)
    return run_process2(device, inputs, rng)


def exact_outcomes(device, inputs):
    if is_process1(device):
        return enumerate_process1(device, inputs)
    return enumerate_process2(device, inputs)
