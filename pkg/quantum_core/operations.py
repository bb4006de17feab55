"""
Quantum Core Operations - Measurement, tensor products, partial trace and channel application

Every function is pure: states are immutable and randomness is passed in
explicitly as a uniform real in [0, 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from quantum_core.exceptions import ChannelError, InvalidState, UnknownLabel, ZeroProbabilityBranch
from quantum_core.states import (
    Basis,
    Channel,
    DensityOperator,
    Ensemble,
    Instrument,
    StateVector,
    exact_tolerance,
)


@dataclass(frozen=True)
class Branch:
    """One measurement outcome; `post_state` is None for a zero-probability branch."""

    outcome: int
    post_state: object
    probability: float

    @property
    def is_null(self):
        return self.post_state is None


# Construction

def bell_state(labels=('A', 'B')):
    """(|00> + |11>)/sqrt(2) on two labels."""
    amplitudes = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return StateVector(amplitudes, tuple(labels))


def basis_state(bits, labels, basis=Basis.Z):
    """Product of eigenstates of `basis`, one bit per label."""
    amplitudes = np.array([1.0 + 0j])
    for bit in bits:
        amplitudes = np.kron(amplitudes, Instrument.for_basis(basis).eigenvector(bit))
    return StateVector(amplitudes, tuple(labels))


def maximally_mixed(labels):
    labels = tuple(labels)
    dim = 2 ** len(labels)
    return DensityOperator(np.eye(dim) / dim, labels)


def random_state(labels, rng):
    labels = tuple(labels)
    dim = 2 ** len(labels)
    amplitudes = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(amplitudes / np.linalg.norm(amplitudes), labels)


def random_density(labels, rng, rank=2):
    labels = tuple(labels)
    dim = 2 ** len(labels)
    ginibre = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    matrix = ginibre @ ginibre.conj().T
    return DensityOperator(matrix / np.trace(matrix).real, labels)


# Register bookkeeping

def _position(state, label):
    try:
        return state.register_labels.index(label)
    except ValueError:
        raise UnknownLabel(label, state.register_labels) from None


def _instrument(basis_or_instrument):
    if isinstance(basis_or_instrument, Instrument):
        return basis_or_instrument
    return Instrument.for_basis(basis_or_instrument)


def permute(state, labels):
    """Reorder the registers of `state` to `labels` (a permutation of its labels)."""
    labels = tuple(labels)
    if sorted(labels) != sorted(state.register_labels):
        raise InvalidState(f"{list(labels)} is not a permutation of {list(state.register_labels)}")
    if labels == state.register_labels:
        return state
    order = [_position(state, label) for label in labels]
    if isinstance(state, StateVector):
        return StateVector._unchecked(np.transpose(state.tensor_view(), order), labels)
    if isinstance(state, DensityOperator):
        k = state.num_qubits
        tensor = np.transpose(state.tensor_view(), order + [k + i for i in order])
        return DensityOperator._unchecked(tensor.reshape(2 ** k, 2 ** k), labels)
    return Ensemble._unchecked(
        [(weight, permute(component, labels)) for weight, component in state.components], labels
    )


def relabel(state, mapping):
    """Rename registers; labels missing from `mapping` are kept."""
    labels = tuple(mapping.get(label, label) for label in state.register_labels)
    if isinstance(state, StateVector):
        return StateVector(state.amplitudes, labels)
    if isinstance(state, DensityOperator):
        return DensityOperator._unchecked(state.matrix, labels)
    return Ensemble._unchecked([(w, relabel(c, mapping)) for w, c in state.components], labels)


def _apply_local(state, operator, position):
    """Apply a 2x2 operator to one qubit (left action only for vectors, conjugation for matrices)."""
    if isinstance(state, StateVector):
        tensor = np.tensordot(operator, state.tensor_view(), axes=([1], [position]))
        return np.moveaxis(tensor, 0, position).reshape(-1)
    k = state.num_qubits
    tensor = np.tensordot(operator, state.tensor_view(), axes=([1], [position]))
    tensor = np.moveaxis(tensor, 0, position)
    tensor = np.tensordot(tensor, operator.conj().T, axes=([k + position], [0]))
    tensor = np.moveaxis(tensor, -1, k + position)
    return tensor.reshape(2 ** k, 2 ** k)


# Measurement

def _pure_branch(state, position, projector, outcome):
    projected = _apply_local(state, projector, position)
    probability = float(np.vdot(projected, projected).real)
    if probability <= exact_tolerance():
        return Branch(outcome, None, 0.0)
    post = StateVector._unchecked(projected / np.sqrt(probability), state.register_labels)
    return Branch(outcome, post, probability)


def _mixed_branch(state, position, projector, outcome):
    projected = _apply_local(state, projector, position)
    probability = float(np.trace(projected).real)
    if probability <= exact_tolerance():
        return Branch(outcome, None, 0.0)
    post = DensityOperator._unchecked(projected / probability, state.register_labels)
    return Branch(outcome, post, probability)


def _ensemble_branch(state, position, projector, outcome):
    weighted = []
    for weight, component in state.components:
        branch = _pure_branch(component, position, projector, outcome)
        if not branch.is_null and weight * branch.probability > 0:
            weighted.append((weight * branch.probability, branch.post_state))
    probability = sum(w for w, _ in weighted)
    if probability <= exact_tolerance():
        return Branch(outcome, None, 0.0)
    post = Ensemble._unchecked([(w / probability, c) for w, c in weighted], state.register_labels)
    return Branch(outcome, post, probability)


def _branch(state, label, basis, outcome):
    position = _position(state, label)
    projector = _instrument(basis).projectors[outcome]
    if isinstance(state, StateVector):
        return _pure_branch(state, position, projector, outcome)
    if isinstance(state, DensityOperator):
        return _mixed_branch(state, position, projector, outcome)
    if isinstance(state, Ensemble):
        return _ensemble_branch(state, position, projector, outcome)
    raise InvalidState(f"Cannot measure {type(state).__name__}")


def measure_all_branches(state, label, basis):
    """Both outcomes of measuring `label`, with post-states and Born probabilities."""
    return [_branch(state, label, basis, outcome) for outcome in (0, 1)]


def measure(state, label, basis, randomness):
    """
    Sample an outcome with the Born rule: outcome 0 when `randomness` falls
    below its probability. Returns the collapsed Branch.
    """
    if not 0.0 <= randomness < 1.0:
        raise ValueError(f"randomness must lie in [0, 1), got {randomness}")
    zero, one = measure_all_branches(state, label, basis)
    if one.is_null or (not zero.is_null and randomness < zero.probability):
        return zero
    return one


def project(state, label, basis, outcome):
    """Deterministic variant of `measure`: collapse onto `outcome` or raise if it cannot occur."""
    branch = _branch(state, label, basis, outcome)
    if branch.is_null:
        raise ZeroProbabilityBranch(label, outcome)
    return branch


def outcome_distribution(state, instruments):
    """
    Exact joint distribution of measuring every register of `state` with the
    instrument given for its label. Returns {bits in label order: probability},
    zero entries omitted. Measurements on distinct qubits commute, so all are
    applied at once by rotating each qubit into its measurement eigenbasis.
    """
    missing = set(state.register_labels) - set(instruments)
    if missing:
        raise UnknownLabel(sorted(missing)[0], instruments.keys())
    rotations = [_instrument(instruments[label]).rotation for label in state.register_labels]
    if isinstance(state, StateVector):
        probabilities = _rotated_probabilities(state, rotations)
    elif isinstance(state, Ensemble):
        probabilities = sum(w * _rotated_probabilities(c, rotations) for w, c in state.components)
    else:
        rotated = state.to_density()
        for position, rotation in enumerate(rotations):
            rotated = DensityOperator._unchecked(_apply_local(rotated, rotation, position), state.register_labels)
        probabilities = np.real(np.diag(rotated.matrix))
    cutoff = exact_tolerance()
    width = state.num_qubits
    distribution = {}
    for index in np.flatnonzero(probabilities > cutoff):
        bits = tuple(int(b) for b in np.binary_repr(int(index), width=width)) if width else ()
        distribution[bits] = float(probabilities[index])
    return distribution


def _rotated_probabilities(state, rotations):
    tensor = state.tensor_view()
    for position, rotation in enumerate(rotations):
        tensor = np.moveaxis(np.tensordot(rotation, tensor, axes=([1], [position])), 0, position)
    return np.abs(tensor.reshape(-1)) ** 2


# Composition

def tensor(a, b):
    """Tensor product; labels of `a` come first and must be disjoint from those of `b`."""
    labels = a.register_labels + b.register_labels
    if len(set(labels)) != len(labels):
        raise InvalidState(f"Cannot tensor states sharing labels: {list(labels)}")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector._unchecked(np.kron(a.amplitudes, b.amplitudes), labels)
    if isinstance(a, DensityOperator) or isinstance(b, DensityOperator):
        return DensityOperator._unchecked(np.kron(a.to_density().matrix, b.to_density().matrix), labels)
    left = a.components if isinstance(a, Ensemble) else ((1.0, a),)
    right = b.components if isinstance(b, Ensemble) else ((1.0, b),)
    return Ensemble._unchecked(
        [(wa * wb, tensor(ca, cb)) for wa, ca in left for wb, cb in right], labels
    )


def partial_trace(rho, keep):
    """Reduced density operator on `keep`; kept labels stay in the state's order."""
    keep = set(keep)
    for label in keep:
        _position(rho, label)
    kept = tuple(label for label in rho.register_labels if label in keep)
    traced = tuple(label for label in rho.register_labels if label not in keep)
    rho = permute(rho.to_density(), kept + traced)
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    reduced = np.einsum('arbr->ab', rho.matrix.reshape(dk, dt, dk, dt))
    return DensityOperator._unchecked(reduced, kept)


def apply_channel(channel, state):
    """
    Apply `channel` to its input registers. The result holds the channel's
    output labels first, then the untouched registers in their original order.
    A single-Kraus channel keeps pure states pure.
    """
    if not isinstance(channel, Channel):
        raise ChannelError(f"Expected a Channel, got {type(channel).__name__}")
    for label in channel.input_labels:
        if label not in state.register_labels:
            raise ChannelError(
                f"Channel input {label!r} is not a register of the state {list(state.register_labels)}"
            )
    rest = tuple(label for label in state.register_labels if label not in channel.input_labels)
    clash = set(rest) & set(channel.output_labels)
    if clash:
        raise ChannelError(f"Channel outputs {sorted(clash)} collide with untouched registers")
    output_labels = channel.output_labels + rest
    d_in, d_rest = 2 ** len(channel.input_labels), 2 ** len(rest)
    ordered = permute(state, channel.input_labels + rest)
    if isinstance(ordered, StateVector) and len(channel.kraus_operators) == 1:
        (operator,) = channel.kraus_operators
        amplitudes = operator @ ordered.amplitudes.reshape(d_in, d_rest)
        return StateVector._unchecked(amplitudes, output_labels)
    rho = ordered.to_density().matrix.reshape(d_in, d_rest, d_in, d_rest)
    image = sum(
        np.einsum('ai,irjs,bj->arbs', k, rho, k.conj()) for k in channel.kraus_operators
    )
    d_out = 2 ** len(channel.output_labels)
    return DensityOperator._unchecked(image.reshape(d_out * d_rest, d_out * d_rest), output_labels)


def trace_of(state):
    if isinstance(state, StateVector):
        return float(np.vdot(state.amplitudes, state.amplitudes).real)
    if isinstance(state, Ensemble):
        return sum(weight * trace_of(component) for weight, component in state.components)
    return float(np.trace(state.matrix).real)
