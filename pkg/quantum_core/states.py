"""
Quantum Core States - Immutable qubit registers, projective instruments and channels

Registers are ordered qubit labels; amplitude and matrix indices are big-endian
in that order, so the first label is the most significant bit.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from django.db import models

from quantum_core.exceptions import ChannelError, InvalidState


def structural_tolerance():
    """Tolerance for normalization, hermiticity and completeness checks."""
    return settings.QUANTUM_TOLERANCE


def exact_tolerance():
    """Tolerance for analytically exact identities; also the zero-branch cutoff."""
    return settings.QUANTUM_EXACT_TOLERANCE


def _frozen(array, dtype=np.complex128):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


def _check_labels(labels):
    if len(set(labels)) != len(labels):
        raise InvalidState(f"Register labels must be unique, got {list(labels)}")
    for label in labels:
        if not isinstance(label, str) or not label:
            raise InvalidState(f"Register labels must be non-empty strings, got {label!r}")


class Basis(models.TextChoices):
    """Measurement setting of a trusted qubit device."""

    X = 'X', 'X basis'
    Z = 'Z', 'Z basis'

    @property
    def other(self):
        return Basis.Z if self == Basis.X else Basis.X


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over an ordered list of qubit labels."""

    amplitudes: np.ndarray
    register_labels: tuple

    def __post_init__(self):
        labels = tuple(self.register_labels)
        _check_labels(labels)
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape != (2 ** len(labels),):
            raise InvalidState(
                f"{len(amplitudes)} amplitudes do not fit {len(labels)} qubit labels"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > structural_tolerance():
            raise InvalidState(f"State vector norm is {norm}, expected 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)
        object.__setattr__(self, 'register_labels', labels)

    @classmethod
    def _unchecked(cls, amplitudes, labels):
        state = object.__new__(cls)
        object.__setattr__(state, 'amplitudes', _frozen(np.reshape(amplitudes, -1)))
        object.__setattr__(state, 'register_labels', tuple(labels))
        return state

    @property
    def num_qubits(self):
        return len(self.register_labels)

    def tensor_view(self):
        """Amplitudes reshaped to one axis per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def to_density(self):
        return DensityOperator._unchecked(np.outer(self.amplitudes, self.amplitudes.conj()), self.register_labels)

    def __repr__(self):
        return f"StateVector(labels={list(self.register_labels)})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed state over an ordered list of qubit labels."""

    matrix: np.ndarray
    register_labels: tuple

    def __post_init__(self):
        labels = tuple(self.register_labels)
        _check_labels(labels)
        matrix = np.array(self.matrix, dtype=np.complex128)
        dim = 2 ** len(labels)
        if matrix.shape != (dim, dim):
            raise InvalidState(f"Matrix of shape {matrix.shape} does not fit {len(labels)} qubit labels")
        tol = structural_tolerance()
        if not np.allclose(matrix, matrix.conj().T, atol=tol, rtol=0):
            raise InvalidState("Density operator is not Hermitian")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > tol:
            raise InvalidState(f"Density operator trace is {trace}, expected 1")
        if np.linalg.eigvalsh(matrix).min() < -tol:
            raise InvalidState("Density operator has a negative eigenvalue")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'register_labels', labels)

    @classmethod
    def _unchecked(cls, matrix, labels):
        state = object.__new__(cls)
        object.__setattr__(state, 'matrix', _frozen(matrix))
        object.__setattr__(state, 'register_labels', tuple(labels))
        return state

    @property
    def num_qubits(self):
        return len(self.register_labels)

    def tensor_view(self):
        """Matrix reshaped to one row axis then one column axis per qubit."""
        return self.matrix.reshape((2,) * (2 * self.num_qubits))

    def to_density(self):
        return self

    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)

    def __repr__(self):
        return f"DensityOperator(labels={list(self.register_labels)})"


@dataclass(frozen=True, eq=False)
class Ensemble:
    """
    Convex mixture of pure states on the same labels.

    Holds classical mixtures of large pure states (e.g. the all-zeros/all-ones
    copy state) without building their 4^k density matrix.
    """

    components: tuple
    register_labels: tuple

    def __post_init__(self):
        labels = tuple(self.register_labels)
        _check_labels(labels)
        components = tuple((float(weight), state) for weight, state in self.components)
        if not components:
            raise InvalidState("Ensemble needs at least one component")
        tol = structural_tolerance()
        for weight, state in components:
            if weight < -tol:
                raise InvalidState(f"Negative ensemble weight {weight}")
            if state.register_labels != labels:
                raise InvalidState("Ensemble components must share the ensemble labels")
        total = sum(weight for weight, _ in components)
        if abs(total - 1.0) > tol:
            raise InvalidState(f"Ensemble weights sum to {total}, expected 1")
        object.__setattr__(self, 'components', components)
        object.__setattr__(self, 'register_labels', labels)

    @classmethod
    def _unchecked(cls, components, labels):
        state = object.__new__(cls)
        object.__setattr__(state, 'components', tuple(components))
        object.__setattr__(state, 'register_labels', tuple(labels))
        return state

    @property
    def num_qubits(self):
        return len(self.register_labels)

    def to_density(self):
        matrix = sum(weight * np.outer(state.amplitudes, state.amplitudes.conj())
                     for weight, state in self.components)
        return DensityOperator._unchecked(matrix, self.register_labels)

    def __repr__(self):
        return f"Ensemble(labels={list(self.register_labels)}, components={len(self.components)})"


@dataclass(frozen=True, eq=False)
class Instrument:
    """Rank-1 projective qubit measurement; outcome o leaves the eigenvector of projector o."""

    basis: Basis
    projectors: tuple

    def __post_init__(self):
        projectors = tuple(_frozen(p) for p in self.projectors)
        if len(projectors) != 2 or any(p.shape != (2, 2) for p in projectors):
            raise InvalidState("An instrument needs exactly two 2x2 projectors")
        tol = structural_tolerance()
        if not np.allclose(projectors[0] + projectors[1], np.eye(2), atol=tol, rtol=0):
            raise InvalidState("Instrument projectors do not sum to the identity")
        for projector in projectors:
            if not np.allclose(projector @ projector, projector, atol=tol, rtol=0):
                raise InvalidState("Instrument projector is not idempotent")
            if abs(np.trace(projector) - 1.0) > tol:
                raise InvalidState("Instrument projectors must be rank one")
        object.__setattr__(self, 'basis', Basis(self.basis))
        object.__setattr__(self, 'projectors', projectors)

    @classmethod
    def for_basis(cls, basis):
        return _basis_instrument(Basis(basis))

    def eigenvector(self, outcome):
        """Unit vector spanning the range of projector `outcome`."""
        values, vectors = np.linalg.eigh(self.projectors[outcome])
        return vectors[:, int(np.argmax(values))]

    @functools.cached_property
    def rotation(self):
        """Unitary whose computational-basis probabilities reproduce this measurement."""
        return _frozen(np.array([self.eigenvector(0).conj(), self.eigenvector(1).conj()]))


@functools.lru_cache(maxsize=None)
def _basis_instrument(basis):
    if basis == Basis.Z:
        vectors = (np.array([1, 0]), np.array([0, 1]))
    else:
        vectors = (np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2))
    return Instrument(basis=basis, projectors=tuple(np.outer(v, v.conj()) for v in vectors))


@dataclass(frozen=True, eq=False)
class Channel:
    """CPTP map in Kraus form from `input_labels` to `output_labels`."""

    kraus_operators: tuple
    input_labels: tuple
    output_labels: tuple

    def __post_init__(self):
        inputs = tuple(self.input_labels)
        outputs = tuple(self.output_labels)
        _check_labels(inputs)
        _check_labels(outputs)
        kraus = tuple(_frozen(k) for k in self.kraus_operators)
        if not kraus:
            raise ChannelError("A channel needs at least one Kraus operator")
        shape = (2 ** len(outputs), 2 ** len(inputs))
        for operator in kraus:
            if operator.shape != shape:
                raise ChannelError(f"Kraus operator of shape {operator.shape}, expected {shape}")
        completeness = sum(k.conj().T @ k for k in kraus)
        if not np.allclose(completeness, np.eye(shape[1]), atol=structural_tolerance(), rtol=0):
            raise ChannelError("Kraus operators are not complete (sum of K^dag K is not the identity)")
        object.__setattr__(self, 'kraus_operators', kraus)
        object.__setattr__(self, 'input_labels', inputs)
        object.__setattr__(self, 'output_labels', outputs)

    def __repr__(self):
        return (f"Channel({list(self.input_labels)} -> {list(self.output_labels)}, "
                f"kraus={len(self.kraus_operators)})")

    def superoperator(self, unit):
        """Image of a matrix on the input space."""
        return sum(k @ unit @ k.conj().T for k in self.kraus_operators)

    def ignores(self, label):
        """
        True when the channel factors as trace over `label` followed by a channel
        on the remaining inputs, i.e. its output does not depend on that register.
        """
        if label not in self.input_labels:
            return True
        position = self.input_labels.index(label)
        width = len(self.input_labels)
        mask = 1 << (width - 1 - position)
        dim = 2 ** width
        tol = structural_tolerance()
        for row, col in itertools.product(range(dim), repeat=2):
            unit = np.zeros((dim, dim), dtype=np.complex128)
            unit[row, col] = 1.0
            image = self.superoperator(unit)
            if (row & mask) != (col & mask):
                if not np.allclose(image, 0, atol=tol, rtol=0):
                    return False
            elif row & mask == 0:
                flipped = np.zeros((dim, dim), dtype=np.complex128)
                flipped[row | mask, col | mask] = 1.0
                if not np.allclose(image, self.superoperator(flipped), atol=tol, rtol=0):
                    return False
        return True

    # Constructors

    @classmethod
    def identity(cls, labels):
        labels = tuple(labels)
        return cls((np.eye(2 ** len(labels)),), labels, labels)

    @classmethod
    def reduction(cls, input_labels, keep, output_labels=None):
        """
        Trace out every input not in `keep`, then rename the kept registers
        to `output_labels` (same order as `keep`).
        """
        input_labels = tuple(input_labels)
        keep = tuple(keep)
        output_labels = tuple(output_labels) if output_labels is not None else keep
        if len(output_labels) != len(keep) or not set(keep) <= set(input_labels):
            raise ChannelError(f"Cannot keep {list(keep)} from {list(input_labels)}")
        discard = [label for label in input_labels if label not in keep]
        width = len(input_labels)
        kraus = []
        for dropped in itertools.product((0, 1), repeat=len(discard)):
            operator = np.zeros((2 ** len(keep), 2 ** width))
            for bits in itertools.product((0, 1), repeat=width):
                assignment = dict(zip(input_labels, bits))
                if tuple(assignment[label] for label in discard) != dropped:
                    continue
                out_index = _index([assignment[label] for label in keep])
                operator[out_index, _index(bits)] = 1.0
            kraus.append(operator)
        return cls(tuple(kraus), input_labels, output_labels)

    @classmethod
    def replacement(cls, input_labels, state):
        """Discard the inputs and prepare the pure `state` on its own labels."""
        input_labels = tuple(input_labels)
        kraus = []
        for index in range(2 ** len(input_labels)):
            operator = np.zeros((len(state.amplitudes), 2 ** len(input_labels)), dtype=np.complex128)
            operator[:, index] = state.amplitudes
            kraus.append(operator)
        return cls(tuple(kraus), input_labels, state.register_labels)

    @classmethod
    def depolarizing(cls, label, probability):
        """Qubit depolarizing channel; probability 1 maps every state to I/2."""
        if not 0.0 <= probability <= 1.0:
            raise ChannelError(f"Depolarizing probability {probability} outside [0, 1]")
        paulis = (
            np.array([[0, 1], [1, 0]]),
            np.array([[0, -1j], [1j, 0]]),
            np.array([[1, 0], [0, -1]]),
        )
        kraus = [np.sqrt(1 - 3 * probability / 4) * np.eye(2)]
        kraus += [np.sqrt(probability / 4) * pauli for pauli in paulis]
        return cls(tuple(kraus), (label,), (label,))

    @classmethod
    def random(cls, input_labels, output_labels, rng, num_kraus=2):
        """Haar-ish random channel from a random isometry split into Kraus blocks."""
        d_in = 2 ** len(tuple(input_labels))
        d_out = 2 ** len(tuple(output_labels))
        ginibre = rng.normal(size=(num_kraus * d_out, d_in)) + 1j * rng.normal(size=(num_kraus * d_out, d_in))
        isometry, _ = np.linalg.qr(ginibre)
        kraus = tuple(isometry[i * d_out:(i + 1) * d_out, :] for i in range(num_kraus))
        return cls(kraus, tuple(input_labels), tuple(output_labels))

    def ignoring(self, memory_label):
        """The same channel with an extra leading input `memory_label` that is traced out."""
        if memory_label in self.input_labels:
            raise ChannelError(f"{memory_label!r} is already an input of {self!r}")
        kraus = tuple(
            np.kron(np.array([[1.0, 0.0]]) if bit == 0 else np.array([[0.0, 1.0]]), operator)
            for bit in (0, 1)
            for operator in self.kraus_operators
        )
        return Channel(kraus, (memory_label,) + self.input_labels, self.output_labels)


def _index(bits):
    index = 0
    for bit in bits:
        index = (index << 1) | int(bit)
    return index
