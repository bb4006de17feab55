"""
Quantum Core Tests
"""
import numpy as np
from django.test import SimpleTestCase

from quantum_core.exceptions import ChannelError, InvalidState, UnknownLabel, ZeroProbabilityBranch
from quantum_core.operations import (
    apply_channel,
    basis_state,
    bell_state,
    maximally_mixed,
    measure,
    measure_all_branches,
    outcome_distribution,
    partial_trace,
    project,
    random_density,
    random_state,
    tensor,
    trace_of,
)
from quantum_core.states import Basis, Channel, DensityOperator, Ensemble, Instrument, StateVector

EXACT = 1e-12
STRUCTURAL = 1e-9


class StateConstructionTests(SimpleTestCase):

    def test_bell_state_amplitudes(self):
        state = bell_state()
        expected = np.array([1, 0, 0, 1]) / np.sqrt(2)
        self.assertTrue(np.allclose(state.amplitudes, expected, atol=EXACT))
        self.assertEqual(state.register_labels, ('A', 'B'))

    def test_bell_state_perfectly_correlated_in_both_bases(self):
        for basis in Basis:
            distribution = outcome_distribution(bell_state(), {'A': basis, 'B': basis})
            self.assertEqual(set(distribution), {(0, 0), (1, 1)})
            for probability in distribution.values():
                self.assertAlmostEqual(probability, 0.5, delta=EXACT)

    def test_rejects_unnormalized_vector(self):
        with self.assertRaises(InvalidState):
            StateVector(np.array([1.0, 1.0]), ('A',))

    def test_rejects_duplicate_labels(self):
        with self.assertRaises(InvalidState):
            StateVector(np.array([1, 0, 0, 0]), ('A', 'A'))

    def test_rejects_non_positive_density(self):
        with self.assertRaises(InvalidState):
            DensityOperator(np.diag([1.5, -0.5]), ('A',))

    def test_instrument_projectors(self):
        for basis in Basis:
            instrument = Instrument.for_basis(basis)
            total = instrument.projectors[0] + instrument.projectors[1]
            self.assertTrue(np.allclose(total, np.eye(2), atol=STRUCTURAL))

    def test_rejects_incomplete_instrument(self):
        with self.assertRaises(InvalidState):
            Instrument(basis=Basis.Z, projectors=(np.diag([1, 0]), np.diag([1, 0])))


class MeasurementTests(SimpleTestCase):

    def test_eigenstate_measured_in_own_basis(self):
        branch = measure(basis_state([0], ['A']), 'A', Basis.Z, 0.99)
        self.assertEqual(branch.outcome, 0)
        self.assertAlmostEqual(branch.probability, 1.0, delta=EXACT)
        self.assertTrue(np.allclose(branch.post_state.amplitudes, [1, 0]))

    def test_plus_state_in_z_is_unbiased(self):
        plus = basis_state([0], ['A'], Basis.X)
        zero, one = measure_all_branches(plus, 'A', Basis.Z)
        self.assertAlmostEqual(zero.probability, 0.5, delta=EXACT)
        self.assertAlmostEqual(one.probability, 0.5, delta=EXACT)
        self.assertEqual(measure(plus, 'A', Basis.Z, 0.2).outcome, 0)
        self.assertEqual(measure(plus, 'A', Basis.Z, 0.7).outcome, 1)

    def test_bell_state_x_measurement_collapses_both_halves(self):
        branch = project(bell_state(), 'A', Basis.X, 0)
        self.assertAlmostEqual(branch.probability, 0.5, delta=EXACT)
        plus_plus = basis_state([0, 0], ['A', 'B'], Basis.X)
        overlap = abs(np.vdot(plus_plus.amplitudes, branch.post_state.amplitudes))
        self.assertAlmostEqual(overlap, 1.0, delta=EXACT)

    def test_zero_probability_branch_is_flagged(self):
        zero, one = measure_all_branches(basis_state([0], ['A']), 'A', Basis.Z)
        self.assertFalse(zero.is_null)
        self.assertTrue(one.is_null)
        self.assertEqual(one.probability, 0.0)

    def test_deterministic_projection_onto_impossible_outcome(self):
        with self.assertRaises(ZeroProbabilityBranch):
            project(basis_state([0], ['A']), 'A', Basis.Z, 1)

    def test_bell_branches_in_z(self):
        zero, one = measure_all_branches(bell_state(), 'A', Basis.Z)
        self.assertTrue(np.allclose(zero.post_state.amplitudes, [1, 0, 0, 0], atol=EXACT))
        self.assertTrue(np.allclose(one.post_state.amplitudes, [0, 0, 0, 1], atol=EXACT))

    def test_unknown_label(self):
        with self.assertRaises(UnknownLabel):
            measure(bell_state(), 'C', Basis.Z, 0.1)

    def test_density_and_ensemble_agree_with_vector(self):
        rng = np.random.default_rng(5)
        state = random_state(['A', 'B'], rng)
        vector = measure_all_branches(state, 'B', Basis.X)
        density = measure_all_branches(state.to_density(), 'B', Basis.X)
        ensemble = measure_all_branches(Ensemble(((1.0, state),), ('A', 'B')), 'B', Basis.X)
        for v, d, e in zip(vector, density, ensemble):
            self.assertAlmostEqual(v.probability, d.probability, delta=STRUCTURAL)
            self.assertAlmostEqual(v.probability, e.probability, delta=STRUCTURAL)
            self.assertTrue(np.allclose(v.post_state.to_density().matrix, d.post_state.matrix, atol=STRUCTURAL))

    def test_classical_mixture_measured_in_z(self):
        zeros = basis_state([0, 0, 0], ['A1', 'A2', 'B1'])
        ones = basis_state([1, 1, 1], ['A1', 'A2', 'B1'])
        mixture = Ensemble(((0.5, zeros), (0.5, ones)), ('A1', 'A2', 'B1'))
        distribution = outcome_distribution(mixture, dict.fromkeys(mixture.register_labels, Basis.Z))
        self.assertEqual(distribution, {(0, 0, 0): 0.5, (1, 1, 1): 0.5})


class ChannelTests(SimpleTestCase):

    def test_identity_channel(self):
        state = bell_state()
        result = apply_channel(Channel.identity(['A']), state)
        self.assertTrue(np.allclose(result.amplitudes, state.amplitudes))

    def test_fully_depolarizing_channel(self):
        result = apply_channel(Channel.depolarizing('A', 1.0), basis_state([0], ['A']))
        self.assertTrue(np.allclose(result.matrix, maximally_mixed(['A']).matrix, atol=STRUCTURAL))

    def test_random_channel_preserves_trace(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            channel = Channel.random(['A', 'B'], ['A'], rng, num_kraus=3)
            result = apply_channel(channel, random_density(['A', 'B', 'C'], rng))
            self.assertAlmostEqual(trace_of(result), 1.0, delta=STRUCTURAL)
            self.assertEqual(result.register_labels, ('A', 'C'))

    def test_incomplete_kraus_set(self):
        with self.assertRaises(ChannelError):
            Channel((np.diag([1, 0]),), ('A',), ('A',))

    def test_label_mismatch(self):
        with self.assertRaises(ChannelError):
            apply_channel(Channel.identity(['C']), bell_state())

    def test_reduction_moves_memory_into_register(self):
        memory = basis_state([1], ['M'])
        incoming = basis_state([0], ['Q'])
        result = apply_channel(Channel.reduction(['M', 'Q'], ['M'], ['Q']), tensor(memory, incoming))
        self.assertEqual(result.register_labels, ('Q',))
        self.assertTrue(np.allclose(result.matrix, np.diag([0, 1]), atol=STRUCTURAL))

    def test_memory_dependence_detection(self):
        self.assertTrue(Channel.depolarizing('Q', 0.3).ignoring('M').ignores('M'))
        self.assertFalse(Channel.reduction(['M', 'Q'], ['M'], ['Q']).ignores('M'))
        self.assertTrue(Channel.reduction(['M', 'Q'], ['Q']).ignores('M'))


class QuantumCorePropertyTests(SimpleTestCase):
    """Randomized invariants of the state algebra."""

    cases = 1000

    def test_randomized_invariants(self):
        rng = np.random.default_rng(20240601)
        for _ in range(self.cases):
            width = int(rng.integers(1, 4))
            labels = [f"q{i}" for i in range(width)]
            state = random_state(labels, rng)
            if rng.random() < 0.5:
                state = random_density(labels, rng, rank=int(rng.integers(1, 3)))
            label = labels[int(rng.integers(width))]
            basis = Basis.X if rng.random() < 0.5 else Basis.Z

            self.assertAlmostEqual(trace_of(state), 1.0, delta=STRUCTURAL)
            branches = measure_all_branches(state, label, basis)
            for branch in branches:
                self.assertGreaterEqual(branch.probability, 0.0)
                self.assertLessEqual(branch.probability, 1.0 + STRUCTURAL)
            self.assertAlmostEqual(sum(b.probability for b in branches), 1.0, delta=STRUCTURAL)

            # repeatability
            branch = measure(state, label, basis, float(rng.random()))
            again = measure_all_branches(branch.post_state, label, basis)
            self.assertAlmostEqual(again[branch.outcome].probability, 1.0, delta=STRUCTURAL)
            self.assertTrue(again[1 - branch.outcome].is_null)

            # mutual unbiasedness
            eigen = basis_state([int(rng.integers(2))], ['e'], basis)
            for other in measure_all_branches(eigen, 'e', basis.other):
                self.assertAlmostEqual(other.probability, 0.5, delta=EXACT)

            # tensor then partial trace recovers the first factor
            extra = random_state(['x'], rng)
            reduced = partial_trace(tensor(state, extra), labels)
            self.assertTrue(np.allclose(reduced.matrix, state.to_density().matrix, atol=STRUCTURAL))
