"""
Devices Tests
"""
import itertools

import numpy as np
from django.test import SimpleTestCase, override_settings, tag

from devices import behaviours
from devices.exceptions import EnumerationBudgetExceeded, LabelMismatch, MemoryNotTrivial, RoundCountMismatch, UnknownDevice
from devices.process import (
    Process1Spec,
    compile_trivial_memory,
    enumerate_process1,
    enumerate_process2,
    run_process1,
    run_process2,
)
from devices.registry import DeviceId, get_device
from quantum_core.operations import bell_state
from quantum_core.states import Basis

X, Z = Basis.X, Basis.Z


def all_inputs(n_rounds):
    pairs = list(itertools.product((X, Z), repeat=2))
    return [list(seq) for seq in itertools.product(pairs, repeat=n_rounds)]


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


class Process2ExecutionTests(SimpleTestCase):

    def assertAllOutputsEqual(self, trials, seed):
        rng = np.random.default_rng(seed)
        all_zero = 0
        for _ in range(trials):
            trace = run_process2(behaviours.retain_remeasure(), [(X, X)] * 10, rng)
            outputs = {bit for pair in trace.outputs() for bit in pair}
            self.assertEqual(len(outputs), 1)
            all_zero += outputs == {0}
        # fair coin per trial; 3 sigma is 0.015 at 10^4 trials
        sigma = np.sqrt(0.25 / trials)
        self.assertLess(abs(all_zero / trials - 0.5), 3 * sigma)

    def test_retain_remeasure_all_outputs_equal(self):
        self.assertAllOutputsEqual(trials=2000, seed=1)

    @tag('slow')
    def test_retain_remeasure_all_outputs_equal_full_run(self):
        self.assertAllOutputsEqual(trials=10 ** 4, seed=1)

    def test_retain_remeasure_exact_all_equal(self):
        for basis in (X, Z):
            distribution = enumerate_process2(behaviours.retain_remeasure(), [(basis, basis)] * 5)
            self.assertEqual(set(distribution), {((0, 0),) * 5, ((1, 1),) * 5})
            for probability in distribution.values():
                self.assertAlmostEqual(probability, 0.5, delta=1e-12)

    def test_echo_outputs_previous_input(self):
        rng = np.random.default_rng(2)
        trace = run_process2(behaviours.echo_signalling(), [(X, Z), (Z, X)], rng)
        self.assertEqual(trace.rounds[1].output_a, 0)
        self.assertEqual(trace.rounds[1].output_b, 1)

    def test_echo_first_round_uniform(self):
        distribution = enumerate_process2(behaviours.echo_signalling(), [(X, Z)])
        self.assertEqual(len(distribution), 4)
        for probability in distribution.values():
            self.assertAlmostEqual(probability, 0.25, delta=1e-12)

    def test_iid_bell_matching_bases_agree(self):
        rng = np.random.default_rng(3)
        inputs = [(X, X), (Z, Z), (X, Z), (Z, Z), (X, X)]
        for _ in range(50):
            trace = run_process2(behaviours.iid_bell(), inputs, rng)
            for record in trace.rounds:
                if record.input_a == record.input_b:
                    self.assertEqual(record.output_a, record.output_b)

    def test_even_round_copier_repeats_odd_outputs(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            odd = [(X if rng.random() < 0.5 else Z, X if rng.random() < 0.5 else Z) for _ in range(4)]
            inputs = [pair for pair in odd for _ in range(2)]
            trace = run_process2(behaviours.even_round_copier(), inputs, rng)
            for k in range(0, 8, 2):
                self.assertEqual(trace.rounds[k].output_a, trace.rounds[k + 1].output_a)
                self.assertEqual(trace.rounds[k].output_b, trace.rounds[k + 1].output_b)

    def test_inputs_requested_only_after_previous_round(self):
        log = []

        class Probe(behaviours.RetainRemeasure):
            def emit_memory(self, party, round_index, basis, outcome):
                log.append(('emit', round_index, party))
                return super().emit_memory(party, round_index, basis, outcome)

        def stream():
            for j in range(1, 5):
                log.append(('request', j))
                yield (X, Z)

        run_process2(Probe(), stream(), np.random.default_rng(5))
        for j in range(2, 5):
            requested = log.index(('request', j))
            self.assertGreater(requested, log.index(('emit', j - 1, 'A')))
            self.assertGreater(requested, log.index(('emit', j - 1, 'B')))
            self.assertNotIn(('emit', j, 'A'), log[:requested])

    def test_empty_inputs_rejected(self):
        with self.assertRaises(RoundCountMismatch):
            run_process2(behaviours.iid_bell(), [], np.random.default_rng(0))

    def test_snapshots_are_opt_in(self):
        rng = np.random.default_rng(6)
        self.assertEqual(run_process2(behaviours.iid_bell(), [(X, X)] * 2, rng).snapshots, ())
        traced = run_process2(behaviours.iid_bell(), [(X, X)] * 2, rng, snapshots=True)
        self.assertEqual(len(traced.snapshots), 2)

    def test_memory_channel_label_mismatch(self):
        class Broken(behaviours.IidBell):
            def memory_channel(self, party, round_index):
                from quantum_core.states import Channel
                return Channel.identity([party])

        with self.assertRaises(LabelMismatch):
            run_process2(Broken(), [(X, X)] * 2, np.random.default_rng(0))

    @override_settings(ENUMERATION_MAX_ROUNDS=4)
    def test_enumeration_round_budget(self):
        with self.assertRaises(EnumerationBudgetExceeded):
            enumerate_process2(behaviours.iid_bell(), [(Z, Z)] * 5)


class Process1ExecutionTests(SimpleTestCase):

    def test_bell_pairs_all_x(self):
        distribution = enumerate_process1(behaviours.bell_pairs(3), [(X, X)] * 3)
        self.assertEqual(len(distribution), 8)
        for outputs, probability in distribution.items():
            self.assertTrue(all(a == b for a, b in outputs))
            self.assertAlmostEqual(probability, 1 / 8, delta=1e-12)

    def test_classical_copy_in_key_basis(self):
        distribution = enumerate_process1(behaviours.classical_copy(4), [(Z, Z)] * 4)
        self.assertEqual(set(distribution), {((0, 0),) * 4, ((1, 1),) * 4})

    def test_classical_copy_in_x_is_uniform(self):
        distribution = enumerate_process1(behaviours.classical_copy(3), [(X, X)] * 3)
        self.assertEqual(len(distribution), 64)
        for probability in distribution.values():
            self.assertAlmostEqual(probability, 1 / 64, delta=1e-12)

    def test_untrusted_classical_copy_ignores_inputs(self):
        rng = np.random.default_rng(7)
        spec = behaviours.classical_copy(4, always_z=True)
        for inputs in ([(X, Z)] * 4, [(Z, Z), (X, X), (Z, X), (X, Z)]):
            distribution = enumerate_process1(spec, inputs)
            self.assertEqual(set(distribution), {((0, 0),) * 4, ((1, 1),) * 4})
            trace = run_process1(spec, inputs, rng)
            self.assertEqual(len({bit for pair in trace.outputs() for bit in pair}), 1)

    def test_single_pair_mismatched_bases(self):
        distribution = enumerate_process1(behaviours.bell_pairs(1), [(X, Z)])
        self.assertEqual(len(distribution), 4)
        for probability in distribution.values():
            self.assertAlmostEqual(probability, 0.25, delta=1e-12)

    def test_measurement_order_does_not_matter(self):
        rng = np.random.default_rng(8)
        specs = [behaviours.bell_pairs(3), behaviours.classical_copy(3)]
        specs += [behaviours.random_process1_spec(3, rng) for _ in range(3)]
        specs.append(behaviours.mixed_instrument_spec(2, rng))
        for spec in specs:
            inputs = [(X if rng.random() < 0.5 else Z, X if rng.random() < 0.5 else Z) for _ in range(spec.n_rounds)]
            reference = enumerate_process1(spec, inputs)
            for order in itertools.permutations(range(1, spec.n_rounds + 1)):
                shuffled = enumerate_process1(spec, inputs, order=order)
                self.assertLess(total_variation(reference, shuffled), 1e-9)

    def test_sampled_process1_matches_enumeration_statistics(self):
        rng = np.random.default_rng(9)
        spec = behaviours.bell_pairs(2)
        counts = {}
        for _ in range(400):
            trace = run_process1(spec, [(X, X), (Z, Z)], rng, order=(2, 1))
            counts[trace.outputs()] = counts.get(trace.outputs(), 0) + 1
        self.assertEqual(set(counts), set(enumerate_process1(spec, [(X, X), (Z, Z)])))

    def test_round_count_mismatch(self):
        with self.assertRaises(RoundCountMismatch):
            run_process1(behaviours.bell_pairs(2), [(X, X)], np.random.default_rng(0))

    def test_factors_must_cover_registers(self):
        with self.assertRaises(LabelMismatch):
            Process1Spec(factors=(bell_state(('A1', 'B2')),), n_rounds=1)

    def test_joint_state_of_bell_pairs(self):
        joint = behaviours.bell_pairs(2).joint_state
        self.assertEqual(joint.register_labels, ('A1', 'A2', 'B1', 'B2'))
        self.assertAlmostEqual(joint.purity(), 1.0, delta=1e-9)


class CompilationTests(SimpleTestCase):

    def assertCompiledMatches(self, behaviour, n_rounds):
        spec = compile_trivial_memory(behaviour, n_rounds)
        for inputs in all_inputs(n_rounds):
            direct = enumerate_process2(behaviour, inputs)
            deferred = enumerate_process1(spec, inputs)
            self.assertLess(total_variation(direct, deferred), 1e-9)

    def test_iid_bell_compiles_to_bell_pairs(self):
        spec = compile_trivial_memory(behaviours.iid_bell(), 3)
        expected = behaviours.bell_pairs(3).joint_state.matrix
        self.assertTrue(np.allclose(spec.joint_state.matrix, expected, atol=1e-9))
        self.assertCompiledMatches(behaviours.iid_bell(), 3)

    def test_depolarizing_memoryless_behaviour(self):
        self.assertCompiledMatches(behaviours.depolarized_memoryless(0.3), 3)

    def test_random_memoryless_behaviour(self):
        self.assertCompiledMatches(behaviours.random_memoryless(np.random.default_rng(10)), 3)

    def test_memory_dependent_behaviours_rejected(self):
        for behaviour in (behaviours.retain_remeasure(), behaviours.even_round_copier(), behaviours.echo_signalling()):
            with self.assertRaises(MemoryNotTrivial):
                compile_trivial_memory(behaviour, 3)


class RegistryTests(SimpleTestCase):

    def test_known_ids(self):
        for device_id in DeviceId.values:
            self.assertIsNotNone(get_device(device_id, 2))

    def test_unknown_id(self):
        with self.assertRaises(UnknownDevice):
            get_device('foo', 2)

    def test_ebit_budgets(self):
        self.assertEqual(get_device('retain_remeasure', 8).ebit_budget(8), 1)
        self.assertEqual(get_device('iid_bell', 8).ebit_budget(8), 8)
        self.assertEqual(get_device('even_copier', 8).ebit_budget(8), 4)
        self.assertEqual(get_device('classical_copy', 8).ebit_budget(8), 0)
