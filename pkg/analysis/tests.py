"""
Analysis Tests
"""
import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from analysis.contradiction import contradiction_report, phase_error_rate
from analysis.distributions import EmpiricalDistribution, ExactDistribution
from analysis.entropy import binary_entropy, party_marginal, string_entropy
from analysis.equivalence import compiled_equivalence_test
from analysis.exceptions import InsufficientSupport, UnknownAnalysis, UnknownStrategy
from analysis.guessing import eve_guessing, guessing_probability, wilson_interval
from analysis.reports import build_report, parse_analysis_ids, render_report, run_analyses, write_report
from analysis.signalling import BACKWARD, signalling_measure
from analysis.subsets import test_subset_shift as subset_shift
from devices import behaviours
from devices.process import exact_outcomes, run_process2
from protocol.bb84 import run_bb84
from protocol.config import ProtocolConfig, TestSelection
from protocol.example import run_example_protocol
from protocol.exceptions import TranscriptSchemaError
from quantum_core.states import Basis

X, Z = Basis.X, Basis.Z
EXACT = 1e-12


class BinaryEntropyTests(SimpleTestCase):

    def test_endpoints_and_maximum(self):
        self.assertEqual(binary_entropy(0.0), 0.0)
        self.assertEqual(binary_entropy(1.0), 0.0)
        self.assertAlmostEqual(binary_entropy(0.5), 1.0, delta=EXACT)

    def test_eleven_percent(self):
        self.assertAlmostEqual(binary_entropy(0.11), 0.49992, places=5)

    def test_matches_series_oracle(self):
        # h(p) = 1 - (1 / (2 ln 2)) * sum_k (1 - 2p)^(2k) / (k (2k - 1))
        p = 0.11
        u = 1 - 2 * p
        series = sum(u ** (2 * k) / (k * (2 * k - 1)) for k in range(1, 400))
        self.assertAlmostEqual(binary_entropy(p), 1 - series / (2 * math.log(2)), delta=1e-9)

    def test_out_of_range(self):
        with self.assertRaises(ValueError):
            binary_entropy(1.2)


class StringEntropyTests(SimpleTestCase):

    def test_retain_remeasure_has_one_bit(self):
        device = behaviours.retain_remeasure()
        self.assertAlmostEqual(string_entropy(device, [(Z, Z)] * 6, 'shannon'), 1.0, delta=1e-9)
        self.assertAlmostEqual(string_entropy(device, [(Z, Z)] * 6, 'min'), 1.0, delta=1e-9)

    def test_iid_bell_has_one_bit_per_round(self):
        self.assertAlmostEqual(string_entropy(behaviours.iid_bell(), [(Z, Z)] * 6, 'shannon'), 6.0, delta=1e-9)

    def test_shannon_bounds_min_entropy(self):
        rng = np.random.default_rng(1)
        devices = [behaviours.noisy_bell(0.3), behaviours.echo_signalling(), behaviours.random_memoryless(rng)]
        for device in devices:
            for _ in range(3):
                inputs = [(X if rng.random() < 0.5 else Z, X if rng.random() < 0.5 else Z) for _ in range(3)]
                for party in ('A', 'B', 'AB'):
                    shannon = string_entropy(device, inputs, 'shannon', party)
                    self.assertGreaterEqual(shannon + 1e-9, string_entropy(device, inputs, 'min', party))

    def test_retain_remeasure_support_is_two_strings(self):
        for n_rounds in (1, 5, 12):
            for basis in (X, Z):
                distribution = party_marginal(exact_outcomes(behaviours.retain_remeasure(), [(basis, basis)] * n_rounds), 'AB')
                self.assertEqual(len(distribution), 2)
                for probability in distribution.values():
                    self.assertAlmostEqual(probability, 0.5, delta=1e-9)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            string_entropy(behaviours.iid_bell(), [(Z, Z)], 'renyi')


class SignallingTests(SimpleTestCase):

    def test_echo_signals_into_round_two(self):
        report = signalling_measure(ExactDistribution.of_device(behaviours.echo_signalling(), 2))
        self.assertAlmostEqual(report.magnitude(2), 1.0, delta=EXACT)
        witness = report.entry(2, 'A').witness
        self.assertEqual(witness['varied_rounds'], [1])
        self.assertNotEqual(witness['first'][0][0], witness['second'][0][0])
        self.assertLess(report.max_magnitude(BACKWARD), EXACT)

    def test_iid_bell_does_not_signal(self):
        report = signalling_measure(ExactDistribution.of_device(behaviours.iid_bell(), 3))
        self.assertLess(report.max_magnitude(), EXACT)
        self.assertLess(report.max_magnitude(BACKWARD), EXACT)
        self.assertTrue(report.is_complete)

    def test_retain_remeasure_signals_jointly(self):
        report = signalling_measure(ExactDistribution.of_device(behaviours.retain_remeasure(), 2))
        self.assertGreater(report.magnitude(2), 0.0)
        self.assertAlmostEqual(report.entry(2, 'AB').max_tv, 0.5, delta=1e-9)
        self.assertLess(report.entry(2, 'A').max_tv, 1e-9)
        self.assertLess(report.max_magnitude(BACKWARD), 1e-9)

    def test_process1_specs_never_signal(self):
        rng = np.random.default_rng(2)
        specs = [behaviours.bell_pairs(3), behaviours.classical_copy(3), behaviours.classical_copy(3, always_z=True)]
        specs += [behaviours.random_process1_spec(3, rng) for _ in range(20)]
        for spec in specs:
            report = signalling_measure(ExactDistribution.of_device(spec, 3))
            self.assertLess(report.max_magnitude(), EXACT, spec.name)
            self.assertLess(report.max_magnitude(BACKWARD), EXACT, spec.name)

    def test_empirical_missing_settings_are_flagged(self):
        rng = np.random.default_rng(3)
        distribution = EmpiricalDistribution.from_traces([run_process2(behaviours.iid_bell(), [(X, X), (Z, Z)], rng)])
        report = signalling_measure(distribution, lag=1)
        self.assertFalse(report.is_complete)
        with self.assertRaises(InsufficientSupport):
            signalling_measure(distribution, lag=1, require_complete=True)

    def test_empirical_echo(self):
        rng = np.random.default_rng(4)
        pairs = [(a, b) for a in (X, Z) for b in (X, Z)]
        traces = []
        for _ in range(400):
            inputs = [pairs[int(rng.integers(4))] for _ in range(3)]
            traces.append(run_process2(behaviours.echo_signalling(), inputs, rng))
        distribution = EmpiricalDistribution.from_traces(traces)
        self.assertEqual(distribution.total_trials, 400)
        report = signalling_measure(distribution, lag=1)
        self.assertTrue(report.is_complete)
        self.assertAlmostEqual(report.magnitude(2), 1.0, delta=EXACT)

    def test_needs_two_rounds(self):
        with self.assertRaises(ValueError):
            signalling_measure(ExactDistribution.of_device(behaviours.iid_bell(), 1))


class ContradictionTests(SimpleTestCase):

    def test_retain_remeasure(self):
        report = contradiction_report(behaviours.retain_remeasure(), 8)
        self.assertEqual(report.naive_claim.delta_ph, 0.0)
        self.assertEqual(report.naive_claim.claimed_length, 8.0)
        self.assertAlmostEqual(report.actual_shannon, 1.0, delta=1e-9)
        self.assertAlmostEqual(report.actual_minentropy, 1.0, delta=1e-9)
        self.assertAlmostEqual(report.gap, 7.0, delta=1e-9)
        self.assertEqual(report.ebit_budget, 1)
        self.assertLessEqual(report.key_upper_bound, report.ebit_budget)

    def test_iid_bell(self):
        report = contradiction_report(behaviours.iid_bell(), 8)
        self.assertEqual(report.naive_claim.claimed_length, 8.0)
        self.assertAlmostEqual(report.actual_minentropy, 8.0, delta=1e-9)
        self.assertAlmostEqual(report.gap, 0.0, delta=1e-9)

    def test_classical_copy_is_not_a_contradiction(self):
        spec = behaviours.classical_copy(8)
        self.assertAlmostEqual(phase_error_rate(spec, 8), 0.5, delta=1e-9)
        report = contradiction_report(spec, 8)
        self.assertAlmostEqual(report.naive_claim.claimed_length, 0.0, delta=1e-6)
        self.assertAlmostEqual(report.actual_shannon, 1.0, delta=1e-9)
        self.assertEqual(report.ebit_budget, 0)


class TestSubsetShiftTests(SimpleTestCase):

    def test_process1_test_rounds_are_unaffected(self):
        rng = np.random.default_rng(5)
        specs = [behaviours.bell_pairs(4), behaviours.classical_copy(3), behaviours.random_process1_spec(3, rng)]
        for spec in specs:
            self.assertLess(subset_shift(spec, spec.n_rounds).max_tv, 1e-9, spec.name)

    def test_retain_remeasure_witness(self):
        shift = subset_shift(behaviours.retain_remeasure(), 3)
        self.assertGreaterEqual(shift.max_tv, 0.25)
        self.assertTrue(shift.test_rounds)
        self.assertEqual(len(shift.non_test_inputs), 3)


class GuessingTests(SimpleTestCase):

    def assertCopierBroken(self, trials, seed):
        rng = np.random.default_rng(seed)
        transcripts = [run_example_protocol(50, behaviours.even_round_copier(), rng) for _ in range(trials)]
        result = eve_guessing(transcripts, 'copy_decoder')
        self.assertEqual(result.success_rate, 1.0)
        self.assertEqual(result.pa_success_rate, 1.0)
        self.assertTrue(any(t.final_key_a for t in transcripts))

    def test_copy_decoder_breaks_even_round_copier(self):
        # success is exact on every trial, so the trial count only adds coverage
        self.assertCopierBroken(trials=100, seed=6)

    @tag('slow')
    def test_copy_decoder_breaks_even_round_copier_full_run(self):
        self.assertCopierBroken(trials=10 ** 3, seed=6)

    def test_map_decoder_matches_honest_guessing_probability(self):
        exact = guessing_probability(behaviours.bell_pairs(6), 3)
        self.assertEqual(sorted(exact), [0, 1, 2, 3])
        for k, probability in exact.items():
            self.assertAlmostEqual(probability, 2.0 ** -k, delta=EXACT)

    def test_copier_is_fully_guessable(self):
        for probability in guessing_probability(behaviours.even_round_copier(), 2).values():
            self.assertAlmostEqual(probability, 1.0, delta=EXACT)

    def test_map_decoder_on_honest_transcripts(self):
        rng = np.random.default_rng(7)
        trials = 300
        transcripts = [run_example_protocol(3, behaviours.bell_pairs(6), rng) for _ in range(trials)]
        result = eve_guessing(transcripts, 'map_decoder')
        expected = (3 / 4 + 1 / 4 * 1 / 2) ** 3
        # binomial over the trials; 4 sigma is about 0.1 at 300 trials
        sigma = math.sqrt(expected * (1 - expected) / trials)
        self.assertLess(abs(result.success_rate - expected), 4 * sigma)
        low, high = result.interval
        self.assertLess(low, result.success_rate)
        self.assertGreater(high, result.success_rate)

    def test_empty_key_is_trivially_guessed(self):
        for seed in range(64):
            transcript = run_example_protocol(1, behaviours.bell_pairs(2), np.random.default_rng(seed))
            if not transcript.sifted_key_a:
                self.assertEqual(eve_guessing([transcript], 'map_decoder').success_rate, 1.0)
                return
        self.fail("no empty sifted key in 64 seeds")

    def test_unknown_strategy(self):
        transcript = run_example_protocol(1, behaviours.iid_bell(), np.random.default_rng(0))
        with self.assertRaises(UnknownStrategy):
            eve_guessing([transcript], 'oracle')

    def test_batch_must_share_config(self):
        rng = np.random.default_rng(8)
        with self.assertRaises(TranscriptSchemaError):
            eve_guessing([
                run_example_protocol(1, behaviours.iid_bell(), rng),
                run_example_protocol(2, behaviours.iid_bell(), rng),
            ], 'copy_decoder')

    def test_wilson_interval(self):
        low, high = wilson_interval(50, 100)
        self.assertLess(low, 0.5)
        self.assertGreater(high, 0.5)
        self.assertEqual(wilson_interval(0, 0), (0.0, 1.0))


class CompiledEquivalenceTests(SimpleTestCase):

    def equivalence(self, make_behaviour, samples, seed):
        rng = np.random.default_rng(seed)
        inputs = [(X if rng.random() < 0.5 else Z, X if rng.random() < 0.5 else Z) for _ in range(20)]
        return compiled_equivalence_test(make_behaviour(rng), inputs, samples, rng)

    # A true null fails at alpha 1e-3 once in a thousand seeds; the seeds are fixed,
    # so fewer samples only weaken power against a wrong compilation.
    def test_iid_bell(self):
        result = self.equivalence(lambda rng: behaviours.iid_bell(), 300, seed=9)
        self.assertEqual(result.impossible_outcomes, 0)
        self.assertTrue(result.passes())

    def test_random_memoryless(self):
        result = self.equivalence(behaviours.random_memoryless, 300, seed=10)
        self.assertTrue(result.passes())
        self.assertEqual(len(result.round_p_values), 20)

    @tag('slow')
    def test_full_sample_runs(self):
        for make_behaviour, seed in ((lambda rng: behaviours.iid_bell(), 9), (behaviours.random_memoryless, 10)):
            result = self.equivalence(make_behaviour, 10 ** 5, seed=seed)
            self.assertEqual(result.impossible_outcomes, 0)
            self.assertTrue(result.passes())


class ReportTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(11)
        config = ProtocolConfig(n_rounds=12, basis_bias=0.5)
        self.transcripts = [run_bb84(config, behaviours.iid_bell(), rng) for _ in range(5)]

    def test_parse_ids(self):
        self.assertEqual(parse_analysis_ids('qber, naive_key_claim'), ['qber', 'naive_key_claim'])
        with self.assertRaises(UnknownAnalysis):
            parse_analysis_ids('qber,entropy')

    def test_run_and_render(self):
        results = run_analyses('qber,naive_key_claim,eve_guessing,signalling,contradiction', self.transcripts)
        report = build_report({'device': 'iid_bell', 'trials': 5}, results)
        self.assertEqual(report['analyses']['qber']['metrics']['test_qber'], 0.0)
        self.assertAlmostEqual(report['analyses']['contradiction']['metrics']['gap'], 0.0, delta=1e-9)
        rows = render_report(report, 'csv').splitlines()
        self.assertEqual(rows[0], 'analysis,metric,value')
        self.assertIn('header,trials,5', rows)
        with tempfile.TemporaryDirectory() as directory:
            path = write_report(report, Path(directory), 'json')
            self.assertEqual(path.name, 'report.json')
            self.assertEqual(path.read_text(), render_report(report, 'json'))

    def test_contradiction_uses_recorded_device_params(self):
        rng = np.random.default_rng(12)
        config = ProtocolConfig(n_rounds=8, test_selection=TestSelection.spot_check(0.25))
        transcripts = [
            replace(run_bb84(config, behaviours.noisy_bell(0.5), rng), device_params={'depolarizing': 0.5})
            for _ in range(3)
        ]
        metrics = run_analyses('contradiction', transcripts)[0].metrics
        self.assertAlmostEqual(metrics['delta_ph'], phase_error_rate(behaviours.noisy_bell(0.5), 8), delta=EXACT)
        self.assertAlmostEqual(metrics['delta_ph'], 0.25, delta=EXACT)
        self.assertNotAlmostEqual(metrics['delta_ph'], phase_error_rate(behaviours.noisy_bell(), 8), places=6)

    def test_batch_must_share_device_params(self):
        rng = np.random.default_rng(13)
        transcripts = [run_example_protocol(2, behaviours.bell_pairs(4), rng) for _ in range(2)]
        with self.assertRaises(TranscriptSchemaError):
            eve_guessing([transcripts[0], replace(transcripts[1], device_params={'n_rounds': 4})], 'map_decoder')
