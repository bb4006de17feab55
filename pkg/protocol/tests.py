"""
Protocol Tests
"""
from dataclasses import replace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from devices import behaviours
from devices.exceptions import RoundCountMismatch
from protocol.bb84 import run_bb84
from protocol.config import ProtocolConfig, TestSelection
from protocol.example import run_example_protocol
from protocol.exceptions import (
    InvalidProtocolConfig,
    LengthViolation,
    NoTestRounds,
    RoundParityError,
    TranscriptSchemaError,
)
from protocol.postprocessing import KeyClaim, naive_key_claim, privacy_amplify, select_test_rounds
from protocol.transcripts import AnnouncementKind, Transcript, bits_to_hex, dumps_transcript, hex_to_bits, loads_transcript
from quantum_core.states import Basis

X, Z = Basis.X, Basis.Z


class TestSelectionTests(SimpleTestCase):

    def test_fixed_subset_of_every_round(self):
        rounds = select_test_rounds(TestSelection.fixed_subset(12), 12, np.random.default_rng(0))
        self.assertEqual(rounds, tuple(range(1, 13)))

    def test_spot_check_never(self):
        self.assertEqual(select_test_rounds(TestSelection.spot_check(0.0), 50, np.random.default_rng(0)), ())

    def test_spot_check_rate(self):
        n = 10 ** 4
        rounds = select_test_rounds(TestSelection.spot_check(0.25), n, np.random.default_rng(1))
        sigma = np.sqrt(0.25 * 0.75 / n)
        self.assertLess(abs(len(rounds) / n - 0.25), 5 * sigma)
        self.assertEqual(list(rounds), sorted(set(rounds)))

    def test_config_rejects_out_of_range_values(self):
        with self.assertRaises(InvalidProtocolConfig):
            ProtocolConfig(n_rounds=10, test_selection=TestSelection.spot_check(0.0))
        with self.assertRaises(InvalidProtocolConfig):
            ProtocolConfig(n_rounds=10, test_selection=TestSelection.fixed_subset(10))
        with self.assertRaises(InvalidProtocolConfig):
            ProtocolConfig(n_rounds=10, basis_bias=1.5)
        with self.assertRaises(InvalidProtocolConfig):
            ProtocolConfig(n_rounds=0)
        with self.assertRaises(InvalidProtocolConfig):
            ProtocolConfig(n_rounds=10, pa_output_length=-1)

    def test_config_dict_form(self):
        config = ProtocolConfig(n_rounds=30, test_selection=TestSelection.fixed_subset(6), pa_output_length=4)
        self.assertEqual(ProtocolConfig.from_dict(config.to_dict()), config)
        self.assertEqual(config.to_dict()['test_selection'], {'mode': 'fixed_subset', 'size': 6})


class PrivacyAmplificationTests(SimpleTestCase):

    def test_small_toeplitz_product(self):
        self.assertEqual(privacy_amplify((1, 0, 1), 2, (1, 0, 0, 1)), (1, 1))

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        key = tuple(int(b) for b in rng.integers(0, 2, 32))
        seed = tuple(int(b) for b in rng.integers(0, 2, 32 + 8 - 1))
        self.assertEqual(privacy_amplify(key, 8, seed), privacy_amplify(key, 8, seed))

    def test_empty_output(self):
        self.assertEqual(privacy_amplify((1, 1, 0), 0, ()), ())

    def test_length_violations(self):
        with self.assertRaises(LengthViolation):
            privacy_amplify((1, 0), 3, (0,) * 4)
        with self.assertRaises(LengthViolation):
            privacy_amplify((1, 0, 1, 1), 2, (0,) * 4)

    def test_collision_rate_of_distinct_keys(self):
        rng = np.random.default_rng(3)
        n, m, trials = 16, 4, 4000
        collisions = 0
        for _ in range(trials):
            first = rng.integers(0, 2, n)
            second = first.copy()
            flips = rng.integers(0, 2, n)
            flips[int(rng.integers(n))] = 1
            second = (second + flips) % 2
            seed = tuple(int(b) for b in rng.integers(0, 2, n + m - 1))
            collisions += privacy_amplify(first, m, seed) == privacy_amplify(second, m, seed)
        p = 2.0 ** -m
        self.assertLessEqual(collisions / trials, p + 3 * np.sqrt(p * (1 - p) / trials))


class KeyClaimTests(SimpleTestCase):

    def test_no_phase_errors(self):
        self.assertEqual(KeyClaim.naive(0.0, 100).claimed_length, 100)

    def test_maximal_phase_errors(self):
        self.assertAlmostEqual(KeyClaim.naive(0.5, 64).claimed_length, 0.0, delta=1e-12)

    def test_eleven_percent(self):
        claim = KeyClaim.naive(0.11, 1000)
        self.assertAlmostEqual(claim.claimed_length, 500.084, places=2)
        self.assertEqual(claim.formula_id, 'naive_cpa')

    def test_requires_test_rounds(self):
        transcript = Transcript(
            protocol='bb84', device='iid_bell', config={}, rounds=(), public_log=(),
            test_statistics={'test': {'basis': 'X', 'rounds': 0, 'errors': 0, 'qber': None}},
        )
        with self.assertRaises(NoTestRounds):
            naive_key_claim(transcript)


class BB84Tests(SimpleTestCase):

    def test_iid_bell_has_no_test_errors(self):
        config = ProtocolConfig(n_rounds=200, test_selection=TestSelection.spot_check(0.25))
        transcript = run_bb84(config, behaviours.iid_bell(), np.random.default_rng(4))
        stats = transcript.test_statistics['test']
        self.assertGreater(stats['rounds'], 0)
        self.assertEqual(stats['errors'], 0)
        self.assertEqual(transcript.sifted_key_a, transcript.sifted_key_b)
        self.assertEqual(naive_key_claim(transcript).claimed_length, transcript.n_key)
        self.assertEqual(transcript.final_key_a, transcript.final_key_b)
        self.assertEqual(len(transcript.final_key_a), transcript.n_key)

    def test_sifted_rounds_are_non_test_key_basis_rounds(self):
        config = ProtocolConfig(n_rounds=60, test_selection=TestSelection.spot_check(0.3), basis_bias=0.5)
        transcript = run_bb84(config, behaviours.noisy_bell(0.2), np.random.default_rng(5))
        self.assertEqual(len(transcript.sifted_key_a), len(transcript.sifted_key_b))
        for j in transcript.sifted_rounds:
            record = transcript.round(j)
            self.assertNotIn(j, transcript.test_rounds)
            self.assertEqual((record.input_a, record.input_b), (Z, Z))
        for j in transcript.test_rounds:
            self.assertEqual((transcript.round(j).input_a, transcript.round(j).input_b), (X, X))

    def test_fixed_subset_size(self):
        config = ProtocolConfig(n_rounds=20, test_selection=TestSelection.fixed_subset(5))
        transcript = run_bb84(config, behaviours.bell_pairs(20), np.random.default_rng(6))
        self.assertEqual(len(transcript.test_rounds), 5)
        self.assertEqual(len(transcript.sifted_rounds), 15)

    def test_announcements_follow_measurements(self):
        config = ProtocolConfig(n_rounds=30, basis_bias=0.5)
        transcript = run_bb84(config, behaviours.iid_bell(), np.random.default_rng(7))
        steps = [a.step for a in transcript.public_log]
        self.assertEqual(steps, sorted(steps))
        for announcement in transcript.public_log:
            if announcement.round_index is not None:
                self.assertGreaterEqual(announcement.step, announcement.round_index)
                field = {'basis': 'input', 'output': 'output'}[str(announcement.kind)] + f"_{announcement.party.lower()}"
                self.assertTrue(transcript.round(announcement.round_index).is_announced(field))
        self.assertEqual(len(transcript.announcements(AnnouncementKind.BASIS)), 60)
        self.assertEqual(len(transcript.announcements(AnnouncementKind.PA_SEED)), 1)

    def test_echo_test_errors_follow_previous_inputs(self):
        config = ProtocolConfig(n_rounds=80, test_selection=TestSelection.spot_check(0.3), basis_bias=0.5)
        transcript = run_bb84(config, behaviours.echo_signalling(), np.random.default_rng(8))
        checked = 0
        for j in transcript.test_rounds:
            if j == 1:
                continue
            record, previous = transcript.round(j), transcript.round(j - 1)
            self.assertEqual(record.output_a != record.output_b, previous.input_a != previous.input_b)
            checked += 1
        self.assertGreater(checked, 0)

    def test_process1_round_count_must_match(self):
        with self.assertRaises(RoundCountMismatch):
            run_bb84(ProtocolConfig(n_rounds=6), behaviours.bell_pairs(5), np.random.default_rng(0))

    def test_requires_test_selection(self):
        with self.assertRaises(InvalidProtocolConfig):
            run_bb84(ProtocolConfig(n_rounds=6, test_selection=None), behaviours.iid_bell(), np.random.default_rng(0))

    def test_requested_length_is_capped(self):
        config = ProtocolConfig(n_rounds=10, test_selection=TestSelection.fixed_subset(2), pa_output_length=9)
        transcript = run_bb84(config, behaviours.iid_bell(), np.random.default_rng(9))
        self.assertEqual(len(transcript.final_key_a), 8)

    def test_retained_memory_passes_tests_and_repeats_key_bits(self):
        config = ProtocolConfig(n_rounds=8, test_selection=TestSelection.fixed_subset(3), basis_bias=1.0)
        for seed in range(4):
            with mock.patch('protocol.bb84.select_test_rounds', return_value=(1, 2, 3)):
                transcript = run_bb84(config, behaviours.retain_remeasure(), np.random.default_rng(seed))
            self.assertEqual(transcript.test_rounds, (1, 2, 3))
            self.assertEqual(transcript.sifted_rounds, (4, 5, 6, 7, 8))
            stats = transcript.test_statistics['test']
            self.assertEqual((stats['rounds'], stats['errors']), (3, 0))
            # every key round re-measures the same retained qubit
            self.assertEqual(len(set(transcript.sifted_key_a)), 1)
            self.assertEqual(len(set(transcript.sifted_key_b)), 1)
            self.assertEqual(naive_key_claim(transcript).claimed_length, 5)


class ExampleProtocolTests(SimpleTestCase):

    def test_even_rounds_copy_odd_rounds(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            transcript = run_example_protocol(10, behaviours.even_round_copier(), rng)
            announced = transcript.announced_outputs()
            for j in range(2, 21, 2):
                odd = transcript.round(j - 1)
                self.assertEqual(announced[j, 'A'], odd.output_a)
                self.assertEqual(announced[j, 'B'], odd.output_b)
            self.assertTrue(all(j % 2 for j, _ in transcript.announced_bases()))

    def test_single_pair_leaks_key_basis_outcomes(self):
        found = False
        for seed in range(64):
            transcript = run_example_protocol(1, behaviours.even_round_copier(), np.random.default_rng(seed))
            first = transcript.round(1)
            if (first.input_a, first.input_b) != (Z, Z):
                continue
            found = True
            announced = transcript.announced_outputs()
            self.assertEqual(announced[2, 'A'], first.output_a)
            self.assertEqual(announced[2, 'B'], first.output_b)
            self.assertEqual(transcript.sifted_key_a, (first.output_a,))
            break
        self.assertTrue(found)

    def test_honest_pairs_give_matching_keys(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            transcript = run_example_protocol(6, behaviours.bell_pairs(12), rng)
            self.assertEqual(transcript.sifted_key_a, transcript.sifted_key_b)
            self.assertEqual(transcript.test_statistics['test']['errors'], 0)
            self.assertTrue(all(j % 2 for j in transcript.sifted_rounds + transcript.test_rounds))

    def test_round_parity(self):
        with self.assertRaises(RoundParityError):
            run_example_protocol(3, behaviours.bell_pairs(5), np.random.default_rng(0))
        with self.assertRaises(RoundParityError):
            run_example_protocol(0, behaviours.iid_bell(), np.random.default_rng(0))


class TranscriptSerializationTests(SimpleTestCase):

    def setUp(self):
        config = ProtocolConfig(n_rounds=24, basis_bias=0.5)
        self.transcript = run_bb84(config, behaviours.iid_bell(), np.random.default_rng(12))

    def test_hex_encoding(self):
        self.assertEqual(bits_to_hex((1, 0, 1)), {'hex': '5', 'length': 3})
        self.assertEqual(hex_to_bits({'hex': '03', 'length': 5}), (0, 0, 0, 1, 1))
        self.assertEqual(hex_to_bits(bits_to_hex(())), ())

    def test_reload(self):
        text = dumps_transcript(self.transcript, seed=42, trial=0)
        loaded, header = loads_transcript(text)
        self.assertEqual(loaded, self.transcript)
        self.assertEqual(header['seed'], 42)
        self.assertEqual(dumps_transcript(loaded, seed=42, trial=0), text)

    def test_device_params_are_kept(self):
        transcript = replace(self.transcript, device='noisy_bell', device_params={'depolarizing': 0.5})
        loaded, header = loads_transcript(dumps_transcript(transcript))
        self.assertEqual(header['device_params'], {'depolarizing': 0.5})
        self.assertEqual(loaded.device_params, {'depolarizing': 0.5})
        self.assertEqual(loaded.build_device().depolarizing, 0.5)

    @override_settings(TRANSCRIPT_SCHEMA_VERSION=2)
    def test_schema_version_mismatch(self):
        with self.settings(TRANSCRIPT_SCHEMA_VERSION=1):
            text = dumps_transcript(self.transcript)
        with self.assertRaises(TranscriptSchemaError):
            loads_transcript(text)

    def test_malformed(self):
        with self.assertRaises(TranscriptSchemaError):
            loads_transcript('{"record": "header"}\n')
        with self.assertRaises(TranscriptSchemaError):
            loads_transcript('not json\n')
