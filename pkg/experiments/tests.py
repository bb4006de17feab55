"""
Experiments Tests
"""
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.contrib import admin
from django.contrib.auth import get_user_model
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.db import DatabaseError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse

from devices.exceptions import DeviceError
from experiments.config import config_from_dict, format_validation_error
from experiments.models import ExperimentRun, RunMetric
from experiments.runner import trial_rng

BB84_CONFIG = {
    'device_id': 'iid_bell',
    'protocol': 'bb84',
    'protocol_params': {'n_rounds': 200, 'test_selection': {'mode': 'spot_check', 'gamma': 0.25}},
    'trials': 10,
    'seed': 42,
    'analyses': ['qber', 'naive_key_claim', 'signalling'],
    'output': {'path': 'out', 'format': 'json'},
}

NOISY_CONFIG = {
    'device_id': 'noisy_bell',
    'device_params': {'depolarizing': 0.5},
    'protocol': 'bb84',
    'protocol_params': {'n_rounds': 8, 'test_selection': {'mode': 'spot_check', 'gamma': 0.25}},
    'trials': 3,
    'seed': 11,
    'analyses': ['qber', 'contradiction'],
    'output': {'path': 'out'},
}

COPIER_CONFIG = {
    'device_id': 'even_copier',
    'protocol': 'example_protocol',
    'protocol_params': {'n_pairs': 50},
    'trials': 20,
    'seed': 7,
    'analyses': ['eve_guessing'],
    'output': {'path': 'out'},
}


class WorkspaceMixin:

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.workspace = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write_config(self, data, name='experiment.json'):
        path = self.workspace / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    def simulate(self, data, **options):
        stdout = StringIO()
        call_command('simulate', str(self.write_config(data)), stdout=stdout, **options)
        return stdout.getvalue()

    def report(self, out='out', fmt='json'):
        return json.loads((self.workspace / out / f"report.{fmt}").read_text(encoding='utf-8'))

    def transcripts(self, out='out'):
        return sorted(str(p) for p in (self.workspace / out / 'transcripts').glob('trial-*.jsonl'))


class ConfigValidationTests(SimpleTestCase):

    def assertInvalid(self, data, field):
        with self.assertRaises(ValidationError) as ctx:
            config_from_dict(data)
        self.assertIn(field, ctx.exception.message_dict)
        return ctx.exception

    def test_valid_config(self):
        config = config_from_dict(BB84_CONFIG, base_dir=Path('/tmp'))
        self.assertEqual(config.n_rounds, 200)
        self.assertEqual(config.output_path, Path('/tmp/out'))
        self.assertEqual(config.config_hash, config_from_dict(BB84_CONFIG, base_dir=Path('/tmp')).config_hash)

    def test_unknown_device_names_the_field(self):
        exc = self.assertInvalid({**BB84_CONFIG, 'device_id': 'foo'}, 'device_id')
        self.assertIn("device_id: unknown device 'foo'", format_validation_error(exc))

    def test_unknown_key_is_an_error(self):
        self.assertInvalid({**BB84_CONFIG, 'trails': 3}, 'trails')

    def test_missing_key(self):
        data = dict(BB84_CONFIG)
        del data['seed']
        self.assertInvalid(data, 'seed')

    def test_trials_must_be_positive(self):
        self.assertInvalid({**BB84_CONFIG, 'trials': 0}, 'trials')

    def test_seed_range(self):
        self.assertInvalid({**BB84_CONFIG, 'seed': -1}, 'seed')
        self.assertInvalid({**BB84_CONFIG, 'seed': 2 ** 64}, 'seed')
        config_from_dict({**BB84_CONFIG, 'seed': 2 ** 64 - 1})

    def test_analyses_nonempty_and_known(self):
        self.assertInvalid({**BB84_CONFIG, 'analyses': []}, 'analyses')
        self.assertInvalid({**BB84_CONFIG, 'analyses': ['qber', 'tomography']}, 'analyses')

    def test_protocol_params_are_validated(self):
        self.assertInvalid({**BB84_CONFIG, 'protocol_params': {'n_rounds': 0}}, 'protocol_params')
        self.assertInvalid({**COPIER_CONFIG, 'protocol_params': {'n_pairs': 0}}, 'protocol_params')
        self.assertInvalid({**COPIER_CONFIG, 'protocol_params': {'n_rounds': 4}}, 'protocol_params')

    def test_unknown_format(self):
        self.assertInvalid({**BB84_CONFIG, 'output': {'format': 'xml'}}, 'output')

    def test_overrides(self):
        config = config_from_dict(BB84_CONFIG).with_overrides(seed=3, trials=2, fmt='csv')
        self.assertEqual((config.seed, config.trials, config.output_format), (3, 2, 'csv'))
        with self.assertRaises(ValidationError):
            config.with_overrides(trials=0)


class TrialStreamTests(SimpleTestCase):

    def test_same_trial_same_stream(self):
        self.assertEqual(trial_rng(42, 3).integers(2 ** 32, size=8).tolist(),
                         trial_rng(42, 3).integers(2 ** 32, size=8).tolist())

    def test_trial_index_changes_stream(self):
        self.assertNotEqual(trial_rng(42, 0).integers(2 ** 32, size=8).tolist(),
                            trial_rng(42, 1).integers(2 ** 32, size=8).tolist())


class SimulateCommandTests(WorkspaceMixin, TestCase):

    def test_rerun_is_byte_identical(self):
        self.simulate(BB84_CONFIG)
        report = (self.workspace / 'out' / 'report.json').read_bytes()
        transcripts = [Path(p).read_bytes() for p in self.transcripts()]
        self.assertEqual(len(transcripts), 10)

        self.simulate(BB84_CONFIG)
        self.assertEqual((self.workspace / 'out' / 'report.json').read_bytes(), report)
        self.assertEqual([Path(p).read_bytes() for p in self.transcripts()], transcripts)

    def test_report_header(self):
        self.simulate(BB84_CONFIG)
        header = self.report()['header']
        self.assertEqual(header['seed'], 42)
        self.assertEqual(header['trials'], 10)
        self.assertEqual(header['config']['device_id'], 'iid_bell')
        self.assertIn('SeedSequence', header['stream'])
        self.assertEqual(len(header['transcript_hash']), 64)

    def test_honest_qber_is_zero(self):
        self.simulate(BB84_CONFIG)
        metrics = self.report()['analyses']['qber']['metrics']
        self.assertEqual(metrics['test_qber'], 0.0)
        self.assertEqual(metrics['key_qber'], 0.0)

    def test_copier_keys_are_guessed(self):
        self.simulate(COPIER_CONFIG)
        metrics = self.report()['analyses']['eve_guessing']['metrics']
        self.assertEqual(metrics['success_rate'], 1.0)
        self.assertEqual(metrics['pa_success_rate'], 1.0)
        self.assertEqual(metrics['trials'], 20)

    def test_trial_outputs_do_not_depend_on_trial_count(self):
        self.simulate(COPIER_CONFIG, trials=2, out=str(self.workspace / 'two'))
        self.simulate(COPIER_CONFIG, trials=3, out=str(self.workspace / 'three'))
        for name in ('trial-00000.jsonl', 'trial-00001.jsonl'):
            self.assertEqual((self.workspace / 'two' / 'transcripts' / name).read_bytes(),
                             (self.workspace / 'three' / 'transcripts' / name).read_bytes())

    def test_csv_report(self):
        self.simulate(COPIER_CONFIG, format='csv')
        lines = (self.workspace / 'out' / 'report.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'analysis,metric,value')
        self.assertIn('eve_guessing,success_rate,1.0', lines)

    def test_unknown_device_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.simulate({**BB84_CONFIG, 'device_id': 'foo'})
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('device_id', str(ctx.exception))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_unknown_key_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.simulate({**BB84_CONFIG, 'colour': 'blue'})
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unreadable_config_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('simulate', str(self.workspace / 'missing.json'), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_runtime_failure_exits_3(self):
        with mock.patch('experiments.management.commands.simulate.simulate', side_effect=DeviceError("boom")):
            with self.assertRaises(CommandError) as ctx:
                self.simulate(COPIER_CONFIG)
        self.assertEqual(ctx.exception.returncode, 3)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.error, 'boom')

    def test_ledger(self):
        self.simulate(COPIER_CONFIG)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertEqual((run.device_id, run.protocol, run.seed, run.trials), ('even_copier', 'example_protocol', '7', 20))
        self.assertEqual(run.transcript_hash, self.report()['header']['transcript_hash'])
        self.assertEqual(run.metrics.get(analysis_id='eve_guessing', name='success_rate').value, 1.0)

    def test_largest_seed_is_recorded_exactly(self):
        self.simulate(COPIER_CONFIG, seed=2 ** 64 - 1, trials=1)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.seed, str(2 ** 64 - 1))
        self.assertEqual(self.report()['header']['seed'], 2 ** 64 - 1)

    def test_ledger_failure_exits_3(self):
        with mock.patch.object(ExperimentRun.objects, 'create', side_effect=DatabaseError("locked")):
            with self.assertRaises(CommandError) as ctx:
                self.simulate(COPIER_CONFIG, trials=1)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_device_params_reach_the_report(self):
        self.simulate(NOISY_CONFIG)
        report = self.report()
        self.assertEqual(report['header']['device_params'], {'depolarizing': 0.5})
        metrics = report['analyses']['contradiction']['metrics']
        # X-basis disagreement of a Bell pair with one half depolarized at p is p / 2
        self.assertAlmostEqual(metrics['delta_ph'], 0.25, places=9)


class AnalyzeCommandTests(WorkspaceMixin, TestCase):

    def analyze(self, ids, files, out='reanalysis'):
        call_command('analyze', ids, *files, out=str(self.workspace / out), stdout=StringIO())
        return self.report(out)

    def test_reproduces_simulated_metrics(self):
        self.simulate(BB84_CONFIG)
        original = self.report()
        recomputed = self.analyze(','.join(BB84_CONFIG['analyses']), self.transcripts())
        self.assertEqual(recomputed['analyses'], original['analyses'])
        self.assertEqual(recomputed['header']['transcript_hash'], original['header']['transcript_hash'])
        self.assertEqual(recomputed['header']['config_hash'], original['header']['config_hash'])

    def test_new_analysis_over_stored_transcripts(self):
        self.simulate(COPIER_CONFIG)
        report = self.analyze('qber,eve_guessing', self.transcripts())
        self.assertEqual(report['analyses']['eve_guessing']['metrics']['success_rate'], 1.0)
        self.assertEqual(report['analyses']['qber']['metrics']['test_qber'], 0.0)

    def test_empty_file_list_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('analyze', 'qber', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unknown_analysis_exits_2(self):
        self.simulate(COPIER_CONFIG, trials=1)
        with self.assertRaises(CommandError) as ctx:
            self.analyze('qber,entanglement', self.transcripts())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_mixed_configs_exit_2(self):
        self.simulate(COPIER_CONFIG, trials=1, out=str(self.workspace / 'a'))
        self.simulate({**COPIER_CONFIG, 'protocol_params': {'n_pairs': 10}}, trials=1, out=str(self.workspace / 'b'))
        with self.assertRaises(CommandError) as ctx:
            self.analyze('qber', self.transcripts('a') + self.transcripts('b'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_device_params_survive_reanalysis(self):
        self.simulate(NOISY_CONFIG)
        original = self.report()
        recomputed = self.analyze('contradiction', self.transcripts())
        self.assertEqual(recomputed['analyses']['contradiction'], original['analyses']['contradiction'])
        self.assertEqual(recomputed['header']['device_params'], {'depolarizing': 0.5})

    def test_mixed_device_params_exit_2(self):
        self.simulate(NOISY_CONFIG, trials=1, out=str(self.workspace / 'a'))
        self.simulate({**NOISY_CONFIG, 'device_params': {'depolarizing': 0.2}}, trials=1,
                      out=str(self.workspace / 'b'))
        with self.assertRaises(CommandError) as ctx:
            self.analyze('contradiction', self.transcripts('a') + self.transcripts('b'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_schema_version_mismatch_exits_2(self):
        self.simulate(COPIER_CONFIG, trials=1)
        path = Path(self.transcripts()[0])
        lines = path.read_text(encoding='utf-8').splitlines()
        header = json.loads(lines[0])
        header['schema_version'] = 99
        path.write_text('\n'.join([json.dumps(header)] + lines[1:]) + '\n', encoding='utf-8')
        with self.assertRaises(CommandError) as ctx:
            self.analyze('qber', [str(path)])
        self.assertEqual(ctx.exception.returncode, 2)


class DemoCommandTests(WorkspaceMixin, TestCase):

    def demo(self, which, **options):
        stdout = StringIO()
        call_command('demo', which, out=str(self.workspace / which), stdout=stdout, **options)
        return stdout.getvalue()

    def test_signalling(self):
        output = self.demo('signalling')
        self.assertIn('[PASS] echo: round-2 signalling magnitude 1.000', output)
        self.assertIn('[PASS] iid_bell: round-2 signalling magnitude 0.000', output)
        self.assertNotIn('[FAIL]', output)

    def test_contradiction(self):
        output = self.demo('contradiction')
        self.assertIn('naive 8 bits vs actual 1 bit', output)
        self.assertNotIn('[FAIL]', output)
        report = self.report('contradiction')
        self.assertAlmostEqual(report['analyses']['demo_contradiction_retain_remeasure']['metrics']['gap'], 7.0,
                               places=6)

    def test_protocol_attack(self):
        output = self.demo('protocol_attack', trials=20, seed=5)
        self.assertIn('[PASS] even_copier n_pairs=50: Eve success 1.000', output)
        self.assertIn('purity', output)
        metrics = self.report('protocol_attack')['analyses']['demo_purity_leak']['metrics']
        self.assertAlmostEqual(metrics['even_copier_guessing'], 1.0, places=9)
        self.assertAlmostEqual(metrics['bell_pairs_guessing'], 0.25, places=9)
        run = ExperimentRun.objects.get()
        self.assertEqual((run.command, run.status), ('demo', 'completed'))

    def test_bad_trials_exit_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.demo('signalling', trials=0)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_largest_seed_is_recorded_exactly(self):
        self.demo('signalling', seed=2 ** 64 - 1)
        run = ExperimentRun.objects.get()
        self.assertEqual((run.status, run.seed), ('completed', str(2 ** 64 - 1)))
        self.assertEqual(self.report('signalling')['header']['seed'], 2 ** 64 - 1)

    def test_seed_out_of_range_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.demo('signalling', seed=2 ** 64)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertFalse(ExperimentRun.objects.exists())


class LedgerAdminTests(TestCase):

    def setUp(self):
        self.run = ExperimentRun.objects.create(command='simulate', device_id='even_copier', seed='7', trials=2)
        self.run.record_metrics([('eve_guessing', 'success_rate', 1.0)])
        self.client.force_login(get_user_model().objects.create_superuser('admin', 'admin@example.com', 'pw'))

    def test_models_are_registered(self):
        self.assertTrue(admin.site.is_registered(ExperimentRun))
        self.assertTrue(admin.site.is_registered(RunMetric))

    def test_run_change_page_lists_metrics(self):
        response = self.client.get(reverse('admin:experiments_experimentrun_change', args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, 'success_rate')

    def test_changelist(self):
        response = self.client.get(reverse('admin:experiments_experimentrun_changelist'))
        self.assertContains(response, 'even_copier')
