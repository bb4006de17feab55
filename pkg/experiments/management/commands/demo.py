"""
Demo Command - Preset runs printing one pass / fail line per claim
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from analysis.reports import ReportFormat, build_report, flat_metrics, write_report
from experiments.demos import DEFAULT_SEED, DEFAULT_TRIALS, DemoId, run_demos
from experiments.models import ExperimentRun
from experiments.runner import RUNTIME_ERRORS

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Reproduce the signalling, contradiction and protocol-attack separations at desk scale."

    def add_arguments(self, parser):
        parser.add_argument('which', choices=DemoId.values, help="Demo to run")
        parser.add_argument('--out', default=settings.EXPERIMENT_OUTPUT_DIR, help="Output directory for the report")
        parser.add_argument('--format', choices=ReportFormat.values, default=ReportFormat.JSON, help="Report format")
        parser.add_argument('--trials', type=int, default=DEFAULT_TRIALS, help="Protocol runs per sampled claim")
        parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help="Seed of the sampled claims")

    def handle(self, *args, **options):
        if options['trials'] < 1:
            raise CommandError("--trials must be a positive integer", returncode=2)
        if not 0 <= options['seed'] < 2 ** 64:
            raise CommandError("--seed must be in [0, 2**64)", returncode=2)

        run = None
        try:
            run = ExperimentRun.objects.create(
                command='demo', seed=ExperimentRun.seed_text(options['seed']), trials=options['trials'],
            )
            outcomes = run_demos(options['which'], trials=options['trials'], seed=options['seed'])
            report = build_report({
                'command': 'demo',
                'demo': options['which'],
                'seed': options['seed'],
                'trials': options['trials'],
                'schema_version': settings.TRANSCRIPT_SCHEMA_VERSION,
                'stream': settings.RANDOM_STREAM_ALGORITHM,
                'claims': {str(o.demo): [str(line) for line in o.lines] for o in outcomes},
            }, [result for o in outcomes for result in o.results])
            report_path = write_report(report, Path(options['out']), options['format'])
        except RUNTIME_ERRORS as exc:
            logger.exception("Demo failed")
            if run is not None:
                run.fail(exc)
            raise CommandError(f"Demo failed: {exc}", returncode=3) from exc

        for outcome in outcomes:
            self.stdout.write(self.style.MIGRATE_HEADING(f"{outcome.demo}"))
            for line in outcome.lines:
                style = self.style.SUCCESS if line.passed else self.style.ERROR
                self.stdout.write(style(str(line)))
        run.record_metrics(flat_metrics(report))
        run.finish(output_path=report_path)
        self.stdout.write(f"Report -> {report_path}")
