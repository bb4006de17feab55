"""
Simulate Command - Run a configured experiment and write transcripts plus report
"""
import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from analysis.reports import ReportFormat, flat_metrics
from experiments.config import format_validation_error, load_config
from experiments.models import ExperimentRun
from experiments.runner import RUNTIME_ERRORS, simulate

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Run the trials of an experiment config deterministically from its seed."

    def add_arguments(self, parser):
        parser.add_argument('config', help="Path to the JSON experiment config")
        parser.add_argument('--seed', type=int, help="Override the config seed")
        parser.add_argument('--trials', type=int, help="Override the number of trials")
        parser.add_argument('--out', help="Output directory for transcripts and report")
        parser.add_argument('--format', choices=ReportFormat.values, help="Report format")

    def handle(self, *args, **options):
        try:
            config = load_config(options['config']).with_overrides(
                seed=options['seed'], trials=options['trials'], out=options['out'], fmt=options['format'],
            )
        except ValidationError as exc:
            message = format_validation_error(exc)
            logger.warning("Rejected config %s: %s", options['config'], message)
            raise CommandError(f"Invalid config: {message}", returncode=2) from exc

        run = None
        try:
            run = ExperimentRun.objects.create(
                command='simulate',
                device_id=config.device_id,
                protocol=str(config.protocol),
                seed=ExperimentRun.seed_text(config.seed),
                trials=config.trials,
                config_hash=config.config_hash,
            )
            output = simulate(config)
        except RUNTIME_ERRORS as exc:
            logger.exception("Simulation failed")
            if run is not None:
                run.fail(exc)
            raise CommandError(f"Simulation failed: {exc}", returncode=3) from exc

        run.record_metrics(flat_metrics(output.report))
        run.finish(output.transcript_hash, output.report_path)
        self.stdout.write(self.style.SUCCESS(
            f"{config.trials} trials of {config.protocol} on {config.device_id} -> {output.report_path}"
        ))
        for analysis_id, name, value in flat_metrics(output.report):
            self.stdout.write(f"  {analysis_id}.{name} = {value:.6g}")
