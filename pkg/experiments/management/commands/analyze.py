"""
Analyze Command - Recompute analyses from stored transcripts
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from analysis.exceptions import UnknownAnalysis
from analysis.reports import ReportFormat, flat_metrics, parse_analysis_ids
from experiments.models import ExperimentRun
from experiments.runner import RUNTIME_ERRORS, analyze
from protocol.exceptions import TranscriptSchemaError

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Recompute analyses over transcript files that share one config."

    def add_arguments(self, parser):
        parser.add_argument('ids', help="Comma-separated analysis ids, e.g. qber,eve_guessing")
        parser.add_argument('files', nargs='*', help="Transcript files (.jsonl)")
        parser.add_argument('--out', default=settings.EXPERIMENT_OUTPUT_DIR, help="Output directory for the report")
        parser.add_argument('--format', choices=ReportFormat.values, default=ReportFormat.JSON, help="Report format")

    def handle(self, *args, **options):
        files = options['files']
        if not files:
            raise CommandError("No transcript files given", returncode=2)
        try:
            analysis_ids = parse_analysis_ids(options['ids'])
        except UnknownAnalysis as exc:
            raise CommandError(str(exc), returncode=2) from exc
        if not analysis_ids:
            raise CommandError("No analysis ids given", returncode=2)

        run = None
        try:
            run = ExperimentRun.objects.create(command='analyze', trials=len(files))
            output = analyze(files, analysis_ids, options['out'], options['format'])
        except TranscriptSchemaError as exc:
            logger.warning("Rejected transcript set: %s", exc)
            if run is not None:
                run.fail(exc)
            raise CommandError(f"Transcript mismatch: {exc}", returncode=2) from exc
        except RUNTIME_ERRORS as exc:
            logger.exception("Analysis failed")
            if run is not None:
                run.fail(exc)
            raise CommandError(f"Analysis failed: {exc}", returncode=3) from exc

        header = output.report['header']
        run.device_id = header['device_id']
        run.protocol = header['protocol']
        run.seed = ExperimentRun.seed_text(header['seed'])
        run.config_hash = header['config_hash']
        run.save(update_fields=['device_id', 'protocol', 'seed', 'config_hash'])
        run.record_metrics(flat_metrics(output.report))
        run.finish(output.transcript_hash, output.report_path)
        self.stdout.write(self.style.SUCCESS(f"Analyzed {len(files)} transcripts -> {output.report_path}"))
        for analysis_id, name, value in flat_metrics(output.report):
            self.stdout.write(f"  {analysis_id}.{name} = {value:.6g}")
