"""
Analysis Reports - Analysis ids, batch execution and JSON / CSV report files
"""
import csv
import io
import json
import logging
from dataclasses import dataclass, field

from django.conf import settings
from django.db import models

from analysis.contradiction import contradiction_report
from analysis.distributions import EmpiricalDistribution
from analysis.exceptions import UnknownAnalysis
from analysis.guessing import Strategy, eve_guessing
from analysis.signalling import signalling_measure
from protocol.exceptions import NoTestRounds
from protocol.postprocessing import naive_key_claim

logger = logging.getLogger(__name__)


class AnalysisId(models.TextChoices):
    QBER = 'qber', 'Observed error rates'
    NAIVE_KEY_CLAIM = 'naive_key_claim', 'Naive phase-error key claim'
    EVE_GUESSING = 'eve_guessing', 'Eve guessing with the copy decoder'
    EVE_GUESSING_MAP = 'eve_guessing_map', 'Eve guessing with the MAP decoder'
    SIGNALLING = 'signalling', 'Empirical cross-round signalling'
    CONTRADICTION = 'contradiction', 'Naive claim against exact key entropy'


class ReportFormat(models.TextChoices):
    JSON = 'json', 'JSON'
    CSV = 'csv', 'CSV'


@dataclass
class AnalysisResult:
    analysis_id: str
    metrics: dict
    details: dict = field(default_factory=dict)


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _qber(transcripts):
    return AnalysisResult(AnalysisId.QBER, {
        'test_qber': _mean(t.test_statistics['test']['qber'] for t in transcripts),
        'key_qber': _mean(t.test_statistics['key']['qber'] for t in transcripts),
        'sifted_length': _mean(t.n_key for t in transcripts),
        'ec_leakage': _mean(t.ec_leakage for t in transcripts),
    })


def _naive_key_claim(transcripts):
    claims, skipped = [], 0
    for transcript in transcripts:
        try:
            claims.append(naive_key_claim(transcript))
        except NoTestRounds:
            skipped += 1
    return AnalysisResult(
        AnalysisId.NAIVE_KEY_CLAIM,
        {
            'delta_ph': _mean(c.delta_ph for c in claims),
            'claimed_length': _mean(c.claimed_length for c in claims),
            'trials_without_tests': skipped,
        },
        {'label': 'NAIVE: valid only under Process 1 assumptions', 'formula_id': 'naive_cpa'},
    )


def _guessing(strategy, analysis_id):
    def run(transcripts):
        result = eve_guessing(transcripts, strategy)
        return AnalysisResult(analysis_id, result.to_metrics(), {'confidence': result.confidence})
    return run


def _signalling(transcripts):
    report = signalling_measure(EmpiricalDistribution.from_transcripts(transcripts), lag=1)
    metrics = {f"max_forward_{party}": report.max_magnitude(party=party) for party in ('A', 'B', 'AB')}
    metrics['max_backward'] = report.max_magnitude(direction='backward')
    metrics['missing_settings'] = sum(report.missing.values())
    return AnalysisResult(AnalysisId.SIGNALLING, metrics, {'lag': 1})


def _contradiction(transcripts):
    first = transcripts[0]
    n_rounds = min(first.n_rounds, settings.DEVICE_ANALYSIS_MAX_ROUNDS)
    report = contradiction_report(first.build_device(n_rounds), n_rounds)
    return AnalysisResult(AnalysisId.CONTRADICTION, report.to_metrics(), {
        'device': report.device,
        'device_params': first.device_params,
        'naive_label': report.naive_claim.label,
    })


ANALYSES = {
    AnalysisId.QBER: _qber,
    AnalysisId.NAIVE_KEY_CLAIM: _naive_key_claim,
    AnalysisId.EVE_GUESSING: _guessing(Strategy.COPY_DECODER, AnalysisId.EVE_GUESSING),
    AnalysisId.EVE_GUESSING_MAP: _guessing(Strategy.MAP_DECODER, AnalysisId.EVE_GUESSING_MAP),
    AnalysisId.SIGNALLING: _signalling,
    AnalysisId.CONTRADICTION: _contradiction,
}


def parse_analysis_ids(value):
    """Comma-separated ids (or a list) to validated AnalysisId members, order preserved."""
    ids = value.split(',') if isinstance(value, str) else list(value)
    ids = [i.strip() for i in ids if i and i.strip()]
    unknown = [i for i in ids if i not in AnalysisId.values]
    if unknown:
        raise UnknownAnalysis(f"Unknown analysis ids {unknown}; known: {', '.join(AnalysisId.values)}")
    return [AnalysisId(i) for i in ids]


def run_analyses(analysis_ids, transcripts):
    transcripts = list(transcripts)
    results = []
    for analysis_id in parse_analysis_ids(analysis_ids):
        logger.info("Running analysis %s over %d transcripts", analysis_id, len(transcripts))
        results.append(ANALYSES[analysis_id](transcripts))
    return results


def build_report(header, results):
    return {
        'header': header,
        'analyses': {
            str(r.analysis_id): {'metrics': r.metrics, 'details': r.details} for r in results
        },
    }


def render_report(report, fmt=ReportFormat.JSON):
    if fmt == ReportFormat.JSON:
        return json.dumps(report, sort_keys=True, indent=2) + '\n'
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['analysis', 'metric', 'value'])
    for key, value in sorted(report['header'].items()):
        if not isinstance(value, (dict, list)):
            writer.writerow(['header', key, value])
    for analysis_id, body in report['analyses'].items():
        for name, value in body['metrics'].items():
            writer.writerow([analysis_id, name, '' if value is None else repr(value)])
    return buffer.getvalue()


def write_report(report, out_dir, fmt=ReportFormat.JSON):
    """Write report.json or report.csv under `out_dir` and return its path."""
    fmt = ReportFormat(fmt)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"report.{fmt.value}"
    path.write_text(render_report(report, fmt), encoding='utf-8')
    return path


def flat_metrics(report):
    """(analysis id, metric name, value) for every numeric metric of a report."""
    for analysis_id, body in report['analyses'].items():
        for name, value in body['metrics'].items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                yield analysis_id, name, float(value)
