"""
Experiments Runner - Seeded trial execution, transcript files and report assembly
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from django.conf import settings
from django.db import DatabaseError

from analysis.exceptions import AnalysisError
from analysis.reports import build_report, run_analyses, write_report
from devices.exceptions import DeviceError
from experiments.config import ProtocolId
from protocol.bb84 import run_bb84
from protocol.example import run_example_protocol
from protocol.exceptions import ProtocolError, TranscriptSchemaError
from protocol.transcripts import config_hash, content_hash, dumps_transcript, loads_transcript
from quantum_core.exceptions import QuantumStateError

logger = logging.getLogger(__name__)

TRANSCRIPT_DIR = 'transcripts'

# failures after a config validated; commands map them to exit status 3
RUNTIME_ERRORS = (AnalysisError, DeviceError, ProtocolError, QuantumStateError, OSError, DatabaseError)


def trial_rng(seed, trial_index):
    """Randomness stream of one trial: PCG64 seeded from SeedSequence(seed XOR trial_index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed ^ trial_index)))


def transcript_path(out_dir, trial_index):
    return Path(out_dir) / TRANSCRIPT_DIR / f"trial-{trial_index:05d}.jsonl"


def run_trial(config, device, trial_index):
    rng = trial_rng(config.seed, trial_index)
    protocol_config = config.protocol_config
    if config.protocol == ProtocolId.EXAMPLE_PROTOCOL:
        transcript = run_example_protocol(protocol_config.n_rounds // 2, device, rng, config=protocol_config)
    else:
        transcript = run_bb84(protocol_config, device, rng)
    return replace(transcript, device_params=dict(config.device_params))


@dataclass
class RunOutput:
    report: dict
    report_path: Path
    transcript_hash: str
    transcript_paths: list


def _header(**fields):
    return {
        'schema_version': settings.TRANSCRIPT_SCHEMA_VERSION,
        'stream': settings.RANDOM_STREAM_ALGORITHM,
        **fields,
    }


def simulate(config):
    """Run every trial in trial order, write its transcript, then the report over the whole set."""
    device = config.build_device()
    out_dir = Path(config.output_path)
    transcripts, texts, paths = [], [], []
    for trial_index in range(config.trials):
        transcript = run_trial(config, device, trial_index)
        text = dumps_transcript(transcript, seed=config.seed, trial=trial_index)
        path = transcript_path(out_dir, trial_index)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
        transcripts.append(transcript)
        texts.append(text)
        paths.append(path)
        logger.debug("Trial %d written to %s", trial_index, path)

    transcript_hash = content_hash(texts)
    results = run_analyses(config.analyses, transcripts)
    report = build_report(_header(
        command='simulate',
        config=config.to_dict(),
        config_hash=config.config_hash,
        transcript_hash=transcript_hash,
        device_id=config.device_id,
        device_params=config.device_params,
        protocol=str(config.protocol),
        seed=config.seed,
        trials=config.trials,
    ), results)
    report_path = write_report(report, out_dir, config.output_format)
    logger.info("Simulated %d trials of %s on %s; report at %s", config.trials, config.protocol,
                config.device_id, report_path)
    return RunOutput(report, report_path, transcript_hash, paths)


def _run_identity(header):
    return (config_hash(header['config']), header['protocol'], header['device'],
            config_hash(header.get('device_params') or {}))


def load_transcript_set(paths):
    """Load transcripts that must share schema version, protocol, device and config."""
    if not paths:
        raise TranscriptSchemaError("No transcript files given")
    texts, transcripts, headers = [], [], []
    for path in paths:
        text = Path(path).read_text(encoding='utf-8')
        transcript, header = loads_transcript(text)
        texts.append(text)
        transcripts.append(transcript)
        headers.append(header)
    reference = _run_identity(headers[0])
    for path, header in zip(paths, headers):
        if _run_identity(header) != reference:
            raise TranscriptSchemaError(f"{path} was produced by a different config than {paths[0]}")
    return transcripts, texts, headers[0]


def analyze(paths, analysis_ids, out_dir, fmt):
    """Recompute analyses from stored transcripts without re-simulating."""
    transcripts, texts, header = load_transcript_set(paths)
    transcript_hash = content_hash(texts)
    results = run_analyses(analysis_ids, transcripts)
    report = build_report(_header(
        command='analyze',
        config=header['config'],
        config_hash=config_hash(header['config']),
        transcript_hash=transcript_hash,
        device_id=header['device'],
        device_params=header.get('device_params') or {},
        protocol=header['protocol'],
        seed=header['seed'],
        trials=len(transcripts),
    ), results)
    report_path = write_report(report, Path(out_dir), fmt)
    logger.info("Analyzed %d transcripts; report at %s", len(transcripts), report_path)
    return RunOutput(report, report_path, transcript_hash, [Path(p) for p in paths])
