"""
Experiments Config - JSON experiment files resolved into validated run settings
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.db import models

from analysis.exceptions import UnknownAnalysis
from analysis.reports import ReportFormat, parse_analysis_ids
from devices.exceptions import DeviceError
from devices.registry import DeviceId, get_device
from protocol.config import ProtocolConfig
from protocol.example import example_config
from protocol.exceptions import InvalidProtocolConfig, RoundParityError
from protocol.transcripts import config_hash

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


class ProtocolId(models.TextChoices):
    BB84 = 'bb84', 'Entanglement-based BB84'
    EXAMPLE_PROTOCOL = 'example_protocol', 'Odd/even example protocol'


CONFIG_KEYS = {'device_id', 'device_params', 'protocol', 'protocol_params', 'trials', 'seed', 'analyses', 'output'}
REQUIRED_KEYS = {'device_id', 'protocol', 'protocol_params', 'trials', 'seed', 'analyses'}
OUTPUT_KEYS = {'path', 'format'}
EXAMPLE_KEYS = {'n_pairs', 'key_basis', 'pa_output_length'}


@dataclass(frozen=True)
class ExperimentConfig:
    device_id: str
    protocol: str
    protocol_params: dict
    trials: int
    seed: int
    analyses: tuple
    output_path: Path
    output_format: str = ReportFormat.JSON
    device_params: dict = field(default_factory=dict)

    @property
    def protocol_config(self):
        if self.protocol == ProtocolId.EXAMPLE_PROTOCOL:
            return example_config(**self.protocol_params)
        return ProtocolConfig.from_dict(self.protocol_params)

    @property
    def n_rounds(self):
        return self.protocol_config.n_rounds

    def build_device(self):
        return get_device(self.device_id, self.n_rounds, **self.device_params)

    def to_dict(self):
        return {
            'device_id': self.device_id,
            'device_params': self.device_params,
            'protocol': str(self.protocol),
            'protocol_params': self.protocol_params,
            'trials': self.trials,
            'seed': self.seed,
            'analyses': [str(a) for a in self.analyses],
            'output': {'path': str(self.output_path), 'format': str(self.output_format)},
        }

    @property
    def config_hash(self):
        return config_hash(self.to_dict())

    def with_overrides(self, seed=None, trials=None, out=None, fmt=None):
        overrides = {}
        if seed is not None:
            overrides['seed'] = _check_seed(seed)
        if trials is not None:
            overrides['trials'] = _check_trials(trials)
        if out is not None:
            overrides['output_path'] = Path(out)
        if fmt is not None:
            overrides['output_format'] = _check_format(fmt)
        return replace(self, **overrides)


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < SEED_LIMIT:
        raise ValidationError({'seed': f"must be an integer in [0, 2**64), got {seed!r}"})
    return seed


def _check_trials(trials):
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise ValidationError({'trials': f"must be a positive integer, got {trials!r}"})
    return trials


def _check_format(fmt):
    if fmt not in ReportFormat.values:
        raise ValidationError({'output': f"format must be one of {ReportFormat.values}, got {fmt!r}"})
    return ReportFormat(fmt)


def _check_protocol_params(protocol, params):
    if not isinstance(params, dict):
        raise ValidationError({'protocol_params': "must be an object"})
    try:
        if protocol == ProtocolId.EXAMPLE_PROTOCOL:
            unknown = set(params) - EXAMPLE_KEYS
            if unknown:
                raise ValidationError({'protocol_params': f"unknown keys for example_protocol: {sorted(unknown)}"})
            example_config(**params)
        else:
            ProtocolConfig.from_dict(params)
    except (InvalidProtocolConfig, RoundParityError, TypeError, ValueError) as exc:
        raise ValidationError({'protocol_params': str(exc)}) from exc


def config_from_dict(data, base_dir=None):
    """Validate a decoded experiment config; every problem raises ValidationError keyed by field."""
    if not isinstance(data, dict):
        raise ValidationError("Experiment config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ValidationError({key: "unknown config key" for key in sorted(unknown)})
    missing = REQUIRED_KEYS - set(data)
    if missing:
        raise ValidationError({key: "this key is required" for key in sorted(missing)})

    device_id = data['device_id']
    if device_id not in DeviceId.values:
        raise ValidationError({'device_id': f"unknown device {device_id!r}; known: {', '.join(DeviceId.values)}"})
    protocol = data['protocol']
    if protocol not in ProtocolId.values:
        raise ValidationError({'protocol': f"unknown protocol {protocol!r}; known: {', '.join(ProtocolId.values)}"})
    _check_protocol_params(protocol, data['protocol_params'])

    analyses = data['analyses']
    if not isinstance(analyses, list) or not analyses:
        raise ValidationError({'analyses': "must be a nonempty list of analysis ids"})
    try:
        analyses = tuple(parse_analysis_ids(analyses))
    except UnknownAnalysis as exc:
        raise ValidationError({'analyses': str(exc)}) from exc

    output = data.get('output', {})
    if not isinstance(output, dict) or set(output) - OUTPUT_KEYS:
        raise ValidationError({'output': f"must be an object with keys {sorted(OUTPUT_KEYS)}"})
    device_params = data.get('device_params', {})
    if not isinstance(device_params, dict):
        raise ValidationError({'device_params': "must be an object"})

    config = ExperimentConfig(
        device_id=device_id,
        protocol=ProtocolId(protocol),
        protocol_params=data['protocol_params'],
        trials=_check_trials(data['trials']),
        seed=_check_seed(data['seed']),
        analyses=analyses,
        output_path=_output_path(output.get('path'), base_dir),
        output_format=_check_format(output.get('format', ReportFormat.JSON)),
        device_params=device_params,
    )
    try:
        config.build_device()
    except (DeviceError, TypeError) as exc:
        raise ValidationError({'device_params': str(exc)}) from exc
    return config


def _output_path(path, base_dir):
    if path is None:
        return Path(settings.EXPERIMENT_OUTPUT_DIR)
    path = Path(path)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return path


def load_config(path):
    """Read and validate a JSON experiment config; relative output paths resolve against its directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise ValidationError({'config': f"cannot read {path}: {exc.strerror}"}) from exc
    except json.JSONDecodeError as exc:
        raise ValidationError({'config': f"{path} is not valid JSON: {exc}"}) from exc
    config = config_from_dict(data, base_dir=path.parent)
    logger.info("Loaded %s config for %s (%d trials, seed %d)", config.protocol, config.device_id,
                config.trials, config.seed)
    return config


def format_validation_error(exc):
    """One line per field, e.g. "device_id: unknown device 'foo'"."""
    if hasattr(exc, 'error_dict'):
        return '; '.join(f"{name}: {' '.join(messages)}" for name, messages in sorted(exc.message_dict.items()))
    return ' '.join(exc.messages)
