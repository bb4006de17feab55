"""
Protocol Transcripts - Round records, Eve's public log and their JSON-lines form

A serialized transcript is one JSON object per line: a header (schema
version, protocol, device and its parameters, config, seed), one line per round, and a footer
(keys as hex with bit lengths, statistics, public log).
"""
import hashlib
import json
from dataclasses import dataclass, field

from django.conf import settings
from django.db import models

from devices.records import RoundRecord
from devices.registry import get_device
from protocol.exceptions import TranscriptSchemaError
from quantum_core.states import Basis


class AnnouncementKind(models.TextChoices):
    BASIS = 'basis', 'Basis announcement'
    TEST_ROUNDS = 'test_rounds', 'Test-round indices'
    OUTPUT = 'output', 'Announced output'
    EC_SYNDROME = 'ec_syndrome', 'Error-correction syndrome length'
    PA_SEED = 'pa_seed', 'Privacy-amplification seed'


@dataclass(frozen=True)
class Announcement:
    """One public message; `step` is the number of rounds completed when it was made."""

    step: int
    kind: str
    value: object
    round_index: int = None
    party: str = None

    def to_dict(self):
        return {
            'step': self.step,
            'kind': str(self.kind),
            'round_index': self.round_index,
            'party': self.party,
            'value': self.value,
        }

    @classmethod
    def from_dict(cls, data):
        value = data['value']
        return cls(
            step=data['step'],
            kind=AnnouncementKind(data['kind']),
            value=tuple(value) if isinstance(value, list) else value,
            round_index=data.get('round_index'),
            party=data.get('party'),
        )


@dataclass(frozen=True)
class Transcript:
    protocol: str
    device: str
    config: dict
    rounds: tuple
    public_log: tuple
    test_rounds: tuple = ()
    sifted_rounds: tuple = ()
    sifted_key_a: tuple = ()
    sifted_key_b: tuple = ()
    test_statistics: dict = field(default_factory=dict)
    ec_leakage: int = 0
    pa_seed: tuple = ()
    final_key_a: tuple = ()
    final_key_b: tuple = ()
    device_params: dict = field(default_factory=dict)

    @property
    def n_rounds(self):
        return len(self.rounds)

    @property
    def n_key(self):
        return len(self.sifted_key_a)

    def build_device(self, n_rounds=None):
        """The device model this transcript was produced with, rebuilt from the registry."""
        return get_device(self.device, self.n_rounds if n_rounds is None else n_rounds, **self.device_params)

    def round(self, round_index):
        return self.rounds[round_index - 1]

    def announcements(self, kind=None):
        return tuple(a for a in self.public_log if kind is None or a.kind == kind)

    def announced_outputs(self):
        """{(round_index, party): bit} as seen by Eve."""
        return {
            (a.round_index, a.party): a.value
            for a in self.announcements(AnnouncementKind.OUTPUT)
        }

    def announced_bases(self):
        return {
            (a.round_index, a.party): Basis(a.value)
            for a in self.announcements(AnnouncementKind.BASIS)
        }


def bits_to_hex(bits):
    """Big-endian hex of a bit string; the bit length travels alongside."""
    bits = tuple(bits)
    if not bits:
        return {'hex': '', 'length': 0}
    value = int(''.join(str(b) for b in bits), 2)
    return {'hex': format(value, f"0{(len(bits) + 3) // 4}x"), 'length': len(bits)}


def hex_to_bits(encoded):
    length = encoded['length']
    if length == 0:
        return ()
    return tuple(int(c) for c in format(int(encoded['hex'], 16), f"0{length}b"))


def _round_to_dict(record):
    return {
        'record': 'round',
        'round_index': record.round_index,
        'input_a': str(record.input_a),
        'input_b': str(record.input_b),
        'output_a': record.output_a,
        'output_b': record.output_b,
        'announced': sorted(record.announced),
    }


def _round_from_dict(data):
    return RoundRecord(
        round_index=data['round_index'],
        input_a=Basis(data['input_a']),
        input_b=Basis(data['input_b']),
        output_a=data['output_a'],
        output_b=data['output_b'],
        announced=frozenset(data['announced']),
    )


def _line(record):
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def dumps_transcript(transcript, seed=None, trial=None):
    """Serialize to JSON lines; equal transcripts give byte-identical text."""
    lines = [_line({
        'record': 'header',
        'schema_version': settings.TRANSCRIPT_SCHEMA_VERSION,
        'protocol': transcript.protocol,
        'device': transcript.device,
        'device_params': transcript.device_params,
        'config': transcript.config,
        'seed': seed,
        'trial': trial,
        'stream': settings.RANDOM_STREAM_ALGORITHM,
    })]
    lines.extend(_line(_round_to_dict(record)) for record in transcript.rounds)
    lines.append(_line({
        'record': 'footer',
        'test_rounds': list(transcript.test_rounds),
        'sifted_rounds': list(transcript.sifted_rounds),
        'sifted_key_a': bits_to_hex(transcript.sifted_key_a),
        'sifted_key_b': bits_to_hex(transcript.sifted_key_b),
        'test_statistics': transcript.test_statistics,
        'ec_leakage': transcript.ec_leakage,
        'pa_seed': bits_to_hex(transcript.pa_seed),
        'final_key_a': bits_to_hex(transcript.final_key_a),
        'final_key_b': bits_to_hex(transcript.final_key_b),
        'public_log': [a.to_dict() for a in transcript.public_log],
    }))
    return '\n'.join(lines) + '\n'


def loads_transcript(text):
    """Parse JSON lines back into (transcript, header)."""
    try:
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise TranscriptSchemaError(f"Transcript is not valid JSON lines: {exc}") from exc
    if len(records) < 2 or records[0].get('record') != 'header' or records[-1].get('record') != 'footer':
        raise TranscriptSchemaError("Transcript must start with a header and end with a footer")
    header, footer = records[0], records[-1]
    if header.get('schema_version') != settings.TRANSCRIPT_SCHEMA_VERSION:
        raise TranscriptSchemaError(
            f"Unsupported schema_version {header.get('schema_version')!r}; "
            f"expected {settings.TRANSCRIPT_SCHEMA_VERSION}"
        )
    try:
        rounds = tuple(_round_from_dict(r) for r in records[1:-1])
        transcript = Transcript(
            protocol=header['protocol'],
            device=header['device'],
            device_params=header.get('device_params') or {},
            config=header['config'],
            rounds=rounds,
            public_log=tuple(Announcement.from_dict(a) for a in footer['public_log']),
            test_rounds=tuple(footer['test_rounds']),
            sifted_rounds=tuple(footer['sifted_rounds']),
            sifted_key_a=hex_to_bits(footer['sifted_key_a']),
            sifted_key_b=hex_to_bits(footer['sifted_key_b']),
            test_statistics=footer['test_statistics'],
            ec_leakage=footer['ec_leakage'],
            pa_seed=hex_to_bits(footer['pa_seed']),
            final_key_a=hex_to_bits(footer['final_key_a']),
            final_key_b=hex_to_bits(footer['final_key_b']),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise TranscriptSchemaError(f"Malformed transcript record: {exc}") from exc
    return transcript, header


def config_hash(config):
    """SHA-256 of a config dict in canonical JSON form."""
    return hashlib.sha256(_line(config).encode('utf-8')).hexdigest()


def content_hash(texts):
    """SHA-256 over serialized transcripts in order."""
    digest = hashlib.sha256()
    for text in texts:
        digest.update(text.encode('utf-8'))
    return digest.hexdigest()
