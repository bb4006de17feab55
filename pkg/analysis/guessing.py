"""
Analysis Guessing - Reconstructing Alice's sifted key from the public log

Eve's knowledge is exactly the public log of a transcript. Decoders:

* copy_decoder reads the announced output of round j + 1 into key position j;
* map_decoder knows the device model and picks the a-posteriori most likely
  key given every announced basis and output (exact enumeration).
"""
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass

from django.conf import settings
from django.db import models
from scipy.stats import binomtest

from analysis.distributions import INPUT_PAIRS
from analysis.exceptions import UnknownStrategy
from devices.exceptions import EnumerationBudgetExceeded
from devices.process import exact_outcomes
from protocol.example import classify_odd_rounds
from protocol.exceptions import TranscriptSchemaError
from protocol.postprocessing import privacy_amplify
from protocol.transcripts import AnnouncementKind
from quantum_core.states import Basis

logger = logging.getLogger(__name__)


class Strategy(models.TextChoices):
    COPY_DECODER = 'copy_decoder', 'Copy announced even-round outputs'
    MAP_DECODER = 'map_decoder', 'Maximum a-posteriori decoder'


@dataclass(frozen=True)
class GuessingResult:
    strategy: str
    matches: tuple
    pa_matches: tuple
    confidence: float
    interval: tuple

    @property
    def trials(self):
        return len(self.matches)

    @property
    def success_rate(self):
        return sum(self.matches) / len(self.matches) if self.matches else 0.0

    @property
    def pa_success_rate(self):
        return sum(self.pa_matches) / len(self.pa_matches) if self.pa_matches else 0.0

    def to_metrics(self):
        return {
            'trials': self.trials,
            'success_rate': self.success_rate,
            'wilson_low': self.interval[0],
            'wilson_high': self.interval[1],
            'pa_success_rate': self.pa_success_rate,
        }


def wilson_interval(successes, trials, confidence=None):
    confidence = settings.WILSON_CONFIDENCE if confidence is None else confidence
    if trials == 0:
        return (0.0, 1.0)
    interval = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method='wilson')
    return (float(interval.low), float(interval.high))


def copy_decoder(transcript, device=None):
    announced = transcript.announced_outputs()
    return tuple(announced.get((j + 1, 'A'), 0) for j in transcript.sifted_rounds)


def _inputs(transcript):
    return tuple((r.input_a, r.input_b) for r in transcript.rounds)


def _public_rounds(transcript):
    """(round, party) pairs whose output Eve saw."""
    return tuple(sorted(transcript.announced_outputs()))


def _posterior(device, inputs, public_rounds, key_rounds, cache):
    """{public outputs: {Alice key: joint probability}} for fixed inputs."""
    cache_key = (inputs, public_rounds, key_rounds)
    if cache_key not in cache:
        table = defaultdict(lambda: defaultdict(float))
        for outputs, probability in exact_outcomes(device, inputs).items():
            public = tuple(outputs[j - 1][0 if party == 'A' else 1] for j, party in public_rounds)
            key = tuple(outputs[j - 1][0] for j in key_rounds)
            table[public][key] += probability
        cache[cache_key] = table
    return cache[cache_key]


def _best_key(candidates):
    # ties go to the lexicographically smallest key
    return max(sorted(candidates), key=lambda key: candidates[key])


def _resolve_device(transcript, device):
    if device is not None:
        return device
    return transcript.build_device()


def map_decoder(transcript, device=None, cache=None):
    device = _resolve_device(transcript, device)
    if transcript.n_rounds > settings.ENUMERATION_MAX_ROUNDS:
        raise EnumerationBudgetExceeded(f"map_decoder enumerates at most {settings.ENUMERATION_MAX_ROUNDS} rounds")
    public_rounds = _public_rounds(transcript)
    table = _posterior(device, _inputs(transcript), public_rounds, tuple(transcript.sifted_rounds),
                       {} if cache is None else cache)
    announced = transcript.announced_outputs()
    observed = tuple(announced[round_party] for round_party in public_rounds)
    candidates = table.get(observed)
    if not candidates:
        return tuple(0 for _ in transcript.sifted_rounds)
    return _best_key(candidates)


DECODERS = {
    Strategy.COPY_DECODER: copy_decoder,
    Strategy.MAP_DECODER: map_decoder,
}


def _batch_key(transcript):
    return (transcript.protocol, transcript.device, transcript.device_params, transcript.config)


def _check_batch(transcripts):
    if not transcripts:
        raise TranscriptSchemaError("No transcripts to analyse")
    first = transcripts[0]
    for transcript in transcripts[1:]:
        if _batch_key(transcript) != _batch_key(first):
            raise TranscriptSchemaError("Transcripts in a batch must share protocol, device, device parameters and config")


def eve_guessing(transcripts, strategy, device=None):
    """Fraction of trials where Eve's reconstruction equals Alice's sifted key exactly."""
    if strategy not in Strategy.values:
        raise UnknownStrategy(f"Unknown strategy {strategy!r}; expected one of {Strategy.values}")
    transcripts = list(transcripts)
    _check_batch(transcripts)
    decoder = DECODERS[Strategy(strategy)]
    kwargs = {'cache': {}} if strategy == Strategy.MAP_DECODER else {}
    if strategy == Strategy.MAP_DECODER:
        device = _resolve_device(transcripts[0], device)

    matches, pa_matches = [], []
    for transcript in transcripts:
        guess = decoder(transcript, device, **kwargs)
        matches.append(guess == tuple(transcript.sifted_key_a))
        seed = transcript.announcements(AnnouncementKind.PA_SEED)[0].value
        pa_matches.append(privacy_amplify(guess, len(transcript.final_key_a), seed) == tuple(transcript.final_key_a))
    successes = sum(matches)
    result = GuessingResult(
        strategy=str(strategy),
        matches=tuple(matches),
        pa_matches=tuple(pa_matches),
        confidence=settings.WILSON_CONFIDENCE,
        interval=wilson_interval(successes, len(matches)),
    )
    logger.info("%s guessed %d of %d sifted keys", strategy, successes, len(matches))
    return result


def guessing_probability(device, n_pairs, key_basis=Basis.Z):
    """
    Exact optimal probability that Eve guesses Alice's sifted key in the
    odd/even example protocol, per sifted key length:
    {k: sum over public data of max_key P(key, public | k)}.
    """
    n_rounds = 2 * n_pairs
    if n_rounds > settings.ENUMERATION_MAX_ROUNDS:
        raise EnumerationBudgetExceeded(f"{n_rounds} rounds exceed the enumeration limit")
    weight = 1 / len(INPUT_PAIRS) ** n_pairs
    success = defaultdict(float)
    mass = defaultdict(float)
    cache = {}
    for odd_inputs in itertools.product(INPUT_PAIRS, repeat=n_pairs):
        inputs = tuple(pair for pair in odd_inputs for _ in range(2))
        test_rounds, key_rounds = classify_odd_rounds(inputs, key_basis)
        public_rounds = tuple(sorted(
            (j, party) for j in list(range(2, n_rounds + 1, 2)) + list(test_rounds) for party in ('A', 'B')
        ))
        table = _posterior(device, inputs, public_rounds, key_rounds, cache)
        k = len(key_rounds)
        success[k] += weight * sum(max(candidates.values()) for candidates in table.values())
        mass[k] += weight
    return {k: success[k] / mass[k] for k in sorted(mass)}
