"""
Analysis Signalling - Cross-round influence of inputs on output marginals
"""
import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass

from analysis.distributions import INPUT_PAIRS, format_inputs
from analysis.exceptions import InsufficientSupport
from devices.records import PARTIES

logger = logging.getLogger(__name__)

PARTY_VIEWS = ('A', 'B', 'AB')
FORWARD = 'forward'
BACKWARD = 'backward'


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def _view(outputs, round_index, party):
    pair = outputs[round_index - 1]
    return tuple(pair) if party == 'AB' else pair[PARTIES.index(party)]


def _normalized(weights):
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


@dataclass(frozen=True)
class SignallingEntry:
    round_index: int
    party: str
    direction: str
    max_tv: float
    witness: dict = None


@dataclass(frozen=True)
class SignallingReport:
    """
    Per (round, party) maximal total-variation shift of the round's output
    marginal. Forward entries vary inputs of earlier rounds, backward
    entries vary inputs of later rounds. `missing` counts input settings
    that were never observed for a comparison, per (direction, round).
    """

    n_rounds: int
    entries: tuple
    missing: dict

    def entry(self, round_index, party, direction=FORWARD):
        for entry in self.entries:
            if (entry.round_index, entry.party, entry.direction) == (round_index, party, direction):
                return entry
        return None

    def magnitude(self, round_index, direction=FORWARD):
        values = [e.max_tv for e in self.entries if e.round_index == round_index and e.direction == direction]
        return max(values, default=0.0)

    def max_magnitude(self, direction=FORWARD, party=None):
        values = [
            e.max_tv for e in self.entries
            if e.direction == direction and (party is None or e.party == party)
        ]
        return max(values, default=0.0)

    @property
    def is_complete(self):
        return not any(self.missing.values())

    def to_dict(self):
        return {
            'n_rounds': self.n_rounds,
            'entries': [
                {
                    'round': e.round_index,
                    'party': e.party,
                    'direction': e.direction,
                    'max_tv': e.max_tv,
                    'witness': e.witness,
                }
                for e in self.entries
            ],
            'missing_settings': {f"{d}:{j}": count for (d, j), count in sorted(self.missing.items())},
        }


def _windows(n_rounds, round_index, direction, lag):
    if direction == FORWARD:
        start = 1 if lag is None else max(1, round_index - lag)
        varied = list(range(start, round_index))
        held = list(range(round_index, n_rounds + 1)) if lag is None else [round_index]
    else:
        stop = n_rounds if lag is None else min(n_rounds, round_index + lag)
        varied = list(range(round_index + 1, stop + 1))
        held = list(range(1, round_index + 1)) if lag is None else [round_index]
    return varied, held


def _round_entries(distribution, round_index, direction, lag):
    varied, held = _windows(distribution.n_rounds, round_index, direction, lag)
    tables = {party: defaultdict(lambda: defaultdict(lambda: defaultdict(float))) for party in PARTY_VIEWS}
    for inputs, outputs, weight in distribution.weighted():
        held_key = tuple(inputs[j - 1] for j in held)
        varied_key = tuple(inputs[j - 1] for j in varied)
        for party in PARTY_VIEWS:
            tables[party][held_key][varied_key][_view(outputs, round_index, party)] += weight

    expected = len(INPUT_PAIRS) ** len(varied)
    missing = sum(expected - len(groups) for groups in tables['A'].values())
    entries = []
    for party in PARTY_VIEWS:
        best, witness = 0.0, None
        for held_key, groups in tables[party].items():
            marginals = {key: _normalized(weights) for key, weights in groups.items()}
            for first, second in itertools.combinations(sorted(marginals), 2):
                shift = total_variation(marginals[first], marginals[second])
                if shift > best:
                    best = shift
                    witness = {
                        'held_rounds': held,
                        'held_inputs': list(format_inputs(held_key)),
                        'varied_rounds': varied,
                        'first': list(format_inputs(first)),
                        'second': list(format_inputs(second)),
                    }
        entries.append(SignallingEntry(round_index, party, direction, float(best), witness))
    return entries, missing


def signalling_measure(distribution, lag=None, require_complete=False):
    """
    Signalling report of an exact or empirical distribution over at least
    two rounds. With `lag`, only the `lag` neighbouring rounds are varied
    and only the target round's input is held fixed, which keeps sampled
    distributions comparable; exact distributions use the full form.
    """
    n_rounds = distribution.n_rounds
    if n_rounds < 2:
        raise ValueError(f"Signalling needs at least two rounds, got {n_rounds}")
    entries, missing = [], {}
    for round_index in range(2, n_rounds + 1):
        found, missing[FORWARD, round_index] = _round_entries(distribution, round_index, FORWARD, lag)
        entries.extend(found)
    for round_index in range(1, n_rounds):
        found, missing[BACKWARD, round_index] = _round_entries(distribution, round_index, BACKWARD, lag)
        entries.extend(found)
    report = SignallingReport(n_rounds, tuple(entries), missing)
    if not report.is_complete:
        logger.warning("Signalling report is missing %d input settings", sum(missing.values()))
        if require_complete:
            raise InsufficientSupport(f"Unobserved input settings: {report.to_dict()['missing_settings']}")
    return report
