"""
Protocol Postprocessing - Test selection, sifting, parameter estimation,
error-correction accounting, Toeplitz privacy amplification and key claims
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from analysis.entropy import binary_entropy
from devices.records import PARTIES
from protocol.config import AUTO
from protocol.exceptions import LengthViolation, NoTestRounds
from protocol.transcripts import Announcement, AnnouncementKind, Transcript
from quantum_core.states import Basis

logger = logging.getLogger(__name__)

NAIVE_FORMULA = 'naive_cpa'


def select_test_rounds(selection, n_rounds, rng):
    """Sorted 1-based test-round indices for a spot-check or fixed-subset selection."""
    selection.validate(n_rounds)
    if selection.is_spot_check:
        chosen = np.flatnonzero(rng.random(n_rounds) < selection.gamma) + 1
    else:
        chosen = np.sort(rng.choice(n_rounds, size=selection.size, replace=False)) + 1
    return tuple(int(j) for j in chosen)


def toeplitz_seed_length(key_length, output_length):
    return key_length + output_length - 1 if output_length > 0 else 0


def privacy_amplify(key, output_length, seed):
    """
    Hash `key` (n bits) to `output_length` (m bits) with the Toeplitz matrix
    T[i, j] = seed[i - j + n - 1] over GF(2). The seed has n + m - 1 bits.
    """
    key = np.asarray(tuple(key), dtype=np.int64)
    seed = np.asarray(tuple(seed), dtype=np.int64)
    n = len(key)
    if output_length < 0 or output_length > n:
        raise LengthViolation(f"Output length {output_length} must lie in [0, {n}]")
    if len(seed) != toeplitz_seed_length(n, output_length):
        raise LengthViolation(
            f"Seed has {len(seed)} bits; a {n}->{output_length} Toeplitz hash needs "
            f"{toeplitz_seed_length(n, output_length)}"
        )
    if output_length == 0:
        return ()
    matrix = toeplitz(seed[n - 1:], seed[n - 1::-1])
    return tuple(int(b) for b in (matrix @ key) % 2)


@dataclass(frozen=True)
class KeyClaim:
    """
    Key length a phase-error argument would certify. The naive formula is
    valid only for memoryless (Process 1) devices.
    """

    delta_ph: float
    claimed_length: float
    n_key: int
    formula_id: str = NAIVE_FORMULA

    @classmethod
    def naive(cls, delta_ph, n_key):
        return cls(delta_ph=float(delta_ph), claimed_length=n_key * (1 - binary_entropy(delta_ph)), n_key=n_key)

    @property
    def label(self):
        return 'NAIVE: valid only under Process 1 assumptions'

    def to_dict(self):
        return {
            'delta_ph': self.delta_ph,
            'claimed_length': self.claimed_length,
            'n_key': self.n_key,
            'formula_id': self.formula_id,
            'label': self.label,
        }


def naive_key_claim(transcript):
    """Claimed key length from the observed X-X disagreement on test rounds."""
    stats = transcript.test_statistics.get('test')
    if not stats or not stats['rounds']:
        raise NoTestRounds(f"{transcript.protocol} transcript has no X-basis test rounds")
    return KeyClaim.naive(stats['errors'] / stats['rounds'], transcript.n_key)


def _disagreements(trace, indices):
    errors = sum(trace.rounds[j - 1].output_a != trace.rounds[j - 1].output_b for j in indices)
    return {
        'rounds': len(indices),
        'errors': int(errors),
        'qber': errors / len(indices) if indices else None,
    }


def finish_protocol(protocol, device_name, config, trace, rng, test_rounds, key_rounds,
                    basis_rounds, early_announcements=(), test_basis=Basis.X):
    """
    Public discussion after every round has been measured: bases of
    `basis_rounds`, test indices, test outputs, the error-correction
    syndrome length and the PA seed, in that order.

    `test_rounds` are rounds measured in `test_basis` by both parties,
    whose outputs are announced; `key_rounds` are rounds where both
    parties used the key basis.
    """
    n_rounds = trace.n_rounds
    announced = {j: set() for j in range(1, n_rounds + 1)}
    log = list(early_announcements)
    for announcement in early_announcements:
        announced[announcement.round_index].add(f"output_{announcement.party.lower()}")

    for j in basis_rounds:
        record = trace.rounds[j - 1]
        for party in PARTIES:
            log.append(Announcement(n_rounds, AnnouncementKind.BASIS, str(record.input_of(party)), j, party))
            announced[j].add(f"input_{party.lower()}")
    log.append(Announcement(n_rounds, AnnouncementKind.TEST_ROUNDS, tuple(test_rounds)))
    for j in test_rounds:
        record = trace.rounds[j - 1]
        for party in PARTIES:
            log.append(Announcement(n_rounds, AnnouncementKind.OUTPUT, record.output_of(party), j, party))
            announced[j].add(f"output_{party.lower()}")

    sifted_a = tuple(trace.rounds[j - 1].output_a for j in key_rounds)
    sifted_b = tuple(trace.rounds[j - 1].output_b for j in key_rounds)
    test_statistics = {
        'test': {'basis': str(Basis(test_basis)), **_disagreements(trace, test_rounds)},
        'key': {'basis': str(Basis(config.key_basis)), **_disagreements(trace, key_rounds)},
    }

    # error correction is an oracle: Bob ends with Alice's key, the syndrome length is leaked
    ec_leakage = len(sifted_a)
    log.append(Announcement(n_rounds, AnnouncementKind.EC_SYNDROME, ec_leakage))

    output_length = _output_length(config, test_statistics, len(sifted_a))
    seed = tuple(int(b) for b in rng.integers(0, 2, size=toeplitz_seed_length(len(sifted_a), output_length)))
    log.append(Announcement(n_rounds, AnnouncementKind.PA_SEED, seed))
    final_a = privacy_amplify(sifted_a, output_length, seed)

    rounds = tuple(record.announce(*sorted(announced[record.round_index])) for record in trace.rounds)
    logger.info("%s on %s: %d rounds, %d test, %d sifted, %d-bit final key",
                protocol, device_name, n_rounds, len(test_rounds), len(sifted_a), output_length)
    return Transcript(
        protocol=protocol,
        device=device_name,
        config=config.to_dict(),
        rounds=rounds,
        public_log=tuple(sorted(log, key=lambda a: a.step)),
        test_rounds=tuple(test_rounds),
        sifted_rounds=tuple(key_rounds),
        sifted_key_a=sifted_a,
        sifted_key_b=sifted_b,
        test_statistics=test_statistics,
        ec_leakage=ec_leakage,
        pa_seed=seed,
        final_key_a=final_a,
        final_key_b=privacy_amplify(sifted_a, output_length, seed),
    )


def _output_length(config, test_statistics, n_key):
    if config.pa_output_length != AUTO:
        if config.pa_output_length > n_key:
            logger.warning("Requested %d-bit final key but only %d sifted bits; truncating",
                           config.pa_output_length, n_key)
        return min(config.pa_output_length, n_key)
    stats = test_statistics['test']
    if not stats['rounds']:
        return 0
    return max(0, math.floor(KeyClaim.naive(stats['qber'], n_key).claimed_length))
