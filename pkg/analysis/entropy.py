"""
Analysis Entropy - Binary entropy and entropies of exactly enumerated output strings
"""
import math

import numpy as np

from devices.process import exact_outcomes
from devices.records import PARTIES


def binary_entropy(p):
    """h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def shannon_entropy(probabilities):
    values = np.array([p for p in probabilities if p > 0], dtype=float)
    return float(-(values * np.log2(values)).sum()) if len(values) else 0.0


def min_entropy(probabilities):
    return float(-math.log2(max(probabilities)))


ENTROPY_MODES = {
    'shannon': shannon_entropy,
    'min': min_entropy,
}


def party_marginal(distribution, party='A'):
    """Distribution of one party's output string (or both, party='AB')."""
    marginal = {}
    for outputs, probability in distribution.items():
        if party == 'AB':
            key = outputs
        else:
            index = PARTIES.index(party)
            key = tuple(pair[index] for pair in outputs)
        marginal[key] = marginal.get(key, 0.0) + probability
    return marginal


def string_entropy(device, inputs, mode='shannon', party='A'):
    """Exact entropy in bits of a party's output string under a fixed input sequence."""
    if mode not in ENTROPY_MODES:
        raise ValueError(f"Unknown entropy mode {mode!r}; expected one of {sorted(ENTROPY_MODES)}")
    marginal = party_marginal(exact_outcomes(device, inputs), party)
    return ENTROPY_MODES[mode](marginal.values())
