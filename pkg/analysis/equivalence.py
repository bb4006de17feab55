"""
Analysis Equivalence - Sampled sequential runs against the exact compiled memoryless model
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import chisquare

from devices.process import compile_trivial_memory, register_label, run_process2
from quantum_core.operations import outcome_distribution

logger = logging.getLogger(__name__)

OUTCOME_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class EquivalenceResult:
    statistic: float
    p_value: float
    samples: int
    round_p_values: tuple
    impossible_outcomes: int = 0

    def passes(self, alpha=1e-3):
        return self.impossible_outcomes == 0 and self.p_value > alpha


def round_marginals(spec, inputs):
    """Exact outcome-pair probabilities per round of a Process 1 spec (one factor per round)."""
    marginals = []
    for j, (basis_a, basis_b) in enumerate(inputs, start=1):
        labels = (register_label('A', j), register_label('B', j))
        factor = next(f for f in spec.factors if labels[0] in f.register_labels)
        if set(factor.register_labels) != set(labels):
            raise ValueError(f"Round {j} is not a separate factor of {spec.name}")
        instruments = {
            labels[0]: spec.instrument('A', j, basis_a),
            labels[1]: spec.instrument('B', j, basis_b),
        }
        distribution = outcome_distribution(factor, instruments)
        order = [factor.register_labels.index(label) for label in labels]
        marginals.append({
            pair: sum(p for bits, p in distribution.items() if tuple(bits[i] for i in order) == pair)
            for pair in OUTCOME_PAIRS
        })
    return marginals


def compiled_equivalence_test(behaviour, inputs, samples, rng):
    """
    Chi-squared test of per-round outcome-pair counts from `samples` direct
    sequential runs against the compiled model's exact probabilities, pooled
    over all rounds.
    """
    inputs = list(inputs)
    spec = compile_trivial_memory(behaviour, len(inputs))
    expected = np.array([[m[pair] for pair in OUTCOME_PAIRS] for m in round_marginals(spec, inputs)])
    observed = np.zeros_like(expected)
    for _ in range(samples):
        trace = run_process2(behaviour, inputs, rng)
        for j, pair in enumerate(trace.outputs()):
            observed[j, OUTCOME_PAIRS.index(pair)] += 1

    possible = expected > 0
    impossible = int(observed[~possible].sum())
    expected_counts = expected * samples
    observed_kept, expected_kept = observed[possible], expected_counts[possible]
    expected_kept = expected_kept * observed_kept.sum() / expected_kept.sum()
    # one constraint per round: each row of counts sums to `samples`
    pooled = chisquare(observed_kept, expected_kept, ddof=len(inputs) - 1)
    per_round = tuple(
        float(chisquare(observed[j][possible[j]], expected_counts[j][possible[j]] * observed[j][possible[j]].sum()
                        / expected_counts[j][possible[j]].sum()).pvalue)
        if possible[j].sum() > 1 else 1.0
        for j in range(len(inputs))
    )
    result = EquivalenceResult(
        statistic=float(pooled.statistic),
        p_value=float(pooled.pvalue),
        samples=samples,
        round_p_values=per_round,
        impossible_outcomes=impossible,
    )
    logger.info("%s vs compiled model over %d samples: chi2=%.2f p=%.4f",
                behaviour.name, samples, result.statistic, result.p_value)
    return result
