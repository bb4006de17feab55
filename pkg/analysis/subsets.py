"""
Analysis Subsets - Does the test-round distribution depend on how the other rounds were measured?
"""
import itertools
from dataclasses import dataclass

from analysis.distributions import INPUT_PAIRS, format_inputs
from analysis.signalling import total_variation
from devices.process import exact_outcomes
from quantum_core.states import Basis


@dataclass(frozen=True)
class SubsetShift:
    max_tv: float
    test_rounds: tuple = ()
    non_test_inputs: tuple = ()


def _test_marginal(distribution, test_rounds):
    marginal = {}
    for outputs, probability in distribution.items():
        key = tuple(outputs[j - 1] for j in test_rounds)
        marginal[key] = marginal.get(key, 0.0) + probability
    return marginal


def test_subset_shift(device, n_rounds):
    """
    Largest TV shift, over nonempty test subsets and non-test inputs, of the
    distribution of X-X test-round outputs relative to measuring every round in X.
    """
    reference = exact_outcomes(device, [(Basis.X, Basis.X)] * n_rounds)
    best = SubsetShift(0.0)
    rounds = range(1, n_rounds + 1)
    for size in range(1, n_rounds):
        for test_rounds in itertools.combinations(rounds, size):
            expected = _test_marginal(reference, test_rounds)
            others = [j for j in rounds if j not in test_rounds]
            for choice in itertools.product(INPUT_PAIRS, repeat=len(others)):
                assigned = dict(zip(others, choice))
                inputs = [assigned.get(j, (Basis.X, Basis.X)) for j in rounds]
                shift = total_variation(expected, _test_marginal(exact_outcomes(device, inputs), test_rounds))
                if shift > best.max_tv:
                    best = SubsetShift(float(shift), test_rounds, format_inputs(inputs))
    return best
