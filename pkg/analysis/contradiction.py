"""
Analysis Contradiction - Naive phase-error key claim against the exact entropy of the key string
"""
import logging
from dataclasses import dataclass

from analysis.entropy import min_entropy, party_marginal, shannon_entropy
from devices.process import exact_outcomes
from protocol.postprocessing import KeyClaim
from quantum_core.states import Basis

logger = logging.getLogger(__name__)


def phase_error_rate(device, n_rounds):
    """Expected fraction of X-X rounds where Alice and Bob disagree, by exact enumeration."""
    distribution = exact_outcomes(device, [(Basis.X, Basis.X)] * n_rounds)
    return sum(
        probability * sum(a != b for a, b in outputs) / n_rounds
        for outputs, probability in distribution.items()
    )


@dataclass(frozen=True)
class ContradictionReport:
    device: str
    n_rounds: int
    naive_claim: KeyClaim
    actual_shannon: float
    actual_minentropy: float
    ebit_budget: int

    @property
    def gap(self):
        return self.naive_claim.claimed_length - self.actual_minentropy

    @property
    def key_upper_bound(self):
        """Distillable key is bounded by both the key-string entropy and the ebits consumed."""
        return min(self.actual_minentropy, self.ebit_budget)

    def to_metrics(self):
        return {
            'n_rounds': self.n_rounds,
            'delta_ph': self.naive_claim.delta_ph,
            'naive_claim': self.naive_claim.claimed_length,
            'actual_shannon': self.actual_shannon,
            'actual_minentropy': self.actual_minentropy,
            'gap': self.gap,
            'ebit_budget': self.ebit_budget,
            'key_upper_bound': self.key_upper_bound,
        }


def contradiction_report(device, n_rounds, key_basis=Basis.Z):
    """
    Exact phase-error rate from all-X rounds, the naive claim for an all
    key-basis run, and the actual entropy of Alice's key string.
    """
    delta_ph = phase_error_rate(device, n_rounds)
    key_outputs = exact_outcomes(device, [(key_basis, key_basis)] * n_rounds)
    alice = party_marginal(key_outputs, 'A').values()
    report = ContradictionReport(
        device=str(device.name),
        n_rounds=n_rounds,
        naive_claim=KeyClaim.naive(delta_ph, n_rounds),
        actual_shannon=shannon_entropy(alice),
        actual_minentropy=min_entropy(alice),
        ebit_budget=device.ebit_budget(n_rounds),
    )
    logger.info("%s over %d rounds: naive %.3f bits vs actual %.3f bits", report.device, n_rounds,
                report.naive_claim.claimed_length, report.actual_minentropy)
    return report
