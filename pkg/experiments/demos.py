"""
Experiments Demos - Preset desk-scale runs of the three headline separations

Each demo returns a DemoOutcome: one PASS / FAIL line per claim with the
measured numbers, plus AnalysisResults so the numbers land in a report.
"""
import logging
from dataclasses import dataclass, field

from django.conf import settings
from django.db import models

from analysis.contradiction import contradiction_report, phase_error_rate
from analysis.distributions import ExactDistribution
from analysis.guessing import Strategy, eve_guessing, guessing_probability
from analysis.reports import AnalysisResult
from analysis.signalling import BACKWARD, signalling_measure
from analysis.subsets import test_subset_shift
from devices import behaviours
from experiments.runner import trial_rng
from protocol.example import run_example_protocol

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 200
DEFAULT_SEED = 2024


class DemoId(models.TextChoices):
    SIGNALLING = 'signalling', 'Cross-round signalling of the echo device'
    CONTRADICTION = 'contradiction', 'Naive key claim against the actual key entropy'
    PROTOCOL_ATTACK = 'protocol_attack', 'Even-round copier attack on the example protocol'
    ALL = 'all', 'Every demo'


@dataclass(frozen=True)
class ClaimLine:
    passed: bool
    text: str

    def __str__(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.text}"


@dataclass
class DemoOutcome:
    demo: str
    lines: list = field(default_factory=list)
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(line.passed for line in self.lines)

    def claim(self, passed, text):
        self.lines.append(ClaimLine(bool(passed), text))


def _bits(value):
    return f"{value:.0f} bit" if round(value) == 1 else f"{value:.0f} bits"


def signalling_demo(**options):
    outcome = DemoOutcome(DemoId.SIGNALLING)
    tolerance = settings.QUANTUM_TOLERANCE
    echo = signalling_measure(ExactDistribution.of_device(behaviours.echo_signalling(), 2))
    honest = signalling_measure(ExactDistribution.of_device(behaviours.iid_bell(), 2))
    echo_magnitude, honest_magnitude = echo.magnitude(2), honest.magnitude(2)

    outcome.claim(abs(echo_magnitude - 1.0) < tolerance,
                  f"echo: round-2 signalling magnitude {echo_magnitude:.3f} (expected 1.0)")
    outcome.claim(honest_magnitude < tolerance,
                  f"iid_bell: round-2 signalling magnitude {honest_magnitude:.3f} (expected 0.0)")
    backward = max(echo.max_magnitude(BACKWARD), honest.max_magnitude(BACKWARD))
    outcome.claim(backward < tolerance, f"no backward influence on either device (max {backward:.3g})")
    outcome.results.append(AnalysisResult('demo_signalling', {
        'echo_round2': echo_magnitude,
        'iid_bell_round2': honest_magnitude,
        'max_backward': backward,
    }, {'witness': echo.entry(2, 'AB').witness}))
    return outcome


def contradiction_demo(n_rounds=8, **options):
    outcome = DemoOutcome(DemoId.CONTRADICTION)
    tolerance = settings.QUANTUM_TOLERANCE
    broken = contradiction_report(behaviours.retain_remeasure(), n_rounds)
    honest = contradiction_report(behaviours.iid_bell(), n_rounds)

    outcome.claim(
        broken.gap > 1 - tolerance,
        f"retain_remeasure n={n_rounds}: naive {_bits(broken.naive_claim.claimed_length)} "
        f"vs actual {_bits(broken.actual_minentropy)}",
    )
    outcome.claim(
        abs(honest.gap) < tolerance,
        f"iid_bell n={n_rounds}: naive {_bits(honest.naive_claim.claimed_length)} "
        f"vs actual {_bits(honest.actual_minentropy)}",
    )
    shift = test_subset_shift(behaviours.retain_remeasure(), 3)
    outcome.claim(
        shift.max_tv >= 0.25 - tolerance,
        f"retain_remeasure: test-round statistics shift by {shift.max_tv:.3f} "
        f"when other rounds use {', '.join(shift.non_test_inputs)}",
    )
    outcome.results.extend([
        AnalysisResult('demo_contradiction_retain_remeasure', broken.to_metrics(), {'label': broken.naive_claim.label}),
        AnalysisResult('demo_contradiction_iid_bell', honest.to_metrics(), {'label': honest.naive_claim.label}),
        AnalysisResult('demo_test_subset_shift', {'max_tv': shift.max_tv}, {
            'test_rounds': list(shift.test_rounds),
            'non_test_inputs': list(shift.non_test_inputs),
        }),
    ])
    return outcome


def _example_runs(device_factory, n_pairs, trials, seed):
    return [run_example_protocol(n_pairs, device_factory(), trial_rng(seed, i)) for i in range(trials)]


def protocol_attack_demo(trials=DEFAULT_TRIALS, seed=DEFAULT_SEED, **options):
    outcome = DemoOutcome(DemoId.PROTOCOL_ATTACK)
    tolerance = settings.QUANTUM_TOLERANCE

    copier = eve_guessing(_example_runs(behaviours.even_round_copier, 50, trials, seed), Strategy.COPY_DECODER)
    outcome.claim(
        copier.success_rate == 1.0 and copier.pa_success_rate == 1.0,
        f"even_copier n_pairs=50: Eve success {copier.success_rate:.3f}, "
        f"after privacy amplification {copier.pa_success_rate:.3f} over {copier.trials} trials",
    )

    n_pairs = 3
    honest_runs = _example_runs(lambda: behaviours.bell_pairs(2 * n_pairs), n_pairs, trials, seed)
    honest = eve_guessing(honest_runs, Strategy.MAP_DECODER, device=behaviours.bell_pairs(2 * n_pairs))
    exact = guessing_probability(behaviours.bell_pairs(2 * n_pairs), n_pairs)
    expected = sum(exact[t.n_key] for t in honest_runs) / len(honest_runs)
    low, high = honest.interval
    outcome.claim(
        low <= expected <= high,
        f"bell_pairs n_pairs={n_pairs}: Eve success {honest.success_rate:.3f} "
        f"[{low:.3f}, {high:.3f}] vs exact {expected:.3f} "
        f"({', '.join(f'k={k}: {p:.3f}' for k, p in exact.items())})",
    )

    # both devices hold a genuine |Phi+> in every round
    purity_rounds = 4
    copier_delta = phase_error_rate(behaviours.even_round_copier(), purity_rounds)
    bell_delta = phase_error_rate(behaviours.bell_pairs(purity_rounds), purity_rounds)
    copier_exact = guessing_probability(behaviours.even_round_copier(), purity_rounds // 2)
    bell_exact = guessing_probability(behaviours.bell_pairs(purity_rounds), purity_rounds // 2)
    k = max(bell_exact)
    outcome.claim(
        copier_delta < tolerance and bell_delta < tolerance and abs(copier_exact[k] - 1.0) < tolerance,
        f"purity: phase error {copier_delta:.3f} (even_copier) and {bell_delta:.3f} (bell_pairs), "
        f"yet Eve guesses a {k}-bit key with {copier_exact[k]:.3f} vs {bell_exact[k]:.3f}",
    )

    outcome.results.extend([
        AnalysisResult('demo_attack_even_copier', copier.to_metrics(), {'strategy': str(Strategy.COPY_DECODER)}),
        AnalysisResult('demo_attack_bell_pairs', {**honest.to_metrics(), 'exact_expected': expected},
                       {'strategy': str(Strategy.MAP_DECODER), 'exact_by_length': {str(k): p for k, p in exact.items()}}),
        AnalysisResult('demo_purity_leak', {
            'even_copier_delta_ph': copier_delta,
            'bell_pairs_delta_ph': bell_delta,
            'even_copier_guessing': copier_exact[k],
            'bell_pairs_guessing': bell_exact[k],
        }, {'key_length': k}),
    ])
    return outcome


DEMOS = {
    DemoId.SIGNALLING: signalling_demo,
    DemoId.CONTRADICTION: contradiction_demo,
    DemoId.PROTOCOL_ATTACK: protocol_attack_demo,
}


def run_demos(which, **options):
    """Run one demo, or every demo for 'all', in a fixed order."""
    which = DemoId(which)
    selected = list(DEMOS) if which == DemoId.ALL else [which]
    outcomes = []
    for demo_id in selected:
        logger.info("Running demo %s", demo_id)
        outcomes.append(DEMOS[demo_id](**options))
    return outcomes
