"""
Analysis Distributions - Exact and empirical input/output distributions of a device
"""
import itertools
from collections import Counter
from dataclasses import dataclass, field

from devices.process import exact_outcomes
from quantum_core.states import Basis

INPUT_PAIRS = tuple(itertools.product((Basis.X, Basis.Z), repeat=2))


def all_input_sequences(n_rounds):
    return [tuple(seq) for seq in itertools.product(INPUT_PAIRS, repeat=n_rounds)]


def format_inputs(inputs):
    """('XZ', 'ZZ', ...) for a sequence of input pairs."""
    return tuple(f"{Basis(a)}{Basis(b)}" for a, b in inputs)


def _key(inputs):
    return tuple((Basis(a), Basis(b)) for a, b in inputs)


@dataclass
class ExactDistribution:
    """Output distribution for each input sequence, every sequence weighted equally."""

    n_rounds: int
    conditionals: dict

    @classmethod
    def of_device(cls, device, n_rounds, input_sequences=None):
        sequences = input_sequences or all_input_sequences(n_rounds)
        return cls(n_rounds, {_key(inputs): exact_outcomes(device, inputs) for inputs in sequences})

    def weighted(self):
        """Iterate (inputs, outputs, weight)."""
        for inputs, distribution in self.conditionals.items():
            for outputs, probability in distribution.items():
                yield inputs, outputs, probability

    @property
    def input_settings(self):
        return set(self.conditionals)


@dataclass
class EmpiricalDistribution:
    """Counts of observed (input sequence, output sequence) pairs."""

    n_rounds: int
    support: Counter = field(default_factory=Counter)

    @property
    def total_trials(self):
        return sum(self.support.values())

    def add(self, inputs, outputs):
        inputs, outputs = _key(inputs), tuple(tuple(pair) for pair in outputs)
        if len(inputs) != self.n_rounds or len(outputs) != self.n_rounds:
            raise ValueError(f"Expected {self.n_rounds} rounds, got {len(inputs)} inputs and {len(outputs)} outputs")
        self.support[inputs, outputs] += 1

    @classmethod
    def from_traces(cls, traces):
        traces = list(traces)
        distribution = cls(traces[0].n_rounds if traces else 0)
        for trace in traces:
            distribution.add(trace.inputs(), trace.outputs())
        return distribution

    @classmethod
    def from_transcripts(cls, transcripts):
        transcripts = list(transcripts)
        distribution = cls(transcripts[0].n_rounds if transcripts else 0)
        for transcript in transcripts:
            distribution.add(
                [(r.input_a, r.input_b) for r in transcript.rounds],
                [(r.output_a, r.output_b) for r in transcript.rounds],
            )
        return distribution

    def weighted(self):
        for (inputs, outputs), count in self.support.items():
            yield inputs, outputs, count

    @property
    def input_settings(self):
        return {inputs for inputs, _ in self.support}
