"""
Devices Records - Per-round classical data produced by a device run
"""
from dataclasses import dataclass, field, replace

from quantum_core.states import Basis

PARTIES = ('A', 'B')

ROUND_FIELDS = ('input_a', 'input_b', 'output_a', 'output_b')


@dataclass(frozen=True)
class RoundRecord:
    """Inputs and outputs of one round; `announced` names the fields made public."""

    round_index: int
    input_a: Basis
    input_b: Basis
    output_a: int
    output_b: int
    announced: frozenset = field(default_factory=frozenset)

    def input_of(self, party):
        return self.input_a if party == 'A' else self.input_b

    def output_of(self, party):
        return self.output_a if party == 'A' else self.output_b

    def announce(self, *fields):
        """Copy of the record with `fields` marked public."""
        unknown = set(fields) - set(ROUND_FIELDS)
        if unknown:
            raise ValueError(f"Unknown round fields: {sorted(unknown)}")
        return replace(self, announced=self.announced | frozenset(fields))

    def is_announced(self, name):
        return name in self.announced


@dataclass(frozen=True)
class DeviceTrace:
    """Ordered round records of one device run; snapshots are debug-only internal states."""

    rounds: tuple
    snapshots: tuple = ()

    def __post_init__(self):
        indices = [record.round_index for record in self.rounds]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(f"Round indices must be contiguous from 1, got {indices}")

    def __len__(self):
        return len(self.rounds)

    @property
    def n_rounds(self):
        return len(self.rounds)

    def inputs(self):
        return tuple((r.input_a, r.input_b) for r in self.rounds)

    def outputs(self):
        return tuple((r.output_a, r.output_b) for r in self.rounds)
