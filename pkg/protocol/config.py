"""
Protocol Configuration - Parameters of a BB84-style run
"""
from dataclasses import asdict, dataclass, field

from django.db import models

from protocol.exceptions import InvalidProtocolConfig
from quantum_core.states import Basis

AUTO = 'auto'


class SelectionMode(models.TextChoices):
    SPOT_CHECK = 'spot_check', 'Independent per-round test decision'
    FIXED_SUBSET = 'fixed_subset', 'Uniform fixed-size test subset drawn upfront'


@dataclass(frozen=True)
class TestSelection:
    """How test rounds are chosen: spot_check(gamma) or fixed_subset(size)."""

    mode: str
    gamma: float = None
    size: int = None

    @classmethod
    def spot_check(cls, gamma):
        return cls(mode=SelectionMode.SPOT_CHECK, gamma=float(gamma))

    @classmethod
    def fixed_subset(cls, size):
        return cls(mode=SelectionMode.FIXED_SUBSET, size=int(size))

    @property
    def is_spot_check(self):
        return self.mode == SelectionMode.SPOT_CHECK

    def validate(self, n_rounds=None):
        if self.mode not in SelectionMode.values:
            raise InvalidProtocolConfig('test_selection', f"unknown mode {self.mode!r}")
        if self.is_spot_check:
            if self.gamma is None or not 0.0 <= self.gamma <= 1.0:
                raise InvalidProtocolConfig('test_selection', f"gamma must lie in [0, 1], got {self.gamma}")
        elif self.size is None or self.size < 0 or (n_rounds is not None and self.size > n_rounds):
            raise InvalidProtocolConfig('test_selection', f"size must lie in [0, n_rounds], got {self.size}")

    def to_dict(self):
        if self.is_spot_check:
            return {'mode': str(self.mode), 'gamma': self.gamma}
        return {'mode': str(self.mode), 'size': self.size}

    @classmethod
    def from_dict(cls, data):
        mode = data.get('mode')
        if mode == SelectionMode.SPOT_CHECK:
            return cls.spot_check(data.get('gamma', 0.0))
        if mode == SelectionMode.FIXED_SUBSET:
            return cls.fixed_subset(data.get('size', 0))
        raise InvalidProtocolConfig('test_selection', f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    """
    Validated protocol parameters. A protocol config requires a strictly
    interior spot-check probability and a test subset smaller than the run;
    `test_selection` is None for protocols that test on matched X rounds.
    """

    n_rounds: int
    key_basis: Basis = Basis.Z
    test_selection: TestSelection = field(default_factory=lambda: TestSelection.spot_check(0.25))
    basis_bias: float = 1.0
    pa_output_length: object = AUTO

    def __post_init__(self):
        object.__setattr__(self, 'key_basis', Basis(self.key_basis))
        if not isinstance(self.n_rounds, int) or self.n_rounds < 1:
            raise InvalidProtocolConfig('n_rounds', f"must be a positive integer, got {self.n_rounds!r}")
        if not 0.0 <= self.basis_bias <= 1.0:
            raise InvalidProtocolConfig('basis_bias', f"must lie in [0, 1], got {self.basis_bias}")
        if self.pa_output_length != AUTO and (
            not isinstance(self.pa_output_length, int) or self.pa_output_length < 0
        ):
            raise InvalidProtocolConfig('pa_output_length', "must be a nonnegative integer or 'auto'")
        selection = self.test_selection
        if selection is not None:
            selection.validate(self.n_rounds)
            if selection.is_spot_check and not 0.0 < selection.gamma < 1.0:
                raise InvalidProtocolConfig('test_selection', f"gamma must lie in (0, 1), got {selection.gamma}")
            if not selection.is_spot_check and selection.size >= self.n_rounds:
                raise InvalidProtocolConfig('test_selection', f"size must be below n_rounds={self.n_rounds}")

    def to_dict(self):
        data = asdict(self)
        data['key_basis'] = str(self.key_basis)
        data['test_selection'] = self.test_selection.to_dict() if self.test_selection else None
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        selection = data.get('test_selection')
        if isinstance(selection, dict):
            data['test_selection'] = TestSelection.from_dict(selection)
        return cls(**data)
