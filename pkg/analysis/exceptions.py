"""
Analysis Exceptions
"""


class AnalysisError(Exception):
    """Base class for analysis failures."""


class UnknownStrategy(AnalysisError):
    """No reconstruction strategy is registered under the requested id."""


class InsufficientSupport(AnalysisError):
    """An empirical distribution never sampled some input setting the analysis needs."""


class UnknownAnalysis(AnalysisError):
    """No analysis is registered under the requested id."""
