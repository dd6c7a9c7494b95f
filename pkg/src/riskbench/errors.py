"""Exception hierarchy shared across the toolkit.

Everything user-facing derives from RiskbenchError so the CLI can map
validation failures to a single exit code.
"""

from __future__ import annotations


class RiskbenchError(Exception):
    """Base class for all expected, reportable failures."""


class ParseError(RiskbenchError):
    """A source file could not be parsed; message carries the location."""


class CorpusError(RiskbenchError):
    """A corpus, project, or register violates a structural invariant."""


class NormalizeError(RiskbenchError):
    """Assessment normalization was requested with nothing to normalize."""


class DimensionError(RiskbenchError):
    """Vector operands disagree on dimensionality."""


class MissingEmbeddingError(RiskbenchError):
    """A precomputed sentence table has no entry for the requested text."""


class EmptyReportError(RiskbenchError):
    """A report was requested over an empty score population."""


class StatTestError(RiskbenchError):
    """A statistical test precondition failed (size, variance, rank)."""


class TransitionError(RiskbenchError):
    """An illegal (state, transition) pair was applied to the automaton."""


class LifecycleError(RiskbenchError):
    """A risk observation sequence cannot form a valid lifecycle."""


class TemplateError(RiskbenchError):
    """Template construction or evaluation preconditions failed."""


class RbsError(RiskbenchError):
    """A risk breakdown structure file violates its invariants."""
