"""Exception taxonomy for the verification suite.

Every failure mode that callers are expected to branch on gets its own
class. All of them derive from CapmonoError so a runner can catch the
whole family at once without swallowing unrelated bugs.
"""

from __future__ import annotations


class CapmonoError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CapmonoError):
    """An argument lies outside the mathematically admissible range."""


class NonConvergence(CapmonoError):
    """An adaptive routine exhausted its budget before reaching tolerance."""


class Divergence(CapmonoError):
    """An improper integral was detected (or declared) to be divergent."""


class StepUnderflow(CapmonoError):
    """ODE step size collapsed below machine resolution.

    The partially computed trajectory is attached as ``trajectory`` so the
    caller can inspect the last valid state.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NoiseDominated(CapmonoError):
    """A finite-difference table failed to contract; round-off dominates."""


class RootNotBracketed(CapmonoError):
    """A root finder was given an interval with no sign change."""


class CriterionMismatch(CapmonoError):
    """Two independent classification criteria disagreed."""


class CrossCheckFailed(CapmonoError):
    """A closed-form value disagreed with its independent numerical check."""


class NotApplicable(CapmonoError):
    """The requested quantity is undefined for this geometry."""


class NotThreeDimensional(CapmonoError):
    """Operation requires dimension exactly three."""


class InsufficientSamples(CapmonoError):
    """Too few samples to form the requested estimate."""


class ConfigError(CapmonoError):
    """Invalid run configuration.

    ``key`` names the offending entry when one can be identified.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
