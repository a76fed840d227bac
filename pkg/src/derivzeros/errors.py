"""Exception hierarchy shared by every derivzeros module."""

from __future__ import annotations


class DerivZerosError(Exception):
    """Base class for all library errors."""


class ExactRootHit(DerivZerosError):
    """The evaluation point coincides bit-exactly with a root."""

    def __init__(self, z: complex, index: int):
        super().__init__(f"evaluation point {z!r} equals root #{index}")
        self.z = z
        self.index = index


class OrderTooLarge(DerivZerosError):
    pass


class DegreeTooLarge(DerivZerosError):
    pass


class DerivativeZero(DerivZerosError):
    pass


class DegenerateInput(DerivZerosError):
    pass


class NoConvergence(DerivZerosError):
    """An iterative solver stopped before meeting its tolerance.

    ``result`` carries whatever partial answer the solver had, so callers that
    prefer flagged output over an exception can still use it.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class NonConvergence(NoConvergence):
    """Entropic transport did not reach its marginal tolerance."""


class InvalidSpec(DerivZerosError):
    pass


class CoincidentPoints(DerivZerosError):
    pass


class CoincidentAtoms(CoincidentPoints):
    pass


class AtomHit(DerivZerosError):
    pass


class SizeTooLarge(DerivZerosError):
    pass


class NoDroplet(DerivZerosError):
    pass


class ConfigError(DerivZerosError):
    pass


class IoError(DerivZerosError):
    """Writing a report or points file failed."""
