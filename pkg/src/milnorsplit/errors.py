"""Exception hierarchy.

Numeric failures derive from :class:`NumericInstability` so the CLI can map
them to exit code 2 in one place.
"""


class MilnorSplitError(Exception):
    """Base class for all package errors."""


class DegenerateFrame(MilnorSplitError, ValueError):
    pass


class NotOnSphere(MilnorSplitError, ValueError):
    pass


class ParseError(MilnorSplitError, ValueError):
    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class CriticalPoint(MilnorSplitError, ValueError):
    pass


class NumericInstability(MilnorSplitError, RuntimeError):
    pass


class NoSeedsFound(NumericInstability):
    pass


class NotRegular(NumericInstability):
    pass


class Diverged(NumericInstability):
    pass


class AmbiguousOrientation(NumericInstability):
    pass


class PoleTooClose(NumericInstability):
    pass


class NonIntegerLinking(NumericInstability):
    pass


class EpsilonUnstable(NumericInstability):
    pass


class UnstableCount(NumericInstability):
    pass
