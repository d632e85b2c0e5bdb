"""Exception and warning types raised across the package."""


class BallcoverError(Exception):
    """Base class for all package errors."""


class InstanceError(BallcoverError, ValueError):
    """Malformed or invalid instance input."""


class TriangleViolation(InstanceError):
    def __init__(self, i, j, k, excess):
        self.i, self.j, self.k, self.excess = int(i), int(j), int(k), float(excess)
        super().__init__(
            f"d({self.i},{self.j}) exceeds d({self.i},{self.k}) + d({self.k},{self.j}) "
            f"by {self.excess:.3g}"
        )


class AsymmetricMatrix(InstanceError):
    pass


class NegativeDistance(InstanceError):
    pass


class DisconnectedGraph(InstanceError):
    pass


class EmptySubset(BallcoverError, ValueError):
    pass


class NoServers(InstanceError):
    pass


class NormalizationError(InstanceError):
    """Client points violate the minimum-distance-1 normalization the solvers assume."""


class InvalidDelta(BallcoverError, ValueError):
    pass


class InvalidK(BallcoverError, ValueError):
    pass


class EmptyInput(BallcoverError, ValueError):
    pass


class OutOfRegime(BallcoverError, ValueError):
    """Probe radius is larger than the partitioning guarantee covers."""


class TooLarge(BallcoverError, ValueError):
    """Input exceeds the size an exhaustive routine is willing to handle."""


class Infeasible(BallcoverError):
    pass


class MissingEntry(BallcoverError, KeyError):
    pass


class ReductionMismatch(BallcoverError, AssertionError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"reduction check failed: {report}")


class UsageError(BallcoverError, ValueError):
    pass


class CapApplied(UserWarning):
    """An enumeration bound was truncated; approximation guarantees no longer apply."""
