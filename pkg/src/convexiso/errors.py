"""Exception hierarchy shared by all modules."""


class ConvexIsoError(Exception):
    """Base class for every error raised by the package."""


class DegenerateBody(ConvexIsoError):
    """The body (or its second-moment matrix) is not full-dimensional."""


class DegenerateInput(DegenerateBody):
    """Input points do not span the ambient space."""


class EmptyIntersection(ConvexIsoError):
    pass


class LowAcceptance(ConvexIsoError):
    """Rejection sampling accepted too few proposals."""

    def __init__(self, rate, message=None):
        self.rate = rate
        super().__init__(message or f"acceptance rate {rate:.3g} below threshold")


class PointInside(ConvexIsoError):
    pass


class NotSymmetric(ConvexIsoError):
    pass


class NotIsotropic(ConvexIsoError):
    pass


class InsufficientSchedule(ConvexIsoError):
    pass


class QuadratureFailure(ConvexIsoError):
    pass


class NotOnBoundary(ConvexIsoError):
    pass


class NonUniqueNormal(ConvexIsoError):
    pass


class ProbeVerdict(ConvexIsoError):
    """Raised by the curvature probe when no positive curvature is detected.

    The partially filled estimate is attached as ``estimate``.
    """

    verdict = "unknown"

    def __init__(self, estimate, message=None):
        self.estimate = estimate
        super().__init__(message or self.verdict)


class FlatPoint(ProbeVerdict):
    verdict = "flat"


class ConeLike(ProbeVerdict):
    verdict = "cone"


class FormatVersionMismatch(ConvexIsoError):
    pass


class CorruptFile(ConvexIsoError):
    pass
