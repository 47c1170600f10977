"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can emit
machine-readable failures.
"""

from __future__ import annotations


class AlgDomainError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 2

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def to_json(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


# polynomials
class DegeneratePoints(AlgDomainError):
    pass


class IdenticallyZero(AlgDomainError):
    pass


class ToleranceTooCoarse(AlgDomainError):
    pass


# systems
class BudgetExceeded(AlgDomainError):
    pass


class SingularCluster(AlgDomainError):
    pass


class Diverged(AlgDomainError):
    pass


class SingularJacobian(AlgDomainError):
    pass


# curvegeo
class SingularPoint(AlgDomainError):
    pass


class TraceStalled(AlgDomainError):
    pass


class SignUndetermined(AlgDomainError):
    pass


# domain
class ValidationError(AlgDomainError):
    """Def.-level validation failures of a scene."""


class TriplePoint(ValidationError):
    pass


class TangentialCrossing(ValidationError):
    pass


class CurveMissesClosure(ValidationError):
    pass


class UnboundedDomain(ValidationError):
    pass


class SingularCurve(ValidationError):
    pass


class SeedOnCurve(ValidationError):
    pass


class OnCurve(AlgDomainError):
    pass


class OutsideBox(AlgDomainError):
    pass


class ClosureMembershipUndecided(AlgDomainError):
    pass


class MembershipUndecided(AlgDomainError):
    pass


# reeb
class NotMorse(AlgDomainError):
    exit_code = 3


class SweepMatchingAmbiguous(AlgDomainError):
    pass


class TooLarge(AlgDomainError):
    pass


# surgery
class HypothesisViolated(AlgDomainError):
    exit_code = 3


class NoValidRadius(AlgDomainError):
    exit_code = 3


class SeedSwallowed(AlgDomainError):
    pass


class ValidationFailed(AlgDomainError):
    pass


class GraphChanged(AlgDomainError):
    exit_code = 3


class IterationCapReached(AlgDomainError):
    exit_code = 3


# realize
class ClearanceTooSmall(AlgDomainError):
    pass


class InvalidEmbedding(AlgDomainError):
    pass


class FitFailed(AlgDomainError):
    exit_code = 3


class SingularFit(AlgDomainError):
    exit_code = 3


class PlacementFailed(AlgDomainError):
    exit_code = 3


class GraphMismatch(AlgDomainError):
    exit_code = 3


# oracle cross-check
class OracleMismatch(AlgDomainError):
    exit_code = 4
