"""Exception hierarchy shared by all modules."""


class RisAnchorError(Exception):
    """Base class for every error raised by this package."""


class DegenerateGeometryError(RisAnchorError):
    """A UE coincides with a pixel, or a delay is zero."""


class DomainError(RisAnchorError, ValueError):
    """An observation lies outside the kinematically admissible domain."""


class EstimationError(RisAnchorError):
    """The delay/Doppler search could not produce an estimate."""


class RankDeficientError(RisAnchorError):
    """The stacked line system does not have full column rank."""


class SingularInformationError(RisAnchorError):
    """The Fisher information (or a derivative it depends on) is singular."""


class DimensionError(RisAnchorError, ValueError):
    """Array shapes disagree."""


class ScenarioError(RisAnchorError, ValueError):
    """A scenario file could not be parsed or failed validation.

    ``field`` names the offending JSON path when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
