class TrackingError(Exception):
    """Base class for every error raised by the tracking library."""


class ConfigError(TrackingError):
    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = list(errors or ())


class LayoutError(TrackingError, ValueError):
    pass


class MeshError(TrackingError):
    pass


class ConstraintError(TrackingError):
    pass


class NonInvertibleMappingError(TrackingError):
    pass


class InvalidStateError(TrackingError):
    pass


class SolverError(TrackingError):
    pass


class TrainingError(SolverError):
    """Offline training stopped early; `archive` holds the work completed so far."""

    def __init__(self, message: str, archive=None):
        super().__init__(message)
        self.archive = archive


class ArtifactError(TrackingError):
    pass
