"""Exception hierarchy shared by all modules."""


class DeltaSingError(Exception):
    """Base class for every error raised by this package."""


class InputError(DeltaSingError, ValueError):
    """Malformed numeric input (non-finite entries, wrong shapes)."""


class ParameterError(DeltaSingError, ValueError):
    """Design parameters violate a required inequality."""


class ConsistencyError(DeltaSingError):
    """A configuration is not on the variety where it is required to be."""


class NotOnVarietyError(ConsistencyError):
    pass


class InvarianceError(DeltaSingError):
    """The constraint set is not mapped into itself by a group element."""


class CatalogError(DeltaSingError):
    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class GeometryError(DeltaSingError):
    pass


class EmptyIntersectionError(GeometryError):
    pass


class DegenerateIntersectionError(GeometryError):
    pass


class ContinuationError(GeometryError):
    pass


class PreconditionError(GeometryError):
    pass


class NotASingularityError(DeltaSingError):
    """The point shows no arm-center coincidence (or the mechanism has none)."""


class CertificateUnavailable(DeltaSingError):
    """Witness construction does not apply at these parameters (excluded case)."""


class CertificateFailure(DeltaSingError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class PathInvalidError(DeltaSingError):
    pass


class DomainError(DeltaSingError, ValueError):
    pass
