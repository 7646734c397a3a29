"""Exception types raised across the package."""


class TrimatGeomError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class NotPrimePower(TrimatGeomError, ValueError):
    pass


class OrderTooLarge(TrimatGeomError, ValueError):
    pass


class DimensionMismatch(TrimatGeomError, ValueError):
    pass


class DimensionUnsupported(TrimatGeomError, ValueError):
    pass


class ContextMismatch(TrimatGeomError, ValueError):
    pass


class ContextTooLarge(TrimatGeomError, ValueError):
    """The ring is too large for a dense multiplication table."""


class NotFree(TrimatGeomError):
    """Raised by generator_orbit on a non-free generator.

    The unit orbit is still computed and attached as ``orbit``.
    """

    def __init__(self, msg, orbit=None):
        super().__init__(msg)
        self.orbit = orbit


class SelectorInvalid(TrimatGeomError, ValueError):
    pass


class SubsetInvalid(TrimatGeomError, ValueError):
    pass


class NotAnAffinePlane(TrimatGeomError, ValueError):
    pass


class OrderTooLargeForSearch(TrimatGeomError, ValueError):
    pass


class IoError(TrimatGeomError, OSError):
    pass
