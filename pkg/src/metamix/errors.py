"""Exception hierarchy shared by all metamix modules."""


class MetaError(Exception):
    """Base class for all metamix errors."""


class DomainError(MetaError, ValueError):
    """An argument lies outside a function's mathematical domain."""


class BracketError(MetaError, ValueError):
    """A root-finding bracket does not enclose a sign change."""


class ConvergenceError(MetaError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class DataError(MetaError, ValueError):
    """Study data violate a structural contract (bad CSV, bad counts, k too small)."""


class SpecError(MetaError, ValueError):
    """A prior specification or analysis configuration fails to parse."""
