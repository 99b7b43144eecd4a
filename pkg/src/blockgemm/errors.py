"""Exception types raised by blockgemm."""


class GemmError(Exception):
    """Base class for every error raised by this package."""


class InvalidStrideError(GemmError, ValueError):
    pass


class ShapeMismatchError(GemmError, ValueError):
    pass


class AliasingError(GemmError, ValueError):
    """C shares storage with A or B."""


class ConfigError(GemmError, ValueError):
    pass


class CacheTooSmallError(ConfigError):
    """The cache cannot hold even one unrolled step of the B panel."""
