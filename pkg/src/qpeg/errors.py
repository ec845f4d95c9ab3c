"""Exception hierarchy shared by every qpeg module."""


class QpegError(Exception):
    """Base class for all qpeg errors."""


class DomainError(QpegError, ValueError):
    """An argument lies outside the domain of the operation."""


class FormatError(QpegError):
    """A PGM file or container stream is malformed.

    ``offset`` is the byte position at which the problem was detected,
    when it is known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedVersionError(FormatError):
    """Container declares a format version this decoder cannot read."""


class EncodeError(QpegError, ValueError):
    """Data cannot be serialized (non-finite values, integer overflow)."""


class ResourceError(QpegError):
    """An operation would exceed the configured memory cap."""
