"""Exception types shared across the package.

Every error raised on a user-facing path derives from SonoboxError so the
HTTP layer and CLI can map them to status codes / exit codes in one place.
"""


class SonoboxError(Exception):
    """Base class for all sonobox errors."""

    code = "error"


class FormatError(SonoboxError):
    """Malformed input bytes (e.g. a broken WAV header)."""

    code = "bad-format"


class UnsupportedFormatError(SonoboxError):
    """Recognisable but unsupported encoding; message names the encoding."""

    code = "unsupported-format"


class ValidationError(SonoboxError):
    """A value violates its documented invariant."""

    code = "invalid"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class OutOfRangeError(SonoboxError):
    """Index past the end of the addressable range."""

    code = "out-of-range"


class TooShortError(SonoboxError):
    """Audio region shorter than one analysis window."""

    code = "too-short"


class EmptySelectionError(SonoboxError):
    """Selection box does not overlap any spectrogram cell."""

    code = "empty-selection"


class ReconstructionUnsupportedError(SonoboxError):
    """STFT parameters violate the constant-overlap-add condition."""

    code = "reconstruction-unsupported"


class NotFoundError(SonoboxError):
    """Referenced record does not exist."""

    code = "not-found"


class ImmutableFieldError(SonoboxError):
    """Attempt to edit a field that may not change after creation."""

    code = "immutable-field"


class AlreadyPresentError(SonoboxError):
    """Class name already present in the class list."""

    code = "already-present"


class NotRemovableError(SonoboxError):
    """Attempt to remove a class outside the custom group."""

    code = "not-removable"


class ConfigError(SonoboxError):
    """Project configuration file is missing or inconsistent."""

    code = "config-error"
