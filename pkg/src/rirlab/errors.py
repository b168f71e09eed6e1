"""Exception hierarchy shared by every analysis stage."""


class RirError(Exception):
    """Base class for all errors raised by rirlab."""


class FormatError(RirError):
    """Malformed WAV container or header."""


class UnsupportedFormatError(RirError):
    """Valid container, but an encoding we do not decode."""


class EmptyInputError(RirError):
    """WAV data chunk holds no samples."""


class DegenerateInputError(RirError):
    """Signal has no usable energy or is too short to analyse."""


class LengthError(RirError):
    """Signal shorter than the operation requires."""


class ChannelCountError(RirError):
    """Wrong number of channels for the operation."""


class BandOutOfRangeError(RirError):
    """Octave band does not fit below Nyquist."""


class InsufficientDecayRangeError(RirError):
    """The EDC does not cover the requested regression range.

    ``deepest_db`` is the lowest EDC level the curve actually reached.
    """

    def __init__(self, message: str, deepest_db: float):
        super().__init__(message)
        self.deepest_db = deepest_db


class ConfigError(RirError):
    """Invalid simulation configuration or room geometry."""


class PlacementError(RirError):
    """Rejection sampling could not place source and receiver."""


class SchemaError(RirError):
    """A report document does not match the expected schema."""
