"""Exception types raised by the analysis pipeline."""


class FFTMapError(Exception):
    """Base class for all pipeline errors."""


class FormatError(FFTMapError):
    """Unsupported or corrupt image file."""


class GeometryError(FFTMapError):
    """Window/grid geometry inconsistent with the image dimensions."""


class ParameterError(FFTMapError):
    """Parameter outside its valid range."""


class InsufficientDataError(FFTMapError):
    """Not enough windows/samples for the requested analysis."""


class NumericalError(FFTMapError):
    """Non-finite values appeared during iteration."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateFactorError(FFTMapError):
    """Factor spectrum carries no off-center signal to characterize."""
