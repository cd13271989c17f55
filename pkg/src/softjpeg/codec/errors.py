"""Codec error types."""


class JpegFormatError(ValueError):
    """A bitstream violates the subset of the interchange format we support."""


class CoefficientRangeError(ValueError):
    """Quantized coefficients fall outside the encodable range."""
