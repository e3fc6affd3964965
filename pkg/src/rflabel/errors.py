"""Exception types shared across the package."""


class RFLabelError(Exception):
    """Base class for all package errors."""


class RegistryError(RFLabelError):
    """Unknown modulation scheme, signal class, or label couplet."""


class DatasetSpecError(RFLabelError):
    """Invalid dataset specification."""


class DegenerateFrameError(RFLabelError):
    """Frame content does not support the requested computation (e.g. all zeros)."""


class ProtocolError(RFLabelError):
    """Labelling-session operation called out of order or in the wrong state."""


class OracleTimeout(RFLabelError):
    """Interactive oracle received no answer within the configured timeout."""
