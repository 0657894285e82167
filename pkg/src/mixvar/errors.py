"""Exception types shared across the package."""


class MixvarError(Exception):
    """Base class for all errors raised by mixvar."""


class ModelError(MixvarError):
    """Invalid model parameters or model-level computation failure."""


class DataError(MixvarError):
    """Malformed input data or transformation failure."""


class EstimationError(MixvarError):
    """Estimation could not be carried out as requested."""


class IdentificationError(MixvarError):
    """Invalid constraint pattern or failed identification operation."""
