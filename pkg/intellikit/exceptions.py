""" Exceptions raised by Intellikit

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

__all__ = [
    'IntellikitError',
    'ConfigurationError',
    'UnsupportedPoolingError',
    'DataError',
    'WavFormatError',
    'UnsupportedSampleRateError',
    'ManifestParseError',
    'ManifestValidationError',
    'FeatureFileError',
    'InsufficientFramesError',
    'DegenerateInputError',
    'UnpairedClipError',
    'CheckpointError',
    'InvariantError',
    'ShapeError',
    'StateError',
    'PreconditionError',
]


class IntellikitError(Exception):
    """ Base class for errors raised by Intellikit

    Attributes:
        category (:obj:`str`): machine-readable category of the error (``usage``, ``data`` or ``internal``)
    """
    category = 'internal'


class ConfigurationError(IntellikitError, ValueError):
    """ A configuration (architecture, training, fold plan or CLI flags) is not valid """
    category = 'usage'


class UnsupportedPoolingError(ConfigurationError):
    """ An operation is not defined for the pooling scheme of a model """
    pass


class DataError(IntellikitError, ValueError):
    """ Input data (audio, manifests, feature files, checkpoints) is not valid """
    category = 'data'


class WavFormatError(DataError):
    """ A WAV file is malformed or uses an unsupported encoding """
    pass


class UnsupportedSampleRateError(DataError):
    """ Audio is not sampled at 16 kHz """
    pass


class ManifestParseError(DataError):
    """ A corpus manifest could not be parsed

    Attributes:
        line_number (:obj:`int`): 1-based number of the offending line
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = 'Line {}: {}'.format(line_number, message)
        super(ManifestParseError, self).__init__(message)
        self.line_number = line_number


class ManifestValidationError(DataError):
    """ A corpus manifest was parsed, but its content is not valid """
    pass


class FeatureFileError(DataError):
    """ A feature file is malformed """
    pass


class InsufficientFramesError(DataError):
    """ A feature sequence has too few frames for an operation """
    pass


class DegenerateInputError(DataError):
    """ An analysis is not defined for its input (e.g., a single class or a zero denominator) """
    pass


class UnpairedClipError(DataError):
    """ A clip lacks one of the feature kinds required by a fusion model """
    pass


class CheckpointError(DataError):
    """ A checkpoint is truncated, has an unsupported version or does not match a configuration """
    pass


class InvariantError(IntellikitError, RuntimeError):
    """ An internal invariant was violated """
    category = 'internal'


class ShapeError(IntellikitError, ValueError):
    """ The dimensions of arrays passed to a layer do not agree """
    category = 'internal'


class StateError(InvariantError):
    """ A method was called in the wrong order (e.g., ``backward`` before ``forward``) """
    pass


class PreconditionError(IntellikitError, ValueError):
    """ A precondition of an operation does not hold (e.g., an empty mask) """
    category = 'internal'
