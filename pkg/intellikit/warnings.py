""" Warnings raised by Intellikit

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

import warnings

__all__ = [
    'IntellikitWarning',
    'ShortClipWarning',
    'MissingClassWarning',
    'TruncationWarning',
    'warn',
]


class IntellikitWarning(UserWarning):
    """ Base class for Intellikit warnings """
    pass


class ShortClipWarning(IntellikitWarning):
    """ A clip is shorter than one analysis hop """
    pass


class MissingClassWarning(IntellikitWarning):
    """ An intelligibility class is absent from a training or test partition """
    pass


class TruncationWarning(IntellikitWarning):
    """ A feature sequence was cut to the fixed sequence length """
    pass


def warn(message, category):
    """ Issue a warning

    Args:
        message (:obj:`str`): message
        category (:obj:`type`): category (subclass of :obj:`IntellikitWarning`)
    """
    warnings.warn(message, category, stacklevel=2)
