""" Configuration read from environment variables

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

import os

__all__ = ['Config', 'get_config']


class Config(object):
    """ Configuration

    Attributes:
        SEED (:obj:`int`): master seed used when a command does not receive one explicitly
        JOBS (:obj:`int`): default number of parallel workers for cross-validation
        GRADIENT_CLIP_NORM (:obj:`float`): global-norm threshold for clipping gradients
        VALIDATE_FEATURES (:obj:`bool`): whether to validate feature sequences read from files
    """

    def __init__(self, SEED=0, JOBS=1, GRADIENT_CLIP_NORM=5.0, VALIDATE_FEATURES=True):
        """
        Args:
            SEED (:obj:`int`, optional): master seed used when a command does not receive one explicitly
            JOBS (:obj:`int`, optional): default number of parallel workers for cross-validation
            GRADIENT_CLIP_NORM (:obj:`float`, optional): global-norm threshold for clipping gradients
            VALIDATE_FEATURES (:obj:`bool`, optional): whether to validate feature sequences read from files
        """
        self.SEED = SEED
        self.JOBS = JOBS
        self.GRADIENT_CLIP_NORM = GRADIENT_CLIP_NORM
        self.VALIDATE_FEATURES = VALIDATE_FEATURES


def get_config():
    """ Get the configuration

    Returns:
        :obj:`Config`: configuration
    """
    return Config(
        SEED=int(os.getenv('IK_SEED', '0')),
        JOBS=int(os.getenv('IK_JOBS', '1')),
        GRADIENT_CLIP_NORM=float(os.getenv('IK_GRADIENT_CLIP_NORM', '5.0')),
        VALIDATE_FEATURES=os.getenv('IK_VALIDATE_FEATURES', '1').lower() in ['1', 'true'],
    )
