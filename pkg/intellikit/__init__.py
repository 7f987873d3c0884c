from ._version import __version__  # noqa: F401
# :obj:`str`: version

from .core import FeatureDataset, evaluate, export_attention, run_cv, train  # noqa: F401
from .features import featurize_clip, logmel, modspec  # noqa: F401
from .io import load_wav, parse_manifest, plan_folds  # noqa: F401
from .models import build_late_fusion, build_model, build_single, build_wp_fusion, load, save  # noqa: F401

import numpy
import scipy

__all__ = [
    '__version__',
    'get_dependency_versions',
    'load_wav',
    'parse_manifest',
    'plan_folds',
    'featurize_clip',
    'logmel',
    'modspec',
    'build_single',
    'build_late_fusion',
    'build_wp_fusion',
    'build_model',
    'save',
    'load',
    'FeatureDataset',
    'train',
    'evaluate',
    'run_cv',
    'export_attention',
]


def get_dependency_versions():
    """ Get the versions of the numerical libraries, for provenance records

    Returns:
        :obj:`dict`: dictionary that maps package names to their versions
    """
    return {
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
    }
