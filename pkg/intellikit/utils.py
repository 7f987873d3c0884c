""" Utilities for scoring classifiers and deriving reproducible seeds

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .exceptions import DegenerateInputError
import hashlib
import numpy

__all__ = [
    'accuracy',
    'confusion_counts',
    'relative_error_reduction',
    'checksum_clip_ids',
    'derive_seed',
]


def accuracy(labels, predictions):
    """ Get the percentage of correctly classified clips

    Args:
        labels (:obj:`numpy.ndarray`): true classes
        predictions (:obj:`numpy.ndarray`): predicted classes

    Returns:
        :obj:`float`: accuracy (%)
    """
    labels = numpy.asarray(labels)
    predictions = numpy.asarray(predictions)
    if labels.size == 0:
        return 0.
    return 100. * float(numpy.mean(labels == predictions))


def confusion_counts(labels, predictions, n_classes=3):
    """ Count the clips of each (true class, predicted class) pair

    Returns:
        :obj:`numpy.ndarray`: ``n_classes x n_classes`` counts (row: true class)
    """
    counts = numpy.zeros((n_classes, n_classes), dtype=numpy.int64)
    numpy.add.at(counts, (numpy.asarray(labels, dtype=numpy.int64), numpy.asarray(predictions, dtype=numpy.int64)), 1)
    return counts


def relative_error_reduction(reference_accuracy, accuracy):
    """ Get the reduction (%) of the classification error of a system relative to a reference system

    Args:
        reference_accuracy (:obj:`float`): accuracy (%) of the reference system
        accuracy (:obj:`float`): accuracy (%) of the compared system

    Returns:
        :obj:`float`: ``100 (e_ref - e) / e_ref`` where ``e = 100 - accuracy``

    Raises:
        :obj:`DegenerateInputError`: if the reference system is always right
    """
    reference_error = 100. - reference_accuracy
    if reference_error <= 0:
        raise DegenerateInputError('The reference system has no errors to reduce.')
    return 100. * (reference_error - (100. - accuracy)) / reference_error


def checksum_clip_ids(clip_ids):
    """ Get an order-independent digest of a set of clip ids """
    digest = hashlib.sha256()
    for clip_id in sorted(clip_ids):
        digest.update(clip_id.encode('utf-8'))
        digest.update(b'\0')
    return digest.hexdigest()


def derive_seed(master_seed, *indices):
    """ Derive an independent seed from a master seed and indices (e.g., repeat and fold)

    Returns:
        :obj:`int`: seed
    """
    return int(numpy.random.SeedSequence([master_seed] + list(indices)).generate_state(1)[0])
