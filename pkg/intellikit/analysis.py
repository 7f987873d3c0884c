""" Compact utterance-level features and corpus analyses of modulation energy

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .data_model import FeatureKind, IntelligibilityClass, ModSpecConfig
from .exceptions import DegenerateInputError, InsufficientFramesError, PreconditionError
import collections
import numpy
import scipy.fft

__all__ = [
    'avg_mfcc',
    'avg_modspec',
    'modulation_band_energies',
    'band_energy_profile',
    'corr_map',
    'lhmr',
    'modulation_peak',
    'modulation_region_energy',
]

N_MFCC = 13
STD_EPS = 1e-12


def _check_kind(seq, kind):
    if seq.kind != kind:
        raise PreconditionError('Expected {} features for `{}`, not {}.'.format(
            kind.value, seq.clip_id, seq.kind.value))


def avg_mfcc(seq, n_coefficients=N_MFCC):
    """ Get the average MFCCs and the average of their first differences

    Args:
        seq (:obj:`FeatureSequence`): unpadded log-mel spectrogram
        n_coefficients (:obj:`int`, optional): number of cepstral coefficients retained

    Returns:
        :obj:`numpy.ndarray`: ``2 * n_coefficients`` vector (statics first, then deltas)

    Raises:
        :obj:`InsufficientFramesError`: if the utterance has fewer than 3 frames
    """
    _check_kind(seq, FeatureKind.logmel)
    frames = seq.valid_values.astype(numpy.float64)
    if frames.shape[0] < 3:
        raise InsufficientFramesError('Average MFCCs of `{}` require at least 3 frames, not {}.'.format(
            seq.clip_id, frames.shape[0]))

    mfcc = scipy.fft.dct(frames, type=2, norm='ortho', axis=1)[:, :n_coefficients]
    deltas = numpy.diff(mfcc, axis=0)
    return numpy.concatenate([mfcc.mean(axis=0), deltas.mean(axis=0)])


def avg_modspec(seq):
    """ Get the average of the modulation energies across frames

    Args:
        seq (:obj:`FeatureSequence`): modulation spectrogram

    Returns:
        :obj:`numpy.ndarray`: ``n_F`` vector
    """
    _check_kind(seq, FeatureKind.modulation)
    return seq.valid_values.astype(numpy.float64).mean(axis=0)


def _grid(seq, cfg):
    frames = seq.valid_values.astype(numpy.float64)
    if frames.shape[1] != cfg.n_features:
        raise PreconditionError('Modulation features of `{}` have {} values per frame, expected {} x {}.'.format(
            seq.clip_id, frames.shape[1], cfg.n_gammatone, cfg.n_modfilters))
    return frames.reshape(frames.shape[0], cfg.n_gammatone, cfg.n_modfilters)


def modulation_band_energies(seq, cfg=None):
    """ Get the total energy of each modulation filter, summed over frames and acoustic bands

    Args:
        seq (:obj:`FeatureSequence`): un-normalized modulation spectrogram
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`numpy.ndarray`: ``n_modfilters`` vector
    """
    cfg = cfg or ModSpecConfig()
    _check_kind(seq, FeatureKind.modulation)
    return _grid(seq, cfg).sum(axis=(0, 1))


def _levels(labels):
    levels = numpy.array([int(IntelligibilityClass(label)) for label in labels])
    if numpy.unique(levels).size < 2:
        raise DegenerateInputError('At least 2 intelligibility levels are required.')
    return levels


def band_energy_profile(seqs, labels, cfg=None):
    """ Get the relative increment of energy per modulation band of each level with respect to the most
    intelligible level present

    The energy of each utterance is averaged over frames, summed over acoustic bands and normalized by its
    total, so that the profile compares the distribution of energy across modulation bands.

    Args:
        seqs (:obj:`list` of :obj:`FeatureSequence`): un-normalized modulation spectrograms
        labels (:obj:`list` of :obj:`IntelligibilityClass`): level of each utterance
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`collections.OrderedDict`: dictionary that maps each level present to the ``n_modfilters``
        vector ``(E_level - E_ref) / E_ref``

    Raises:
        :obj:`DegenerateInputError`: if fewer than 2 levels are present
    """
    cfg = cfg or ModSpecConfig()
    levels = _levels(labels)

    profiles = numpy.zeros((len(seqs), cfg.n_modfilters))
    for i_seq, seq in enumerate(seqs):
        _check_kind(seq, FeatureKind.modulation)
        energies = _grid(seq, cfg).mean(axis=0).sum(axis=0)
        total = energies.sum()
        profiles[i_seq] = energies / total if total > 0 else energies

    reference = levels.max()
    reference_profile = profiles[levels == reference].mean(axis=0)
    result = collections.OrderedDict()
    for level in sorted(set(levels.tolist())):
        level_profile = profiles[levels == level].mean(axis=0)
        result[IntelligibilityClass(level)] = numpy.divide(
            level_profile - reference_profile, reference_profile,
            out=numpy.zeros(cfg.n_modfilters), where=reference_profile > 0)
    return result


def corr_map(seqs, labels, cfg=None):
    """ Get the Pearson correlation between the per-frame energy of each (acoustic band, modulation filter)
    cell and the intelligibility level (low = 0, medium = 1, high = 2)

    Args:
        seqs (:obj:`list` of :obj:`FeatureSequence`): modulation spectrograms
        labels (:obj:`list` of :obj:`IntelligibilityClass`): level of each utterance
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`numpy.ndarray`: ``n_gammatone x n_modfilters`` correlations; cells with zero variance are 0

    Raises:
        :obj:`DegenerateInputError`: if fewer than 2 levels are present
    """
    cfg = cfg or ModSpecConfig()
    levels = _levels(labels)

    frames = []
    frame_levels = []
    for seq, level in zip(seqs, levels):
        _check_kind(seq, FeatureKind.modulation)
        grid = _grid(seq, cfg)
        frames.append(grid.reshape(grid.shape[0], -1))
        frame_levels.append(numpy.full(grid.shape[0], float(level)))
    x = numpy.concatenate(frames)
    y = numpy.concatenate(frame_levels)

    x_centered = x - x.mean(axis=0)
    y_centered = y - y.mean()
    covariance = (x_centered * y_centered[:, None]).mean(axis=0)
    std_product = x_centered.std(axis=0) * y_centered.std()
    correlations = numpy.divide(covariance, std_product, out=numpy.zeros_like(covariance),
                                where=std_product > STD_EPS)
    return numpy.clip(correlations, -1., 1.).reshape(cfg.n_gammatone, cfg.n_modfilters)


def lhmr(seq, cfg=None, threshold=4., on_zero='raise'):
    """ Get the low-to-high modulation energy ratio: energy of the modulation filters centered below
    ``threshold`` divided by the energy of those centered above it

    Args:
        seq (:obj:`FeatureSequence`): un-normalized modulation spectrogram
        cfg (:obj:`ModSpecConfig`, optional): configuration
        threshold (:obj:`float`, optional): modulation frequency (Hz) that separates low from high
        on_zero (:obj:`str`, optional): ``raise`` to raise an error when the high-band energy is zero,
            ``inf`` to return :obj:`numpy.inf` (or :obj:`numpy.nan` if both energies are zero)

    Returns:
        :obj:`float`: ratio

    Raises:
        :obj:`DegenerateInputError`: if the high-band energy is zero and ``on_zero`` is ``raise``
    """
    cfg = cfg or ModSpecConfig()
    energies = modulation_band_energies(seq, cfg)
    center_freqs = cfg.modulation_center_frequencies
    low = energies[center_freqs < threshold].sum()
    high = energies[center_freqs > threshold].sum()
    if high <= 0:
        if on_zero == 'inf':
            return numpy.inf if low > 0 else numpy.nan
        raise DegenerateInputError('Modulation energy of `{}` above {} Hz is zero.'.format(seq.clip_id, threshold))
    return float(low / high)


def modulation_peak(seq, cfg=None):
    """ Get the center frequency and the energy of the modulation filter with the most energy

    Args:
        seq (:obj:`FeatureSequence`): un-normalized modulation spectrogram
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`tuple`:

            * :obj:`float`: center frequency of the peak (Hz)
            * :obj:`float`: average energy per frame of the peak
    """
    cfg = cfg or ModSpecConfig()
    energies = modulation_band_energies(seq, cfg) / seq.n_valid
    i_peak = int(numpy.argmax(energies))
    return float(cfg.modulation_center_frequencies[i_peak]), float(energies[i_peak])


def modulation_region_energy(seq, cfg=None, low_freq=3., high_freq=6.):
    """ Get the average energy per frame of the modulation filters centered within a frequency region

    Args:
        seq (:obj:`FeatureSequence`): un-normalized modulation spectrogram
        cfg (:obj:`ModSpecConfig`, optional): configuration
        low_freq (:obj:`float`, optional): lower edge of the region (Hz)
        high_freq (:obj:`float`, optional): upper edge of the region (Hz)

    Returns:
        :obj:`float`: energy
    """
    cfg = cfg or ModSpecConfig()
    energies = modulation_band_energies(seq, cfg) / seq.n_valid
    center_freqs = cfg.modulation_center_frequencies
    return float(energies[(center_freqs >= low_freq) & (center_freqs <= high_freq)].sum())
