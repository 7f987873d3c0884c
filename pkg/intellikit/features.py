""" Per-frame log-mel and modulation spectrograms

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .data_model import FeatureKind, FeatureSequence, LogMelConfig, ModSpecConfig
from .exceptions import PreconditionError
from .warnings import warn, ShortClipWarning, TruncationWarning
import functools
import numpy
import scipy.signal

__all__ = [
    'hz_to_mel',
    'mel_to_hz',
    'hz_to_erb_rate',
    'erb_rate_to_hz',
    'erb_space',
    'frame_count',
    'frame_signal',
    'stft',
    'mel_filterbank',
    'logmel',
    'gammatone_filterbank',
    'hilbert_envelope',
    'modulation_filterbank',
    'modspec',
    'normalize_utterance',
    'pad_or_cut',
    'featurize_clip',
]

NORMALIZATION_EPS = 1e-8
PAD_VALUE = 0.


def hz_to_mel(freq):
    return 2595. * numpy.log10(1. + numpy.asarray(freq, dtype=numpy.float64) / 700.)


def mel_to_hz(mel):
    return 700. * (10. ** (numpy.asarray(mel, dtype=numpy.float64) / 2595.) - 1.)


def hz_to_erb_rate(freq):
    """ Get the number of equivalent rectangular bandwidths below a frequency

    Args:
        freq (:obj:`float` or :obj:`numpy.ndarray`): frequency (Hz)

    Returns:
        :obj:`float` or :obj:`numpy.ndarray`: ERB rate
    """
    return 21.4 * numpy.log10(4.37e-3 * numpy.asarray(freq, dtype=numpy.float64) + 1.)


def erb_rate_to_hz(erb_rate):
    return (10. ** (numpy.asarray(erb_rate, dtype=numpy.float64) / 21.4) - 1.) / 4.37e-3


def erb_bandwidth(freq):
    """ Get the equivalent rectangular bandwidth of the auditory filter at a frequency

    Args:
        freq (:obj:`float` or :obj:`numpy.ndarray`): center frequency (Hz)

    Returns:
        :obj:`float` or :obj:`numpy.ndarray`: bandwidth (Hz)
    """
    return 24.7 * (4.37e-3 * numpy.asarray(freq, dtype=numpy.float64) + 1.)


def erb_space(low_freq, high_freq, n):
    """ Get ``n`` frequencies uniformly spaced on the ERB-rate scale, both edges included

    Args:
        low_freq (:obj:`float`): lowest frequency (Hz)
        high_freq (:obj:`float`): highest frequency (Hz)
        n (:obj:`int`): number of frequencies

    Returns:
        :obj:`numpy.ndarray`: frequencies (Hz), increasing
    """
    if n == 1:
        return numpy.array([float(low_freq)])
    return erb_rate_to_hz(numpy.linspace(hz_to_erb_rate(low_freq), hz_to_erb_rate(high_freq), n))


def frame_count(n_samples, hop):
    """ Get the number of centered frames of a signal: ``floor((n_samples - 1) / hop) + 1`` """
    return (n_samples - 1) // hop + 1


def frame_signal(x, window_len, hop):
    """ Cut a signal into centered, windowed frames

    Frame ``t`` is centered on sample ``t * hop``; the signal is extended at both edges by reflection (or
    with zeros when it is too short to be reflected).

    Args:
        x (:obj:`numpy.ndarray`): signal
        window_len (:obj:`int`): frame length (samples)
        hop (:obj:`int`): hop between frames (samples)

    Returns:
        :obj:`numpy.ndarray`: ``T x window_len`` matrix of Hamming-windowed frames
    """
    n_frames = frame_count(x.size, hop)
    half = window_len // 2
    mode = 'reflect' if x.size > half else 'constant'
    padded = numpy.pad(x, (half, window_len - half), mode=mode)
    frames = numpy.lib.stride_tricks.sliding_window_view(padded, window_len)[::hop][:n_frames]
    return frames * hamming_window(window_len)


@functools.lru_cache(maxsize=None)
def hamming_window(window_len):
    window = scipy.signal.get_window('hamming', window_len)
    window.setflags(write=False)
    return window


def stft(clip, cfg=None):
    """ Get the short-time Fourier transform of a clip

    Args:
        clip (:obj:`AudioClip`): clip
        cfg (:obj:`LogMelConfig`, optional): configuration

    Returns:
        :obj:`numpy.ndarray`: complex ``T x (fft_size / 2 + 1)`` matrix
    """
    cfg = cfg or LogMelConfig()
    if clip.samples.size < cfg.hop_samples:
        warn('Clip `{}` is shorter than one hop; its spectrogram has a single frame.'.format(clip.clip_id),
             ShortClipWarning)
    frames = frame_signal(clip.samples, cfg.window_samples, cfg.hop_samples)
    return numpy.fft.rfft(frames, n=cfg.fft_size, axis=1)


@functools.lru_cache(maxsize=None)
def _mel_filterbank(n_mels, fft_size, sample_rate, fmin, fmax):
    mel_points = numpy.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    fft_freqs = numpy.arange(fft_size // 2 + 1) * sample_rate / fft_size

    weights = numpy.zeros((n_mels, fft_freqs.size))
    for i_mel in range(n_mels):
        lower, center, upper = hz_points[i_mel:i_mel + 3]
        rising = (fft_freqs - lower) / (center - lower)
        falling = (upper - fft_freqs) / (upper - center)
        weights[i_mel] = numpy.maximum(0., numpy.minimum(rising, falling))
    weights.setflags(write=False)
    return weights


def mel_filterbank(cfg=None):
    """ Get the peak-normalized triangular mel filterbank

    Args:
        cfg (:obj:`LogMelConfig`, optional): configuration

    Returns:
        :obj:`numpy.ndarray`: ``n_mels x (fft_size / 2 + 1)`` weights
    """
    cfg = cfg or LogMelConfig()
    return _mel_filterbank(cfg.n_mels, cfg.fft_size, cfg.sample_rate, float(cfg.fmin), float(cfg.fmax))


def mel_center_frequencies(cfg=None):
    cfg = cfg or LogMelConfig()
    return mel_to_hz(numpy.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)[1:-1])


def logmel(clip, cfg=None):
    """ Get the log-mel spectrogram of a clip

    Args:
        clip (:obj:`AudioClip`): clip
        cfg (:obj:`LogMelConfig`, optional): configuration

    Returns:
        :obj:`FeatureSequence`: unpadded ``T x n_mels`` log-mel spectrogram
    """
    cfg = cfg or LogMelConfig()
    power = numpy.abs(stft(clip, cfg)) ** 2
    energies = power @ mel_filterbank(cfg).T
    values = numpy.log(numpy.maximum(energies, cfg.log_floor))
    return FeatureSequence(FeatureKind.logmel, values, clip_id=clip.clip_id)


def gammatone_center_frequencies(cfg=None):
    cfg = cfg or ModSpecConfig()
    return erb_space(cfg.gt_cf_lo, cfg.gt_cf_hi, cfg.n_gammatone)


def gammatone_filterbank(clip, cfg=None, order=4):
    """ Decompose a clip into acoustic bands with 4th-order all-pole gammatone filters

    Each filter is a cascade of ``order`` identical complex one-pole sections with pole
    ``exp(-2 pi b / fs) exp(2 pi j cf / fs)``, ``b = 1.019 ERB(cf)``, scaled to unit gain at ``cf``; the
    band signal is the real part of the output.

    Args:
        clip (:obj:`AudioClip`): clip
        cfg (:obj:`ModSpecConfig`, optional): configuration
        order (:obj:`int`, optional): order of the filters

    Returns:
        :obj:`numpy.ndarray`: ``n_gammatone x len(clip)`` band signals
    """
    cfg = cfg or ModSpecConfig()
    center_freqs = gammatone_center_frequencies(cfg)
    bands = numpy.zeros((center_freqs.size, clip.samples.size))
    for i_band, center_freq in enumerate(center_freqs):
        bandwidth = 1.019 * erb_bandwidth(center_freq)
        radius = numpy.exp(-2. * numpy.pi * bandwidth / cfg.sample_rate)
        pole = radius * numpy.exp(2j * numpy.pi * center_freq / cfg.sample_rate)
        gain = 2. * (1. - radius) ** order

        band = clip.samples.astype(numpy.complex128)
        b = numpy.array([gain])
        for i_section in range(order):
            band = scipy.signal.lfilter(b, numpy.array([1., -pole]), band)
            b = numpy.array([1.])
        bands[i_band] = band.real
    return bands


def hilbert_envelope(x):
    """ Get the temporal envelope of a signal: the magnitude of its analytic signal

    Args:
        x (:obj:`numpy.ndarray`): signal (the last axis is time)

    Returns:
        :obj:`numpy.ndarray`: non-negative envelope, same shape as ``x``
    """
    return numpy.abs(scipy.signal.hilbert(numpy.asarray(x, dtype=numpy.float64), axis=-1))


@functools.lru_cache(maxsize=None)
def _modulation_filterbank(n_modfilters, mod_cf_lo, mod_cf_hi, mod_q, window_samples, sample_rate):
    center_freqs = numpy.geomspace(mod_cf_lo, mod_cf_hi, n_modfilters)
    bin_freqs = numpy.arange(window_samples // 2 + 1) * sample_rate / window_samples

    weights = numpy.zeros((n_modfilters, bin_freqs.size))
    positive = bin_freqs > 0
    for i_filter, center_freq in enumerate(center_freqs):
        ratio = bin_freqs[positive] / center_freq
        weights[i_filter, positive] = 1. / (1. + mod_q ** 2 * (ratio - 1. / ratio) ** 2)
        weights[i_filter] /= weights[i_filter].sum()
    weights.setflags(write=False)
    return weights


def modulation_filterbank(cfg=None):
    """ Get the weights that aggregate modulation-domain DFT bins into modulation filters

    The weights of each filter are the squared magnitude response of a second-order band-pass resonator
    with quality factor ``Q``, sampled at the bin frequencies and normalized to sum to 1.

    Args:
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`numpy.ndarray`: ``n_modfilters x (window_samples / 2 + 1)`` weights
    """
    cfg = cfg or ModSpecConfig()
    return _modulation_filterbank(cfg.n_modfilters, float(cfg.mod_cf_lo), float(cfg.mod_cf_hi), float(cfg.mod_q),
                                  cfg.window_samples, cfg.sample_rate)


def modspec(clip, cfg=None):
    """ Get the modulation spectrogram of a clip

    Each frame is the ``n_gammatone x n_modfilters`` grid of modulation energies, flattened with the acoustic
    band as the major index.

    Args:
        clip (:obj:`AudioClip`): clip
        cfg (:obj:`ModSpecConfig`, optional): configuration

    Returns:
        :obj:`FeatureSequence`: unpadded ``T x (n_gammatone * n_modfilters)`` modulation spectrogram
    """
    cfg = cfg or ModSpecConfig()
    if clip.samples.size < cfg.hop_samples:
        warn('Clip `{}` is shorter than one modulation hop; its modulation spectrogram has a single frame.'.format(
            clip.clip_id), ShortClipWarning)

    weights = modulation_filterbank(cfg)
    envelopes = hilbert_envelope(gammatone_filterbank(clip, cfg))
    n_frames = frame_count(clip.samples.size, cfg.hop_samples)
    energies = numpy.zeros((n_frames, cfg.n_gammatone, cfg.n_modfilters))
    for i_band, envelope in enumerate(envelopes):
        frames = frame_signal(envelope, cfg.window_samples, cfg.hop_samples)
        power = numpy.abs(numpy.fft.rfft(frames, n=cfg.window_samples, axis=1)) ** 2
        energies[:, i_band, :] = power @ weights.T

    return FeatureSequence(FeatureKind.modulation, energies.reshape(n_frames, cfg.n_features), clip_id=clip.clip_id)


def normalize_utterance(seq):
    """ Standardize each feature dimension over the valid frames of the utterance

    Dimensions whose standard deviation is below 1e-8 are only mean-centered. Masked rows are left unchanged.

    Args:
        seq (:obj:`FeatureSequence`): sequence

    Returns:
        :obj:`FeatureSequence`: normalized sequence
    """
    if seq.n_valid < 1:
        raise PreconditionError('Features of `{}` have no valid frame to normalize.'.format(seq.clip_id))
    valid = seq.valid_values.astype(numpy.float64)
    mean = valid.mean(axis=0)
    std = valid.std(axis=0)
    scale = numpy.where(std < NORMALIZATION_EPS, 1., std)

    values = numpy.array(seq.values, dtype=numpy.float64)
    values[seq.mask] = (valid - mean) / scale
    return FeatureSequence(seq.kind, values, seq.mask.copy(), n_frames=seq.n_frames, clip_id=seq.clip_id)


def pad_or_cut(seq, length):
    """ Cut or pad a sequence to a fixed length

    The first ``min(n_valid, length)`` rows keep their values and are marked valid; the remaining rows are
    filled with the pad value (0) and masked.

    Args:
        seq (:obj:`FeatureSequence`): sequence
        length (:obj:`int`): fixed length ``L``

    Returns:
        :obj:`FeatureSequence`: sequence with exactly ``length`` rows
    """
    if length < 1:
        raise PreconditionError('Sequence length must be positive, not {}.'.format(length))
    n_kept = min(seq.n_valid, length)
    values = numpy.full((length, seq.n_features), PAD_VALUE, dtype=seq.values.dtype)
    values[:n_kept] = seq.values[:n_kept]
    mask = numpy.zeros(length, dtype=bool)
    mask[:n_kept] = True
    return FeatureSequence(seq.kind, values, mask, n_frames=seq.n_frames, clip_id=seq.clip_id)


def featurize_clip(clip, kind, logmel_cfg=None, modspec_cfg=None, normalize=True, pad=True):
    """ Extract, normalize and pad the features of one kind from a clip

    Args:
        clip (:obj:`AudioClip`): clip
        kind (:obj:`FeatureKind`): kind of features
        logmel_cfg (:obj:`LogMelConfig`, optional): configuration of the log-mel spectrogram
        modspec_cfg (:obj:`ModSpecConfig`, optional): configuration of the modulation spectrogram
        normalize (:obj:`bool`, optional): whether to standardize the features over the utterance
        pad (:obj:`bool`, optional): whether to pad or cut the sequence to the configured length

    Returns:
        :obj:`FeatureSequence`: sequence
    """
    kind = FeatureKind(kind)
    if kind == FeatureKind.logmel:
        cfg = logmel_cfg or LogMelConfig()
        seq = logmel(clip, cfg)
    else:
        cfg = modspec_cfg or ModSpecConfig()
        seq = modspec(clip, cfg)

    if normalize:
        seq = normalize_utterance(seq)
    if pad:
        if seq.n_frames > cfg.pad_length:
            warn('{} features of `{}` were cut from {} to {} frames.'.format(
                kind.value, clip.clip_id, seq.n_frames, cfg.pad_length), TruncationWarning)
        seq = pad_or_cut(seq, cfg.pad_length)
    return seq
