""" Generation of a labeled synthetic corpus whose intelligibility levels differ in syllabic rhythm and spectral tilt

Each clip is a sum of harmonics of a speaker-specific fundamental, shaped by formant bumps and a level-specific
spectral tilt, amplitude-modulated by a train of raised-cosine syllables at a level-specific rate, with
level-specific pauses, plus low-level noise.

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .data_model import SAMPLE_RATE, AudioClip, CorpusManifest, IntelligibilityClass, ManifestEntry
from .io import write_manifest, write_wav
import numpy
import os

__all__ = [
    'MANIFEST_FILENAME',
    'speaker_id',
    'clip_id',
    'synthesize_clip',
    'generate',
]

MANIFEST_FILENAME = 'manifest.tsv'
PEAK_LEVEL = 0.5
MAX_HARMONIC_FREQ = 7000.
FORMANTS = (500., 1500., 2500.)
FORMANT_WIDTH = 250.
MIN_RATE = 0.5

SCORE_RANGES = {
    IntelligibilityClass.low: (5, 30),
    IntelligibilityClass.medium: (40, 62),
    IntelligibilityClass.high: (72, 98),
}


def speaker_id(speaker_index):
    return 'S{:02d}'.format(speaker_index)


def clip_id(speaker_index, clip_index):
    return '{}_C{:03d}'.format(speaker_id(speaker_index), clip_index)


def _speaker_traits(spec, speaker_index):
    rng = numpy.random.default_rng([spec.seed, speaker_index])
    return {
        'f0': rng.uniform(100., 220.),
        'formant_shift': rng.uniform(0.9, 1.1),
        'rate_factor': rng.uniform(0.95, 1.05),
        'score_quantile': rng.uniform(),
    }


def _syllable_envelope(rng, n_samples, rate, depth, pause_prob):
    """ Raised-cosine syllables, one per slot of ``1 / rate`` s; pause slots dip smoothly towards silence """
    envelope = numpy.empty(n_samples)
    start = 0
    while start < n_samples:
        slot = max(2, int(round(SAMPLE_RATE / rate * rng.uniform(0.95, 1.05))))
        pulse = 0.5 - 0.5 * numpy.cos(2 * numpy.pi * numpy.arange(slot) / slot)
        if rng.random() < pause_prob:
            values = (1 - depth) * (1 - pulse)
        else:
            values = (1 - depth) + depth * pulse
        stop = min(start + slot, n_samples)
        envelope[start:stop] = values[:stop - start]
        start = stop
    return envelope


def synthesize_clip(spec, speaker_index, clip_index, intelligibility=None):
    """ Synthesize one clip of a corpus

    The clip is a pure function of the specification and the indices. Overriding the level keeps the traits of
    the speaker (fundamental, formants) and the duration, so that clips of different levels can be compared for the
    same speaker.

    Args:
        spec (:obj:`SynthSpec`): specification
        speaker_index (:obj:`int`): index of the speaker
        clip_index (:obj:`int`): index of the clip of the speaker
        intelligibility (:obj:`IntelligibilityClass`, optional): level; default: the level of the speaker

    Returns:
        :obj:`AudioClip`: clip
    """
    level = spec.speaker_level(speaker_index) if intelligibility is None else IntelligibilityClass(intelligibility)
    profile = spec.profiles[level]
    traits = _speaker_traits(spec, speaker_index)
    rng = numpy.random.default_rng([spec.seed, speaker_index, clip_index])

    duration = rng.uniform(*spec.duration_range)
    n_samples = max(1, int(round(duration * SAMPLE_RATE)))
    time = numpy.arange(n_samples) / SAMPLE_RATE

    f0 = traits['f0'] * rng.uniform(0.97, 1.03)
    harmonics = numpy.arange(1, int(MAX_HARMONIC_FREQ // f0) + 1)
    freqs = harmonics * f0
    formant_gain = sum(numpy.exp(-0.5 * ((freqs - formant * traits['formant_shift']) / FORMANT_WIDTH) ** 2)
                       for formant in FORMANTS)
    amplitudes = (0.1 + formant_gain) * harmonics.astype(numpy.float64) ** profile.tilt
    phases = rng.uniform(0, 2 * numpy.pi, size=harmonics.size)
    carrier = numpy.zeros(n_samples)
    for freq, amplitude, phase in zip(freqs, amplitudes, phases):
        carrier += amplitude * numpy.sin(2 * numpy.pi * freq * time + phase)

    rate = max(MIN_RATE, profile.rate * traits['rate_factor'] * (1 + profile.rate_jitter * rng.standard_normal()))
    envelope = _syllable_envelope(rng, n_samples, rate, profile.depth, profile.pause_prob)

    signal = carrier * envelope
    peak = numpy.max(numpy.abs(signal))
    if peak > 0:
        signal *= PEAK_LEVEL / peak
    signal += spec.noise_floor * rng.standard_normal(n_samples)
    samples = numpy.clip(signal, -1., 1.)
    return AudioClip(samples, SAMPLE_RATE, clip_id=clip_id(speaker_index, clip_index),
                     speaker_id=speaker_id(speaker_index))


def _score(spec, speaker_index):
    low, high = SCORE_RANGES[spec.speaker_level(speaker_index)]
    return int(low + round(_speaker_traits(spec, speaker_index)['score_quantile'] * (high - low)))


def generate(spec, out_dir):
    """ Write the clips of a synthetic corpus as PCM 16-bit WAV files and a manifest

    Clips are written to ``{out_dir}/wav/{clip_id}.wav`` and the manifest to ``{out_dir}/manifest.tsv``.

    Args:
        spec (:obj:`SynthSpec`): specification
        out_dir (:obj:`str`): directory

    Returns:
        :obj:`CorpusManifest`: manifest
    """
    spec.validate()
    wav_dir = os.path.join(out_dir, 'wav')
    if not os.path.isdir(wav_dir):
        os.makedirs(wav_dir)

    entries = []
    for speaker_index in range(spec.n_speakers):
        score = _score(spec, speaker_index)
        for clip_index in range(spec.clips_per_speaker):
            clip = synthesize_clip(spec, speaker_index, clip_index)
            path = os.path.join(wav_dir, clip.clip_id + '.wav')
            write_wav(path, clip)
            entries.append(ManifestEntry(path, clip.clip_id, clip.speaker_id, score))

    manifest = CorpusManifest(entries)
    write_manifest(os.path.join(out_dir, MANIFEST_FILENAME), manifest)
    return manifest

