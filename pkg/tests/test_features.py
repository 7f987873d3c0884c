""" Tests of the log-mel and modulation spectrograms

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from intellikit import features
from intellikit.data_model import AudioClip, FeatureKind, FeatureSequence, LogMelConfig, ModSpecConfig
from intellikit.exceptions import PreconditionError
from intellikit.warnings import ShortClipWarning, TruncationWarning
import numpy
import numpy.testing
import unittest


def tone(freq, duration, amplitude=0.5, modulation_freq=None, modulation_depth=0.5):
    time = numpy.arange(int(duration * 16000)) / 16000.
    samples = amplitude * numpy.sin(2 * numpy.pi * freq * time)
    if modulation_freq:
        samples *= 1 + modulation_depth * numpy.cos(2 * numpy.pi * modulation_freq * time)
    return AudioClip(samples, clip_id='tone')


class ScaleTestCase(unittest.TestCase):
    def test_mel_scale(self):
        self.assertAlmostEqual(float(features.hz_to_mel(1000.)), 1000., delta=0.1)
        numpy.testing.assert_allclose(features.mel_to_hz(features.hz_to_mel([0., 440., 8000.])), [0., 440., 8000.])

    def test_erb_scale(self):
        numpy.testing.assert_allclose(features.erb_rate_to_hz(features.hz_to_erb_rate([125., 8000.])), [125., 8000.])
        self.assertAlmostEqual(float(features.erb_bandwidth(1000.)), 24.7 * 5.37, places=6)

        freqs = features.erb_space(125., 8000., 23)
        self.assertEqual(freqs.size, 23)
        self.assertAlmostEqual(freqs[0], 125.)
        self.assertAlmostEqual(freqs[-1], 8000.)
        self.assertTrue(numpy.all(numpy.diff(freqs) > 0))
        numpy.testing.assert_allclose(numpy.diff(features.hz_to_erb_rate(freqs)), (33.29 - 4.05) / 22, rtol=1e-2)
        numpy.testing.assert_equal(features.erb_space(125., 8000., 1), [125.])


class FramingTestCase(unittest.TestCase):
    def test_frame_count(self):
        self.assertEqual(features.frame_count(16000, 160), 100)
        self.assertEqual(features.frame_count(16001, 160), 101)
        self.assertEqual(features.frame_count(1, 160), 1)
        self.assertEqual(features.frame_count(16000, 1024), 16)

    def test_frame_signal(self):
        x = numpy.arange(1000, dtype=numpy.float64)
        frames = features.frame_signal(x, 320, 160)
        self.assertEqual(frames.shape, (7, 320))
        window = features.hamming_window(320)
        numpy.testing.assert_allclose(frames[1], x[0:320] * window)
        self.assertEqual(window.size, 320)
        self.assertAlmostEqual(window[0], 0.08)
        self.assertAlmostEqual(window[160], 1.)

    def test_frame_short_signal(self):
        frames = features.frame_signal(numpy.ones(10), 320, 160)
        self.assertEqual(frames.shape, (1, 320))
        self.assertEqual(numpy.count_nonzero(frames[0]), 10)

    def test_stft_matches_direct_dft(self):
        clip = tone(1000., 0.1)
        spectrum = features.stft(clip)
        self.assertEqual(spectrum.shape, (10, 257))

        n = numpy.arange(320)
        window = 0.54 - 0.46 * numpy.cos(2. * numpy.pi * n / 320.)
        k = numpy.arange(257)[:, None]
        for t in [1, 4, 8]:
            frame = clip.samples[t * 160 - 160:t * 160 + 160] * window
            expected = (frame[None, :] * numpy.exp(-2j * numpy.pi * k * n[None, :] / 512.)).sum(axis=1)
            numpy.testing.assert_allclose(numpy.abs(spectrum[t]), numpy.abs(expected), rtol=1e-6,
                                          atol=1e-9 * numpy.abs(expected).max())
            self.assertEqual(int(numpy.argmax(numpy.abs(spectrum[t]))), 32)

    def test_frame_counts_of_longest_clip(self):
        clip = tone(1000., 7.)
        self.assertEqual(features.logmel(clip).values.shape, (700, 32))
        self.assertEqual(features.modspec(clip).values.shape, (110, 184))
        self.assertEqual(features.logmel(AudioClip(numpy.zeros(19360))).n_frames, 121)


class LogMelTestCase(unittest.TestCase):
    def test_mel_filterbank(self):
        weights = features.mel_filterbank()
        self.assertEqual(weights.shape, (32, 257))
        self.assertTrue(numpy.all(weights >= 0))
        self.assertTrue(numpy.all(weights.max(axis=1) > 0.5))
        self.assertTrue(numpy.all(weights.max(axis=1) <= 1.))
        numpy.testing.assert_allclose(features.mel_center_frequencies()[0], features.mel_to_hz(2840.03 / 33),
                                      rtol=1e-3)

    def test_logmel_of_tone(self):
        seq = features.logmel(tone(1000., 1.))
        self.assertEqual(seq.kind, FeatureKind.logmel)
        self.assertEqual(seq.values.shape, (100, 32))
        self.assertEqual(seq.n_frames, 100)
        self.assertEqual(seq.n_valid, 100)
        self.assertTrue(numpy.all(numpy.argmax(seq.values[5:-5], axis=1) == 11))

    def test_logmel_of_silence(self):
        seq = features.logmel(AudioClip(numpy.zeros(1600)))
        numpy.testing.assert_allclose(seq.values, numpy.log(1e-10))

    def test_logmel_of_short_clip(self):
        with self.assertWarnsRegex(ShortClipWarning, 'single frame'):
            seq = features.logmel(AudioClip(numpy.ones(100) * 0.1, clip_id='short'))
        self.assertEqual(seq.values.shape, (1, 32))
        self.assertTrue(numpy.all(numpy.isfinite(seq.values)))


class ModulationTestCase(unittest.TestCase):
    def test_gammatone_filterbank(self):
        center_freqs = features.gammatone_center_frequencies()
        self.assertEqual(int(numpy.argmin(numpy.abs(center_freqs - 1000.))), 9)

        bands = features.gammatone_filterbank(tone(1000., 0.5))
        self.assertEqual(bands.shape, (23, 8000))
        rms = numpy.sqrt(numpy.mean(bands[:, 1600:] ** 2, axis=1))
        self.assertEqual(int(numpy.argmax(rms)), 9)

        clip = tone(center_freqs[9], 0.5, amplitude=1.)
        band = features.gammatone_filterbank(clip)[9]
        self.assertAlmostEqual(numpy.sqrt(numpy.mean(band[1600:] ** 2)), numpy.sqrt(0.5), delta=0.02)

    def test_hilbert_envelope(self):
        clip = tone(1000., 1., amplitude=1., modulation_freq=4.)
        time = numpy.arange(16000) / 16000.
        envelope = features.hilbert_envelope(clip.samples)
        numpy.testing.assert_allclose(envelope[1000:-1000], (1 + 0.5 * numpy.cos(2 * numpy.pi * 4 * time))[1000:-1000],
                                      atol=0.02)

    def test_gammatone_impulse_responses(self):
        impulse = numpy.zeros(8000)
        impulse[0] = 1.
        bands = features.gammatone_filterbank(AudioClip(impulse))
        bin_freqs = numpy.fft.rfftfreq(65536, d=1. / 16000.)
        for center_freq, band in zip(features.gammatone_center_frequencies(), bands):
            peak_freq = bin_freqs[numpy.argmax(numpy.abs(numpy.fft.rfft(band, n=65536)))]
            self.assertLess(abs(peak_freq - center_freq) / center_freq, 0.05, msg=center_freq)

        numpy.testing.assert_equal(features.gammatone_filterbank(AudioClip(numpy.zeros(800))), 0.)

    def test_envelope_of_pure_tone(self):
        time = numpy.arange(16000) / 16000.
        envelope = features.hilbert_envelope(0.5 * numpy.cos(2 * numpy.pi * 100. * time))
        numpy.testing.assert_allclose(envelope[1600:-1600], 0.5, rtol=0.01)
        numpy.testing.assert_equal(features.hilbert_envelope(numpy.zeros(100)), 0.)

    def test_modulation_energy_lies_near_carrier(self):
        seq = features.modspec(tone(1000., 2., modulation_freq=4.))
        grid = seq.values.reshape(-1, 23, 8)[4:-4]
        i_band = int(numpy.argmin(numpy.abs(features.gammatone_center_frequencies() - 1000.)))
        self.assertGreaterEqual(grid[:, i_band, :].sum() / grid.sum(), 0.6)


    def test_modulation_filterbank(self):
        weights = features.modulation_filterbank()
        self.assertEqual(weights.shape, (8, 2049))
        numpy.testing.assert_equal(weights[:, 0], 0.)
        numpy.testing.assert_allclose(weights.sum(axis=1), 1.)
        bin_freqs = numpy.arange(2049) * 16000. / 4096.
        self.assertTrue(numpy.all(numpy.diff(bin_freqs[numpy.argmax(weights, axis=1)]) >= 0))

    def test_modspec_of_modulated_tone(self):
        cfg = ModSpecConfig()
        seq = features.modspec(tone(1000., 2., modulation_freq=4.), cfg)
        self.assertEqual(seq.kind, FeatureKind.modulation)
        self.assertEqual(seq.values.shape, (32, 184))
        self.assertTrue(numpy.all(seq.values >= 0))

        grid = seq.values.reshape(32, 23, 8)
        band_energies = grid[4:-4].sum(axis=0)
        self.assertEqual(int(numpy.argmax(band_energies.sum(axis=1))), 9)
        self.assertEqual(int(numpy.argmax(band_energies[9])), 1)

    def test_modspec_of_short_clip(self):
        with self.assertWarns(ShortClipWarning):
            seq = features.modspec(AudioClip(numpy.full(500, 0.1)))
        self.assertEqual(seq.values.shape, (1, 184))


class NormalizationTestCase(unittest.TestCase):
    def test_normalize_utterance(self):
        values = numpy.array([[1., 5.], [3., 5.], [5., 5.], [9., 9.]])
        mask = numpy.array([True, True, True, False])
        seq = features.normalize_utterance(FeatureSequence(FeatureKind.logmel, values, mask, n_frames=3))
        numpy.testing.assert_allclose(seq.values[:3, 0].mean(), 0., atol=1e-12)
        numpy.testing.assert_allclose(seq.values[:3, 0].std(), 1.)
        numpy.testing.assert_equal(seq.values[:3, 1], 0.)
        numpy.testing.assert_equal(seq.values[3], [9., 9.])
        self.assertEqual(seq.n_frames, 3)

        seq = FeatureSequence(FeatureKind.logmel, values, numpy.zeros(4, dtype=bool))
        with self.assertRaisesRegex(PreconditionError, 'no valid frame'):
            features.normalize_utterance(seq)

    def test_pad_or_cut(self):
        seq = FeatureSequence(FeatureKind.logmel, numpy.arange(10.).reshape(5, 2), n_frames=5)

        padded = features.pad_or_cut(seq, 7)
        self.assertEqual(padded.length, 7)
        self.assertEqual(padded.n_valid, 5)
        numpy.testing.assert_equal(padded.values[5:], 0.)
        padded.validate()

        cut = features.pad_or_cut(seq, 3)
        self.assertEqual(cut.length, 3)
        self.assertEqual(cut.n_valid, 3)
        self.assertEqual(cut.n_frames, 5)
        numpy.testing.assert_equal(cut.values, seq.values[:3])
        cut.validate()

        with self.assertRaisesRegex(PreconditionError, 'must be positive'):
            features.pad_or_cut(seq, 0)

    def test_featurize_clip(self):
        clip = tone(1000., 1., modulation_freq=4.)
        seq = features.featurize_clip(clip, FeatureKind.logmel)
        self.assertEqual(seq.length, 700)
        self.assertEqual(seq.n_valid, 100)
        seq.validate()
        numpy.testing.assert_allclose(seq.valid_values.mean(axis=0), 0., atol=1e-8)

        seq = features.featurize_clip(clip, 'modulation', normalize=False, pad=False)
        self.assertEqual(seq.length, 16)
        self.assertTrue(numpy.all(seq.values >= 0))

        with self.assertWarnsRegex(TruncationWarning, 'cut from 100 to 50 frames'):
            seq = features.featurize_clip(clip, FeatureKind.logmel, logmel_cfg=LogMelConfig(pad_length=50))
        self.assertEqual(seq.length, 50)
        self.assertEqual(seq.n_frames, 100)
        seq.validate()
