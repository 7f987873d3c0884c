""" Tests of the data model

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from intellikit import data_model
from intellikit.exceptions import ConfigurationError, PreconditionError, UnsupportedSampleRateError, WavFormatError
import numpy
import numpy.testing
import unittest


class DataModelTestCase(unittest.TestCase):
    def test_intelligibility_class_from_score(self):
        self.assertEqual(data_model.IntelligibilityClass.from_score(0), data_model.IntelligibilityClass.low)
        self.assertEqual(data_model.IntelligibilityClass.from_score(33), data_model.IntelligibilityClass.low)
        self.assertEqual(data_model.IntelligibilityClass.from_score(34), data_model.IntelligibilityClass.medium)
        self.assertEqual(data_model.IntelligibilityClass.from_score(66), data_model.IntelligibilityClass.medium)
        self.assertEqual(data_model.IntelligibilityClass.from_score(67), data_model.IntelligibilityClass.high)
        self.assertEqual(data_model.IntelligibilityClass.from_score(100), data_model.IntelligibilityClass.high)
        with self.assertRaisesRegex(ValueError, 'between 0 and 100'):
            data_model.IntelligibilityClass.from_score(101)
        with self.assertRaises(ValueError):
            data_model.IntelligibilityClass.from_score(-1)

    def test_architecture_kinds(self):
        FeatureKind = data_model.FeatureKind
        self.assertEqual(data_model.ArchitectureKind('single-modspec').feature_kinds, [FeatureKind.modulation])
        self.assertEqual(data_model.ArchitectureKind.wp_fusion.feature_kinds,
                         [FeatureKind.logmel, FeatureKind.modulation])
        self.assertTrue(data_model.ArchitectureKind.late_fusion.is_fusion)
        self.assertFalse(data_model.ArchitectureKind.single_logmel.is_fusion)

    def test_audio_clip(self):
        clip = data_model.AudioClip(numpy.zeros(8000), clip_id='c1')
        self.assertEqual(clip.duration, 0.5)

        with self.assertRaisesRegex(UnsupportedSampleRateError, '8000 Hz'):
            data_model.AudioClip(numpy.zeros(10), sample_rate=8000)
        with self.assertRaisesRegex(WavFormatError, 'non-empty'):
            data_model.AudioClip(numpy.zeros(0))
        with self.assertRaisesRegex(WavFormatError, 'non-finite'):
            data_model.AudioClip(numpy.array([0., numpy.nan]))

    def test_corpus_manifest(self):
        manifest = data_model.CorpusManifest([
            data_model.ManifestEntry('a.wav', 'a', 'S2', 90),
            data_model.ManifestEntry('b.wav', 'b', 'S1', 10),
            data_model.ManifestEntry('c.wav', 'c', 'S2', 50),
        ])
        self.assertEqual(manifest.speakers, ['S1', 'S2'])
        self.assertEqual(manifest.get('b').label, data_model.IntelligibilityClass.low)
        self.assertEqual([entry.clip_id for entry in manifest.entries_of_speakers({'S2'})], ['a', 'c'])
        with self.assertRaisesRegex(KeyError, 'not in the manifest'):
            manifest.get('d')

    def test_fold_plan(self):
        assignments = {'S{}'.format(i): i % 5 for i in range(10)}
        plan = data_model.FoldPlan(5, assignments, seed=3)
        self.assertEqual(plan.folds[0], ['S0', 'S5'])

        rotation = plan.rotation(4)
        self.assertEqual(rotation.test, {'S4', 'S9'})
        self.assertEqual(rotation.validation, {'S0', 'S5'})
        self.assertEqual(rotation.train, {'S1', 'S6', 'S2', 'S7', 'S3', 'S8'})

        for rotation in plan.rotations():
            self.assertEqual(rotation.test & rotation.validation, set())
            self.assertEqual(rotation.test & rotation.train, set())
            self.assertEqual(rotation.validation & rotation.train, set())
            self.assertEqual(rotation.test | rotation.validation | rotation.train, set(assignments))

        with self.assertRaisesRegex(ConfigurationError, 'between 0 and 4'):
            plan.rotation(5)

        plan2 = data_model.FoldPlan.from_dict(plan.to_dict())
        self.assertEqual(plan2.k, 5)
        self.assertEqual(plan2.assignments, assignments)
        self.assertEqual(plan2.seed, 3)

    def test_fold_plan_without_validation_fold(self):
        plan = data_model.FoldPlan(2, {'S0': 0, 'S1': 1, 'S2': 0})
        self.assertIsNone(plan.validation_fold(0))
        rotation = plan.rotation(0)
        self.assertEqual(rotation.test, {'S0', 'S2'})
        self.assertEqual(rotation.validation, set())
        self.assertEqual(rotation.train, {'S1'})

    def test_feature_configs(self):
        cfg = data_model.LogMelConfig()
        self.assertEqual(cfg.window_samples, 320)
        self.assertEqual(cfg.hop_samples, 160)

        cfg = data_model.ModSpecConfig()
        self.assertEqual(cfg.window_samples, 4096)
        self.assertEqual(cfg.hop_samples, 1024)
        self.assertEqual(cfg.n_features, 184)
        numpy.testing.assert_allclose(cfg.modulation_center_frequencies,
                                      [2., 3.28, 5.38, 8.82, 14.5, 23.7, 38.9, 64.], rtol=5e-3)

        with self.assertRaisesRegex(ConfigurationError, 'longer than the hop'):
            data_model.LogMelConfig(window_len_ms=10., hop_ms=20.)
        with self.assertRaisesRegex(ConfigurationError, 'DFT size'):
            data_model.LogMelConfig(fft_size=256)
        with self.assertRaisesRegex(ConfigurationError, 'quality factor'):
            data_model.ModSpecConfig(mod_q=0.)

    def test_feature_sequence(self):
        mask = numpy.array([True, True, False])
        seq = data_model.FeatureSequence('logmel', numpy.ones((3, 2)), mask, n_frames=2, clip_id='c')
        self.assertEqual(seq.length, 3)
        self.assertEqual(seq.n_features, 2)
        self.assertEqual(seq.n_valid, 2)
        self.assertEqual(seq.valid_values.shape, (2, 2))
        seq.validate()

        seq = data_model.FeatureSequence('logmel', numpy.ones((3, 2)), numpy.array([True, False, True]), n_frames=2)
        with self.assertRaisesRegex(PreconditionError, 'prefix'):
            seq.validate()

        seq = data_model.FeatureSequence('logmel', numpy.ones((3, 2)), mask, n_frames=5)
        with self.assertRaisesRegex(PreconditionError, 'expected min'):
            seq.validate()

        seq = data_model.FeatureSequence('logmel', numpy.full((2, 2), numpy.inf))
        with self.assertRaisesRegex(PreconditionError, 'non-finite'):
            seq.validate()

        with self.assertRaisesRegex(PreconditionError, 'at least one frame'):
            data_model.FeatureSequence('logmel', numpy.ones((0, 2)))
        with self.assertRaisesRegex(PreconditionError, 'one entry per frame'):
            data_model.FeatureSequence('logmel', numpy.ones((3, 2)), numpy.ones(2, dtype=bool))

    def test_model_config(self):
        config = data_model.ModelConfig.default('wp-fusion', scheme='mean')
        self.assertEqual([branch.kind for branch in config.branches],
                         [data_model.FeatureKind.logmel, data_model.FeatureKind.modulation])
        self.assertEqual(config.branch('modulation').n_features, 184)
        self.assertEqual(config.branch('logmel').length, 700)
        self.assertEqual(config.pooling.scheme, data_model.PoolingScheme.mean)
        config.validate()
        self.assertEqual(data_model.ModelConfig.from_dict(config.to_dict()), config)

        config = data_model.ModelConfig.default('single-logmel', toy=True)
        self.assertEqual(config.branches[0].length, 6)
        self.assertEqual(config.branches[0].n_lstm, 3)
        with self.assertRaises(KeyError):
            config.branch('modulation')

        config = data_model.ModelConfig('single-logmel', branches=[data_model.BranchConfig.toy('modulation')],
                                        dropout=1., dtype='float16')
        with self.assertRaisesRegex(ConfigurationError, 'Model configuration is invalid') as context:
            config.validate()
        self.assertIn('requires branches', str(context.exception))
        self.assertIn('Dropout rate', str(context.exception))
        self.assertIn('float16', str(context.exception))

        config = data_model.ModelConfig('wp-fusion', branches=[
            data_model.BranchConfig.toy('logmel', n_dense2=2),
            data_model.BranchConfig.toy('modulation', n_dense2=3),
        ])
        with self.assertRaisesRegex(ConfigurationError, 'share n_D2'):
            config.validate()

        with self.assertRaisesRegex(ConfigurationError, 'could not be read'):
            data_model.ModelConfig.from_dict({'kind': 'unknown'})

    def test_train_config(self):
        config = data_model.TrainConfig()
        self.assertEqual(config.lr, 0.0002)
        self.assertEqual(config.batch_size, 32)
        self.assertEqual(config.max_epochs, 50)
        self.assertEqual(config.repeats, 20)
        self.assertEqual(config.k, 5)
        config.validate()
        self.assertEqual(data_model.TrainConfig.from_dict(config.to_dict()).to_dict(), config.to_dict())

        with self.assertRaisesRegex(ConfigurationError, 'two folds'):
            data_model.TrainConfig(k=1).validate()
        with self.assertRaisesRegex(ConfigurationError, 'batch_size'):
            data_model.TrainConfig(batch_size=0).validate()
        with self.assertRaisesRegex(ConfigurationError, 'could not be read'):
            data_model.TrainConfig.from_dict({'momentum': 0.9})

    def test_training_history(self):
        history = data_model.TrainingHistory()
        history.append(1.5, 40., None)
        history.append(1.2, 50., 45.)
        self.assertEqual(history.epochs[1]['epoch'], 2)
        self.assertIsNone(history.epochs[0]['validation_accuracy'])
        self.assertEqual(history.to_dict()['best_epoch'], 0)

    def test_eval_report(self):
        report = data_model.EvalReport(
            fold_accuracies=[[60., 80.], [70., 70.]],
            confusion_counts=numpy.array([[3, 1, 0], [0, 0, 0], [1, 1, 2]]))
        self.assertEqual(report.repeat_accuracies, [70., 70.])
        self.assertEqual(report.mean_accuracy, 70.)
        self.assertEqual(report.std_accuracy, 0.)
        self.assertEqual(report.ci95, 0.)
        numpy.testing.assert_allclose(report.confusion_matrix, [[75., 25., 0.], [0., 0., 0.], [25., 25., 50.]])

        report = data_model.EvalReport(fold_accuracies=[[60.], [70.], [80.]])
        self.assertEqual(report.std_accuracy, 10.)
        self.assertAlmostEqual(report.ci95, 1.96 * 10. / numpy.sqrt(3.))
        self.assertEqual(data_model.EvalReport(fold_accuracies=[[60., 70.]]).std_accuracy, 0.)

        value = report.to_dict()
        self.assertEqual(value['classes'], ['low', 'medium', 'high'])
        self.assertEqual(value['confusion_counts'][0], [3, 1, 0])

    def test_synth_spec(self):
        spec = data_model.SynthSpec()
        spec.validate()
        self.assertEqual(spec.speaker_level(0), data_model.IntelligibilityClass.low)
        self.assertEqual(spec.speaker_level(4), data_model.IntelligibilityClass.medium)
        self.assertEqual(spec.speaker_level(8), data_model.IntelligibilityClass.high)

        spec2 = data_model.SynthSpec.from_dict(spec.to_dict())
        self.assertEqual(spec2.to_dict(), spec.to_dict())

        spec = data_model.SynthSpec(profiles={
            level: data_model.ClassProfile(rate=3., depth=0.5) for level in data_model.IntelligibilityClass})
        with self.assertRaisesRegex(ConfigurationError, 'distinct'):
            spec.validate()

        spec = data_model.SynthSpec(duration_range=(2., 1.), noise_floor=-1.)
        with self.assertRaisesRegex(ConfigurationError, 'Duration range') as context:
            spec.validate()
        self.assertIn('Noise floor', str(context.exception))

    def test_run_log(self):
        log = data_model.RunLog('cv', seed=4, version='0.1.0', config={'k': 5})
        self.assertEqual(log.status, data_model.RunStatus.QUEUED)
        log.start()
        self.assertEqual(log.status, data_model.RunStatus.RUNNING)
        log.finish()
        self.assertEqual(log.status, data_model.RunStatus.SUCCEEDED)
        self.assertGreaterEqual(log.duration, 0.)
        value = log.to_dict()
        self.assertEqual(value['status'], 'SUCCEEDED')
        self.assertIsNone(value['exception'])

        log = data_model.RunLog('train')
        log.start()
        log.finish(ValueError('bad'))
        self.assertEqual(log.status, data_model.RunStatus.FAILED)
        self.assertEqual(log.to_dict()['exception'], {'type': 'ValueError', 'message': 'bad'})
