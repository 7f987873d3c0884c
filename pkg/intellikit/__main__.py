""" Command-line interface to Intellikit

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from . import get_dependency_versions
from ._version import __version__
from .analysis import band_energy_profile, corr_map, lhmr, modulation_peak, modulation_region_energy
from .config import get_config
from .core import (FeatureDataset, build_for_training, evaluate, export_attention, feature_file_path, run_cv, train,
                   write_attention_trace)
from .data_model import (ArchitectureKind, AttentionMode, FeatureKind, FusionTraining, LogMelConfig, ModelConfig,
                         ModSpecConfig, PoolingScheme, PoolingSpec, RunLog, SynthSpec, TrainConfig)
from .exceptions import ConfigurationError, DataError, IntellikitError, InvariantError, ManifestValidationError
from .features import featurize_clip
from .io import load_wav, parse_manifest, plan_folds, read_fold_plan, write_feature_file, write_fold_plan
from .models import build_model, complexity_table, gradient_check, load, read_config_file, save
from .synthcorpus import generate
from .utils import derive_seed, relative_error_reduction
import cement
import json
import numpy
import os
import sys

__all__ = ['BaseController', 'App', 'dispatch', 'main']

GRADIENT_CHECK_THRESHOLD = 1e-4
EXIT_CODES = {'usage': 2, 'data': 3, 'internal': 4}
PROVENANCE_FILENAME = 'provenance.json'
FEATURIZE_KINDS = {
    'logmel': [FeatureKind.logmel],
    'modspec': [FeatureKind.modulation],
    'both': [FeatureKind.logmel, FeatureKind.modulation],
}

ARCH_ARGUMENT = (['--arch'], dict(type=str, default=ArchitectureKind.single_logmel.value,
                                  choices=[kind.value for kind in ArchitectureKind],
                                  help='architecture (default: single-logmel)'))
POOLING_ARGUMENT = (['--pooling'], dict(type=str, default=PoolingScheme.attention.value,
                                        choices=[scheme.value for scheme in PoolingScheme],
                                        help='pooling scheme (default: attention)'))
ATTENTION_MODE_ARGUMENT = (['--attention-mode'], dict(type=str, default=AttentionMode.single_softmax.value,
                                                      choices=[mode.value for mode in AttentionMode],
                                                      help='normalization of attention scores'))
FUSION_TRAINING_ARGUMENT = (['--fusion-training'], dict(type=str, default=FusionTraining.joint.value,
                                                        choices=[mode.value for mode in FusionTraining],
                                                        help='training of the branches of fusion models'))
CONFIG_ARGUMENT = (['--config'], dict(type=str, default=None,
                                      help='JSON configuration of the architecture and of training; overrides '
                                           '--arch, --pooling and --attention-mode'))
MANIFEST_ARGUMENT = (['--manifest'], dict(type=str, required=True, help='path to the corpus manifest'))
FEATURES_ARGUMENT = (['--features'], dict(type=str, default=None,
                                          help='directory of feature files written by `featurize` (default: '
                                               'extract features from the audio)'))
OUT_ARGUMENT = (['--out'], dict(type=str, required=True, help='output directory'))
PROVENANCE_OUT_ARGUMENT = (['--out'], dict(type=str, default='.',
                                          help='directory of the provenance record (default: current directory)'))
SEED_ARGUMENT = (['--seed'], dict(type=int, default=None, help='master seed (default: IK_SEED or 0)'))
TRAIN_ARGUMENTS = [
    (['--epochs'], dict(type=int, default=None, help='maximum number of epochs')),
    (['--batch-size'], dict(type=int, default=None, help='mini-batch size')),
    (['--lr'], dict(type=float, default=None, help='learning rate')),
    (['--patience'], dict(type=int, default=None, help='early-stopping patience (epochs)')),
]


class BaseController(cement.Controller):
    """ Base controller for command line application """

    class Meta:
        label = 'base'
        description = ('Intelligibility-level classification of (dysarthric) speech with log-mel and modulation '
                       'spectrograms, weighted-pooling LSTMs and their fusion')
        help = 'intellikit'
        arguments = [
            (['-v', '--version'], dict(action='version', version=__version__)),
        ]

    @cement.ex(hide=True)
    def _default(self):
        self._parser.print_help()

    # helpers

    def _seed(self):
        seed = self.app.pargs.seed
        return get_config().SEED if seed is None else seed

    def _configs(self, seed):
        args = self.app.pargs
        model_config = None
        train_config = None
        if getattr(args, 'config', None):
            model_config, train_config = read_config_file(args.config)
        if model_config is None:
            model_config = ModelConfig.default(args.arch, scheme=args.pooling,
                                               fusion_training=getattr(args, 'fusion_training',
                                                                       FusionTraining.joint.value))
            model_config.pooling = PoolingSpec(args.pooling, args.attention_mode)
        train_config = train_config or TrainConfig(clip_norm=get_config().GRADIENT_CLIP_NORM)
        train_config.seed = seed
        for attr, arg in [('max_epochs', 'epochs'), ('batch_size', 'batch_size'), ('lr', 'lr'),
                          ('patience', 'patience'), ('repeats', 'repeats'), ('k', 'k')]:
            value = getattr(args, arg, None)
            if value is not None:
                setattr(train_config, attr, value)
        model_config.validate()
        train_config.validate()
        return model_config, train_config

    def _dataset(self, manifest, kinds, normalize=True):
        return FeatureDataset.from_manifest(manifest, kinds, LogMelConfig(), ModSpecConfig(),
                                            feature_dir=getattr(self.app.pargs, 'features', None),
                                            normalize=normalize)

    def _start(self, command, seed, config):
        log = RunLog(command, seed=seed, version=__version__, config=config)
        log.start()
        return log

    def _finish(self, log, out_dir, filename=PROVENANCE_FILENAME, exception=None):
        log.finish(exception)
        provenance = log.to_dict()
        provenance['dependencies'] = get_dependency_versions()
        _makedirs(out_dir)
        _write_json(os.path.join(out_dir, filename), provenance)

    # commands

    @cement.ex(
        help='Generate a synthetic corpus (WAV files and manifest)',
        arguments=[
            (['--spec'], dict(type=str, default=None, help='JSON specification of the corpus')),
            OUT_ARGUMENT,
            SEED_ARGUMENT,
        ],
    )
    def synth(self):
        args = self.app.pargs
        spec = SynthSpec()
        if args.spec:
            spec = SynthSpec.from_dict(_read_json(args.spec, 'Synthetic corpus specification'))
        if args.seed is not None:
            spec.seed = args.seed
        log = self._start('synth', spec.seed, spec.to_dict())
        _makedirs(args.out)
        manifest = generate(spec, args.out)
        log.output.append('{} clips of {} speakers'.format(len(manifest.entries), len(manifest.speakers)))
        print(log.output[-1])
        self._finish(log, args.out)

    @cement.ex(
        help='Extract per-utterance normalized feature sequences into feature files',
        arguments=[
            MANIFEST_ARGUMENT,
            OUT_ARGUMENT,
            (['--kind'], dict(type=str, default='both', choices=list(FEATURIZE_KINDS),
                              help='kind of features: logmel, modspec or both (default: both)')),
            (['--no-pad'], dict(action='store_true',
                                help='keep all frames instead of padding or cutting the sequences to their fixed '
                                     'lengths (700 log-mel and 110 modulation frames)')),
            (['--no-normalize'], dict(action='store_true', help='do not standardize the features')),
        ],
    )
    def featurize(self):
        args = self.app.pargs
        kinds = FEATURIZE_KINDS[args.kind]
        logmel_cfg = LogMelConfig()
        modspec_cfg = ModSpecConfig()
        log = self._start('featurize', None, {
            'kinds': [kind.value for kind in kinds],
            'normalize': not args.no_normalize,
            'pad': not args.no_pad,
            'logmel': vars(logmel_cfg),
            'modulation': vars(modspec_cfg),
        })
        manifest = parse_manifest(args.manifest)
        _makedirs(args.out)
        for entry in manifest.entries:
            clip = load_wav(entry.path, channel=entry.channel, clip_id=entry.clip_id, speaker_id=entry.speaker_id)
            for kind in kinds:
                seq = featurize_clip(clip, kind, logmel_cfg, modspec_cfg, normalize=not args.no_normalize,
                                     pad=not args.no_pad)
                write_feature_file(feature_file_path(args.out, entry.clip_id, kind), seq)
        log.output.append('{} clips featurized'.format(len(manifest.entries)))
        print(log.output[-1])
        self._finish(log, args.out)

    @cement.ex(
        help='Assign the speakers of a corpus to cross-validation folds',
        arguments=[
            MANIFEST_ARGUMENT,
            (['-k'], dict(type=int, default=5, help='number of folds (default: 5)')),
            SEED_ARGUMENT,
            (['--out'], dict(type=str, required=True,
                             help='path to save the fold plan (JSON); the provenance record is saved next to it as '
                                  '<name>.provenance.json')),
        ],
    )
    def folds(self):
        args = self.app.pargs
        seed = self._seed()
        log = self._start('folds', seed, {'manifest': args.manifest, 'k': args.k})
        plan = plan_folds(parse_manifest(args.manifest), k=args.k, seed=seed)
        write_fold_plan(args.out, plan)
        for i_fold, speakers in enumerate(plan.folds):
            log.output.append('fold {}: {}'.format(i_fold + 1, ' '.join(speakers)))
            print(log.output[-1])
        self._finish(log, os.path.dirname(os.path.abspath(args.out)),
                     filename=os.path.splitext(os.path.basename(args.out))[0] + '.' + PROVENANCE_FILENAME)

    @cement.ex(
        help='Train a classifier on a corpus, or on the training speakers of one rotation of a fold plan',
        arguments=[
            MANIFEST_ARGUMENT,
            ARCH_ARGUMENT,
            POOLING_ARGUMENT,
            ATTENTION_MODE_ARGUMENT,
            FUSION_TRAINING_ARGUMENT,
            CONFIG_ARGUMENT,
            FEATURES_ARGUMENT,
            (['--plan'], dict(type=str, default=None, help='fold plan (JSON) written by `folds`')),
            (['--rotation'], dict(type=int, default=None, help='rotation of the fold plan to train on')),
            OUT_ARGUMENT,
            SEED_ARGUMENT,
        ] + TRAIN_ARGUMENTS,
    )
    def train(self):
        args = self.app.pargs
        seed = self._seed()
        model_config, train_config = self._configs(seed)
        log = self._start('train', seed, {'model': model_config.to_dict(), 'train': train_config.to_dict()})

        manifest = parse_manifest(args.manifest)
        dataset = self._dataset(manifest, model_config.kind.feature_kinds)
        train_set = dataset
        validation_set = None
        if args.rotation is not None:
            if not args.plan:
                raise ConfigurationError('`--rotation` requires a fold plan (`--plan`).')
            rotation = read_fold_plan(args.plan).rotation(args.rotation)
            train_set = dataset.subset(dataset.clip_ids_of_speakers(rotation.train))
            validation_ids = dataset.clip_ids_of_speakers(rotation.validation)
            validation_set = dataset.subset(validation_ids) if validation_ids else None

        model_seed = derive_seed(seed, 0)
        model = build_for_training(model_config, train_config, train_set, validation_set, seed=model_seed)
        model, history = train(model, train_set, validation_set, train_config, seed=model_seed, log=log)

        _makedirs(args.out)
        save(model, os.path.join(args.out, 'model.ikck'), train_config=train_config)
        _write_json(os.path.join(args.out, 'history.json'), history.to_dict())
        print('best epoch {}: train accuracy {:.2f}%'.format(
            history.best_epoch, history.epochs[history.best_epoch - 1]['train_accuracy'] if history.best_epoch else 0.))
        self._finish(log, args.out)

    @cement.ex(
        help='Evaluate a trained classifier on a corpus',
        arguments=[
            MANIFEST_ARGUMENT,
            (['--model'], dict(type=str, required=True, help='checkpoint written by `train`')),
            FEATURES_ARGUMENT,
            OUT_ARGUMENT,
        ],
    )
    def evaluate(self):
        args = self.app.pargs
        model, _, _ = load(args.model)
        log = self._start('evaluate', None, {'model': model.config.to_dict(), 'checkpoint': args.model})
        dataset = self._dataset(parse_manifest(args.manifest), model.config.kind.feature_kinds)
        report = evaluate(model, dataset)
        _makedirs(args.out)
        _write_json(os.path.join(args.out, 'report.json'), report.to_dict())
        print('accuracy: {:.2f}%'.format(report.mean_accuracy))
        self._finish(log, args.out)

    @cement.ex(
        help='Cross-validate a classifier subject-wise',
        arguments=[
            MANIFEST_ARGUMENT,
            ARCH_ARGUMENT,
            POOLING_ARGUMENT,
            ATTENTION_MODE_ARGUMENT,
            FUSION_TRAINING_ARGUMENT,
            CONFIG_ARGUMENT,
            FEATURES_ARGUMENT,
            (['--plan'], dict(type=str, default=None, help='fold plan (JSON); default: planned from the manifest')),
            (['-k'], dict(type=int, default=None, help='number of folds (default: 5)')),
            (['--repeats'], dict(type=int, default=None, help='number of repetitions (default: 20)')),
            (['--jobs'], dict(type=int, default=None, help='number of parallel processes (default: IK_JOBS or 1)')),
            (['--reference'], dict(type=str, default=None,
                                   help='report (JSON) of a reference system written by `cv`; prints the '
                                        'relative reduction of its classification error')),
            OUT_ARGUMENT,
            SEED_ARGUMENT,
        ] + TRAIN_ARGUMENTS,
    )
    def cv(self):
        args = self.app.pargs
        manifest = parse_manifest(args.manifest)
        reference = _read_json(args.reference, 'Reference report') if args.reference else None
        if reference is not None and not (isinstance(reference, dict)
                                          and isinstance(reference.get('mean_accuracy'), (int, float))):
            raise DataError('Reference report `{}` has no mean accuracy.'.format(args.reference))
        seed = self._seed()
        model_config, train_config = self._configs(seed)
        log = self._start('cv', seed, {'model': model_config.to_dict(), 'train': train_config.to_dict()})

        plan = read_fold_plan(args.plan) if args.plan else plan_folds(manifest, k=train_config.k, seed=seed)
        dataset = self._dataset(manifest, model_config.kind.feature_kinds)
        report = run_cv(dataset, model_config, train_config, plan=plan, jobs=args.jobs, log=log)

        _makedirs(args.out)
        write_fold_plan(os.path.join(args.out, 'folds.json'), plan)
        _write_json(os.path.join(args.out, 'report.json'), report.to_dict())
        print('accuracy: {:.2f}% +/- {:.2f}% (95% CI +/- {:.2f}%)'.format(
            report.mean_accuracy, report.std_accuracy, report.ci95))
        if reference is not None:
            reduction = relative_error_reduction(reference['mean_accuracy'], report.mean_accuracy)
            _write_json(os.path.join(args.out, 'comparison.json'), {
                'reference': args.reference,
                'reference_accuracy': reference['mean_accuracy'],
                'accuracy': report.mean_accuracy,
                'relative_error_reduction': reduction,
            })
            log.output.append('relative error reduction: {:+.2f}%'.format(reduction))
            print(log.output[-1])
        self._finish(log, args.out)

    @cement.ex(
        help='Compare analytic gradients with central finite differences',
        arguments=[
            ARCH_ARGUMENT,
            POOLING_ARGUMENT,
            ATTENTION_MODE_ARGUMENT,
            (['--toy'], dict(action='store_true', help='use toy dimensions (required)')),
            PROVENANCE_OUT_ARGUMENT,
            SEED_ARGUMENT,
        ],
    )
    def gradcheck(self):
        args = self.app.pargs
        if not args.toy:
            raise ConfigurationError('Gradient checks run on toy dimensions; pass `--toy`.')
        seed = self._seed()
        config = ModelConfig.default(args.arch, scheme=args.pooling, toy=True, dtype='float64')
        config.pooling = PoolingSpec(args.pooling, args.attention_mode)
        log = self._start('gradcheck', seed, {'model': config.to_dict(), 'threshold': GRADIENT_CHECK_THRESHOLD})
        max_error, errors = gradient_check(config, seed=seed)
        for name, error in errors.items():
            log.output.append('{}: {:.3e}'.format(name, error))
            print(log.output[-1])
        log.output.append('max relative error: {:.3e}'.format(max_error))
        print(log.output[-1])
        exception = None
        if not max_error < GRADIENT_CHECK_THRESHOLD:
            exception = InvariantError('Analytic and numerical gradients differ by {:.3e} (threshold {:.0e}).'.format(
                max_error, GRADIENT_CHECK_THRESHOLD))
        self._finish(log, args.out, exception=exception)
        if exception:
            raise exception

    @cement.ex(
        help='Count the trainable parameters of an architecture',
        arguments=[
            ARCH_ARGUMENT,
            POOLING_ARGUMENT,
            (['--toy'], dict(action='store_true', help='use toy dimensions')),
            (['--complexity'], dict(action='store_true', help='also print the complexity (W x L) table')),
            PROVENANCE_OUT_ARGUMENT,
        ],
    )
    def params(self):
        args = self.app.pargs
        config = ModelConfig.default(args.arch, scheme=args.pooling, toy=args.toy)
        log = self._start('params', None, {'model': config.to_dict(), 'complexity': args.complexity})
        model = build_model(config)
        for branch in model.branches:
            log.output.append('{} LSTM parameters: {}'.format(branch.config.kind.value, branch.lstm.n_params))
        log.output.append('LSTM parameters: {}'.format(model.count_lstm_params()))
        log.output.append('total parameters: {}'.format(model.count_params()))
        if args.complexity:
            for row in complexity_table([branch.config for branch in model.branches]):
                log.output.append('{}\tW={}\tL={}\tWxL={}\trelative={:.4f}'.format(
                    row['system'], row['W'], '-' if row['L'] is None else row['L'], row['WxL'], row['relative']))
        for line in log.output:
            print(line)
        self._finish(log, args.out)

    @cement.ex(
        label='attention-export',
        help='Export the pooling weights of a clip, aligned to time',
        arguments=[
            MANIFEST_ARGUMENT,
            (['--model'], dict(type=str, required=True, help='checkpoint written by `train`')),
            (['--clip'], dict(type=str, required=True, help='id of the clip')),
            FEATURES_ARGUMENT,
            OUT_ARGUMENT,
        ],
    )
    def attention_export(self):
        args = self.app.pargs
        model, _, _ = load(args.model)
        log = self._start('attention-export', None, {'model': model.config.to_dict(), 'clip': args.clip})
        manifest = parse_manifest(args.manifest)
        try:
            manifest.get(args.clip)
        except KeyError as exception:
            raise ManifestValidationError(exception.args[0])
        dataset = self._dataset(manifest, model.config.kind.feature_kinds)
        traces = export_attention(model, dataset, args.clip)
        _makedirs(args.out)
        for kind, trace in traces.items():
            path = os.path.join(args.out, '{}.{}.attention.tsv'.format(args.clip, kind.value))
            write_attention_trace(path, trace)
            print('{}: {} frames'.format(path, len(trace)))
        self._finish(log, args.out)

    @cement.ex(
        help='Analyze the modulation energy of a corpus across intelligibility levels',
        arguments=[
            MANIFEST_ARGUMENT,
            OUT_ARGUMENT,
        ],
    )
    def analyze(self):
        args = self.app.pargs
        modspec_cfg = ModSpecConfig()
        log = self._start('analyze', None, {'modulation': vars(modspec_cfg)})
        manifest = parse_manifest(args.manifest)
        seqs = []
        labels = []
        summaries = []
        for entry in manifest.entries:
            clip = load_wav(entry.path, channel=entry.channel, clip_id=entry.clip_id, speaker_id=entry.speaker_id)
            seq = featurize_clip(clip, FeatureKind.modulation, modspec_cfg=modspec_cfg, normalize=False, pad=False)
            seqs.append(seq)
            labels.append(entry.label)
            peak_freq, peak_energy = modulation_peak(seq, modspec_cfg)
            summaries.append((entry.clip_id, entry.speaker_id, entry.label.name, lhmr(seq, modspec_cfg, on_zero='inf'),
                              peak_freq, peak_energy, modulation_region_energy(seq, modspec_cfg)))

        profile = band_energy_profile(seqs, labels, modspec_cfg)
        correlations = corr_map(seqs, labels, modspec_cfg)

        _makedirs(args.out)
        _write_json(os.path.join(args.out, 'band_energy_profile.json'), {
            'modulation_center_frequencies': modspec_cfg.modulation_center_frequencies.tolist(),
            'relative_increment': {level.name: values.tolist() for level, values in profile.items()},
        })
        numpy.savetxt(os.path.join(args.out, 'corr_map.tsv'), correlations, delimiter='\t', fmt='%.6f')
        with open(os.path.join(args.out, 'modulation_summary.tsv'), 'w') as file:
            file.write('clip_id\tspeaker_id\tlevel\tlhmr\tpeak_freq_hz\tpeak_energy\tenergy_3_6_hz\n')
            for summary in summaries:
                file.write('{}\t{}\t{}\t{!r}\t{!r}\t{!r}\t{!r}\n'.format(*summary))
        for level, values in profile.items():
            print('{}: {}'.format(level.name, ' '.join('{:+.3f}'.format(value) for value in values)))
        self._finish(log, args.out)


class App(cement.App):
    """ Command line application """
    class Meta:
        label = 'intellikit'
        base_controller = 'base'
        handlers = [
            BaseController,
        ]
        exit_on_close = False
        config_files = []


def _makedirs(dirname):
    if not os.path.isdir(dirname):
        os.makedirs(dirname)


def _read_json(path, description):
    if not os.path.isfile(path):
        raise FileNotFoundError('{} `{}` not found.'.format(description, path))
    with open(path, 'r') as file:
        try:
            return json.load(file)
        except ValueError as exception:
            raise ConfigurationError('{} `{}` is not valid JSON: {}'.format(description, path, exception))


def _write_json(path, value):
    with open(path, 'w') as file:
        json.dump(value, file, indent=2)
        file.write('\n')


def _report_error(category, exception):
    message = ' '.join(str(exception).split())
    sys.stderr.write('error[{}]: {}\n'.format(category, message))
    return EXIT_CODES[category]


def dispatch(argv=None):
    """ Run the command-line application

    Args:
        argv (:obj:`list` of :obj:`str`, optional): arguments; default: :obj:`sys.argv`

    Returns:
        :obj:`int`: exit code: 0 on success, 2 for usage errors, 3 for data errors, 4 for internal errors
    """
    try:
        with App(argv=argv) as app:
            app.run()
        return 0
    except SystemExit as exception:
        if exception.code in (None, 0):
            return 0
        if isinstance(exception.code, int):
            if exception.code == EXIT_CODES['usage']:
                sys.stderr.write('error[usage]: invalid arguments\n')
            return exception.code
        return _report_error('usage', exception.code)
    except FileNotFoundError as exception:
        return _report_error('data', exception)
    except IntellikitError as exception:
        return _report_error(exception.category, exception)
    except Exception as exception:
        return _report_error('internal', exception)


def main():
    sys.exit(dispatch())
