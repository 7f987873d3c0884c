""" Methods for training and evaluating classifiers, cross-validating them subject-wise and exporting their
pooling weights

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .config import get_config
from .data_model import (ArchitectureKind, EvalReport, FeatureKind, FusionTraining, IntelligibilityClass, ModelConfig,
                         PoolingScheme, RunLog, TrainConfig, TrainingHistory)
from .exceptions import ConfigurationError, InvariantError, UnpairedClipError, UnsupportedPoolingError
from .features import featurize_clip, pad_or_cut
from .io import load_wav, plan_folds, read_feature_file
from .models import build_model
from .neuralnet import Adam, MaskedSequenceBatch
from .utils import accuracy, checksum_clip_ids, confusion_counts, derive_seed
from .warnings import warn, MissingClassWarning
import collections
import concurrent.futures
import csv
import numpy
import os

__all__ = [
    'FEATURE_FILE_EXTENSION',
    'feature_file_path',
    'FeatureDataset',
    'train',
    'build_for_training',
    'predict',
    'evaluate',
    'run_rotation',
    'run_cv',
    'export_attention',
    'write_attention_trace',
]

FEATURE_FILE_EXTENSION = '.ikft'
PREDICTION_BATCH_SIZE = 32


def feature_file_path(feature_dir, clip_id, kind):
    """ Get the path of the feature file of a clip """
    return os.path.join(feature_dir, '{}.{}{}'.format(clip_id, FeatureKind(kind).value, FEATURE_FILE_EXTENSION))


class FeatureDataset(object):
    """ Labeled feature sequences of one or two kinds, paired by clip id

    Attributes:
        kinds (:obj:`list` of :obj:`FeatureKind`): kinds of features
        sequences (:obj:`collections.OrderedDict`): dictionary that maps each kind to a dictionary that maps clip
            ids to sequences
        labels (:obj:`collections.OrderedDict`): dictionary that maps clip ids to intelligibility levels
        speakers (:obj:`dict`): dictionary that maps clip ids to speaker ids
    """

    def __init__(self, sequences, labels, speakers):
        """
        Args:
            sequences (:obj:`dict`): dictionary that maps each kind to a dictionary that maps clip ids to sequences
            labels (:obj:`dict`): dictionary that maps clip ids to intelligibility levels
            speakers (:obj:`dict`): dictionary that maps clip ids to speaker ids

        Raises:
            :obj:`UnpairedClipError`: if a clip lacks the features of a kind or a label
        """
        self.kinds = [FeatureKind(kind) for kind in sequences.keys()]
        self.sequences = collections.OrderedDict((FeatureKind(kind), seqs) for kind, seqs in sequences.items())
        self.labels = collections.OrderedDict(labels)
        self.speakers = dict(speakers)

        for kind, seqs in self.sequences.items():
            unpaired = sorted(set(self.labels.keys()).symmetric_difference(seqs.keys()))
            if unpaired:
                raise UnpairedClipError('{} clip{} lack{} paired {} features or labels: {}'.format(
                    len(unpaired), '' if len(unpaired) == 1 else 's', 's' if len(unpaired) == 1 else '',
                    kind.value, ', '.join('`{}`'.format(clip_id) for clip_id in unpaired)))

    @classmethod
    def from_manifest(cls, manifest, kinds, logmel_cfg=None, modspec_cfg=None, feature_dir=None, normalize=True):
        """ Extract (or read) the features of the clips of a manifest

        Args:
            manifest (:obj:`CorpusManifest`): manifest
            kinds (:obj:`list` of :obj:`FeatureKind`): kinds of features
            logmel_cfg (:obj:`LogMelConfig`, optional): configuration of the log-mel spectrogram
            modspec_cfg (:obj:`ModSpecConfig`, optional): configuration of the modulation spectrogram
            feature_dir (:obj:`str`, optional): directory of feature files written by :obj:`feature_file_path`;
                if given, features are read from it instead of being extracted from the audio
            normalize (:obj:`bool`, optional): whether to standardize extracted features per utterance

        Returns:
            :obj:`FeatureDataset`: dataset
        """
        validate = get_config().VALIDATE_FEATURES
        sequences = collections.OrderedDict((FeatureKind(kind), collections.OrderedDict()) for kind in kinds)
        labels = collections.OrderedDict()
        speakers = {}
        for entry in manifest.entries:
            if feature_dir:
                for kind in sequences:
                    sequences[kind][entry.clip_id] = read_feature_file(
                        feature_file_path(feature_dir, entry.clip_id, kind), clip_id=entry.clip_id, validate=validate)
            else:
                clip = load_wav(entry.path, channel=entry.channel, clip_id=entry.clip_id, speaker_id=entry.speaker_id)
                for kind in sequences:
                    sequences[kind][entry.clip_id] = featurize_clip(clip, kind, logmel_cfg, modspec_cfg,
                                                                    normalize=normalize, pad=False)
            labels[entry.clip_id] = entry.label
            speakers[entry.clip_id] = entry.speaker_id
        return cls(sequences, labels, speakers)

    @property
    def clip_ids(self):
        return list(self.labels.keys())

    def __len__(self):
        return len(self.labels)

    def clip_ids_of_speakers(self, speaker_ids):
        return [clip_id for clip_id in self.labels if self.speakers[clip_id] in speaker_ids]

    def subset(self, clip_ids):
        """ Get the dataset restricted to some clips, in the given order """
        return FeatureDataset(
            collections.OrderedDict((kind, collections.OrderedDict((clip_id, seqs[clip_id]) for clip_id in clip_ids))
                                    for kind, seqs in self.sequences.items()),
            collections.OrderedDict((clip_id, self.labels[clip_id]) for clip_id in clip_ids),
            {clip_id: self.speakers[clip_id] for clip_id in clip_ids})

    def inputs(self, lengths, dtype=numpy.float32):
        """ Pad or cut the sequences of all clips and stack them into batches

        Args:
            lengths (:obj:`dict`): dictionary that maps each kind to its fixed length ``L``
            dtype (:obj:`type`, optional): type of the values

        Returns:
            :obj:`collections.OrderedDict`: dictionary that maps each kind to a :obj:`MaskedSequenceBatch`
        """
        missing = [FeatureKind(kind).value for kind in lengths if kind not in self.sequences]
        if missing:
            raise UnpairedClipError('The dataset has no {} features.'.format(', '.join(missing)))
        labels = numpy.array([int(label) for label in self.labels.values()], dtype=numpy.int64)
        return collections.OrderedDict(
            (kind, MaskedSequenceBatch.from_sequences(
                [pad_or_cut(seq, lengths[kind]) for seq in self.sequences[kind].values()], labels=labels, dtype=dtype))
            for kind in lengths)


def _lengths(model):
    return collections.OrderedDict((branch.config.kind, branch.config.length) for branch in model.branches)


def _subset_inputs(inputs, indices):
    return collections.OrderedDict((kind, batch.subset(indices)) for kind, batch in inputs.items())


def _labels(inputs):
    return next(iter(inputs.values())).labels


def _predict_inputs(model, inputs, batch_size=PREDICTION_BATCH_SIZE):
    model.train(False)
    n_clips = _labels(inputs).size
    predictions = []
    for start in range(0, n_clips, batch_size):
        predictions.append(model.predict(_subset_inputs(inputs, numpy.arange(start, min(start + batch_size, n_clips)))))
    return numpy.concatenate(predictions) if predictions else numpy.zeros(0, dtype=numpy.int64)


def train(model, train_set, validation_set=None, cfg=None, seed=None, history=None, log=None):
    """ Train a model with mini-batch Adam, retaining the parameters of the epoch with the best validation accuracy

    Without a validation set, the epoch with the best training accuracy is retained.

    Args:
        model (:obj:`Model`): model, trained in place
        train_set (:obj:`FeatureDataset`): training clips
        validation_set (:obj:`FeatureDataset`, optional): validation clips
        cfg (:obj:`TrainConfig`, optional): configuration
        seed (:obj:`int`, optional): seed of the batch order and of dropout; default: ``cfg.seed``
        history (:obj:`TrainingHistory`, optional): history to append to
        log (:obj:`RunLog`, optional): log

    Returns:
        :obj:`tuple`:

            * :obj:`Model`: trained model
            * :obj:`TrainingHistory`: history

    Raises:
        :obj:`ConfigurationError`: if the training set is empty or the configuration is not valid
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    history = history or TrainingHistory()
    if len(train_set) == 0:
        raise ConfigurationError('The training set is empty.')

    lengths = _lengths(model)
    train_inputs = train_set.inputs(lengths, dtype=model.dtype)
    labels = _labels(train_inputs)
    validation_inputs = validation_set.inputs(lengths, dtype=model.dtype) if validation_set else None

    rng = numpy.random.default_rng(derive_seed(seed, 0))
    model.reseed_dropout(derive_seed(seed, 1))
    optimizer = Adam(lr=cfg.lr, clip_norm=cfg.clip_norm)

    best_score = -numpy.inf
    best_params = None
    epochs_since_best = 0
    for epoch in range(1, cfg.max_epochs + 1):
        model.train(True)
        order = rng.permutation(labels.size)
        losses = []
        for start in range(0, labels.size, cfg.batch_size):
            indices = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grad(_subset_inputs(train_inputs, indices), labels[indices])
            optimizer.step(model.params, grads, frozen=model.frozen)
            losses.append(loss * indices.size)

        train_accuracy = accuracy(labels, _predict_inputs(model, train_inputs))
        validation_accuracy = None
        if validation_inputs is not None:
            validation_accuracy = accuracy(_labels(validation_inputs), _predict_inputs(model, validation_inputs))
        history.append(sum(losses) / labels.size, train_accuracy, validation_accuracy)
        if log:
            log.output.append('epoch {}: loss {:.4f}, train accuracy {:.2f}%{}'.format(
                epoch, history.epochs[-1]['loss'], train_accuracy,
                '' if validation_accuracy is None else ', validation accuracy {:.2f}%'.format(validation_accuracy)))

        score = train_accuracy if validation_accuracy is None else validation_accuracy
        if score > best_score:
            best_score = score
            best_params = collections.OrderedDict((name, value.copy()) for name, value in model.params.items())
            history.best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if cfg.patience is not None and epochs_since_best >= cfg.patience:
                break

    if best_params is not None:
        model.load_params(best_params)
    model.train(False)
    return model, history


def predict(model, dataset):
    """ Get the argmax decision of each clip of a dataset

    Returns:
        :obj:`numpy.ndarray`: predicted levels, in the order of :obj:`FeatureDataset.clip_ids`
    """
    return _predict_inputs(model, dataset.inputs(_lengths(model), dtype=model.dtype))


def evaluate(model, test_set):
    """ Evaluate a model on a set of clips

    Args:
        model (:obj:`Model`): trained model
        test_set (:obj:`FeatureDataset`): clips

    Returns:
        :obj:`EvalReport`: report with a single fold accuracy and the confusion counts
    """
    n_classes = model.config.n_classes
    labels = numpy.array([int(label) for label in test_set.labels.values()], dtype=numpy.int64)
    predictions = predict(model, test_set) if len(test_set) else numpy.zeros(0, dtype=numpy.int64)

    absent = sorted(set(range(n_classes)) - set(labels.tolist()))
    if absent:
        warn('The test set has no clips of level{} {}; their confusion rows are zero.'.format(
            '' if len(absent) == 1 else 's', ', '.join(IntelligibilityClass(level).name for level in absent)),
            MissingClassWarning)

    return EvalReport(fold_accuracies=[[accuracy(labels, predictions)]],
                      confusion_counts=confusion_counts(labels, predictions, n_classes),
                      n_classes=n_classes)


def build_for_training(model_config, train_config, train_set, validation_set=None, seed=0):
    """ Build a fresh model for training; for frozen-pretrained fusion, first train the single-feature systems
    whose parameters initialize and freeze the branches

    Args:
        model_config (:obj:`ModelConfig`): architecture
        train_config (:obj:`TrainConfig`): training configuration of the single-feature systems
        train_set (:obj:`FeatureDataset`): training clips
        validation_set (:obj:`FeatureDataset`, optional): validation clips
        seed (:obj:`int`, optional): seed of the model

    Returns:
        :obj:`Model`: model
    """
    pretrained = None
    if model_config.kind.is_fusion and model_config.fusion_training == FusionTraining.frozen_pretrained:
        pretrained = []
        for i_branch, (kind, branch) in enumerate(zip(
                [ArchitectureKind.single_logmel, ArchitectureKind.single_modspec], model_config.branches)):
            single_config = ModelConfig(kind, pooling=model_config.pooling, branches=[branch],
                                        n_classes=model_config.n_classes, dropout=model_config.dropout,
                                        dtype=model_config.dtype)
            single_seed = derive_seed(seed, 2, i_branch)
            single = build_model(single_config, seed=single_seed)
            train(single, train_set, validation_set, train_config, seed=single_seed)
            pretrained.append(single)
    return build_model(model_config, seed=seed, pretrained=pretrained)


def run_rotation(dataset, model_config, train_config, plan, repeat, rotation_index):
    """ Train a fresh model on the training speakers of a rotation and evaluate it on its test speakers

    Args:
        dataset (:obj:`FeatureDataset`): all clips
        model_config (:obj:`ModelConfig`): architecture
        train_config (:obj:`TrainConfig`): training configuration
        plan (:obj:`FoldPlan`): fold plan
        repeat (:obj:`int`): index of the repetition
        rotation_index (:obj:`int`): index of the rotation

    Returns:
        :obj:`dict`: repeat, fold, accuracy (%), confusion counts, checksum of the training clip ids and history

    Raises:
        :obj:`InvariantError`: if a clip is both in the training and the test set
    """
    rotation = plan.rotation(rotation_index)
    train_ids = dataset.clip_ids_of_speakers(rotation.train)
    validation_ids = dataset.clip_ids_of_speakers(rotation.validation)
    test_ids = dataset.clip_ids_of_speakers(rotation.test)
    leaked = set(train_ids).intersection(test_ids) | set(validation_ids).intersection(test_ids)
    if leaked:
        raise InvariantError('Rotation {} uses test clips for training: {}'.format(
            rotation_index, ', '.join(sorted(leaked))))

    seed = derive_seed(train_config.seed, repeat, rotation_index)
    train_set = dataset.subset(train_ids)
    validation_set = dataset.subset(validation_ids) if validation_ids else None
    model = build_for_training(model_config, train_config, train_set, validation_set, seed)
    model, history = train(model, train_set, validation_set, train_config, seed=seed)
    report = evaluate(model, dataset.subset(test_ids))
    return {
        'repeat': repeat,
        'fold': rotation_index,
        'accuracy': report.fold_accuracies[0][0],
        'confusion_counts': report.confusion_counts,
        'checksum': checksum_clip_ids(train_set.clip_ids),
        'history': history,
    }


_worker_dataset = None


def _init_worker(dataset):
    global _worker_dataset
    _worker_dataset = dataset


def _run_rotation_in_worker(args):
    return run_rotation(_worker_dataset, *args)


def run_cv(dataset, model_config, train_config=None, plan=None, manifest=None, jobs=None, log=None):
    """ Cross-validate an architecture subject-wise, repeating the experiment with fresh initializations

    The fold plan is fixed across repeats; repeats change the initialization, the batch order and dropout. Folds
    and repeats run in parallel processes when ``jobs > 1``; results do not depend on ``jobs``.

    Args:
        dataset (:obj:`FeatureDataset`): clips of the corpus
        model_config (:obj:`ModelConfig`): architecture
        train_config (:obj:`TrainConfig`, optional): training configuration
        plan (:obj:`FoldPlan`, optional): fold plan; default: planned from ``manifest`` with ``train_config.k``
            folds and ``train_config.seed``
        manifest (:obj:`CorpusManifest`, optional): manifest, required if ``plan`` is not given
        jobs (:obj:`int`, optional): number of parallel processes; default: ``IK_JOBS``
        log (:obj:`RunLog`, optional): log

    Returns:
        :obj:`EvalReport`: accuracies of each fold of each repeat and confusion counts summed over all folds
    """
    train_config = train_config or TrainConfig()
    train_config.validate()
    model_config.validate()
    jobs = jobs or get_config().JOBS
    log = log or RunLog('cv', seed=train_config.seed)
    if plan is None:
        if manifest is None:
            raise ConfigurationError('Cross-validation requires a fold plan or a manifest.')
        plan = plan_folds(manifest, k=train_config.k, seed=train_config.seed)

    tasks = [(model_config, train_config, plan, repeat, rotation_index)
             for repeat in range(train_config.repeats) for rotation_index in range(plan.k)]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                                    initargs=(dataset,)) as executor:
            results = list(executor.map(_run_rotation_in_worker, tasks))
    else:
        results = [run_rotation(dataset, *task) for task in tasks]

    n_classes = model_config.n_classes
    report = EvalReport(fold_accuracies=[[None] * plan.k for repeat in range(train_config.repeats)],
                        fold_checksums=[[None] * plan.k for repeat in range(train_config.repeats)],
                        n_classes=n_classes)
    for result in results:
        report.fold_accuracies[result['repeat']][result['fold']] = result['accuracy']
        report.fold_checksums[result['repeat']][result['fold']] = result['checksum']
        report.confusion_counts = report.confusion_counts + result['confusion_counts']
        log.output.append('repeat {}, fold {}: accuracy {:.2f}% (best epoch {})'.format(
            result['repeat'] + 1, result['fold'] + 1, result['accuracy'], result['history'].best_epoch))
    return report


def export_attention(model, dataset, clip_id):
    """ Get the pooling weights of a clip, aligned to time

    Args:
        model (:obj:`Model`): model with mean or attention pooling
        dataset (:obj:`FeatureDataset`): dataset that contains the clip
        clip_id (:obj:`str`): id of the clip

    Returns:
        :obj:`collections.OrderedDict`: dictionary that maps each feature kind to a list of (time (s), weight)
        pairs of the valid frames

    Raises:
        :obj:`UnsupportedPoolingError`: if the model pools the last frame
    """
    if model.config.pooling.scheme == PoolingScheme.last:
        raise UnsupportedPoolingError('Last-frame pooling has no weights to export; '
                                      'use mean or attention pooling.')
    if clip_id not in dataset.labels:
        raise KeyError('Clip `{}` is not in the dataset.'.format(clip_id))

    inputs = dataset.subset([clip_id]).inputs(_lengths(model), dtype=model.dtype)
    model.train(False)
    model.forward(inputs)
    traces = collections.OrderedDict()
    for branch in model.branches:
        kind = branch.config.kind
        n_valid = int(inputs[kind].n_valid[0])
        weights = model.attention_weights[kind][0, :n_valid]
        traces[kind] = [(i_frame * branch.config.hop_s, float(weight)) for i_frame, weight in enumerate(weights)]
    return traces


def write_attention_trace(path, trace):
    """ Write a trace of pooling weights as two tab-separated columns, ``time_s`` and ``weight``

    Args:
        path (:obj:`str`): path
        trace (:obj:`list` of :obj:`tuple`): (time (s), weight) pairs
    """
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, delimiter='\t', lineterminator='\n')
        writer.writerow(['time_s', 'weight'])
        for time, weight in trace:
            writer.writerow(['{:.3f}'.format(time), repr(float(weight))])
