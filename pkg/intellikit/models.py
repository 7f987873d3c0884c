""" Single-feature and fusion LSTM classifiers, their checkpoints and their complexity

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from ._version import __version__
from .data_model import ArchitectureKind, BranchConfig, FeatureKind, FusionTraining, ModelConfig, TrainConfig
from .exceptions import CheckpointError, ConfigurationError, ShapeError
from .neuralnet import (MaskedSequenceBatch, Dense, LSTM, Pooling, Dropout, Adam, AdamState,
                        check_gradients, cross_entropy, renormalized_cross_entropy, lstm_param_count)
from .utils import derive_seed
import collections
import json
import numpy
import os
import struct

__all__ = [
    'Branch',
    'Model',
    'SingleFeatureModel',
    'LateFusionModel',
    'WPFusionModel',
    'build_single',
    'build_late_fusion',
    'build_wp_fusion',
    'build_model',
    'config_document',
    'read_config_file',
    'write_config_file',
    'save',
    'load',
    'complexity_table',
    'gradient_check',
]

CONFIG_FORMAT = 'intellikit-config'
CONFIG_VERSION = 1
CHECKPOINT_MAGIC = b'IKCK'
CHECKPOINT_VERSION = 1
CHECKPOINT_PREAMBLE = struct.Struct('<4sHI')


class Branch(object):
    """ Layers of one single-feature system: dense, LSTM and pooling, optionally followed by the classification
    head (dense, dropout and softmax output)

    Attributes:
        config (:obj:`BranchConfig`): configuration
        layers (:obj:`list` of :obj:`Layer`): layers in order of application
    """

    def __init__(self, config, pooling, n_classes, dropout, rng, dropout_rng, dtype, with_head=True):
        self.config = config
        prefix = config.kind.value
        self.dense1 = Dense(config.n_features, config.n_dense1, 'relu', rng=rng, dtype=dtype,
                            name=prefix + '.dense1')
        self.lstm = LSTM(config.n_dense1, config.n_lstm, rng=rng, dtype=dtype, name=prefix + '.lstm')
        self.pooling = Pooling(config.n_lstm, config.length, pooling, dtype=dtype, name=prefix + '.pooling')
        self.layers = [self.dense1, self.lstm, self.pooling]
        self.with_head = with_head
        if with_head:
            self.dense2 = Dense(config.n_lstm, config.n_dense2, 'relu', rng=rng, dtype=dtype,
                                name=prefix + '.dense2')
            self.dropout = Dropout(dropout, rng=dropout_rng, name=prefix + '.dropout')
            self.output = Dense(config.n_dense2, n_classes, 'softmax', rng=rng, dtype=dtype,
                                name=prefix + '.output')
            self.layers += [self.dense2, self.dropout, self.output]

    def encode(self, batch):
        """ Get the pooled utterance representations ``z`` of a batch """
        if batch.values.shape[2] != self.config.n_features:
            raise ShapeError('The {} branch expects {} features per frame, not {}.'.format(
                self.config.kind.value, self.config.n_features, batch.values.shape[2]))
        values = batch.values.astype(self.dense1.params['W'].dtype, copy=False)
        y = self.dense1.forward(values)
        y = self.lstm.forward(y, batch.mask)
        return self.pooling.forward(y, batch.mask)

    def encode_backward(self, dz):
        dy = self.pooling.backward(dz)
        dy = self.lstm.backward(dy)
        self.dense1.backward(dy)

    def classify(self, z):
        return self.output.forward(self.dropout.forward(self.dense2.forward(z)))

    def classify_backward(self, dprobs):
        return self.dense2.backward(self.dropout.backward(self.output.backward(dprobs)))


class Model(object):
    """ Base class of classifiers

    Inputs are dictionaries that map each :obj:`FeatureKind` consumed by the model to a
    :obj:`MaskedSequenceBatch`; single-feature models also accept a bare batch.

    Attributes:
        config (:obj:`ModelConfig`): architecture
        branches (:obj:`list` of :obj:`Branch`): branches, log-mel first
        frozen (:obj:`set` of :obj:`str`): names of the parameters excluded from optimization
        training (:obj:`bool`): whether dropout is active
    """

    def __init__(self, config, seed=0):
        config.validate()
        self.config = config
        self.dtype = numpy.dtype(config.dtype)
        self.frozen = set()
        self.training = False
        self._init_rng = numpy.random.default_rng(seed)
        self._dropout_rng = numpy.random.default_rng([seed, 1])
        self.branches = []
        self.head_layers = []

    def _branch(self, branch_config, with_head=True):
        return Branch(branch_config, self.config.pooling, self.config.n_classes, self.config.dropout,
                      self._init_rng, self._dropout_rng, self.dtype, with_head=with_head)

    @property
    def layers(self):
        layers = []
        for branch in self.branches:
            layers.extend(branch.layers)
        return layers + self.head_layers

    @property
    def params(self):
        """ Get the trainable arrays, keyed by ``<layer name>.<parameter name>`` """
        params = collections.OrderedDict()
        for layer in self.layers:
            for key, value in layer.params.items():
                params[layer.name + '.' + key] = value
        return params

    @property
    def grads(self):
        grads = collections.OrderedDict()
        for layer in self.layers:
            for key, value in layer.grads.items():
                grads[layer.name + '.' + key] = value
        return grads

    def count_params(self):
        """ Get the number of trainable scalars """
        return int(sum(param.size for param in self.params.values()))

    def count_lstm_params(self):
        """ Get the number of trainable scalars of the LSTM layers """
        return int(sum(branch.lstm.n_params for branch in self.branches))

    def train(self, mode=True):
        self.training = mode
        for layer in self.layers:
            layer.train(mode)

    def reseed_dropout(self, seed):
        """ Restart the random stream of the dropout layers """
        rng = numpy.random.default_rng(seed)
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    def freeze(self, prefix):
        """ Exclude the parameters whose names start with ``prefix`` from optimization """
        self.frozen.update(name for name in self.params if name.startswith(prefix))

    def _inputs(self, inputs):
        if isinstance(inputs, MaskedSequenceBatch):
            if len(self.branches) != 1:
                raise ShapeError('{} models require one batch per feature kind.'.format(self.config.kind.value))
            return {self.branches[0].config.kind: inputs}
        missing = [branch.config.kind.value for branch in self.branches if branch.config.kind not in inputs]
        if missing:
            raise ShapeError('Inputs lack {} features.'.format(', '.join(missing)))
        return inputs

    def forward(self, inputs):
        """ Get the class scores of a batch

        Args:
            inputs (:obj:`dict` or :obj:`MaskedSequenceBatch`): inputs

        Returns:
            :obj:`numpy.ndarray`: ``B x n_C`` scores
        """
        raise NotImplementedError

    def backward(self, grad):
        """ Back-propagate the gradient of the loss with respect to the scores of the last forward pass """
        raise NotImplementedError

    def loss(self, scores, labels):
        return (renormalized_cross_entropy if self.config.kind.is_fusion else cross_entropy)(scores, labels)

    def loss_and_grad(self, inputs, labels):
        """ Get the loss of a batch and the gradients of the parameters

        Returns:
            :obj:`tuple`:

                * :obj:`float`: loss
                * :obj:`collections.OrderedDict`: gradients keyed like :obj:`params`
        """
        scores = self.forward(inputs)
        loss, grad = self.loss(scores, labels)
        self.backward(grad)
        return loss, self.grads

    def predict(self, inputs):
        """ Get the argmax decision of each clip of a batch """
        return numpy.argmax(self.forward(inputs), axis=1)

    @property
    def attention_weights(self):
        """ Get the pooling weights of the last forward pass of each branch

        Returns:
            :obj:`collections.OrderedDict`: dictionary that maps feature kinds to ``B x L`` weights
        """
        return collections.OrderedDict((branch.config.kind, branch.pooling.weights) for branch in self.branches)

    def load_params(self, params, source=''):
        """ Copy parameter values into the model

        Args:
            params (:obj:`dict`): dictionary that maps names to arrays
            source (:obj:`str`, optional): description of the origin of the values, for error messages

        Raises:
            :obj:`CheckpointError`: if a name is unknown or a shape differs
        """
        own = self.params
        for name, value in params.items():
            if name not in own:
                raise CheckpointError('Parameter `{}`{} does not exist in {} models.'.format(
                    name, source, self.config.kind.value))
            if own[name].shape != value.shape:
                raise CheckpointError('Layer `{}` expects parameter `{}` of shape {}, not {}{}.'.format(
                    name.rpartition('.')[0], name, own[name].shape, value.shape, source))
            own[name][...] = value


class SingleFeatureModel(Model):
    """ masking, dense (ReLU), LSTM, pooling, dense (ReLU, dropout), dense (softmax) """

    def __init__(self, config, seed=0):
        super(SingleFeatureModel, self).__init__(config, seed=seed)
        if config.kind.is_fusion:
            raise ConfigurationError('{} is not a single-feature architecture.'.format(config.kind.value))
        self.branches = [self._branch(config.branches[0])]
        self.train(False)

    def forward(self, inputs):
        branch = self.branches[0]
        return branch.classify(branch.encode(self._inputs(inputs)[branch.config.kind]))

    def backward(self, grad):
        branch = self.branches[0]
        branch.encode_backward(branch.classify_backward(grad))


class LateFusionModel(Model):
    """ Two complete single-feature systems whose class distributions are concatenated (log-mel first) and combined
    by a dense sigmoid layer """

    def __init__(self, config, seed=0):
        super(LateFusionModel, self).__init__(config, seed=seed)
        self.branches = [self._branch(branch_config) for branch_config in config.branches]
        self.fusion_output = Dense(len(self.branches) * config.n_classes, config.n_classes, 'sigmoid',
                                   rng=self._init_rng, dtype=self.dtype, name='fusion.output')
        self.head_layers = [self.fusion_output]
        self.train(False)

    def forward(self, inputs):
        inputs = self._inputs(inputs)
        probs = [branch.classify(branch.encode(inputs[branch.config.kind])) for branch in self.branches]
        return self.fusion_output.forward(numpy.concatenate(probs, axis=1))

    def backward(self, grad):
        dprobs = self.fusion_output.backward(grad)
        n_classes = self.config.n_classes
        for i_branch, branch in enumerate(self.branches):
            branch.encode_backward(branch.classify_backward(dprobs[:, i_branch * n_classes:(i_branch + 1) * n_classes]))


class WPFusionModel(Model):
    """ Two encoders whose pooled representations are concatenated (log-mel first) and classified by a dense
    layer of ``2 n_D2`` units with dropout followed by a dense sigmoid layer """

    def __init__(self, config, seed=0):
        super(WPFusionModel, self).__init__(config, seed=seed)
        self.branches = [self._branch(branch_config, with_head=False) for branch_config in config.branches]
        n_pooled = sum(branch_config.n_lstm for branch_config in config.branches)
        n_hidden = sum(branch_config.n_dense2 for branch_config in config.branches)
        self.fusion_dense = Dense(n_pooled, n_hidden, 'relu', rng=self._init_rng, dtype=self.dtype,
                                  name='fusion.dense')
        self.fusion_dropout = Dropout(config.dropout, rng=self._dropout_rng, name='fusion.dropout')
        self.fusion_output = Dense(n_hidden, config.n_classes, 'sigmoid', rng=self._init_rng, dtype=self.dtype,
                                   name='fusion.output')
        self.head_layers = [self.fusion_dense, self.fusion_dropout, self.fusion_output]
        self.train(False)

    def forward(self, inputs):
        inputs = self._inputs(inputs)
        pooled = numpy.concatenate([branch.encode(inputs[branch.config.kind]) for branch in self.branches], axis=1)
        return self.fusion_output.forward(self.fusion_dropout.forward(self.fusion_dense.forward(pooled)))

    def backward(self, grad):
        dpooled = self.fusion_dense.backward(self.fusion_dropout.backward(self.fusion_output.backward(grad)))
        offset = 0
        for branch in self.branches:
            branch.encode_backward(dpooled[:, offset:offset + branch.config.n_lstm])
            offset += branch.config.n_lstm


MODEL_CLASSES = {
    ArchitectureKind.single_logmel: SingleFeatureModel,
    ArchitectureKind.single_modspec: SingleFeatureModel,
    ArchitectureKind.late_fusion: LateFusionModel,
    ArchitectureKind.wp_fusion: WPFusionModel,
}


def build_single(config, seed=0):
    """ Build a single-feature classifier

    Args:
        config (:obj:`ModelConfig`): configuration of kind ``single-logmel`` or ``single-modspec``
        seed (:obj:`int`, optional): seed of the initialization and of dropout

    Returns:
        :obj:`SingleFeatureModel`: model
    """
    return SingleFeatureModel(config, seed=seed)


def _fusion_config(kind, logmel_config, modspec_config, fusion_training):
    for config, expected in [(logmel_config, ArchitectureKind.single_logmel),
                             (modspec_config, ArchitectureKind.single_modspec)]:
        if config.kind != expected:
            raise ConfigurationError('Fusion requires a {} configuration, not {}.'.format(
                expected.value, config.kind.value))
    errors = []
    for attr in ['n_classes', 'pooling', 'dropout', 'dtype']:
        if getattr(logmel_config, attr) != getattr(modspec_config, attr):
            errors.append('`{}` differs between branches: {} != {}'.format(
                attr, getattr(logmel_config, attr), getattr(modspec_config, attr)))
    if errors:
        raise ConfigurationError('Branches cannot be fused:\n  - ' + '\n  - '.join(errors))
    return ModelConfig(kind, pooling=logmel_config.pooling,
                       branches=[logmel_config.branches[0], modspec_config.branches[0]],
                       n_classes=logmel_config.n_classes, dropout=logmel_config.dropout, dtype=logmel_config.dtype,
                       fusion_training=fusion_training)


def _uses_pretrained(config, pretrained):
    """ Check that pretrained single-feature models are given exactly when the configuration needs them

    Returns:
        :obj:`bool`: whether the branches are initialized from ``pretrained`` and frozen

    Raises:
        :obj:`ConfigurationError`: if frozen-pretrained fusion lacks a pretrained model per branch, or if pretrained
            models are given to another architecture
    """
    pretrained = list(pretrained or [])
    if not (config.kind.is_fusion and config.fusion_training == FusionTraining.frozen_pretrained):
        if pretrained:
            raise ConfigurationError('Pretrained models are only used by {} fusion, not by {} ({}).'.format(
                FusionTraining.frozen_pretrained.value, config.kind.value, config.fusion_training.value))
        return False

    expected = [branch.kind for branch in config.branches]
    given = [single.branches[0].config.kind if len(single.branches) == 1 else None for single in pretrained]
    if given != expected:
        raise ConfigurationError(
            '{} {} requires pretrained single-feature models for the branches [{}], not [{}].'.format(
                FusionTraining.frozen_pretrained.value, config.kind.value,
                ', '.join(kind.value for kind in expected),
                ', '.join(kind.value if kind else 'fusion' for kind in given)))
    return True


def _init_from_pretrained(model, pretrained, with_head):
    """ Copy the parameters of single-feature models into the branches of a fusion model and freeze them """
    for single in pretrained:
        kind = single.branches[0].config.kind
        params = collections.OrderedDict(
            (name, value) for name, value in single.params.items()
            if with_head or name.split('.')[1] in ['dense1', 'lstm', 'pooling'])
        model.load_params(params, source=' of the pretrained {} model'.format(kind.value))
        for name in params:
            model.frozen.add(name)


def build_late_fusion(logmel_config, modspec_config, seed=0, fusion_training=FusionTraining.joint, pretrained=None):
    """ Build a late-fusion classifier from the configurations of two single-feature classifiers

    Args:
        logmel_config (:obj:`ModelConfig`): configuration of the log-mel system
        modspec_config (:obj:`ModelConfig`): configuration of the modulation system
        seed (:obj:`int`, optional): seed
        fusion_training (:obj:`FusionTraining`, optional): training of the branches
        pretrained (:obj:`list` of :obj:`SingleFeatureModel`, optional): trained single-feature models whose
            parameters initialize the branches when ``fusion_training`` is ``frozen-pretrained``

    Returns:
        :obj:`LateFusionModel`: model

    Raises:
        :obj:`ConfigurationError`: if the configurations cannot be fused, or if frozen-pretrained fusion lacks its
            pretrained models
    """
    config = _fusion_config(ArchitectureKind.late_fusion, logmel_config, modspec_config, fusion_training)
    return build_model(config, seed=seed, pretrained=pretrained)


def build_wp_fusion(logmel_config, modspec_config, seed=0, fusion_training=FusionTraining.joint, pretrained=None):
    """ Build a WP-fusion classifier from the configurations of two single-feature classifiers

    Args:
        logmel_config (:obj:`ModelConfig`): configuration of the log-mel system
        modspec_config (:obj:`ModelConfig`): configuration of the modulation system
        seed (:obj:`int`, optional): seed
        fusion_training (:obj:`FusionTraining`, optional): training of the branches
        pretrained (:obj:`list` of :obj:`SingleFeatureModel`, optional): trained single-feature models whose
            encoders initialize the branches when ``fusion_training`` is ``frozen-pretrained``

    Returns:
        :obj:`WPFusionModel`: model

    Raises:
        :obj:`ConfigurationError`: if the configurations cannot be fused, or if frozen-pretrained fusion lacks its
            pretrained models
    """
    config = _fusion_config(ArchitectureKind.wp_fusion, logmel_config, modspec_config, fusion_training)
    return build_model(config, seed=seed, pretrained=pretrained)


def build_model(config, seed=0, pretrained=None):
    """ Build the classifier described by a configuration

    Args:
        config (:obj:`ModelConfig`): configuration
        seed (:obj:`int`, optional): seed
        pretrained (:obj:`list` of :obj:`SingleFeatureModel`, optional): pretrained single-feature models for
            frozen-pretrained fusion

    Returns:
        :obj:`Model`: model

    Raises:
        :obj:`ConfigurationError`: if the configuration is invalid, or if pretrained models are missing for
            frozen-pretrained fusion or given to another architecture
    """
    config.validate()
    frozen = _uses_pretrained(config, pretrained)
    model = MODEL_CLASSES[config.kind](config, seed=seed)
    if frozen:
        _init_from_pretrained(model, pretrained, with_head=config.kind == ArchitectureKind.late_fusion)
    return model


def config_document(model_config, train_config=None):
    return collections.OrderedDict([
        ('format', CONFIG_FORMAT),
        ('version', CONFIG_VERSION),
        ('model', model_config.to_dict()),
        ('train', train_config.to_dict() if train_config is not None else None),
    ])


def _parse_config_document(document, source):
    if not isinstance(document, dict) or document.get('format') != CONFIG_FORMAT:
        raise ConfigurationError('{} is not an {} document.'.format(source, CONFIG_FORMAT))
    if document.get('version') != CONFIG_VERSION:
        raise ConfigurationError('{} has version {}; version {} is supported.'.format(
            source, document.get('version'), CONFIG_VERSION))
    if 'model' not in document:
        raise ConfigurationError('{} lacks a `model` block.'.format(source))
    model_config = ModelConfig.from_dict(document['model'])
    train_config = TrainConfig.from_dict(document['train']) if document.get('train') else None
    return model_config, train_config


def write_config_file(path, model_config, train_config=None):
    with open(path, 'w') as file:
        json.dump(config_document(model_config, train_config), file, indent=2)
        file.write('\n')


def read_config_file(path):
    """ Read an architecture and training configuration

    Args:
        path (:obj:`str`): path to a JSON configuration

    Returns:
        :obj:`tuple`:

            * :obj:`ModelConfig`: architecture
            * :obj:`TrainConfig`: training configuration, or :obj:`None` if the document has none

    Raises:
        :obj:`FileNotFoundError`: if the file does not exist
        :obj:`ConfigurationError`: if the document is not valid
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('Configuration `{}` not found.'.format(path))
    with open(path, 'r') as file:
        try:
            document = json.load(file)
        except ValueError as exception:
            raise ConfigurationError('Configuration `{}` is not valid JSON: {}'.format(path, exception))
    return _parse_config_document(document, 'Configuration `{}`'.format(path))


def save(model, path, optimizer=None, train_config=None):
    """ Save a model, and optionally the state of its optimizer, to a checkpoint

    The checkpoint is the magic ``IKCK``, a little-endian ``uint16`` version and ``uint32`` header length, a JSON
    header (configuration document, parameter names and shapes, frozen parameters, optimizer step), then the
    parameters as little-endian ``float32`` row-major blobs in header order, followed by the first and second
    moments of the optimizer if present.

    Args:
        model (:obj:`Model`): model
        path (:obj:`str`): path
        optimizer (:obj:`Adam`, optional): optimizer
        train_config (:obj:`TrainConfig`, optional): training configuration
    """
    params = model.params
    header = config_document(model.config, train_config)
    header['intellikit_version'] = __version__
    header['params'] = [collections.OrderedDict([('name', name), ('shape', list(value.shape))])
                        for name, value in params.items()]
    header['frozen'] = sorted(model.frozen)
    header['optimizer'] = None
    if optimizer is not None:
        header['optimizer'] = collections.OrderedDict([
            ('lr', optimizer.lr), ('beta1', optimizer.beta1), ('beta2', optimizer.beta2), ('eps', optimizer.eps),
            ('clip_norm', optimizer.clip_norm), ('t', optimizer.state.t),
        ])
    header_bytes = json.dumps(header, separators=(',', ':')).encode('utf-8')

    with open(path, 'wb') as file:
        file.write(CHECKPOINT_PREAMBLE.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header_bytes)))
        file.write(header_bytes)
        blobs = [params]
        if optimizer is not None:
            blobs.append(collections.OrderedDict((name, optimizer.state.m.get(name, numpy.zeros_like(value)))
                                                 for name, value in params.items()))
            blobs.append(collections.OrderedDict((name, optimizer.state.v.get(name, numpy.zeros_like(value)))
                                                 for name, value in params.items()))
        for arrays in blobs:
            for value in arrays.values():
                file.write(numpy.ascontiguousarray(value, dtype='<f4').tobytes())


def _read_blobs(data, offset, specs, path):
    arrays = collections.OrderedDict()
    for spec in specs:
        size = int(numpy.prod(spec['shape'], dtype=numpy.int64))
        end = offset + 4 * size
        if end > len(data):
            raise CheckpointError('Checkpoint `{}` is truncated in the values of `{}`.'.format(path, spec['name']))
        arrays[spec['name']] = numpy.frombuffer(data, dtype='<f4', count=size, offset=offset) \
            .reshape(spec['shape']).copy()
        offset = end
    return arrays, offset


def load(path, config=None, seed=0):
    """ Load a model, and the state of its optimizer if saved, from a checkpoint

    Args:
        path (:obj:`str`): path
        config (:obj:`ModelConfig`, optional): architecture to load the parameters into; default: the
            architecture of the checkpoint
        seed (:obj:`int`, optional): seed of the dropout stream of the loaded model

    Returns:
        :obj:`tuple`:

            * :obj:`Model`: model
            * :obj:`Adam`: optimizer, or :obj:`None` if the checkpoint has no optimizer state
            * :obj:`TrainConfig`: training configuration, or :obj:`None`

    Raises:
        :obj:`FileNotFoundError`: if the checkpoint does not exist
        :obj:`CheckpointError`: if the checkpoint is corrupt or does not match the architecture
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('Checkpoint `{}` not found.'.format(path))
    with open(path, 'rb') as file:
        data = file.read()

    if len(data) < CHECKPOINT_PREAMBLE.size:
        raise CheckpointError('Checkpoint `{}` is truncated.'.format(path))
    magic, version, header_len = CHECKPOINT_PREAMBLE.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError('`{}` is not an intellikit checkpoint.'.format(path))
    if version != CHECKPOINT_VERSION:
        raise CheckpointError('Checkpoint `{}` has version {}; version {} is supported.'.format(
            path, version, CHECKPOINT_VERSION))
    offset = CHECKPOINT_PREAMBLE.size + header_len
    if offset > len(data):
        raise CheckpointError('Checkpoint `{}` is truncated in its header.'.format(path))
    try:
        header = json.loads(data[CHECKPOINT_PREAMBLE.size:offset].decode('utf-8'))
        saved_config, train_config = _parse_config_document(header, 'Checkpoint `{}`'.format(path))
    except (ValueError, ConfigurationError) as exception:
        raise CheckpointError('Header of checkpoint `{}` is invalid: {}'.format(path, exception))

    params, offset = _read_blobs(data, offset, header['params'], path)
    config = config or saved_config
    # frozen-pretrained branches and frozen names are restored from the checkpoint
    model = MODEL_CLASSES[config.kind](config, seed=seed)
    model.load_params(params, source=' in checkpoint `{}`'.format(path))
    missing = [name for name in model.params if name not in params]
    if missing:
        raise CheckpointError('Checkpoint `{}` lacks parameters {}.'.format(path, ', '.join(missing)))
    model.frozen = set(header.get('frozen', []))

    optimizer = None
    if header.get('optimizer'):
        settings = header['optimizer']
        m, offset = _read_blobs(data, offset, header['params'], path)
        v, offset = _read_blobs(data, offset, header['params'], path)
        optimizer = Adam(lr=settings['lr'], beta1=settings['beta1'], beta2=settings['beta2'], eps=settings['eps'],
                         clip_norm=settings['clip_norm'])
        dtype = model.dtype
        optimizer.state = AdamState(
            m=collections.OrderedDict((name, value.astype(dtype)) for name, value in m.items()),
            v=collections.OrderedDict((name, value.astype(dtype)) for name, value in v.items()),
            t=settings['t'])
    if offset != len(data):
        raise CheckpointError('Checkpoint `{}` has {} unexpected trailing bytes.'.format(path, len(data) - offset))
    return model, optimizer, train_config


def complexity_table(configs=None):
    """ Tabulate the trainable LSTM parameters ``W``, the sequence length ``L`` and the product ``W x L`` of
    systems, relative to the first system; a combined row sums the systems

    Args:
        configs (:obj:`list` of :obj:`BranchConfig`, optional): branches; default: the published log-mel and
            modulation branches

    Returns:
        :obj:`list` of :obj:`collections.OrderedDict`: one row per system plus the combined row
    """
    configs = configs or [BranchConfig.default(FeatureKind.logmel), BranchConfig.default(FeatureKind.modulation)]
    rows = []
    for config in configs:
        n_params = lstm_param_count(config.n_dense1, config.n_lstm)
        rows.append(collections.OrderedDict([
            ('system', config.kind.value),
            ('W', n_params),
            ('L', config.length),
            ('WxL', n_params * config.length),
        ]))
    rows.append(collections.OrderedDict([
        ('system', 'combined'),
        ('W', sum(row['W'] for row in rows)),
        ('L', None),
        ('WxL', sum(row['WxL'] for row in rows)),
    ]))
    reference = rows[0]['WxL']
    for row in rows:
        row['relative'] = row['WxL'] / reference
    return rows


def gradient_check(config, seed=0, n_batch=2):
    """ Check the analytic gradients of an architecture on a random batch with variable lengths

    Args:
        config (:obj:`ModelConfig`): architecture, preferably with toy dimensions and ``float64`` parameters
        seed (:obj:`int`, optional): seed
        n_batch (:obj:`int`, optional): batch size

    Returns:
        :obj:`tuple`:

            * :obj:`float`: maximum relative error
            * :obj:`collections.OrderedDict`: dictionary that maps parameter names to their maximum relative error
    """
    model = MODEL_CLASSES[config.kind](config, seed=seed)
    rng = numpy.random.default_rng([seed, 2])
    inputs = {}
    for branch in config.branches:
        mask = numpy.zeros((n_batch, branch.length), dtype=bool)
        for i_item in range(n_batch):
            mask[i_item, :max(1, branch.length - 2 * i_item)] = True
        values = rng.standard_normal((n_batch, branch.length, branch.n_features)) * mask[:, :, None]
        inputs[branch.kind] = MaskedSequenceBatch(values.astype(config.dtype), mask)
    labels = numpy.arange(n_batch) % config.n_classes
    dropout_seed = derive_seed(seed, 3)

    def loss_fn():
        model.reseed_dropout(dropout_seed)
        return model.loss(model.forward(inputs), labels)[0]

    model.train(True)
    model.reseed_dropout(dropout_seed)
    _, grads = model.loss_and_grad(inputs, labels)
    grads = {name: grad.copy() for name, grad in grads.items()}
    return check_gradients(loss_fn, model.params, grads)
