""" Data model for audio clips, corpora, features, architectures, training runs and reports

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .exceptions import ConfigurationError, PreconditionError, UnsupportedSampleRateError, WavFormatError
import collections
import datetime
import enum
import numpy

__all__ = [
    'SAMPLE_RATE',
    'IntelligibilityClass',
    'FeatureKind',
    'PoolingScheme',
    'AttentionMode',
    'ArchitectureKind',
    'FusionTraining',
    'RunStatus',
    'AudioClip',
    'ManifestEntry',
    'CorpusManifest',
    'Rotation',
    'FoldPlan',
    'LogMelConfig',
    'ModSpecConfig',
    'FeatureSequence',
    'PoolingSpec',
    'BranchConfig',
    'ModelConfig',
    'TrainConfig',
    'TrainingHistory',
    'EvalReport',
    'ClassProfile',
    'SynthSpec',
    'RunLog',
]

SAMPLE_RATE = 16000
# :obj:`int`: sample rate (Hz) of every clip


class IntelligibilityClass(int, enum.Enum):
    """ Intelligibility level """
    low = 0
    medium = 1
    high = 2

    @classmethod
    def from_score(cls, score):
        """ Get the intelligibility level of a percent-words-understood score

        Args:
            score (:obj:`int`): score in [0, 100]

        Returns:
            :obj:`IntelligibilityClass`: level

        Raises:
            :obj:`ValueError`: if the score is outside [0, 100]
        """
        if score < 0 or score > 100:
            raise ValueError('Score `{}` must be between 0 and 100.'.format(score))
        if score <= 33:
            return cls.low
        if score <= 66:
            return cls.medium
        return cls.high


class FeatureKind(str, enum.Enum):
    """ Kind of per-frame feature """
    logmel = 'logmel'
    modulation = 'modulation'


class PoolingScheme(str, enum.Enum):
    """ Scheme for collapsing an LSTM output sequence into one vector """
    last = 'last'
    mean = 'mean'
    attention = 'attention'


class AttentionMode(str, enum.Enum):
    """ Normalization of attention scores """
    single_softmax = 'single-softmax'
    literal_double_softmax = 'literal-double-softmax'


class ArchitectureKind(str, enum.Enum):
    """ Kind of classifier """
    single_logmel = 'single-logmel'
    single_modspec = 'single-modspec'
    late_fusion = 'late-fusion'
    wp_fusion = 'wp-fusion'

    @property
    def feature_kinds(self):
        """ Get the feature kinds consumed by architectures of this kind, in concatenation order

        Returns:
            :obj:`list` of :obj:`FeatureKind`: feature kinds
        """
        if self == ArchitectureKind.single_logmel:
            return [FeatureKind.logmel]
        if self == ArchitectureKind.single_modspec:
            return [FeatureKind.modulation]
        return [FeatureKind.logmel, FeatureKind.modulation]

    @property
    def is_fusion(self):
        return self in (ArchitectureKind.late_fusion, ArchitectureKind.wp_fusion)


class FusionTraining(str, enum.Enum):
    """ How the branches of a fusion model are trained """
    joint = 'joint'
    frozen_pretrained = 'frozen-pretrained'


class RunStatus(str, enum.Enum):
    """ Status of a run """
    QUEUED = 'QUEUED'
    RUNNING = 'RUNNING'
    SUCCEEDED = 'SUCCEEDED'
    FAILED = 'FAILED'


class AudioClip(object):
    """ Mono audio clip sampled at 16 kHz

    Attributes:
        samples (:obj:`numpy.ndarray`): amplitudes, nominally in [-1, 1]
        sample_rate (:obj:`int`): sample rate (Hz)
        clip_id (:obj:`str`): id of the clip
        speaker_id (:obj:`str`): id of the speaker
    """

    def __init__(self, samples, sample_rate=SAMPLE_RATE, clip_id='', speaker_id=''):
        """
        Args:
            samples (:obj:`numpy.ndarray`): amplitudes, nominally in [-1, 1]
            sample_rate (:obj:`int`, optional): sample rate (Hz)
            clip_id (:obj:`str`, optional): id of the clip
            speaker_id (:obj:`str`, optional): id of the speaker

        Raises:
            :obj:`UnsupportedSampleRateError`: if the sample rate is not 16 kHz
            :obj:`WavFormatError`: if the clip is empty or has non-finite samples
        """
        samples = numpy.asarray(samples, dtype=numpy.float64)
        if sample_rate != SAMPLE_RATE:
            raise UnsupportedSampleRateError('Clip `{}` is sampled at {} Hz. Only {} Hz is supported.'.format(
                clip_id, sample_rate, SAMPLE_RATE))
        if samples.ndim != 1 or samples.size == 0:
            raise WavFormatError('Clip `{}` must be a non-empty mono sequence of samples.'.format(clip_id))
        if not numpy.all(numpy.isfinite(samples)):
            raise WavFormatError('Clip `{}` contains non-finite samples.'.format(clip_id))

        self.samples = samples
        self.sample_rate = sample_rate
        self.clip_id = clip_id
        self.speaker_id = speaker_id

    @property
    def duration(self):
        """ Get the duration of the clip

        Returns:
            :obj:`float`: duration (s)
        """
        return self.samples.size / self.sample_rate


class ManifestEntry(object):
    """ Entry of a corpus manifest

    Attributes:
        path (:obj:`str`): path to the WAV file
        clip_id (:obj:`str`): id of the clip
        speaker_id (:obj:`str`): id of the speaker
        score (:obj:`int`): intelligibility score in [0, 100]
        channel (:obj:`int`): index of the channel to read
    """

    def __init__(self, path, clip_id, speaker_id, score, channel=0):
        self.path = path
        self.clip_id = clip_id
        self.speaker_id = speaker_id
        self.score = score
        self.channel = channel

    @property
    def label(self):
        """ Get the intelligibility level of the entry

        Returns:
            :obj:`IntelligibilityClass`: level
        """
        return IntelligibilityClass.from_score(self.score)


class CorpusManifest(object):
    """ List of clips of a corpus with their speakers and intelligibility scores

    Attributes:
        entries (:obj:`list` of :obj:`ManifestEntry`): entries
    """

    def __init__(self, entries=None):
        self.entries = entries or []

    @property
    def speakers(self):
        """ Get the sorted ids of the speakers

        Returns:
            :obj:`list` of :obj:`str`: speaker ids
        """
        return sorted(set(entry.speaker_id for entry in self.entries))

    def get(self, clip_id):
        for entry in self.entries:
            if entry.clip_id == clip_id:
                return entry
        raise KeyError('Clip `{}` is not in the manifest.'.format(clip_id))

    def entries_of_speakers(self, speaker_ids):
        """ Get the entries of a set of speakers

        Args:
            speaker_ids (:obj:`set` of :obj:`str`): speaker ids

        Returns:
            :obj:`list` of :obj:`ManifestEntry`: entries, in manifest order
        """
        return [entry for entry in self.entries if entry.speaker_id in speaker_ids]


class Rotation(object):
    """ Roles of the speakers in one cross-validation experiment

    Attributes:
        index (:obj:`int`): index of the rotation
        test (:obj:`set` of :obj:`str`): test speakers
        validation (:obj:`set` of :obj:`str`): validation speakers (empty when there is no validation fold)
        train (:obj:`set` of :obj:`str`): training speakers
    """

    def __init__(self, index, test, validation, train):
        self.index = index
        self.test = test
        self.validation = validation
        self.train = train


class FoldPlan(object):
    """ Subject-wise assignment of speakers to cross-validation folds

    In rotation ``r`` fold ``r`` is the test fold, fold ``(r + 1) mod k`` is the validation fold and the
    remaining folds are used for training. With ``k = 2`` there is no validation fold.

    Attributes:
        k (:obj:`int`): number of folds
        assignments (:obj:`dict` of :obj:`str` to :obj:`int`): dictionary that maps each speaker to its fold
        seed (:obj:`int`): seed used to shuffle the speakers
    """

    def __init__(self, k, assignments, seed=None):
        self.k = k
        self.assignments = assignments
        self.seed = seed

    @property
    def folds(self):
        """ Get the speakers of each fold

        Returns:
            :obj:`list` of :obj:`list` of :obj:`str`: sorted speakers of each fold
        """
        folds = [[] for i_fold in range(self.k)]
        for speaker_id, i_fold in self.assignments.items():
            folds[i_fold].append(speaker_id)
        return [sorted(fold) for fold in folds]

    def validation_fold(self, index):
        """ Get the validation fold of a rotation

        Args:
            index (:obj:`int`): index of the rotation

        Returns:
            :obj:`int`: index of the validation fold, or :obj:`None` if the plan has fewer than 3 folds
        """
        if self.k < 3:
            return None
        return (index + 1) % self.k

    def rotation(self, index):
        """ Get the roles of the speakers in a rotation

        Args:
            index (:obj:`int`): index of the rotation

        Returns:
            :obj:`Rotation`: rotation
        """
        if index < 0 or index >= self.k:
            raise ConfigurationError('Rotation must be between 0 and {}, not {}.'.format(self.k - 1, index))
        folds = self.folds
        i_validation = self.validation_fold(index)
        test = set(folds[index])
        validation = set(folds[i_validation]) if i_validation is not None else set()
        train = set()
        for i_fold, fold in enumerate(folds):
            if i_fold != index and i_fold != i_validation:
                train.update(fold)
        return Rotation(index, test, validation, train)

    def rotations(self):
        return [self.rotation(index) for index in range(self.k)]

    def to_dict(self):
        return collections.OrderedDict([
            ('k', self.k),
            ('seed', self.seed),
            ('assignments', collections.OrderedDict(sorted(self.assignments.items()))),
            ('rotations', [
                collections.OrderedDict([
                    ('test', index),
                    ('validation', self.validation_fold(index)),
                    ('train', [i_fold for i_fold in range(self.k)
                               if i_fold != index and i_fold != self.validation_fold(index)]),
                ])
                for index in range(self.k)
            ]),
        ])

    @classmethod
    def from_dict(cls, value):
        return cls(value['k'], dict(value['assignments']), value.get('seed', None))


class LogMelConfig(object):
    """ Configuration of the log-mel spectrogram

    Attributes:
        window_len_ms (:obj:`float`): duration of the Hamming analysis window (ms)
        hop_ms (:obj:`float`): hop between frames (ms)
        n_mels (:obj:`int`): number of triangular mel filters
        fft_size (:obj:`int`): DFT size (samples)
        fmin (:obj:`float`): lower edge of the filterbank (Hz)
        fmax (:obj:`float`): upper edge of the filterbank (Hz)
        log_floor (:obj:`float`): floor applied before the logarithm
        pad_length (:obj:`int`): fixed sequence length ``L``
        sample_rate (:obj:`int`): sample rate (Hz)
    """

    def __init__(self, window_len_ms=20., hop_ms=10., n_mels=32, fft_size=512, fmin=0., fmax=8000.,
                 log_floor=1e-10, pad_length=700, sample_rate=SAMPLE_RATE):
        self.window_len_ms = window_len_ms
        self.hop_ms = hop_ms
        self.n_mels = n_mels
        self.fft_size = fft_size
        self.fmin = fmin
        self.fmax = fmax
        self.log_floor = log_floor
        self.pad_length = pad_length
        self.sample_rate = sample_rate
        self.validate()

    @property
    def window_samples(self):
        return int(round(self.window_len_ms * self.sample_rate / 1000.))

    @property
    def hop_samples(self):
        return int(round(self.hop_ms * self.sample_rate / 1000.))

    def validate(self):
        """ Check that the configuration is consistent

        Raises:
            :obj:`ConfigurationError`: if the configuration is not valid
        """
        errors = []
        if not (self.window_len_ms > self.hop_ms > 0):
            errors.append('The window ({} ms) must be longer than the hop ({} ms), which must be positive.'.format(
                self.window_len_ms, self.hop_ms))
        if self.n_mels < 1:
            errors.append('At least one mel filter is required.')
        if self.fft_size < self.window_samples:
            errors.append('The DFT size ({}) must be at least the window size ({}).'.format(
                self.fft_size, self.window_samples))
        if not (0 <= self.fmin < self.fmax <= self.sample_rate / 2):
            errors.append('The filterbank edges ({} Hz, {} Hz) must lie within [0, {}] Hz.'.format(
                self.fmin, self.fmax, self.sample_rate / 2))
        if errors:
            raise ConfigurationError('Log-mel configuration is invalid:\n  - ' + '\n  - '.join(errors))


class ModSpecConfig(object):
    """ Configuration of the modulation spectrogram

    Attributes:
        window_len_ms (:obj:`float`): duration of the Hamming window applied to the temporal envelopes (ms)
        hop_ms (:obj:`float`): hop between frames (ms)
        n_gammatone (:obj:`int`): number of gammatone (acoustic) bands
        gt_cf_lo (:obj:`float`): center frequency of the lowest acoustic band (Hz)
        gt_cf_hi (:obj:`float`): center frequency of the highest acoustic band (Hz)
        n_modfilters (:obj:`int`): number of modulation filters
        mod_cf_lo (:obj:`float`): center frequency of the lowest modulation filter (Hz)
        mod_cf_hi (:obj:`float`): center frequency of the highest modulation filter (Hz)
        mod_q (:obj:`float`): quality factor of the modulation filters
        pad_length (:obj:`int`): fixed sequence length ``L``
        sample_rate (:obj:`int`): sample rate (Hz)
    """

    def __init__(self, window_len_ms=256., hop_ms=64., n_gammatone=23, gt_cf_lo=125., gt_cf_hi=8000.,
                 n_modfilters=8, mod_cf_lo=2., mod_cf_hi=64., mod_q=2., pad_length=110, sample_rate=SAMPLE_RATE):
        self.window_len_ms = window_len_ms
        self.hop_ms = hop_ms
        self.n_gammatone = n_gammatone
        self.gt_cf_lo = gt_cf_lo
        self.gt_cf_hi = gt_cf_hi
        self.n_modfilters = n_modfilters
        self.mod_cf_lo = mod_cf_lo
        self.mod_cf_hi = mod_cf_hi
        self.mod_q = mod_q
        self.pad_length = pad_length
        self.sample_rate = sample_rate
        self.validate()

    @property
    def window_samples(self):
        return int(round(self.window_len_ms * self.sample_rate / 1000.))

    @property
    def hop_samples(self):
        return int(round(self.hop_ms * self.sample_rate / 1000.))

    @property
    def n_features(self):
        return self.n_gammatone * self.n_modfilters

    @property
    def modulation_center_frequencies(self):
        """ Get the center frequencies of the modulation filters, geometrically spaced

        Returns:
            :obj:`numpy.ndarray`: center frequencies (Hz)
        """
        return numpy.geomspace(self.mod_cf_lo, self.mod_cf_hi, self.n_modfilters)

    def validate(self):
        """ Check that the configuration is consistent

        Raises:
            :obj:`ConfigurationError`: if the configuration is not valid
        """
        errors = []
        if not (self.window_len_ms > self.hop_ms > 0):
            errors.append('The window ({} ms) must be longer than the hop ({} ms), which must be positive.'.format(
                self.window_len_ms, self.hop_ms))
        if self.n_gammatone < 1:
            errors.append('At least one gammatone band is required.')
        if self.n_modfilters < 1:
            errors.append('At least one modulation filter is required.')
        if self.n_gammatone > 1 and not (0 < self.gt_cf_lo < self.gt_cf_hi <= self.sample_rate / 2):
            errors.append('Acoustic center frequencies must increase strictly within (0, {}] Hz.'.format(
                self.sample_rate / 2))
        if self.n_modfilters > 1 and not (0 < self.mod_cf_lo < self.mod_cf_hi):
            errors.append('Modulation center frequencies must be positive and increase strictly.')
        if self.mod_q <= 0:
            errors.append('The quality factor of the modulation filters must be positive.')
        if errors:
            raise ConfigurationError('Modulation spectrogram configuration is invalid:\n  - ' + '\n  - '.join(errors))


class FeatureSequence(object):
    """ Per-frame features of an utterance, with a validity mask

    Attributes:
        kind (:obj:`FeatureKind`): kind of features
        values (:obj:`numpy.ndarray`): ``L x n_F`` matrix of features
        mask (:obj:`numpy.ndarray`): length-``L`` boolean vector; a prefix of true entries marks the valid frames
        n_frames (:obj:`int`): native number of frames ``T`` of the utterance (before padding or cutting)
        clip_id (:obj:`str`): id of the clip
    """

    def __init__(self, kind, values, mask=None, n_frames=None, clip_id=''):
        values = numpy.asarray(values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise PreconditionError('Features of `{}` must be a matrix with at least one frame.'.format(clip_id))
        if mask is None:
            mask = numpy.ones(values.shape[0], dtype=bool)
        mask = numpy.asarray(mask, dtype=bool)
        if mask.shape != (values.shape[0],):
            raise PreconditionError('The mask of `{}` must have one entry per frame.'.format(clip_id))

        self.kind = FeatureKind(kind)
        self.values = values
        self.mask = mask
        self.n_frames = values.shape[0] if n_frames is None else n_frames
        self.clip_id = clip_id

    @property
    def length(self):
        """ Get the (padded) length ``L`` of the sequence """
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]

    @property
    def n_valid(self):
        """ Get the number of valid (unmasked) frames """
        return int(self.mask.sum())

    @property
    def valid_values(self):
        """ Get the rows of the valid frames

        Returns:
            :obj:`numpy.ndarray`: ``n_valid x n_F`` matrix
        """
        return self.values[self.mask]

    def validate(self):
        """ Check the invariants of the sequence

        Raises:
            :obj:`PreconditionError`: if the mask is not a non-empty prefix of true entries or valid values
                are not finite
        """
        n_valid = self.n_valid
        if n_valid < 1:
            raise PreconditionError('Features of `{}` have no valid frame.'.format(self.clip_id))
        if not numpy.all(self.mask[:n_valid]):
            raise PreconditionError('The mask of `{}` is not a prefix of valid frames.'.format(self.clip_id))
        if n_valid != min(self.n_frames, self.length):
            raise PreconditionError('Features of `{}` have {} valid frames, expected min({}, {}).'.format(
                self.clip_id, n_valid, self.n_frames, self.length))
        if not numpy.all(numpy.isfinite(self.valid_values)):
            raise PreconditionError('Features of `{}` contain non-finite valid values.'.format(self.clip_id))


class PoolingSpec(object):
    """ Selector of the weighted pooling scheme

    The attention vector ``u`` is a trainable parameter of the pooling layer; it exists only for the
    attention scheme.

    Attributes:
        scheme (:obj:`PoolingScheme`): pooling scheme
        mode (:obj:`AttentionMode`): normalization of attention scores
    """

    def __init__(self, scheme=PoolingScheme.attention, mode=AttentionMode.single_softmax):
        self.scheme = PoolingScheme(scheme)
        self.mode = AttentionMode(mode)

    def to_dict(self):
        return collections.OrderedDict([('scheme', self.scheme.value), ('mode', self.mode.value)])

    @classmethod
    def from_dict(cls, value):
        return cls(value.get('scheme', PoolingScheme.attention.value),
                   value.get('mode', AttentionMode.single_softmax.value))

    def __eq__(self, other):
        return isinstance(other, PoolingSpec) and self.scheme == other.scheme and self.mode == other.mode


class BranchConfig(object):
    """ Hyperparameters of one single-feature branch

    Attributes:
        kind (:obj:`FeatureKind`): kind of input features
        length (:obj:`int`): fixed sequence length ``L``
        n_features (:obj:`int`): number of features per frame ``n_F``
        n_dense1 (:obj:`int`): width ``n_D1`` of the dense layer before the LSTM
        n_lstm (:obj:`int`): number of LSTM cells ``n_L``
        n_dense2 (:obj:`int`): width ``n_D2`` of the dense layer after pooling
        hop_s (:obj:`float`): hop between frames (s)
    """

    DEFAULTS = {
        FeatureKind.logmel: dict(length=700, n_features=32, n_dense1=32, n_lstm=64, n_dense2=25, hop_s=0.010),
        FeatureKind.modulation: dict(length=110, n_features=184, n_dense1=100, n_lstm=64, n_dense2=25, hop_s=0.064),
    }

    def __init__(self, kind, length, n_features, n_dense1, n_lstm=64, n_dense2=25, hop_s=None):
        self.kind = FeatureKind(kind)
        self.length = length
        self.n_features = n_features
        self.n_dense1 = n_dense1
        self.n_lstm = n_lstm
        self.n_dense2 = n_dense2
        self.hop_s = self.DEFAULTS[self.kind]['hop_s'] if hop_s is None else hop_s

    @classmethod
    def default(cls, kind):
        """ Get the published configuration of a branch """
        return cls(kind, **cls.DEFAULTS[FeatureKind(kind)])

    @classmethod
    def toy(cls, kind, length=6, n_features=5, n_dense1=4, n_lstm=3, n_dense2=2):
        """ Get a small configuration for gradient checks and tests """
        return cls(kind, length=length, n_features=n_features, n_dense1=n_dense1, n_lstm=n_lstm, n_dense2=n_dense2)

    def to_dict(self):
        return collections.OrderedDict([
            ('kind', self.kind.value),
            ('length', self.length),
            ('n_features', self.n_features),
            ('n_dense1', self.n_dense1),
            ('n_lstm', self.n_lstm),
            ('n_dense2', self.n_dense2),
            ('hop_s', self.hop_s),
        ])

    @classmethod
    def from_dict(cls, value):
        return cls(**value)


class ModelConfig(object):
    """ Architecture of a classifier

    Attributes:
        kind (:obj:`ArchitectureKind`): kind of architecture
        pooling (:obj:`PoolingSpec`): pooling scheme shared by the branches
        branches (:obj:`list` of :obj:`BranchConfig`): branches; log-mel first for fusion models
        n_classes (:obj:`int`): number of classes ``n_C``
        dropout (:obj:`float`): dropout rate
        dtype (:obj:`str`): floating-point type of the parameters (``float32`` or ``float64``)
        fusion_training (:obj:`FusionTraining`): how the branches of a fusion model are trained
    """

    def __init__(self, kind, pooling=None, branches=None, n_classes=3, dropout=0.33, dtype='float32',
                 fusion_training=FusionTraining.joint):
        self.kind = ArchitectureKind(kind)
        self.pooling = pooling or PoolingSpec()
        self.branches = branches if branches is not None else [
            BranchConfig.default(kind) for kind in self.kind.feature_kinds]
        self.n_classes = n_classes
        self.dropout = dropout
        self.dtype = dtype
        self.fusion_training = FusionTraining(fusion_training)

    @classmethod
    def default(cls, kind, scheme=PoolingScheme.attention, toy=False, **kwargs):
        """ Get the published configuration of an architecture

        Args:
            kind (:obj:`ArchitectureKind`): kind of architecture
            scheme (:obj:`PoolingScheme`, optional): pooling scheme
            toy (:obj:`bool`, optional): if :obj:`True`, use small branch dimensions
            **kwargs: additional arguments to the constructor

        Returns:
            :obj:`ModelConfig`: configuration
        """
        kind = ArchitectureKind(kind)
        factory = BranchConfig.toy if toy else BranchConfig.default
        branches = [factory(feature_kind) for feature_kind in kind.feature_kinds]
        return cls(kind, pooling=PoolingSpec(scheme), branches=branches, **kwargs)

    def branch(self, kind):
        kind = FeatureKind(kind)
        for branch in self.branches:
            if branch.kind == kind:
                return branch
        raise KeyError('Configuration has no `{}` branch.'.format(kind.value))

    def validate(self):
        """ Check that the configuration is consistent

        Raises:
            :obj:`ConfigurationError`: if the configuration is not valid
        """
        errors = []
        expected_kinds = self.kind.feature_kinds
        actual_kinds = [branch.kind for branch in self.branches]
        if actual_kinds != expected_kinds:
            errors.append('{} requires branches [{}], not [{}].'.format(
                self.kind.value,
                ', '.join(kind.value for kind in expected_kinds),
                ', '.join(kind.value for kind in actual_kinds)))
        for branch in self.branches:
            for attr in ['length', 'n_features', 'n_dense1', 'n_lstm', 'n_dense2']:
                if getattr(branch, attr) < 1:
                    errors.append('`{}` of the {} branch must be positive.'.format(attr, branch.kind.value))
        if self.kind == ArchitectureKind.wp_fusion and len(set(branch.n_dense2 for branch in self.branches)) > 1:
            errors.append('The branches of a WP fusion model must share n_D2.')
        if self.n_classes < 2:
            errors.append('At least two classes are required.')
        if not (0 <= self.dropout < 1):
            errors.append('Dropout rate must be in [0, 1), not {}.'.format(self.dropout))
        if self.dtype not in ['float32', 'float64']:
            errors.append('Type must be `float32` or `float64`, not `{}`.'.format(self.dtype))
        if errors:
            raise ConfigurationError('Model configuration is invalid:\n  - ' + '\n  - '.join(errors))

    def to_dict(self):
        return collections.OrderedDict([
            ('kind', self.kind.value),
            ('pooling', self.pooling.to_dict()),
            ('branches', [branch.to_dict() for branch in self.branches]),
            ('n_classes', self.n_classes),
            ('dropout', self.dropout),
            ('dtype', self.dtype),
            ('fusion_training', self.fusion_training.value),
        ])

    @classmethod
    def from_dict(cls, value):
        try:
            return cls(
                value['kind'],
                pooling=PoolingSpec.from_dict(value.get('pooling', {})),
                branches=[BranchConfig.from_dict(branch) for branch in value['branches']]
                if 'branches' in value else None,
                n_classes=value.get('n_classes', 3),
                dropout=value.get('dropout', 0.33),
                dtype=value.get('dtype', 'float32'),
                fusion_training=value.get('fusion_training', FusionTraining.joint.value),
            )
        except (KeyError, TypeError, ValueError) as exception:
            raise ConfigurationError('Model configuration could not be read: {}'.format(exception))

    def __eq__(self, other):
        return isinstance(other, ModelConfig) and self.to_dict() == other.to_dict()


class TrainConfig(object):
    """ Configuration of training and cross-validation

    Attributes:
        lr (:obj:`float`): learning rate of Adam
        batch_size (:obj:`int`): mini-batch size
        max_epochs (:obj:`int`): maximum number of epochs
        repeats (:obj:`int`): number of repetitions of each cross-validation experiment
        seed (:obj:`int`): master seed
        patience (:obj:`int`): number of epochs without improvement of the validation accuracy before training
            stops; :obj:`None` disables early stopping
        clip_norm (:obj:`float`): global-norm threshold for clipping gradients
        k (:obj:`int`): number of cross-validation folds
    """

    def __init__(self, lr=0.0002, batch_size=32, max_epochs=50, repeats=20, seed=0, patience=None, clip_norm=5.0,
                 k=5):
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.repeats = repeats
        self.seed = seed
        self.patience = patience
        self.clip_norm = clip_norm
        self.k = k

    def validate(self):
        """ Check that the configuration is consistent

        Raises:
            :obj:`ConfigurationError`: if the configuration is not valid
        """
        errors = []
        if self.lr < 0:
            errors.append('Learning rate must be non-negative.')
        for attr in ['batch_size', 'max_epochs', 'repeats']:
            if getattr(self, attr) < 1:
                errors.append('`{}` must be positive.'.format(attr))
        if self.patience is not None and self.patience < 1:
            errors.append('Patience must be positive.')
        if self.clip_norm is not None and self.clip_norm <= 0:
            errors.append('Gradient clipping threshold must be positive.')
        if self.k < 2:
            errors.append('At least two folds are required.')
        if errors:
            raise ConfigurationError('Training configuration is invalid:\n  - ' + '\n  - '.join(errors))

    def to_dict(self):
        return collections.OrderedDict([
            ('lr', self.lr),
            ('batch_size', self.batch_size),
            ('max_epochs', self.max_epochs),
            ('repeats', self.repeats),
            ('seed', self.seed),
            ('patience', self.patience),
            ('clip_norm', self.clip_norm),
            ('k', self.k),
        ])

    @classmethod
    def from_dict(cls, value):
        try:
            return cls(**value)
        except TypeError as exception:
            raise ConfigurationError('Training configuration could not be read: {}'.format(exception))


class TrainingHistory(object):
    """ Per-epoch record of a training run

    Attributes:
        epochs (:obj:`list` of :obj:`dict`): loss, training accuracy and validation accuracy of each epoch
        best_epoch (:obj:`int`): 1-based index of the epoch whose parameters were retained (0: initial parameters)
    """

    def __init__(self):
        self.epochs = []
        self.best_epoch = 0

    def append(self, loss, train_accuracy, validation_accuracy):
        self.epochs.append(collections.OrderedDict([
            ('epoch', len(self.epochs) + 1),
            ('loss', float(loss)),
            ('train_accuracy', float(train_accuracy)),
            ('validation_accuracy', None if validation_accuracy is None else float(validation_accuracy)),
        ]))

    def to_dict(self):
        return collections.OrderedDict([('best_epoch', self.best_epoch), ('epochs', self.epochs)])


class EvalReport(object):
    """ Accuracy and confusion statistics of an evaluation or a cross-validation experiment

    Attributes:
        fold_accuracies (:obj:`list` of :obj:`list` of :obj:`float`): accuracy (%) of each fold of each repeat
        confusion_counts (:obj:`numpy.ndarray`): ``n_C x n_C`` counts (row: true class, column: predicted class)
        fold_checksums (:obj:`list` of :obj:`list` of :obj:`str`): digest of the training clip ids of each fold
        attention_traces (:obj:`dict`): dictionary that maps clip ids to per-branch lists of (time, weight) pairs
    """

    def __init__(self, fold_accuracies=None, confusion_counts=None, fold_checksums=None, attention_traces=None,
                 n_classes=3):
        self.fold_accuracies = fold_accuracies or []
        self.confusion_counts = (numpy.zeros((n_classes, n_classes), dtype=numpy.int64)
                                 if confusion_counts is None else numpy.asarray(confusion_counts))
        self.fold_checksums = fold_checksums or []
        self.attention_traces = attention_traces or {}

    @property
    def repeat_accuracies(self):
        """ Get the mean accuracy across the folds of each repeat """
        return [float(numpy.mean(folds)) for folds in self.fold_accuracies]

    @property
    def mean_accuracy(self):
        return float(numpy.mean(self.repeat_accuracies))

    @property
    def std_accuracy(self):
        """ Get the sample standard deviation (ddof 1) of the repeat accuracies; 0 for a single repeat """
        accuracies = self.repeat_accuracies
        if len(accuracies) < 2:
            return 0.
        return float(numpy.std(accuracies, ddof=1))

    @property
    def ci95(self):
        """ Get the half-width of the 95% confidence interval of the mean accuracy (normal approximation) """
        return 1.96 * self.std_accuracy / numpy.sqrt(len(self.repeat_accuracies))

    @property
    def confusion_matrix(self):
        """ Get the row-normalized confusion matrix (%); rows of absent classes are zero """
        counts = self.confusion_counts.astype(numpy.float64)
        totals = counts.sum(axis=1, keepdims=True)
        return numpy.divide(100. * counts, totals, out=numpy.zeros_like(counts), where=totals > 0)

    def to_dict(self):
        return collections.OrderedDict([
            ('mean_accuracy', self.mean_accuracy),
            ('std_accuracy', self.std_accuracy),
            ('ci95', self.ci95),
            ('repeat_accuracies', self.repeat_accuracies),
            ('fold_accuracies', self.fold_accuracies),
            ('classes', [cls.name for cls in IntelligibilityClass][:self.confusion_counts.shape[0]]),
            ('confusion_matrix', self.confusion_matrix.tolist()),
            ('confusion_counts', self.confusion_counts.tolist()),
            ('fold_checksums', self.fold_checksums),
            ('attention_traces', self.attention_traces),
        ])


class ClassProfile(object):
    """ Rhythm and spectral profile of the synthetic clips of one intelligibility level

    Attributes:
        rate (:obj:`float`): mean syllabic rate (Hz)
        rate_jitter (:obj:`float`): relative standard deviation of the syllabic rate across clips
        depth (:obj:`float`): modulation depth in [0, 1]
        pause_prob (:obj:`float`): probability that a syllable slot is a pause
        tilt (:obj:`float`): spectral tilt exponent applied to the harmonic amplitudes (negative: low-frequency
            emphasis)
    """

    def __init__(self, rate, depth, pause_prob=0., tilt=0., rate_jitter=0.08):
        self.rate = rate
        self.rate_jitter = rate_jitter
        self.depth = depth
        self.pause_prob = pause_prob
        self.tilt = tilt

    def to_dict(self):
        return collections.OrderedDict([
            ('rate', self.rate),
            ('rate_jitter', self.rate_jitter),
            ('depth', self.depth),
            ('pause_prob', self.pause_prob),
            ('tilt', self.tilt),
        ])

    @classmethod
    def from_dict(cls, value):
        return cls(**value)


class SynthSpec(object):
    """ Specification of a synthetic corpus

    Speaker ``i`` has intelligibility level ``i mod 3``, so that the levels are balanced across speakers.

    Attributes:
        n_speakers (:obj:`int`): number of speakers
        clips_per_speaker (:obj:`int`): number of clips per speaker
        duration_range (:obj:`tuple` of :obj:`float`): minimum and maximum duration of the clips (s)
        profiles (:obj:`dict` of :obj:`IntelligibilityClass` to :obj:`ClassProfile`): profile of each level
        noise_floor (:obj:`float`): standard deviation of the additive noise
        seed (:obj:`int`): seed
    """

    def __init__(self, n_speakers=15, clips_per_speaker=40, duration_range=(1., 7.), profiles=None,
                 noise_floor=0.003, seed=0):
        self.n_speakers = n_speakers
        self.clips_per_speaker = clips_per_speaker
        self.duration_range = tuple(duration_range)
        self.profiles = profiles or self.default_profiles()
        self.noise_floor = noise_floor
        self.seed = seed

    @staticmethod
    def default_profiles():
        return {
            IntelligibilityClass.high: ClassProfile(rate=4.0, depth=0.9, pause_prob=0.00, tilt=0.0),
            IntelligibilityClass.medium: ClassProfile(rate=2.5, depth=0.7, pause_prob=0.10, tilt=-0.5),
            IntelligibilityClass.low: ClassProfile(rate=1.5, depth=0.5, pause_prob=0.25, tilt=-1.5),
        }

    def validate(self):
        """ Check that the specification is consistent

        Raises:
            :obj:`ConfigurationError`: if the specification is not valid
        """
        errors = []
        if self.n_speakers < 1 or self.clips_per_speaker < 1:
            errors.append('At least one speaker and one clip per speaker are required.')
        if not (0 < self.duration_range[0] <= self.duration_range[1]):
            errors.append('Duration range {} is not valid.'.format(self.duration_range))
        if set(self.profiles.keys()) != set(IntelligibilityClass):
            errors.append('A profile is required for each intelligibility level.')
        else:
            profiles = [tuple(profile.to_dict().values()) for profile in self.profiles.values()]
            if len(set(profiles)) != len(profiles):
                errors.append('Class profiles must be distinct.')
            for level, profile in self.profiles.items():
                if profile.rate <= 0:
                    errors.append('Syllabic rate of the {} profile must be positive.'.format(level.name))
                if not (0 <= profile.depth <= 1) or not (0 <= profile.pause_prob < 1):
                    errors.append('Depth and pause probability of the {} profile must be in [0, 1].'.format(level.name))
        if self.noise_floor < 0:
            errors.append('Noise floor must be non-negative.')
        if errors:
            raise ConfigurationError('Synthetic corpus specification is invalid:\n  - ' + '\n  - '.join(errors))

    def speaker_level(self, speaker_index):
        return IntelligibilityClass(speaker_index % len(IntelligibilityClass))

    def to_dict(self):
        return collections.OrderedDict([
            ('n_speakers', self.n_speakers),
            ('clips_per_speaker', self.clips_per_speaker),
            ('duration_range', list(self.duration_range)),
            ('profiles', collections.OrderedDict(
                (level.name, self.profiles[level].to_dict()) for level in IntelligibilityClass)),
            ('noise_floor', self.noise_floor),
            ('seed', self.seed),
        ])

    @classmethod
    def from_dict(cls, value):
        value = dict(value)
        if 'profiles' in value:
            value['profiles'] = {
                IntelligibilityClass[name]: ClassProfile.from_dict(profile)
                for name, profile in value['profiles'].items()
            }
        try:
            return cls(**value)
        except TypeError as exception:
            raise ConfigurationError('Synthetic corpus specification could not be read: {}'.format(exception))


class RunLog(object):
    """ Log of a command: status, provenance and output

    Attributes:
        command (:obj:`str`): command
        status (:obj:`RunStatus`): status
        seed (:obj:`int`): master seed
        version (:obj:`str`): version of Intellikit
        config (:obj:`dict`): echo of the configuration
        start_time (:obj:`datetime.datetime`): time when the command started
        duration (:obj:`float`): duration (s)
        output (:obj:`list` of :obj:`str`): output lines
        exception (:obj:`Exception`): exception raised by the command
    """

    def __init__(self, command, seed=None, version=None, config=None):
        self.command = command
        self.status = RunStatus.QUEUED
        self.seed = seed
        self.version = version
        self.config = config or {}
        self.start_time = None
        self.duration = None
        self.output = []
        self.exception = None

    def start(self):
        self.status = RunStatus.RUNNING
        self.start_time = datetime.datetime.now(datetime.timezone.utc)

    def finish(self, exception=None):
        self.exception = exception
        self.status = RunStatus.FAILED if exception else RunStatus.SUCCEEDED
        self.duration = (datetime.datetime.now(datetime.timezone.utc) - self.start_time).total_seconds()

    def to_dict(self):
        return collections.OrderedDict([
            ('command', self.command),
            ('status', self.status.value),
            ('seed', self.seed),
            ('version', self.version),
            ('config', self.config),
            ('startTime', self.start_time.isoformat() if self.start_time else None),
            ('duration', self.duration),
            ('output', self.output),
            ('exception', None if self.exception is None else {
                'type': self.exception.__class__.__name__,
                'message': str(self.exception),
            }),
        ])
