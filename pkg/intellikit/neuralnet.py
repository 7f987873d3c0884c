""" Minimal engine of masked dense, LSTM, weighted pooling and dropout layers with analytic gradients

Each layer caches what its backward pass needs during :obj:`Layer.forward`, and stores the gradients of its
parameters in :obj:`Layer.grads` during :obj:`Layer.backward`.

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .data_model import AttentionMode, PoolingScheme, PoolingSpec
from .exceptions import ConfigurationError, PreconditionError, ShapeError, StateError
import collections
import numpy
import scipy.special

__all__ = [
    'MaskedSequenceBatch',
    'glorot_uniform',
    'Layer',
    'Dense',
    'LSTM',
    'Pooling',
    'Dropout',
    'cross_entropy',
    'renormalized_cross_entropy',
    'AdamState',
    'adam_step',
    'clip_by_global_norm',
    'Adam',
    'lstm_param_count',
    'relative_error',
    'check_gradients',
]

PROB_EPS = 1e-12
RELATIVE_ERROR_FLOOR = 1e-5
FINITE_DIFFERENCE_STEP = 1e-5


class MaskedSequenceBatch(object):
    """ Batch of padded sequences with validity flags

    Attributes:
        values (:obj:`numpy.ndarray`): ``B x L x d`` values
        mask (:obj:`numpy.ndarray`): ``B x L`` booleans; a true-prefix per item
        labels (:obj:`numpy.ndarray`): ``B`` class indices
        clip_ids (:obj:`list` of :obj:`str`): id of each item
    """

    def __init__(self, values, mask, labels=None, clip_ids=None):
        self.values = numpy.asarray(values)
        self.mask = numpy.asarray(mask, dtype=bool)
        self.labels = None if labels is None else numpy.asarray(labels, dtype=numpy.int64)
        self.clip_ids = list(clip_ids) if clip_ids is not None else [''] * self.values.shape[0]
        self.validate()

    @classmethod
    def from_sequences(cls, seqs, labels=None, dtype=numpy.float32):
        """ Stack feature sequences of the same length

        Args:
            seqs (:obj:`list` of :obj:`FeatureSequence`): padded sequences
            labels (:obj:`list` of :obj:`int`, optional): class of each sequence
            dtype (:obj:`type`, optional): type of the values

        Returns:
            :obj:`MaskedSequenceBatch`: batch
        """
        shapes = set(seq.values.shape for seq in seqs)
        if len(shapes) != 1:
            raise ShapeError('Sequences of a batch must have the same shape, not {}.'.format(sorted(shapes)))
        return cls(numpy.stack([seq.values for seq in seqs]).astype(dtype),
                   numpy.stack([seq.mask for seq in seqs]),
                   labels=labels,
                   clip_ids=[seq.clip_id for seq in seqs])

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def n_valid(self):
        return self.mask.sum(axis=1)

    def validate(self):
        if self.values.ndim != 3:
            raise ShapeError('Batch values must be B x L x d, not {}.'.format(self.values.shape))
        if self.mask.shape != self.values.shape[:2]:
            raise ShapeError('Batch mask must be {}, not {}.'.format(self.values.shape[:2], self.mask.shape))
        n_valid = self.mask.sum(axis=1)
        if numpy.any(n_valid < 1):
            raise PreconditionError('Every item of a batch must have at least one valid frame.')
        prefix = numpy.arange(self.mask.shape[1])[None, :] < n_valid[:, None]
        if not numpy.array_equal(prefix, self.mask):
            raise PreconditionError('Batch masks must be true-prefixes.')
        if self.labels is not None and self.labels.shape != (self.values.shape[0],):
            raise ShapeError('Batch must have one label per item.')

    def subset(self, indices):
        return MaskedSequenceBatch(self.values[indices], self.mask[indices],
                                   labels=None if self.labels is None else self.labels[indices],
                                   clip_ids=[self.clip_ids[i] for i in indices])


def glorot_uniform(rng, fan_in, fan_out, shape, dtype=numpy.float32):
    limit = numpy.sqrt(6. / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer(object):
    """ Base class of layers

    Attributes:
        name (:obj:`str`): name, used as the prefix of the names of the parameters
        params (:obj:`collections.OrderedDict`): dictionary that maps names to trainable arrays
        grads (:obj:`collections.OrderedDict`): dictionary that maps names to the gradients of the last backward pass
        training (:obj:`bool`): whether the layer is in training mode
    """

    def __init__(self, name=''):
        self.name = name
        self.params = collections.OrderedDict()
        self.grads = collections.OrderedDict()
        self.training = True
        self._cache = None

    def forward(self, x, mask=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def _get_cache(self):
        if self._cache is None:
            raise StateError('Backward pass of layer `{}` requires a forward pass.'.format(self.name))
        return self._cache

    def zero_grad(self):
        for key, value in self.params.items():
            self.grads[key] = numpy.zeros_like(value)

    def train(self, mode=True):
        self.training = mode

    @property
    def n_params(self):
        return int(sum(param.size for param in self.params.values()))

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__, self.name)


class Dense(Layer):
    """ Fully-connected layer applied to the last axis of its input, i.e. time-distributed over sequences """

    ACTIVATIONS = ('linear', 'relu', 'sigmoid', 'softmax')

    def __init__(self, n_in, n_out, activation='linear', rng=None, dtype=numpy.float32, name='dense'):
        super(Dense, self).__init__(name)
        if activation not in self.ACTIVATIONS:
            raise ConfigurationError('Activation `{}` is not supported. Activation must be one of {}.'.format(
                activation, ', '.join(self.ACTIVATIONS)))
        rng = rng if rng is not None else numpy.random.default_rng(0)
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation
        self.params['W'] = glorot_uniform(rng, n_in, n_out, (n_in, n_out), dtype)
        self.params['b'] = numpy.zeros(n_out, dtype=dtype)
        self.zero_grad()

    def forward(self, x, mask=None):
        if x.shape[-1] != self.n_in:
            raise ShapeError('Layer `{}` expects {} input features, not {}.'.format(self.name, self.n_in, x.shape[-1]))
        z = x @ self.params['W'] + self.params['b']
        if self.activation == 'relu':
            y = numpy.maximum(z, 0)
        elif self.activation == 'sigmoid':
            y = scipy.special.expit(z)
        elif self.activation == 'softmax':
            y = scipy.special.softmax(z, axis=-1)
        else:
            y = z
        self._cache = (x, z, y)
        return y

    def backward(self, grad):
        x, z, y = self._get_cache()
        if self.activation == 'relu':
            dz = grad * (z > 0)
        elif self.activation == 'sigmoid':
            dz = grad * y * (1 - y)
        elif self.activation == 'softmax':
            dz = y * (grad - (grad * y).sum(axis=-1, keepdims=True))
        else:
            dz = grad
        self.grads['W'] = x.reshape(-1, self.n_in).T @ dz.reshape(-1, self.n_out)
        self.grads['b'] = dz.reshape(-1, self.n_out).sum(axis=0)
        return dz @ self.params['W'].T


class LSTM(Layer):
    """ LSTM layer with input, forget, cell and output gates, zero initial state and state freezing on masked
    timesteps

    The parameters are stored with the four gate blocks concatenated in the order input, forget, cell, output:
    ``W`` is ``d x 4 n_L``, ``U`` is ``n_L x 4 n_L`` and ``b`` is ``4 n_L``.
    """

    def __init__(self, n_in, n_units, rng=None, dtype=numpy.float32, forget_bias=1., name='lstm'):
        super(LSTM, self).__init__(name)
        rng = rng if rng is not None else numpy.random.default_rng(0)
        self.n_in = n_in
        self.n_units = n_units
        self.params['W'] = glorot_uniform(rng, n_in, 4 * n_units, (n_in, 4 * n_units), dtype)
        self.params['U'] = glorot_uniform(rng, n_units, 4 * n_units, (n_units, 4 * n_units), dtype)
        self.params['b'] = numpy.zeros(4 * n_units, dtype=dtype)
        self.params['b'][n_units:2 * n_units] = forget_bias
        self.zero_grad()

    def forward(self, x, mask=None):
        if x.ndim != 3 or x.shape[2] != self.n_in:
            raise ShapeError('Layer `{}` expects B x L x {} inputs, not {}.'.format(self.name, self.n_in, x.shape))
        n_batch, length, _ = x.shape
        mask = numpy.ones((n_batch, length), dtype=bool) if mask is None else mask
        n = self.n_units
        W, U, b = self.params['W'], self.params['U'], self.params['b']

        h = numpy.zeros((n_batch, n), dtype=W.dtype)
        c = numpy.zeros((n_batch, n), dtype=W.dtype)
        outputs = numpy.zeros((n_batch, length, n), dtype=W.dtype)
        steps = []
        for t in range(length):
            valid = mask[:, t]
            if not valid.any():
                outputs[:, t] = h
                steps.append(None)
                continue

            # input projection per step keeps earlier outputs independent of appended frames
            a = x[:, t] @ W + h @ U + b
            i = scipy.special.expit(a[:, :n])
            f = scipy.special.expit(a[:, n:2 * n])
            g = numpy.tanh(a[:, 2 * n:3 * n])
            o = scipy.special.expit(a[:, 3 * n:])
            c_new = f * c + i * g
            tanh_c = numpy.tanh(c_new)
            h_new = o * tanh_c

            steps.append((x[:, t], h, c, i, f, g, o, tanh_c, valid[:, None]))
            h = numpy.where(valid[:, None], h_new, h)
            c = numpy.where(valid[:, None], c_new, c)
            outputs[:, t] = h

        self._cache = (x.shape, steps)
        return outputs

    def backward(self, grad):
        x_shape, steps = self._get_cache()
        n = self.n_units
        W, U = self.params['W'], self.params['U']

        dW = numpy.zeros_like(W)
        dU = numpy.zeros_like(U)
        db = numpy.zeros_like(self.params['b'])
        dx = numpy.zeros(x_shape, dtype=grad.dtype)
        dh_next = numpy.zeros((x_shape[0], n), dtype=grad.dtype)
        dc_next = numpy.zeros((x_shape[0], n), dtype=grad.dtype)
        for t in reversed(range(x_shape[1])):
            dh = grad[:, t] + dh_next
            if steps[t] is None:
                dh_next = dh
                continue

            x_t, h_prev, c_prev, i, f, g, o, tanh_c, valid = steps[t]
            dh_valid = numpy.where(valid, dh, 0)
            dc = numpy.where(valid, dc_next, 0) + dh_valid * o * (1 - tanh_c ** 2)
            da = numpy.concatenate([
                dc * g * i * (1 - i),
                dc * c_prev * f * (1 - f),
                dc * i * (1 - g ** 2),
                dh_valid * tanh_c * o * (1 - o),
            ], axis=1)

            dW += x_t.T @ da
            dU += h_prev.T @ da
            db += da.sum(axis=0)
            dx[:, t] = da @ W.T

            # frozen items pass the state gradients through unchanged
            dh_next = numpy.where(valid, da @ U.T, dh)
            dc_next = numpy.where(valid, dc * f, dc_next)

        self.grads['W'] = dW
        self.grads['U'] = dU
        self.grads['b'] = db
        return dx


def _masked_softmax(scores, mask):
    return scipy.special.softmax(numpy.where(mask, scores, -numpy.inf), axis=1)


def _softmax_backward(weights, grad):
    return weights * (grad - (weights * grad).sum(axis=1, keepdims=True))


class Pooling(Layer):
    """ Weighted pooling of a sequence into one vector, ``z = sum_t alpha_t y_t``

    * ``last``: all the weight on the last valid frame
    * ``mean``: uniform weights over the valid frames
    * ``attention``: softmax over the valid frames of the scores ``u . y_t``, optionally normalized a second time

    Attributes:
        spec (:obj:`PoolingSpec`): pooling scheme
        weights (:obj:`numpy.ndarray`): ``B x L`` weights of the last forward pass
    """

    def __init__(self, n_units, length, spec=None, dtype=numpy.float32, name='pooling'):
        super(Pooling, self).__init__(name)
        self.spec = spec or PoolingSpec()
        self.n_units = n_units
        self.weights = None
        if self.spec.scheme == PoolingScheme.attention:
            self.params['u'] = numpy.full(n_units, 1. / length, dtype=dtype)
        self.zero_grad()

    def forward(self, x, mask=None):
        if x.ndim != 3 or x.shape[2] != self.n_units:
            raise ShapeError('Layer `{}` expects B x L x {} inputs, not {}.'.format(self.name, self.n_units, x.shape))
        mask = numpy.ones(x.shape[:2], dtype=bool) if mask is None else mask
        n_valid = mask.sum(axis=1)
        if numpy.any(n_valid < 1):
            raise PreconditionError('Pooling requires at least one valid frame per item.')

        probs = None
        if self.spec.scheme == PoolingScheme.last:
            weights = numpy.zeros(mask.shape, dtype=x.dtype)
            weights[numpy.arange(mask.shape[0]), n_valid - 1] = 1
        elif self.spec.scheme == PoolingScheme.mean:
            weights = (mask / n_valid[:, None]).astype(x.dtype)
        else:
            scores = x @ self.params['u']
            weights = _masked_softmax(scores, mask)
            if self.spec.mode == AttentionMode.literal_double_softmax:
                probs = weights
                weights = _masked_softmax(probs, mask)

        self.weights = weights
        self._cache = (x, weights, probs)
        return (weights[:, :, None] * x).sum(axis=1)

    def backward(self, grad):
        x, weights, probs = self._get_cache()
        dx = weights[:, :, None] * grad[:, None, :]
        if self.spec.scheme == PoolingScheme.attention:
            dweights = (x * grad[:, None, :]).sum(axis=2)
            dscores = _softmax_backward(weights, dweights)
            if probs is not None:
                dscores = _softmax_backward(probs, dscores)
            dx = dx + dscores[:, :, None] * self.params['u']
            self.grads['u'] = (dscores[:, :, None] * x).sum(axis=(0, 1))
        return dx


class Dropout(Layer):
    """ Inverted dropout: in training mode, kept activations are scaled by ``1 / (1 - rate)``; identity otherwise """

    def __init__(self, rate=0.33, rng=None, name='dropout'):
        super(Dropout, self).__init__(name)
        if not (0 <= rate < 1):
            raise ConfigurationError('Dropout rate must be in [0, 1), not {}.'.format(rate))
        self.rate = rate
        self.rng = rng if rng is not None else numpy.random.default_rng(0)

    def forward(self, x, mask=None):
        if self.training and self.rate > 0:
            scale = (self.rng.random(x.shape) >= self.rate).astype(x.dtype) / x.dtype.type(1 - self.rate)
        else:
            scale = None
        self._cache = (scale,)
        return x if scale is None else x * scale

    def backward(self, grad):
        scale, = self._get_cache()
        return grad if scale is None else grad * scale


def _check_labels(labels, n_classes):
    labels = numpy.asarray(labels, dtype=numpy.int64)
    if numpy.any(labels < 0) or numpy.any(labels >= n_classes):
        raise IndexError('Labels must be in [0, {}), not {}.'.format(n_classes, sorted(set(labels.tolist()))))
    return labels


def cross_entropy(probs, labels):
    """ Get the mean negative log-probability of the labels and its gradient with respect to the probabilities

    Args:
        probs (:obj:`numpy.ndarray`): ``B x n_C`` class distributions
        labels (:obj:`numpy.ndarray`): ``B`` class indices

    Returns:
        :obj:`tuple`:

            * :obj:`float`: loss
            * :obj:`numpy.ndarray`: ``B x n_C`` gradient

    Raises:
        :obj:`IndexError`: if a label is out of range
    """
    labels = _check_labels(labels, probs.shape[1])
    rows = numpy.arange(probs.shape[0])
    label_probs = numpy.maximum(probs[rows, labels], PROB_EPS)
    loss = -numpy.mean(numpy.log(label_probs))
    grad = numpy.zeros_like(probs)
    grad[rows, labels] = -1. / (probs.shape[0] * label_probs)
    return float(loss), grad


def renormalized_cross_entropy(scores, labels):
    """ Get the cross-entropy of positive class scores renormalized to a distribution, and its gradient with
    respect to the scores

    Args:
        scores (:obj:`numpy.ndarray`): ``B x n_C`` positive scores (e.g., outputs of a sigmoid layer)
        labels (:obj:`numpy.ndarray`): ``B`` class indices

    Returns:
        :obj:`tuple`:

            * :obj:`float`: loss
            * :obj:`numpy.ndarray`: ``B x n_C`` gradient

    Raises:
        :obj:`IndexError`: if a label is out of range
    """
    labels = _check_labels(labels, scores.shape[1])
    rows = numpy.arange(scores.shape[0])
    totals = scores.sum(axis=1)
    label_scores = numpy.maximum(scores[rows, labels], PROB_EPS)
    loss = numpy.mean(numpy.log(totals) - numpy.log(label_scores))
    grad = numpy.repeat((1. / totals)[:, None], scores.shape[1], axis=1)
    grad[rows, labels] -= 1. / label_scores
    return float(loss), grad / scores.shape[0]


class AdamState(object):
    """ First and second moment estimates of Adam

    Attributes:
        m (:obj:`dict`): dictionary that maps parameter names to first moments
        v (:obj:`dict`): dictionary that maps parameter names to second moments
        t (:obj:`int`): number of steps taken
    """

    def __init__(self, m=None, v=None, t=0):
        self.m = m if m is not None else collections.OrderedDict()
        self.v = v if v is not None else collections.OrderedDict()
        self.t = t


def clip_by_global_norm(grads, clip_norm, names=None):
    """ Scale gradients in place so that their global L2 norm is at most ``clip_norm``

    Returns:
        :obj:`float`: global norm before clipping
    """
    names = list(grads.keys()) if names is None else names
    norm = float(numpy.sqrt(sum(float(numpy.sum(numpy.square(grads[name], dtype=numpy.float64))) for name in names)))
    if clip_norm is not None and norm > clip_norm:
        for name in names:
            grads[name] *= grads[name].dtype.type(clip_norm / norm)
    return norm


def adam_step(params, grads, state, lr=0.0002, beta1=0.9, beta2=0.999, eps=1e-8, frozen=()):
    """ Update parameters in place with one bias-corrected Adam step

    Args:
        params (:obj:`dict`): dictionary that maps names to parameter arrays
        grads (:obj:`dict`): dictionary that maps names to gradients
        state (:obj:`AdamState`): moment estimates, updated in place
        lr (:obj:`float`, optional): learning rate
        beta1 (:obj:`float`, optional): decay of the first moments
        beta2 (:obj:`float`, optional): decay of the second moments
        eps (:obj:`float`, optional): term added to the denominator
        frozen (:obj:`set`, optional): names of parameters that are not updated
    """
    state.t += 1
    correction1 = 1 - beta1 ** state.t
    correction2 = 1 - beta2 ** state.t
    for name, param in params.items():
        if name in frozen:
            continue
        grad = grads[name]
        m = state.m.setdefault(name, numpy.zeros_like(param))
        v = state.v.setdefault(name, numpy.zeros_like(param))
        m *= beta1
        m += (1 - beta1) * grad
        v *= beta2
        v += (1 - beta2) * numpy.square(grad)
        param -= (lr * (m / correction1) / (numpy.sqrt(v / correction2) + eps)).astype(param.dtype)


class Adam(object):
    """ Adam optimizer with global-norm gradient clipping

    Attributes:
        lr (:obj:`float`): learning rate
        beta1 (:obj:`float`): decay of the first moments
        beta2 (:obj:`float`): decay of the second moments
        eps (:obj:`float`): term added to the denominator
        clip_norm (:obj:`float`): global-norm threshold; :obj:`None` disables clipping
        state (:obj:`AdamState`): moment estimates
    """

    def __init__(self, lr=0.0002, beta1=0.9, beta2=0.999, eps=1e-8, clip_norm=5.0):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.state = AdamState()

    def step(self, params, grads, frozen=()):
        """ Clip the gradients of the trainable parameters and update them

        Returns:
            :obj:`float`: global norm of the gradients before clipping
        """
        trainable = [name for name in params if name not in frozen]
        norm = clip_by_global_norm(grads, self.clip_norm, trainable)
        adam_step(params, grads, self.state, lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps,
                  frozen=frozen)
        return norm


def lstm_param_count(n_in, n_units):
    """ Get the number of trainable scalars of an LSTM layer, ``4 (n_L (d + n_L) + n_L)`` """
    return 4 * (n_units * (n_in + n_units) + n_units)


def relative_error(analytic, numeric, floor=RELATIVE_ERROR_FLOOR):
    analytic = numpy.asarray(analytic, dtype=numpy.float64)
    numeric = numpy.asarray(numeric, dtype=numpy.float64)
    return numpy.abs(analytic - numeric) / numpy.maximum(numpy.abs(analytic) + numpy.abs(numeric), floor)


def check_gradients(loss_fn, params, grads, h=FINITE_DIFFERENCE_STEP, names=None):
    """ Compare analytic gradients with central finite differences

    Args:
        loss_fn (:obj:`callable`): function without arguments that returns the loss for the current values of
            ``params``; it must be deterministic
        params (:obj:`dict`): dictionary that maps names to parameter arrays, perturbed in place and restored
        grads (:obj:`dict`): dictionary that maps names to analytic gradients
        h (:obj:`float`, optional): step
        names (:obj:`list` of :obj:`str`, optional): names of the parameters to check; default: all

    Returns:
        :obj:`tuple`:

            * :obj:`float`: maximum relative error
            * :obj:`collections.OrderedDict`: dictionary that maps parameter names to their maximum relative error
    """
    errors = collections.OrderedDict()
    for name in (names or list(params.keys())):
        param = params[name]
        flat = param.reshape(-1)
        if not numpy.shares_memory(flat, param):
            raise PreconditionError('Parameter `{}` must be contiguous to be perturbed.'.format(name))

        numeric = numpy.zeros(flat.size, dtype=numpy.float64)
        for i_value in range(flat.size):
            value = flat[i_value]
            flat[i_value] = value + h
            loss_plus = loss_fn()
            flat[i_value] = value - h
            loss_minus = loss_fn()
            flat[i_value] = value
            numeric[i_value] = (loss_plus - loss_minus) / (2 * h)

        errors[name] = float(relative_error(grads[name].reshape(-1), numeric).max()) if flat.size else 0.
    return (max(errors.values()) if errors else 0.), errors
