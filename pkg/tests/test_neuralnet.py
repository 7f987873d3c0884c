""" Tests of the layers, losses, optimizer and gradient checker

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from intellikit import neuralnet
from intellikit.data_model import AttentionMode, FeatureKind, FeatureSequence, PoolingScheme, PoolingSpec
from intellikit.exceptions import ConfigurationError, PreconditionError, ShapeError, StateError
import numpy
import numpy.testing
import unittest


class MaskedSequenceBatchTestCase(unittest.TestCase):
    def test_from_sequences(self):
        seqs = [
            FeatureSequence(FeatureKind.logmel, numpy.ones((4, 2)), numpy.array([True, True, False, False]),
                            n_frames=2, clip_id='a'),
            FeatureSequence(FeatureKind.logmel, numpy.ones((4, 2)), clip_id='b'),
        ]
        batch = neuralnet.MaskedSequenceBatch.from_sequences(seqs, labels=[0, 2])
        self.assertEqual(batch.values.shape, (2, 4, 2))
        self.assertEqual(batch.values.dtype, numpy.float32)
        self.assertEqual(batch.size, 2)
        numpy.testing.assert_equal(batch.n_valid, [2, 4])
        self.assertEqual(batch.clip_ids, ['a', 'b'])

        subset = batch.subset([1])
        self.assertEqual(subset.clip_ids, ['b'])
        numpy.testing.assert_equal(subset.labels, [2])

        seqs.append(FeatureSequence(FeatureKind.logmel, numpy.ones((3, 2))))
        with self.assertRaisesRegex(ShapeError, 'same shape'):
            neuralnet.MaskedSequenceBatch.from_sequences(seqs)

    def test_validate(self):
        with self.assertRaisesRegex(PreconditionError, 'true-prefixes'):
            neuralnet.MaskedSequenceBatch(numpy.zeros((1, 3, 2)), numpy.array([[True, False, True]]))
        with self.assertRaisesRegex(PreconditionError, 'at least one valid frame'):
            neuralnet.MaskedSequenceBatch(numpy.zeros((1, 3, 2)), numpy.zeros((1, 3)))
        with self.assertRaisesRegex(ShapeError, 'mask'):
            neuralnet.MaskedSequenceBatch(numpy.zeros((1, 3, 2)), numpy.ones((1, 2)))
        with self.assertRaisesRegex(ShapeError, 'B x L x d'):
            neuralnet.MaskedSequenceBatch(numpy.zeros((3, 2)), numpy.ones((3, 2)))
        with self.assertRaisesRegex(ShapeError, 'one label per item'):
            neuralnet.MaskedSequenceBatch(numpy.zeros((2, 3, 2)), numpy.ones((2, 3)), labels=[0])


class DenseTestCase(unittest.TestCase):
    def test_forward(self):
        layer = neuralnet.Dense(2, 3, activation='relu', dtype=numpy.float64)
        layer.params['W'][:] = [[1., -1., 0.], [0., 1., 2.]]
        layer.params['b'][:] = [0., 0., -1.]
        numpy.testing.assert_allclose(layer.forward(numpy.array([[1., 2.]])), [[1., 1., 3.]])
        numpy.testing.assert_allclose(layer.forward(numpy.array([[2., 1.]])), [[2., 0., 1.]])
        self.assertEqual(layer.forward(numpy.ones((4, 5, 2))).shape, (4, 5, 3))
        self.assertEqual(layer.n_params, 9)

        layer = neuralnet.Dense(2, 3, activation='softmax')
        numpy.testing.assert_allclose(layer.forward(numpy.ones((4, 2), dtype=numpy.float32)).sum(axis=1), 1.,
                                      rtol=1e-6)

    def test_errors(self):
        with self.assertRaisesRegex(ConfigurationError, 'not supported'):
            neuralnet.Dense(2, 3, activation='tanh')

        layer = neuralnet.Dense(2, 3, name='dense1')
        with self.assertRaisesRegex(StateError, '`dense1` requires a forward pass'):
            layer.backward(numpy.ones((1, 3)))
        with self.assertRaisesRegex(ShapeError, 'expects 2 input features'):
            layer.forward(numpy.ones((1, 4)))

    def test_glorot_uniform(self):
        values = neuralnet.glorot_uniform(numpy.random.default_rng(0), 10, 20, (1000,), numpy.float64)
        self.assertTrue(numpy.all(numpy.abs(values) <= numpy.sqrt(6. / 30.)))
        self.assertEqual(values.dtype, numpy.float64)


class LSTMTestCase(unittest.TestCase):
    def test_param_count(self):
        self.assertEqual(neuralnet.LSTM(32, 64).n_params, 24832)
        self.assertEqual(neuralnet.LSTM(100, 64).n_params, 42240)
        self.assertEqual(neuralnet.lstm_param_count(32, 64), 24832)
        self.assertEqual(neuralnet.lstm_param_count(100, 64), 42240)

        layer = neuralnet.LSTM(3, 2, forget_bias=1.)
        numpy.testing.assert_equal(layer.params['b'], [0., 0., 1., 1., 0., 0., 0., 0.])
        self.assertEqual(layer.params['W'].shape, (3, 8))
        self.assertEqual(layer.params['U'].shape, (2, 8))

    def test_single_step_gates(self):
        def sigmoid(value):
            return 1. / (1. + numpy.exp(-value))

        layer = neuralnet.LSTM(1, 1, dtype=numpy.float64)
        layer.params['W'][...] = [[0.5, -0.25, 0.75, 1.5]]
        layer.params['U'][...] = [[0.3, 0.2, -0.4, 0.1]]
        layer.params['b'][...] = [0.1, 1., -0.2, 0.05]
        x = numpy.array([[[0.8]], [[-1.2]]])
        h = layer.forward(x)

        for i_item, x_t in enumerate([0.8, -1.2]):
            i = sigmoid(0.5 * x_t + 0.1)
            f = sigmoid(-0.25 * x_t + 1.)
            g = numpy.tanh(0.75 * x_t - 0.2)
            o = sigmoid(1.5 * x_t + 0.05)
            c = f * 0. + i * g
            numpy.testing.assert_allclose(h[i_item, 0, 0], o * numpy.tanh(c), rtol=0., atol=1e-12)

        x2 = numpy.array([[[0.8], [0.4]]])
        h2 = layer.forward(x2)
        h_prev = h[0, 0, 0]
        i_prev = sigmoid(0.5 * 0.8 + 0.1)
        c_prev = i_prev * numpy.tanh(0.75 * 0.8 - 0.2)
        i = sigmoid(0.5 * 0.4 + 0.3 * h_prev + 0.1)
        f = sigmoid(-0.25 * 0.4 + 0.2 * h_prev + 1.)
        g = numpy.tanh(0.75 * 0.4 - 0.4 * h_prev - 0.2)
        o = sigmoid(1.5 * 0.4 + 0.1 * h_prev + 0.05)
        numpy.testing.assert_allclose(h2[0, 1, 0], o * numpy.tanh(f * c_prev + i * g), rtol=0., atol=1e-12)

    def test_zero_parameters_and_inputs(self):
        layer = neuralnet.LSTM(3, 2, dtype=numpy.float64)
        for value in layer.params.values():
            value[...] = 0.
        numpy.testing.assert_equal(layer.forward(numpy.zeros((2, 4, 3))), 0.)


    def test_masked_tail_does_not_change_outputs(self):
        rng = numpy.random.default_rng(1)
        layer = neuralnet.LSTM(3, 4, rng=rng, dtype=numpy.float64)
        x = rng.standard_normal((1, 4, 3))
        outputs = layer.forward(x)

        padded = numpy.concatenate([x, rng.standard_normal((1, 3, 3))], axis=1)
        mask = numpy.array([[True] * 4 + [False] * 3])
        padded_outputs = layer.forward(padded, mask)
        numpy.testing.assert_array_equal(padded_outputs[:, :4], outputs)
        for t in range(4, 7):
            numpy.testing.assert_array_equal(padded_outputs[:, t], outputs[:, 3])

    def test_items_are_independent(self):
        rng = numpy.random.default_rng(2)
        layer = neuralnet.LSTM(3, 4, rng=rng, dtype=numpy.float64)
        x = rng.standard_normal((3, 5, 3))
        mask = numpy.array([[True] * 5, [True] * 2 + [False] * 3, [True] * 4 + [False]])
        outputs = layer.forward(x, mask)
        for i_item in range(3):
            n_valid = mask[i_item].sum()
            alone = layer.forward(x[i_item:i_item + 1, :n_valid])
            numpy.testing.assert_allclose(outputs[i_item, :n_valid], alone[0], rtol=1e-12, atol=1e-14)

    def test_shape_error(self):
        with self.assertRaisesRegex(ShapeError, 'B x L x 3'):
            neuralnet.LSTM(3, 2).forward(numpy.ones((2, 3)))


class PoolingTestCase(unittest.TestCase):
    def setUp(self):
        self.y = numpy.array([[[1., 2.], [3., 4.], [100., 100.]]])
        self.mask = numpy.array([[True, True, False]])

    def test_mean(self):
        layer = neuralnet.Pooling(2, 3, PoolingSpec(PoolingScheme.mean), dtype=numpy.float64)
        numpy.testing.assert_allclose(layer.forward(self.y, self.mask), [[2., 3.]])
        numpy.testing.assert_allclose(layer.weights, [[0.5, 0.5, 0.]])
        self.assertEqual(layer.n_params, 0)

    def test_last(self):
        layer = neuralnet.Pooling(2, 3, PoolingSpec(PoolingScheme.last), dtype=numpy.float64)
        numpy.testing.assert_allclose(layer.forward(self.y, self.mask), [[3., 4.]])
        numpy.testing.assert_allclose(layer.forward(self.y), [[100., 100.]])
        self.assertNotIn('u', layer.params)

    def test_attention(self):
        layer = neuralnet.Pooling(2, 4, PoolingSpec(PoolingScheme.attention), dtype=numpy.float64)
        numpy.testing.assert_allclose(layer.params['u'], [0.25, 0.25])

        layer.params['u'][:] = [1., 0.]
        y = numpy.array([[[0., 5.], [numpy.log(3.), 7.], [1000., 0.]]])
        z = layer.forward(y, self.mask)
        numpy.testing.assert_allclose(layer.weights, [[0.25, 0.75, 0.]])
        numpy.testing.assert_allclose(z, [[0.75 * numpy.log(3.), 6.5]])

        layer = neuralnet.Pooling(2, 4, PoolingSpec(PoolingScheme.attention, AttentionMode.literal_double_softmax),
                                  dtype=numpy.float64)
        layer.params['u'][:] = [1., 0.]
        layer.forward(y, self.mask)
        first = 1. / (1. + numpy.exp(0.5))
        numpy.testing.assert_allclose(layer.weights, [[first, 1. - first, 0.]])

    def test_weights_sum_to_one(self):
        rng = numpy.random.default_rng(3)
        y = rng.standard_normal((3, 5, 2))
        mask = numpy.array([[True] * 5, [True] * 2 + [False] * 3, [True] + [False] * 4])
        for scheme in PoolingScheme:
            layer = neuralnet.Pooling(2, 5, PoolingSpec(scheme), dtype=numpy.float64)
            layer.forward(y, mask)
            numpy.testing.assert_allclose(layer.weights.sum(axis=1), 1.)
            numpy.testing.assert_equal(layer.weights[~mask], 0.)

    def test_zero_attention_vector_equals_mean(self):
        rng = numpy.random.default_rng(4)
        y = rng.standard_normal((4, 7, 3))
        mask = numpy.arange(7)[None, :] < numpy.array([7, 3, 1, 5])[:, None]
        mean = neuralnet.Pooling(3, 7, PoolingSpec(PoolingScheme.mean), dtype=numpy.float64)
        attention = neuralnet.Pooling(3, 7, PoolingSpec(PoolingScheme.attention), dtype=numpy.float64)
        attention.params['u'][...] = 0.
        numpy.testing.assert_allclose(attention.forward(y, mask), mean.forward(y, mask), rtol=0., atol=1e-12)
        numpy.testing.assert_allclose(attention.weights, mean.weights, rtol=0., atol=1e-12)

    def test_random_weight_properties(self):
        rng = numpy.random.default_rng(5)
        specs = [PoolingSpec(PoolingScheme.last), PoolingSpec(PoolingScheme.mean),
                 PoolingSpec(PoolingScheme.attention),
                 PoolingSpec(PoolingScheme.attention, AttentionMode.literal_double_softmax)]
        for i_case in range(100):
            n_batch = int(rng.integers(1, 5))
            length = int(rng.integers(1, 12))
            n_units = int(rng.integers(1, 6))
            y = rng.standard_normal((n_batch, length, n_units)) * 10. ** rng.uniform(-2, 2)
            mask = numpy.arange(length)[None, :] < rng.integers(1, length + 1, n_batch)[:, None]
            for spec in specs:
                layer = neuralnet.Pooling(n_units, length, spec, dtype=numpy.float64)
                if 'u' in layer.params:
                    layer.params['u'][...] = rng.standard_normal(n_units)
                z = layer.forward(y, mask)
                msg = '{} {} case {}'.format(spec.scheme.value, spec.mode.value, i_case)
                self.assertTrue(numpy.all(layer.weights >= 0.), msg=msg)
                numpy.testing.assert_allclose(layer.weights.sum(axis=1), 1., rtol=0., atol=1e-9, err_msg=msg)
                numpy.testing.assert_equal(layer.weights[~mask], 0., err_msg=msg)
                numpy.testing.assert_allclose(z, (layer.weights[:, :, None] * y).sum(axis=1), err_msg=msg)

    def test_scaling_attention_vector_keeps_weight_order(self):
        rng = numpy.random.default_rng(6)
        y = rng.standard_normal((3, 8, 4))
        mask = numpy.arange(8)[None, :] < numpy.array([8, 5, 2])[:, None]
        layer = neuralnet.Pooling(4, 8, PoolingSpec(PoolingScheme.attention), dtype=numpy.float64)
        u = rng.standard_normal(4)
        layer.params['u'][...] = u
        layer.forward(y, mask)
        weights = layer.weights.copy()
        for scale in [0.1, 0.5, 2., 7.]:
            layer.params['u'][...] = scale * u
            layer.forward(y, mask)
            for i_item in range(3):
                n_valid = mask[i_item].sum()
                numpy.testing.assert_array_equal(numpy.argsort(layer.weights[i_item, :n_valid]),
                                                 numpy.argsort(weights[i_item, :n_valid]))
                self.assertEqual(numpy.argmax(layer.weights[i_item]), numpy.argmax(weights[i_item]))
            self.assertFalse(numpy.allclose(layer.weights, weights))


    def test_empty_mask(self):
        layer = neuralnet.Pooling(2, 3)
        with self.assertRaisesRegex(PreconditionError, 'at least one valid frame'):
            layer.forward(self.y, numpy.zeros((1, 3), dtype=bool))


class DropoutTestCase(unittest.TestCase):
    def test_dropout(self):
        layer = neuralnet.Dropout(0.33, rng=numpy.random.default_rng(0))
        x = numpy.ones((200, 500), dtype=numpy.float32)

        layer.train(True)
        y = layer.forward(x)
        self.assertAlmostEqual(float(y.mean()), 1., delta=0.02)
        self.assertAlmostEqual(float(numpy.mean(y == 0)), 0.33, delta=0.01)
        numpy.testing.assert_equal(layer.backward(numpy.ones_like(x)), y)

        layer.train(False)
        self.assertIs(layer.forward(x), x)

        with self.assertRaisesRegex(ConfigurationError, r'\[0, 1\)'):
            neuralnet.Dropout(1.)


class LossTestCase(unittest.TestCase):
    def test_cross_entropy(self):
        probs = numpy.array([[0.25, 0.75], [0.5, 0.5]])
        loss, grad = neuralnet.cross_entropy(probs, [1, 0])
        self.assertAlmostEqual(loss, -(numpy.log(0.75) + numpy.log(0.5)) / 2)
        numpy.testing.assert_allclose(grad, [[0., -1. / 1.5], [-1., 0.]])

        with self.assertRaisesRegex(IndexError, r'\[0, 2\)'):
            neuralnet.cross_entropy(probs, [2, 0])

    def test_renormalized_cross_entropy(self):
        scores = numpy.array([[0.2, 0.6], [0.9, 0.9]])
        loss, grad = neuralnet.renormalized_cross_entropy(scores, [1, 0])
        expected, _ = neuralnet.cross_entropy(scores / scores.sum(axis=1, keepdims=True), [1, 0])
        self.assertAlmostEqual(loss, expected)

        h = 1e-6
        for i_row in range(2):
            for i_col in range(2):
                perturbed = scores.copy()
                perturbed[i_row, i_col] += h
                loss_plus, _ = neuralnet.renormalized_cross_entropy(perturbed, [1, 0])
                self.assertAlmostEqual(grad[i_row, i_col], (loss_plus - loss) / h, places=4)


class OptimizerTestCase(unittest.TestCase):
    def test_clip_by_global_norm(self):
        grads = {'a': numpy.array([3., 0.]), 'b': numpy.array([4.])}
        self.assertEqual(neuralnet.clip_by_global_norm(grads, 1.), 5.)
        numpy.testing.assert_allclose(grads['a'], [0.6, 0.])
        numpy.testing.assert_allclose(grads['b'], [0.8])

        grads = {'a': numpy.array([0.3, 0.4])}
        self.assertAlmostEqual(neuralnet.clip_by_global_norm(grads, 1.), 0.5)
        numpy.testing.assert_allclose(grads['a'], [0.3, 0.4])

        grads = {'a': numpy.array([30., 40.]), 'b': numpy.array([1000.])}
        self.assertEqual(neuralnet.clip_by_global_norm(grads, 1., names=['a']), 50.)
        numpy.testing.assert_allclose(grads['b'], [1000.])

    def test_adam(self):
        params = {'w': numpy.array([1., 1.]), 'frozen': numpy.array([1.])}
        grads = {'w': numpy.array([0.5, -2.]), 'frozen': numpy.array([1.])}
        optimizer = neuralnet.Adam(lr=0.1, clip_norm=None)
        norm = optimizer.step(params, grads, frozen={'frozen'})
        self.assertAlmostEqual(norm, numpy.sqrt(4.25))
        numpy.testing.assert_allclose(params['w'], [0.9, 1.1], rtol=1e-6)
        numpy.testing.assert_equal(params['frozen'], [1.])
        self.assertEqual(optimizer.state.t, 1)
        self.assertNotIn('frozen', optimizer.state.m)

        optimizer.step(params, grads, frozen={'frozen'})
        numpy.testing.assert_allclose(params['w'], [0.8, 1.2], rtol=1e-6)

    def test_adam_minimizes_quadratic(self):
        params = {'w': numpy.array([3., -2.])}
        optimizer = neuralnet.Adam(lr=0.05, clip_norm=5.)
        for i_step in range(500):
            optimizer.step(params, {'w': 2 * params['w']})
        numpy.testing.assert_allclose(params['w'], 0., atol=0.1)


class GradientCheckTestCase(unittest.TestCase):
    def _network(self, spec):
        rng = numpy.random.default_rng(4)
        layers = [
            neuralnet.Dense(3, 4, activation='relu', rng=rng, dtype=numpy.float64),
            neuralnet.LSTM(4, 3, rng=rng, dtype=numpy.float64),
            neuralnet.Pooling(3, 5, spec, dtype=numpy.float64),
            neuralnet.Dense(3, 3, activation='softmax', rng=rng, dtype=numpy.float64),
        ]
        if spec.scheme == PoolingScheme.attention:
            layers[2].params['u'][:] = rng.standard_normal(3)
        x = rng.standard_normal((2, 5, 3))
        mask = numpy.array([[True] * 5, [True] * 3 + [False] * 2])
        labels = numpy.array([2, 0])

        params = {}
        for i_layer, layer in enumerate(layers):
            for key, value in layer.params.items():
                params['{}.{}'.format(i_layer, key)] = value

        def loss_fn():
            y = x
            for layer in layers:
                y = layer.forward(y, mask)
            return neuralnet.cross_entropy(y, labels)

        def loss_and_grad():
            loss, grad = loss_fn()
            for layer in reversed(layers):
                grad = layer.backward(grad)
            grads = {}
            for i_layer, layer in enumerate(layers):
                for key, value in layer.grads.items():
                    grads['{}.{}'.format(i_layer, key)] = value.copy()
            return loss, grads

        return params, (lambda: loss_fn()[0]), loss_and_grad

    def test_check_gradients(self):
        for spec in [PoolingSpec(PoolingScheme.last), PoolingSpec(PoolingScheme.mean),
                     PoolingSpec(PoolingScheme.attention),
                     PoolingSpec(PoolingScheme.attention, AttentionMode.literal_double_softmax)]:
            params, loss_fn, loss_and_grad = self._network(spec)
            _, grads = loss_and_grad()
            max_error, errors = neuralnet.check_gradients(loss_fn, params, grads)
            self.assertLess(max_error, 1e-4, msg=spec.scheme.value)
            self.assertEqual(set(errors.keys()), set(params.keys()))

    def test_check_gradients_detects_wrong_gradients(self):
        params, loss_fn, loss_and_grad = self._network(PoolingSpec(PoolingScheme.mean))
        _, grads = loss_and_grad()
        grads['1.U'] = 2 * grads['1.U'] + 0.1
        values = {name: value.copy() for name, value in params.items()}
        max_error, errors = neuralnet.check_gradients(loss_fn, params, grads, names=['1.U', '3.W'])
        self.assertGreater(errors['1.U'], 1e-2)
        self.assertLess(errors['3.W'], 1e-4)
        self.assertEqual(max_error, errors['1.U'])
        for name, value in values.items():
            numpy.testing.assert_array_equal(params[name], value)

    def test_relative_error(self):
        self.assertEqual(float(neuralnet.relative_error(0., 0.)), 0.)
        self.assertAlmostEqual(float(neuralnet.relative_error(1., 3.)), 0.5)
        self.assertAlmostEqual(float(neuralnet.relative_error(1e-7, 0.)), 1e-2)
