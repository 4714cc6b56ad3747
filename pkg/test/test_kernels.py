import math
import unittest

import numpy as np

from onlineridge import DimensionError, NumericError, ParamError
from onlineridge.bayes import brr_predict
from onlineridge.kernels import KernelModel, KernelSpec, kbrr_predict, kernel_eval, kernel_matrix, krr_predict, \
    krr_update, krr_update_values, log_det_kernel, refactor, representer_coefficients, rkhs_min_direct, \
    rkhs_min_value, rkhs_min_value_gram, run_kernel, tuned_a
from onlineridge.linalg import batch_ridge
from onlineridge.ridge import ridge_new, ridge_update
from onlineridge.streams import KernelStream, Stream, make_rng

LINEAR = KernelSpec('linear')
RBF = KernelSpec('rbf', gamma=1.0)


def random_stream(seed, n=3, T=60):
    rng = make_rng(seed)
    return Stream(rng.uniform(-1, 1, size=(T, n)), rng.uniform(-5, 5, size=T))


class KernelSpecTest(unittest.TestCase):

    def test_parse(self):
        k = KernelSpec.parse('rbf:gamma=0.5')
        self.assertEqual('rbf', k.kind)
        self.assertEqual(0.5, k.gamma)
        self.assertEqual(1.0, k.c_f)

        k = KernelSpec.parse('poly:degree=2,offset=1')
        self.assertEqual(2, k.degree)
        self.assertEqual(1.0, k.offset)
        self.assertIsNone(k.c_f)
        self.assertEqual('poly:degree=2,offset=1.0', str(k))

        self.assertEqual('linear', str(KernelSpec.parse('linear')))
        self.assertEqual('rbf', KernelSpec.parse('gaussian:gamma=2').kind)
        self.assertEqual(3.0, KernelSpec.parse('linear', c_f=3).c_f)

        for bad in ('rbf', 'rbf:gamma=-1', 'poly:degree=0', 'cosine', 'rbf:sigma=1', 'rbf:gamma'):
            with self.assertRaises(ParamError, msg=bad):
                KernelSpec.parse(bad)

    def test_eval(self):
        self.assertEqual(1.0, kernel_eval(KernelSpec('rbf', gamma=3.7), [1, 2], [1, 2]))
        self.assertEqual(11.0, kernel_eval(LINEAR, [1, 2], [3, 4]))
        self.assertEqual(4.0, kernel_eval(KernelSpec('poly', degree=2, offset=1), [1], [1]))
        self.assertAlmostEqual(math.exp(-0.5 * 2), RBF([0, 0], [1, 1]) ** 0.5, places=15)

        with self.assertRaises(DimensionError):
            kernel_eval(LINEAR, [1, 2], [1])

        with self.assertRaises(ParamError):
            kernel_eval(KernelSpec('precomputed'), [1], [1])

    def test_matrix(self):
        rng = make_rng(11)
        X = rng.uniform(-1, 1, size=(6, 3))

        for spec in (LINEAR, RBF, KernelSpec('poly', degree=3, offset=1)):
            K = kernel_matrix(spec, X)
            expected = np.array([[kernel_eval(spec, x, z) for z in X] for x in X])

            np.testing.assert_allclose(expected, K, rtol=1e-12, atol=1e-14)
            np.testing.assert_array_equal(K, K.T)


class KernelRidgeTest(unittest.TestCase):

    def test_predict_empty(self):
        m = KernelModel(RBF, 1)
        self.assertEqual((0.0, 1.0), krr_predict(m, [0.3, 0.1]))

        m = KernelModel(LINEAR, 2)
        self.assertEqual((0.0, 2.0), krr_predict(m, [2]))

    def test_unit_stream_linear(self):
        m = KernelModel(LINEAR, 1)

        m, r1 = krr_update(m, [1], 1)
        self.assertEqual(0.5, r1.weighted_sq_loss)

        gamma, d = krr_predict(m, [1])
        self.assertAlmostEqual(0.5, gamma, places=15)
        self.assertAlmostEqual(0.5, d, places=15)

        # Schur complement a (1 + d) of the duplicate input
        self.assertAlmostEqual(1.5, m.a * (1 + d), places=15)

        m, r2 = krr_update(m, [1], 1)
        self.assertAlmostEqual(2.0 / 3, m.weighted_loss_acc, delta=1e-12)
        self.assertAlmostEqual(math.log(3), m.log_det_acc, places=14)

        np.testing.assert_allclose(np.linalg.inv(np.eye(2) + m.K), m.g_inv, rtol=1e-12)

    def test_rbf_first_step(self):
        m = KernelModel(RBF, 1)
        m, r = krr_update(m, [0.4, -0.2], 1)

        self.assertEqual(0.5, r.weighted_sq_loss)
        self.assertAlmostEqual(0.5, rkhs_min_value(RBF, [[0.4, -0.2]], [1], 1), places=15)
        self.assertAlmostEqual(0.5, representer_coefficients([[1.0]], [1], 1)[0], places=15)

    def test_kbrr_predict(self):
        p = kbrr_predict(KernelModel(RBF, 1), [1, 1], 1)
        self.assertEqual((0.0, 2.0), (p.mean, p.variance))

        p = kbrr_predict(KernelModel(RBF, 4), [1, 1], 1)
        self.assertEqual((0.0, 1.25), (p.mean, p.variance))

        with self.assertRaises(ParamError):
            kbrr_predict(KernelModel(RBF, 1), [1, 1], 0)

    def test_primal_dual(self):
        """Under the linear kernel the kernel learner makes the primal predictions"""
        stream = random_stream(12, n=4, T=80)

        m = KernelModel(LINEAR, 0.7)
        s = ridge_new(0.7, 4)

        for x, y in stream:
            p_primal = brr_predict(s, x, 1.3)
            p_kernel = kbrr_predict(m, x, 1.3)
            self.assertAlmostEqual(p_primal.mean, p_kernel.mean, delta=1e-8)
            self.assertAlmostEqual(p_primal.variance, p_kernel.variance, delta=1e-9)

            s, rp = ridge_update(s, x, y)
            m, rk = krr_update(m, x, y)

            self.assertAlmostEqual(rp.gamma, rk.gamma, delta=1e-8)
            self.assertAlmostEqual(rp.q, rk.q, delta=1e-8)

        self.assertAlmostEqual(s.weighted_loss_acc, m.weighted_loss_acc, delta=1e-7 * s.weighted_loss_acc)

    def test_weighted_loss_battery(self):
        specs = [LINEAR, KernelSpec('rbf', gamma=0.1), RBF, KernelSpec('poly', degree=2, offset=1),
                 KernelSpec('poly', degree=3, offset=1)]

        for i, spec in enumerate(specs):
            stream = random_stream(20 + i, n=3, T=70)

            for a in (0.5, 1.0, 10.0):
                m, records = run_kernel(stream, spec, a)
                K = kernel_matrix(spec, stream.xs)

                rhs = rkhs_min_value_gram(K, stream.ys, a)
                self.assertLessEqual(abs(m.weighted_loss_acc - rhs), 1e-6 * max(1.0, rhs), msg=str(spec))
                self.assertAlmostEqual(log_det_kernel(K, a), m.log_det_acc, delta=1e-7)

    def test_rkhs_closed_form(self):
        """a Y'(aI + K)^-1 Y matches a direct minimization over the coefficients"""

        for spec in (RBF, KernelSpec('poly', degree=2, offset=1)):
            stream = random_stream(30, n=2, T=25)
            K = kernel_matrix(spec, stream.xs)

            _, direct = rkhs_min_direct(K, stream.ys, 2.0)
            self.assertAlmostEqual(direct, rkhs_min_value_gram(K, stream.ys, 2.0), delta=1e-7 * direct)

        stream = random_stream(31, n=5, T=60)
        _, min_value = batch_ridge(stream.xs, stream.ys, 1.5)
        self.assertAlmostEqual(min_value, rkhs_min_value(LINEAR, stream.xs, stream.ys, 1.5), delta=1e-7 * min_value)

        self.assertEqual(0.0, rkhs_min_value(RBF, stream.xs, np.zeros(60), 1.0))

    def test_refactor(self):
        stream = random_stream(13, T=40)

        m, _ = run_kernel(stream, RBF, 0.5, refactor_every=None)
        incremental = m.g_inv.copy()

        drift = refactor(m)

        self.assertLess(drift, 1e-9)
        np.testing.assert_allclose(incremental, m.g_inv, rtol=1e-8, atol=1e-10)

        m2, _ = run_kernel(stream, RBF, 0.5, refactor_every=7)
        self.assertAlmostEqual(m.weighted_loss_acc, m2.weighted_loss_acc, delta=1e-9)

    def test_max_steps(self):
        from unittest import mock

        from onlineridge import kernels

        # A stream over the limit is refused before any update runs
        with mock.patch.object(kernels, 'krr_update_values', wraps=kernels.krr_update_values) as update:
            with self.assertRaises(ParamError) as cm:
                run_kernel(random_stream(14, T=600), RBF, 1, max_steps=500)

            self.assertEqual(0, update.call_count)

        self.assertIn('600 steps', str(cm.exception))

        m, records = run_kernel(random_stream(14, T=5), RBF, 1, max_steps=5)
        self.assertEqual(5, len(records))

        # Driving the model step by step still hits the per-step guard
        with self.assertRaises(ParamError):
            krr_update(m, [0.1, 0.2, 0.3], 1.0)

    def test_max_drift(self):
        stream = random_stream(16, T=30)

        m, _ = run_kernel(stream, RBF, 1.0, refactor_every=None)
        self.assertEqual(0.0, m.max_drift)

        m, _ = run_kernel(stream, RBF, 1.0, refactor_every=10)
        self.assertGreaterEqual(m.max_drift, 0.0)
        self.assertLess(m.max_drift, 1e-9)

        drift = refactor(m)
        self.assertGreaterEqual(m.max_drift, drift)

    def test_precomputed(self):
        ks = KernelStream([([], 1.0, 1.0), ([1.0], 1.0, 1.0)])
        spec = KernelSpec('precomputed')

        m, records = run_kernel(ks, spec, 1)
        self.assertAlmostEqual(2.0 / 3, m.weighted_loss_acc, delta=1e-12)

        with self.assertRaises(ParamError):
            run_kernel([([1], 1)], spec, 1)

        with self.assertRaises(ParamError):
            krr_update(KernelModel(spec, 1), [1], 1)

    def test_not_psd(self):
        m = KernelModel(KernelSpec('precomputed'), 1)
        m, _ = krr_update_values(m, [], 1.0, 1.0)

        # K = [[1, 5], [5, 1]] has a negative eigenvalue large enough to break aI + K
        with self.assertRaises(NumericError):
            krr_update_values(m, [5.0], 1.0, 1.0)

        with self.assertRaises(DimensionError):
            krr_update_values(m, [1.0, 2.0], 1.0, 1.0)

    def test_tuned_a(self):
        self.assertEqual(10.0, tuned_a(1.0, 100))

        with self.assertRaises(ParamError):
            tuned_a(None, 100)

        with self.assertRaises(ParamError):
            tuned_a(1.0, 0)

    def test_kbrr_log_loss(self):
        stream = random_stream(15, T=30)
        m, records = run_kernel(stream, RBF, 1.0, sigma=0.5)

        self.assertAlmostEqual(sum(r.log_loss for r in records), m.log_loss_acc, places=9)

    def test_model_errors(self):
        with self.assertRaises(ParamError):
            KernelModel(RBF, 0)

        with self.assertRaises(ParamError):
            KernelModel(RBF, 1, refactor_every=0)


if __name__ == '__main__':
    unittest.main()
