import math
import time
import unittest

# Tabulate 0.8.3 has invalid escape sequences
import warnings
warnings.filterwarnings("ignore", category=DeprecationWarning)

import numpy as np

from onlineridge import InputError, ParamError
from onlineridge.bayes import GaussianExpert
from onlineridge.bounds import BoundReport, format_reports, verify_cor1, verify_cor2, verify_cor5, \
    verify_cor5_tuned, verify_det_bound, verify_det_identity, verify_inverse_monotone, verify_kernel_det_bound, \
    verify_kernel_det_identity, verify_mixture_identity, verify_sigma_invariance, verify_thm1, verify_thm2, \
    verify_thm2_bound, verify_thm3, verify_thm4, verify_trend_cor3
from onlineridge.kernels import KernelSpec
from onlineridge.streams import KernelStream, Stream, SyntheticSpec, generate_synthetic, make_rng

UNIT_STREAM = Stream([[1.0], [1.0]], [1.0, 1.0])
RBF = KernelSpec('rbf', gamma=1.0)


def random_stream(seed, n, T, y=10.0):
    rng = make_rng(seed)
    return Stream(rng.uniform(-1, 1, size=(T, n)), rng.uniform(-y, y, size=T))


class BoundReportTest(unittest.TestCase):

    def test_pass_rules(self):
        r = BoundReport('x', 100.0, 100.00005, BoundReport.EQUALITY)
        self.assertTrue(r.passed)

        r = BoundReport('x', 0.0, 2e-6, BoundReport.EQUALITY)
        self.assertFalse(r.passed)

        r = BoundReport('x', 1.00000005, 1.0, BoundReport.UPPER_BOUND)
        self.assertTrue(r.passed)
        self.assertAlmostEqual(-5e-8, r.gap, delta=1e-15)

        r = BoundReport('x', 1.001, 1.0, BoundReport.UPPER_BOUND)
        self.assertFalse(r.passed)

        r = BoundReport('x', 0.5, None, BoundReport.INFORMATIONAL)
        self.assertIsNone(r.passed)
        self.assertIsNone(r.gap)

        with self.assertRaises(ParamError):
            BoundReport('x', 0, 0, 'roughly')

    def test_dict_and_format(self):
        r = verify_thm1(UNIT_STREAM, 1)
        d = r.dict

        self.assertEqual(['name', 'lhs', 'rhs', 'gap', 'relation', 'tolerance', 'pass', 'meta', 'detail'],
                         list(d.keys()))
        self.assertEqual('thm1', d['name'])
        self.assertEqual('equality', d['relation'])
        self.assertTrue(d['pass'])
        self.assertEqual(2, d['meta']['T'])

        table = format_reports([r, verify_trend_cor3(UNIT_STREAM, 1)])
        self.assertIn('thm1', table)
        self.assertIn('pass', table)
        self.assertIn('info', table)


class LinearBoundsTest(unittest.TestCase):

    def test_thm1(self):
        r = verify_thm1(UNIT_STREAM, 1)
        self.assertAlmostEqual(2.0 / 3, r.lhs, delta=1e-12)
        self.assertAlmostEqual(2.0 / 3, r.rhs, delta=1e-12)
        self.assertLessEqual(r.gap, 1e-12)
        self.assertTrue(r.passed)

        r = verify_thm1(Stream([[1.0]], [1.0]), 1)
        self.assertAlmostEqual(0.5, r.lhs, places=15)
        self.assertAlmostEqual(0.5, r.rhs, places=15)

        r = verify_thm1(Stream(np.ones((5, 2)), np.zeros(5)), 1)
        self.assertEqual(0.0, r.lhs)
        self.assertEqual(0.0, r.rhs)

    def test_thm1_battery(self):
        rng = make_rng(100)

        for i in range(15):
            n = int(rng.integers(1, 21))
            T = int(rng.integers(1, 400))
            a = [0.1, 1.0, 10.0][i % 3]

            stream = random_stream(200 + i, n, T)

            self.assertTrue(verify_thm1(stream, a).passed)
            self.assertTrue(verify_det_identity(stream, a).passed)
            self.assertTrue(verify_det_bound(stream, a, x_inf=1.0).passed)
            self.assertTrue(verify_cor1(stream, a, 10.0).passed)

    def test_thm1_full_battery(self):
        """100 streams with n <= 20, T <= 1000, |y| <= 10, inside the 10 s budget"""
        rng = make_rng(101)
        start = time.time()

        for i in range(100):
            n = int(rng.integers(1, 21))
            T = int(rng.integers(1, 1001))
            a = [0.1, 1.0, 10.0][i % 3]

            r = verify_thm1(random_stream(1000 + i, n, T), a)
            self.assertLessEqual(r.gap, 1e-6 * max(1.0, abs(r.rhs)), msg='stream {}'.format(i))

        self.assertLess(time.time() - start, 10.0)

    def test_cor1(self):
        r = verify_cor1(UNIT_STREAM, 1, 1)
        self.assertAlmostEqual(1.25, r.lhs, places=14)
        self.assertAlmostEqual(2.0 / 3 + 4 * math.log(3), r.rhs, places=12)
        self.assertTrue(r.passed)

        r = verify_cor1(Stream(np.ones((3, 1)), np.zeros(3)), 1, 1)
        self.assertEqual(0.0, r.lhs)
        self.assertTrue(r.passed)

        with self.assertRaises(InputError):
            verify_cor1(Stream([[1.0]], [2.0]), 1, 1)

    def test_det_bound(self):
        r = verify_det_bound(Stream([[1.0]], [0.0]), 1, x_inf=1)
        self.assertAlmostEqual(math.log(2), r.lhs, places=15)
        self.assertAlmostEqual(math.log(2), r.rhs, places=15)
        self.assertTrue(r.passed)

        r = verify_det_bound(Stream(np.zeros((4, 2)), np.ones(4)), 1, x_inf=1)
        self.assertEqual(0.0, r.lhs)
        self.assertTrue(r.passed)

        r = verify_det_bound(random_stream(1, 5, 100), 1, x_inf=1)
        self.assertAlmostEqual(5 * math.log(101), r.rhs, places=12)
        self.assertTrue(r.passed)

        with self.assertRaises(InputError):
            verify_det_bound(Stream([[2.0]], [0.0]), 1, x_inf=1)

    def test_cor2_and_inverse_monotone(self):
        stream = generate_synthetic(SyntheticSpec(4, 300, noise_sigma=0.5, x_dist=('sphere', 2.0)), 5)

        r = verify_cor2(stream, 1.0, z=2.0)
        self.assertTrue(r.passed)
        self.assertGreaterEqual(r.gap, 0)

        r = verify_inverse_monotone(stream, 1.0, probes=1000, seed=3)
        self.assertTrue(r.passed)
        self.assertEqual(1000, r.detail['probes'])

        with self.assertRaises(InputError):
            verify_cor2(stream, 1.0, z=1.0)

    def test_thm2(self):
        r = verify_thm2(Stream([[1.0]], [1.0]), 1, 1)
        expected = 0.5 * math.log(4 * math.pi) + 0.25
        self.assertAlmostEqual(expected, r.lhs, places=14)
        self.assertAlmostEqual(expected, r.rhs, places=12)

        r = verify_thm2(Stream(np.zeros((0, 2)), []), 1, 1)
        self.assertEqual(0.0, r.lhs)
        self.assertEqual(0.0, r.rhs)

        for sigma in (0.5, 1.0, 2.0):
            stream = random_stream(300, 3, 200)
            r = verify_thm2(stream, 1.0, sigma)
            self.assertTrue(r.passed)
            self.assertLessEqual(r.detail['stepwise_gap'], 1e-9 * max(1.0, abs(r.lhs)))

            self.assertTrue(verify_thm2_bound(stream, 1.0, sigma).passed)

    def test_sigma_invariance(self):
        r = verify_sigma_invariance(random_stream(301, 3, 100), 0.5)

        self.assertTrue(r.passed)
        self.assertLessEqual(r.lhs, 1e-10)
        self.assertEqual([0.1, 1.0, 10.0], r.detail['sigmas'])

    def test_mixture_identity(self):
        rng = make_rng(302)
        stream = random_stream(303, 2, 50, y=3.0)
        experts = [GaussianExpert(rng.standard_normal(2), 1.0) for _ in range(5)]

        r = verify_mixture_identity(experts, stream)
        self.assertTrue(r.passed)
        self.assertLessEqual(r.gap, 1e-9)

        r = verify_mixture_identity(experts, stream, prior=[5, 4, 3, 2, 1])
        self.assertTrue(r.passed)

    def test_trend(self):
        x = np.array([0.6, 0.8])
        stream = Stream(np.tile(x, (2000, 1)), np.ones(2000))

        r = verify_trend_cor3(stream, 1.0)

        self.assertTrue(r.informational)
        self.assertIsNone(r.passed)
        self.assertLess(r.lhs, 1e-3)

        for t, q in enumerate(r.detail['qs'], 1):
            self.assertAlmostEqual(1.0 / t, q, delta=1e-10)

        r = verify_trend_cor3(Stream(np.zeros((10, 2)), np.ones(10)), 1.0)
        self.assertEqual([0.0] * 10, r.detail['qs'])


class KernelBoundsTest(unittest.TestCase):

    def test_thm3_micro(self):
        r = verify_thm3(Stream([[0.2, 0.1]], [1.0]), RBF, 1)
        self.assertEqual(0.5, r.lhs)
        self.assertAlmostEqual(0.5, r.rhs, places=15)

        r = verify_thm3(random_stream(400, 2, 30, y=0.0), RBF, 1)
        self.assertEqual(0.0, r.lhs)
        self.assertEqual(0.0, r.rhs)

        r = verify_cor5(random_stream(400, 2, 30, y=0.0), RBF, 1, 1)
        self.assertEqual(0.0, r.lhs)
        self.assertTrue(r.passed)

    def test_linear_kernel_matches_primal(self):
        stream = random_stream(401, 4, 80)

        primal = verify_thm1(stream, 2.0)
        dual = verify_thm3(stream, KernelSpec('linear'), 2.0)

        self.assertAlmostEqual(primal.lhs, dual.lhs, delta=1e-7 * max(1.0, primal.lhs))
        self.assertAlmostEqual(primal.rhs, dual.rhs, delta=1e-7 * max(1.0, primal.rhs))

    def test_kernel_battery(self):
        specs = [KernelSpec('rbf', gamma=0.1), RBF, KernelSpec('poly', degree=2, offset=1),
                 KernelSpec('poly', degree=3, offset=0.5), KernelSpec('linear')]

        for i, spec in enumerate(specs):
            stream = random_stream(410 + i, 3, 80, y=2.0)

            self.assertTrue(verify_thm3(stream, spec, 1.0).passed, str(spec))
            self.assertTrue(verify_thm4(stream, spec, 1.0, 0.7).passed, str(spec))
            self.assertTrue(verify_cor5(stream, spec, 1.0, 2.0).passed, str(spec))
            self.assertTrue(verify_kernel_det_identity(stream, spec, 1.0).passed, str(spec))

        r = verify_kernel_det_identity(random_stream(415, 2, 40), RBF, 1.0, refactor_every=16)
        self.assertTrue(r.passed)
        self.assertLess(r.detail['max_drift'], 1e-9)
        self.assertIn('max_drift', r.dict['detail'])

    def test_kernel_step_limit(self):
        with self.assertRaises(ParamError):
            verify_thm3(random_stream(416, 2, 20), RBF, 1.0, max_steps=10)

        self.assertTrue(verify_thm3(random_stream(416, 2, 20), RBF, 1.0, max_steps=20).passed)

    def test_kernel_det_bound(self):
        stream = random_stream(420, 3, 60)

        r = verify_kernel_det_bound(stream, RBF, 1.0)
        self.assertAlmostEqual(60 * math.log(2), r.rhs, places=12)
        self.assertTrue(r.passed)

        with self.assertRaises(ParamError):
            verify_kernel_det_bound(stream, KernelSpec('linear'), 1.0)

        with self.assertRaises(InputError):
            verify_kernel_det_bound(stream, KernelSpec('linear'), 1.0, c_f=0.1)

    def test_cor5_tuned(self):
        stream = generate_synthetic(SyntheticSpec(2, 100, noise_sigma=0.2, y_bound=1.0), 9)

        r = verify_cor5_tuned(stream, RBF, 1.0)
        self.assertTrue(r.passed)
        self.assertAlmostEqual(10.0, r.meta['a'], places=12)

        with self.assertRaises(InputError):
            verify_cor5_tuned(stream, RBF, 0.5)

    def test_precomputed(self):
        ks = KernelStream([([], 1.0, 1.0), ([1.0], 1.0, 1.0)])
        spec = KernelSpec('precomputed')

        r = verify_thm3(ks, spec, 1)
        self.assertAlmostEqual(2.0 / 3, r.lhs, delta=1e-12)
        self.assertAlmostEqual(2.0 / 3, r.rhs, delta=1e-12)

        self.assertTrue(verify_cor5(ks, spec, 1, 1).passed)
        self.assertTrue(verify_kernel_det_identity(ks, spec, 1).passed)


if __name__ == '__main__':
    unittest.main()
