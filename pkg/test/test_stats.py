import os
import shutil
import tempfile
import unittest

# Tabulate 0.8.3 has invalid escape sequences
import warnings
warnings.filterwarnings("ignore", category=DeprecationWarning)

from onlineridge import ParamError
from onlineridge.ridge import run_ridge
from onlineridge.stats import StepLogStats, text_hist
from onlineridge.streams import SyntheticSpec, generate_synthetic, read_step_log, write_step_log


class StatsTest(unittest.TestCase):

    def test_records(self):
        stream = generate_synthetic(SyntheticSpec(3, 200, noise_sigma=0.5), 1)
        _, records = run_ridge(stream, 1.0)

        stats = StepLogStats(records).run()

        q = stats['q_or_d']
        self.assertEqual(200, q.n)
        self.assertAlmostEqual(sum(r.q for r in records) / 200, q.mean, places=10)
        self.assertEqual(max(r.q for r in records), q.max)
        self.assertEqual(min(r.q for r in records), q.min)
        self.assertEqual(200, sum(q.bins))

        # No clipping and no sigma, so these columns are empty
        self.assertEqual(0, stats['gamma_clipped'].n)
        self.assertEqual(200, stats['log_loss'].nulls)
        self.assertIsNone(stats['log_loss'].mean)

        self.assertIn('weighted_sq_loss', str(stats))
        self.assertNotIn('| log_loss ', str(stats))

    def test_step_log_rows(self):
        tmp = tempfile.mkdtemp()
        try:
            _, records = run_ridge([([1], 1), ([1], 1)], 1)
            path = os.path.join(tmp, 'steps.csv')
            write_step_log(records, path)

            stats = StepLogStats(read_step_log(path), columns=['weighted_sq_loss']).run()

            self.assertEqual(['weighted_sq_loss'], list(stats.dict.keys()))
            self.assertAlmostEqual(1.0 / 3, stats['weighted_sq_loss'].mean, places=14)
        finally:
            shutil.rmtree(tmp)

    def test_bad_column(self):
        with self.assertRaises(ParamError):
            StepLogStats([], columns=['t'])

    def test_empty(self):
        self.assertIn('None', str(StepLogStats([]).run()))

    def test_text_hist(self):
        self.assertEqual('', text_hist([]))
        self.assertEqual('', text_hist([0, 0]))
        self.assertEqual(' ▉', text_hist([0, 8]))
        self.assertEqual(' #', text_hist([0, 8], ascii=True))


if __name__ == '__main__':
    unittest.main()
