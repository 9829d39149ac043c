import unittest

import numpy as np
import numpy.testing as npt

from shufflepriv._core import (ConfigurationError, Dataset, DimensionError,
                               Sample)
from shufflepriv._tasks import (LabelEncoding, Task, TaskObjective,
                                clipped_grad, grad, loss, step_function)


def _finite_difference(task, x, q, h=1e-6):
    out = np.zeros_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (loss(task, x + e, q) - loss(task, x - e, q)) / (2 * h)
    return out


class TestLosses(unittest.TestCase):

    def test_mean_estimation(self):
        task = TaskObjective(Task.MEAN_ESTIMATION)
        q = Sample(np.array([1., 2.]))
        self.assertAlmostEqual(loss(task, [0., 0.], q), 2.5)
        npt.assert_allclose(grad(task, [0., 0.], q), [-1, -2])

    def test_ridge(self):
        task = TaskObjective(Task.RIDGE_REGRESSION)
        q = Sample(np.array([1., 1.]), 3.0)
        self.assertAlmostEqual(loss(task, [1., 0.], q), 4.0)
        npt.assert_allclose(grad(task, [1., 0.], q), [-4, -4])

    def test_logistic_at_zero(self):
        task = TaskObjective(Task.LASSO_LOGISTIC)
        q = Sample(np.array([2., 0.]), 1.0)
        self.assertAlmostEqual(loss(task, [0., 0.], q), np.log(2))
        npt.assert_allclose(grad(task, [0., 0.], q), [-1, 0])

    def test_logistic_stable(self):
        task = TaskObjective(Task.LASSO_LOGISTIC)
        q = Sample(np.array([1.]), -1.0)
        self.assertAlmostEqual(loss(task, [1000.], q), 1000.0)
        self.assertTrue(np.isfinite(loss(task, [-1000.], q)))

    def test_label_encodings_agree(self):
        pm1 = TaskObjective(Task.LASSO_LOGISTIC)
        zo = TaskObjective(Task.LASSO_LOGISTIC,
                           label_encoding=LabelEncoding.ZERO_ONE)
        x = np.array([0.3, -0.7])
        a = np.array([1.5, 0.2])
        self.assertAlmostEqual(loss(pm1, x, Sample(a, -1.0)),
                               loss(zo, x, Sample(a, 0.0)))
        npt.assert_allclose(grad(pm1, x, Sample(a, 1.0)),
                            grad(zo, x, Sample(a, 1.0)))

    def test_bad_labels(self):
        task = TaskObjective(Task.LASSO_LOGISTIC)
        with self.assertRaises(ConfigurationError):
            loss(task, [0.], Sample(np.array([1.]), 0.0))

    def test_missing_response(self):
        task = TaskObjective(Task.RIDGE_REGRESSION)
        with self.assertRaises(DimensionError):
            grad(task, [0.], Sample(np.array([1.])))

    def test_dimension_mismatch(self):
        task = TaskObjective(Task.MEAN_ESTIMATION)
        with self.assertRaises(DimensionError):
            grad(task, [0., 0., 0.], Sample(np.array([1., 2.])))


class TestGradientCheck(unittest.TestCase):

    def setUp(self):
        self.state = np.random.RandomState(0)

    def _check(self, task, labels):
        for _ in range(100):
            d = self.state.randint(1, 6)
            x = self.state.normal(size=d)
            a = self.state.normal(size=d)
            y = None if labels is None else float(self.state.choice(labels))
            q = Sample(a, y)
            npt.assert_allclose(_finite_difference(task, x, q),
                                grad(task, x, q), rtol=1e-5, atol=1e-8)

    def test_mean_estimation(self):
        self._check(TaskObjective(Task.MEAN_ESTIMATION), None)

    def test_ridge(self):
        self._check(TaskObjective(Task.RIDGE_REGRESSION),
                    [-1.5, 0.0, 0.3, 2.0])

    def test_logistic(self):
        self._check(TaskObjective(Task.LASSO_LOGISTIC), [-1.0, 1.0])


class TestConvexity(unittest.TestCase):

    def test_midpoint(self):
        state = np.random.RandomState(4)
        cases = [(Task.MEAN_ESTIMATION, None),
                 (Task.RIDGE_REGRESSION, [-2.0, 0.5, 1.0]),
                 (Task.LASSO_LOGISTIC, [-1.0, 1.0])]
        for kind, labels in cases:
            task = TaskObjective(kind)
            for _ in range(200):
                a = state.normal(scale=2, size=4)
                y = None if labels is None else float(state.choice(labels))
                q = Sample(a, y)
                x = state.normal(scale=3, size=4)
                z = state.normal(scale=3, size=4)
                mid = loss(task, (x + z) / 2, q)
                ends = (loss(task, x, q) + loss(task, z, q)) / 2
                self.assertLessEqual(mid, ends + 1e-12 * (1 + abs(ends)))

    def test_mean_estimation_gradient_is_1_lipschitz(self):
        state = np.random.RandomState(5)
        task = TaskObjective(Task.MEAN_ESTIMATION)
        for _ in range(100):
            q = Sample(state.normal(size=3))
            x = state.normal(scale=4, size=3)
            z = state.normal(scale=4, size=3)
            npt.assert_allclose(
                np.linalg.norm(grad(task, x, q) - grad(task, z, q)),
                np.linalg.norm(x - z), rtol=1e-12)


class TestClipping(unittest.TestCase):

    def test_clip_scales(self):
        task = TaskObjective(Task.MEAN_ESTIMATION, clip_norm=1.0)
        g = clipped_grad(task, [0., 0.], Sample(np.array([3., 4.])))
        npt.assert_allclose(g, [-0.6, -0.8])

    def test_clip_noop(self):
        task = TaskObjective(Task.MEAN_ESTIMATION, clip_norm=10.0)
        g = clipped_grad(task, [0., 0.], Sample(np.array([3., 4.])))
        npt.assert_allclose(g, [-3, -4])

    def test_clip_bound(self):
        state = np.random.RandomState(1)
        task = TaskObjective(Task.RIDGE_REGRESSION, clip_norm=0.5)
        for _ in range(50):
            q = Sample(state.normal(size=4) * 5, float(state.normal()))
            g = clipped_grad(task, state.normal(size=4) * 5, q)
            self.assertLessEqual(np.linalg.norm(g), 0.5 * (1 + 1e-12))

    def test_invalid_clip(self):
        with self.assertRaises(ConfigurationError):
            TaskObjective(Task.RIDGE_REGRESSION, clip_norm=0)


class TestStepFunction(unittest.TestCase):

    def test_matches_clipped_grad(self):
        state = np.random.RandomState(2)
        features = state.normal(size=(6, 3))
        labels = np.array([1., -1., 1., 1., -1., -1.])
        data = Dataset(features, labels)
        for kind in Task:
            task = TaskObjective(kind, clip_norm=0.7)
            g = step_function(task, data)
            x = state.normal(size=3)
            for i in range(data.n):
                npt.assert_allclose(g(x, i), clipped_grad(task, x, data[i]),
                                    rtol=1e-14, atol=1e-15)


class TestSmoothness(unittest.TestCase):

    def setUp(self):
        self.data = Dataset([[3., 4.], [1., 0.]], [1., -1.])

    def test_per_sample(self):
        self.assertEqual(
            TaskObjective(Task.MEAN_ESTIMATION).smoothness(self.data), 1.0)
        self.assertEqual(
            TaskObjective(Task.RIDGE_REGRESSION).smoothness(self.data), 50.0)
        self.assertEqual(
            TaskObjective(Task.LASSO_LOGISTIC).smoothness(self.data), 6.25)

    def test_curvature(self):
        A = self.data.features
        lam = np.max(np.linalg.eigvalsh(A.T @ A / 2))
        npt.assert_allclose(
            TaskObjective(Task.RIDGE_REGRESSION).curvature(self.data),
            2 * lam, rtol=1e-8)
        npt.assert_allclose(
            TaskObjective(Task.LASSO_LOGISTIC).curvature(self.data),
            lam / 4, rtol=1e-8)


if __name__ == '__main__':
    unittest.main()
