import math
import os
import shutil
import tempfile
import unittest

import numpy as np
import numpy.testing as npt
import pandas as pd

from shufflepriv._core import (ConfigurationError, Dataset, DimensionError,
                               DivergenceError)
from shufflepriv._engine import (RunConfig, evaluate_objective, run,
                                 solve_optimum)
from shufflepriv._privacy import PrivacyBudget
from shufflepriv._prox import Regularizer
from shufflepriv._schedule import (EpochPlan, Schedule, ScheduleKind,
                                   build_plans)
from shufflepriv._shuffle import PermutationStrategy, Strategy
from shufflepriv._tasks import Task, TaskObjective


def _planted_ridge(n, d, seed):
    state = np.random.RandomState(seed)
    A = state.normal(size=(n, d))
    w = state.normal(size=d) / np.sqrt(d)
    y = A @ w + state.normal(scale=0.1, size=n)
    return Dataset(A, y)


class TestRun(unittest.TestCase):

    def setUp(self):
        self.task = TaskObjective(Task.MEAN_ESTIMATION)
        self.data = Dataset([[1.], [3.]])

    def test_hand_computed(self):
        config = RunConfig(self.task, Regularizer(),
                           PermutationStrategy(Strategy.IG),
                           [EpochPlan(2, (), 0.0)], eta=0.5)
        traj = run(config, self.data)
        npt.assert_allclose(traj.x, [1.75])
        self.assertEqual(len(traj.records), 1)
        self.assertAlmostEqual(traj.final_objective, 0.53125)
        self.assertTrue(math.isnan(traj.final_excess_risk))
        self.assertEqual(traj.records[0].steps, 2)
        self.assertAlmostEqual(traj.records[0].max_grad_norm, 2.5)

    def test_single_step(self):
        config = RunConfig(self.task, Regularizer(),
                           PermutationStrategy(Strategy.IG),
                           [EpochPlan(1, (), 0.0)], eta=0.1)
        traj = run(config, Dataset([[1.]]), x0=[0.])
        npt.assert_allclose(traj.x, [0.1], rtol=0, atol=1e-15)

    def test_reduces_to_gradient_descent(self):
        state = np.random.RandomState(8)
        a = state.normal(size=3)
        a /= np.linalg.norm(a)
        y = 0.7
        task = TaskObjective(Task.RIDGE_REGRESSION, clip_norm=1e6)
        config = RunConfig(task, Regularizer(),
                           PermutationStrategy(Strategy.IG),
                           [EpochPlan(1, (), 0.0)] * 100, eta=0.05)
        x0 = state.normal(size=3)
        traj = run(config, Dataset([a], [y]), x0=x0)
        x = x0.copy()
        for step in range(100):
            x = x - 0.05 * 2 * a * (a @ x - y)
            npt.assert_allclose(traj.iterates[step], x, rtol=0, atol=1e-12)
        npt.assert_allclose(traj.x, x, rtol=0, atol=1e-12)

    def test_public_steps(self):
        public = Dataset([[5.]])
        plans = [EpochPlan(1, (0,), 0.0)] * 3
        config = RunConfig(self.task, Regularizer(),
                           PermutationStrategy(Strategy.IG), plans, eta=0.5)
        traj = run(config, self.data, public)
        # each epoch: x -> (x + 1) / 2 -> (x' + 5) / 2
        x = 0.0
        for _ in range(3):
            x = ((x + 1) / 2 + 5) / 2
        npt.assert_allclose(traj.x, [x])
        self.assertEqual(len(traj.iterates), 3)

    def test_excess_risk(self):
        config = RunConfig(self.task, Regularizer(),
                           PermutationStrategy(Strategy.RR),
                           [EpochPlan(2, (), 0.0)] * 4, eta=0.1)
        traj = run(config, self.data, x_star=[2.])
        for r in traj.records:
            ref = evaluate_objective(self.task, Regularizer(), [2.], self.data)
            self.assertAlmostEqual(r.excess_risk, r.objective - ref)
            self.assertGreaterEqual(r.excess_risk, 0)

    def test_last_epoch_only(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(2, (), 0.0)] * 4, eta=0.1,
                           record_every_epoch=False)
        traj = run(config, self.data)
        self.assertEqual([r.epoch for r in traj.records], [4])
        self.assertEqual(traj.iterates, [])

    def test_ball_keeps_feasible(self):
        config = RunConfig(self.task, Regularizer.ball(0.5),
                           PermutationStrategy(),
                           [EpochPlan(2, (), 1.0)] * 5, eta=0.3, seed=2)
        traj = run(config, self.data)
        for x in traj.iterates:
            self.assertLessEqual(np.linalg.norm(x), 0.5 * (1 + 1e-12))
        self.assertTrue(all(np.isfinite(r.objective) for r in traj.records))

    def test_missing_public(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(1, (0,), 0.0)], eta=0.1)
        with self.assertRaises(ConfigurationError):
            run(config, self.data)

    def test_plan_size(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(3, (), 0.0)], eta=0.1)
        with self.assertRaises(ConfigurationError):
            run(config, self.data)

    def test_public_dimension(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(1, (0,), 0.0)], eta=0.1)
        with self.assertRaises(DimensionError):
            run(config, self.data, Dataset([[1., 2.]]))

    def test_divergence(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(2, (), 0.0)] * 3, eta=1e13)
        with self.assertRaises(DivergenceError) as cm:
            run(config, self.data)
        self.assertEqual(cm.exception.epoch, 1)

    def test_bad_eta(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(self.task, Regularizer(), PermutationStrategy(),
                      [EpochPlan(2, (), 0.0)], eta=0.0)

    def test_write_csv(self):
        config = RunConfig(self.task, Regularizer(), PermutationStrategy(),
                           [EpochPlan(2, (), 0.0)] * 3, eta=0.1)
        traj = run(config, self.data, x_star=[2.])
        tmp = tempfile.mkdtemp()
        try:
            path = os.path.join(tmp, 'trajectory.csv')
            traj.write_csv(path)
            with open(path, 'rb') as fh:
                raw = fh.read()
            self.assertNotIn(b'\r', raw)
            frame = pd.read_csv(path, float_precision='round_trip')
            self.assertEqual(list(frame.columns),
                             ['epoch', 'objective', 'excess_risk'])
            npt.assert_array_equal(frame['epoch'], [1, 2, 3])
            npt.assert_array_equal(frame['objective'],
                                   [r.objective for r in traj.records])
        finally:
            shutil.rmtree(tmp)


class TestDeterminism(unittest.TestCase):

    def setUp(self):
        self.data = _planted_ridge(40, 8, 0)
        self.task = TaskObjective(Task.RIDGE_REGRESSION, clip_norm=10.0)
        self.reg = Regularizer.l2(0.1)
        self.budget = PrivacyBudget(5.0)

    def _run(self, kind, seed, strategy=Strategy.RR):
        plans = build_plans(kind, 40, 20, self.budget, 10.0)
        config = RunConfig(self.task, self.reg, PermutationStrategy(strategy),
                           plans, eta=1e-3, seed=seed)
        return run(config, self.data)

    def test_interleaved_full_equals_dp(self):
        for seed in (0, 1, 2, 3, 4):
            a = self._run(ScheduleKind(Schedule.INTERLEAVED, 1.0), seed)
            b = self._run(ScheduleKind(Schedule.DP_SHUFFLEG), seed)
            npt.assert_array_equal(a.x, b.x)
            self.assertEqual([r.objective for r in a.records],
                             [r.objective for r in b.records])

    def test_same_seed(self):
        for strategy in Strategy:
            a = self._run(ScheduleKind(Schedule.DP_SHUFFLEG), 7, strategy)
            b = self._run(ScheduleKind(Schedule.DP_SHUFFLEG), 7, strategy)
            npt.assert_array_equal(a.x, b.x)

    def test_seeds_differ(self):
        a = self._run(ScheduleKind(Schedule.DP_SHUFFLEG), 7)
        b = self._run(ScheduleKind(Schedule.DP_SHUFFLEG), 8)
        self.assertFalse(np.array_equal(a.x, b.x))


class TestOptimum(unittest.TestCase):

    def test_mean_estimation(self):
        state = np.random.RandomState(1)
        data = Dataset(state.normal(loc=2.0, size=(30, 4)))
        task = TaskObjective(Task.MEAN_ESTIMATION)
        result = solve_optimum(task, Regularizer.ball(100.0), data)
        self.assertTrue(result.converged)
        npt.assert_allclose(result.x, data.features.mean(axis=0), atol=1e-9)

    def test_ridge_closed_form(self):
        data = _planted_ridge(50, 5, 3)
        task = TaskObjective(Task.RIDGE_REGRESSION)
        result = solve_optimum(task, Regularizer.l2(0.1), data)
        A, y = data.features, data.responses
        # grad of mean (a x - y)^2 + 0.05 |x|^2 vanishes
        exp = np.linalg.solve(2 * A.T @ A / 50 + 0.1 * np.eye(5),
                              2 * A.T @ y / 50)
        self.assertTrue(result.converged)
        self.assertLessEqual(result.gradient_mapping_norm, 1e-10)
        npt.assert_allclose(result.x, exp, atol=1e-9)

    def test_lasso_logistic_optimality(self):
        state = np.random.RandomState(4)
        A = state.normal(size=(60, 3))
        labels = np.where(A @ [1.0, -2.0, 0.0] + state.normal(size=60) > 0,
                          1.0, -1.0)
        data = Dataset(A, labels)
        task = TaskObjective(Task.LASSO_LOGISTIC)
        result = solve_optimum(task, Regularizer.l1(0.05), data)
        self.assertTrue(result.converged)
        g = task.full_gradient(result.x, A, labels)
        # subgradient optimality of the l1 problem
        for j in range(3):
            if result.x[j] != 0:
                self.assertAlmostEqual(g[j], -0.05 * np.sign(result.x[j]),
                                       places=7)
            else:
                self.assertLessEqual(abs(g[j]), 0.05 + 1e-7)

    def test_excess_risk_against_optimum(self):
        ridge = _planted_ridge(30, 4, 6)
        state = np.random.RandomState(6)
        mean = Dataset(state.normal(loc=1.0, size=(30, 4)))
        cases = [(TaskObjective(Task.RIDGE_REGRESSION), Regularizer.l2(0.1),
                  ridge),
                 (TaskObjective(Task.MEAN_ESTIMATION), Regularizer.ball(1.0),
                  mean)]
        for task, reg, data in cases:
            optimum = solve_optimum(task, reg, data)
            self.assertTrue(optimum.converged)
            for seed in range(3):
                config = RunConfig(task, reg,
                                   PermutationStrategy(Strategy.RR),
                                   [EpochPlan(30, (), 0.2)] * 10, eta=0.01,
                                   seed=seed)
                traj = run(config, data, x_star=optimum.x)
                for r in traj.records:
                    self.assertGreaterEqual(r.excess_risk, -1e-9)

    def test_not_converged(self):
        data = _planted_ridge(20, 3, 5)
        task = TaskObjective(Task.RIDGE_REGRESSION)
        result = solve_optimum(task, Regularizer.l2(0.1), data, max_iter=2)
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations, 2)


class TestNonPrivateConvergence(unittest.TestCase):

    def test_ridge_random_reshuffling(self):
        data = _planted_ridge(50, 5, 0)
        task = TaskObjective(Task.RIDGE_REGRESSION, clip_norm=10.0)
        reg = Regularizer.l2(0.1)
        optimum = solve_optimum(task, reg, data)
        self.assertLessEqual(optimum.gradient_mapping_norm, 1e-10)
        initial = evaluate_objective(task, reg, np.zeros(5), data) \
            - optimum.objective
        plans = [EpochPlan(50, (), 0.0)] * 200
        finals = []
        for eta in (0.05, 0.01, 0.005, 0.001):
            config = RunConfig(task, reg, PermutationStrategy(Strategy.RR),
                               plans, eta=eta, seed=0,
                               record_every_epoch=False)
            try:
                finals.append(run(config, data, x_star=optimum.x)
                              .final_excess_risk)
            except DivergenceError:
                finals.append(math.inf)
        self.assertLessEqual(min(finals), 1e-3 * initial)


if __name__ == '__main__':
    unittest.main()
