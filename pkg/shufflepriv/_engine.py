import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from shufflepriv._core import (STREAM_NOISE, STREAM_SHUFFLE,
                               ConfigurationError, Dataset, DimensionError,
                               DivergenceError, GaussianNoiseSpec, RngStream,
                               as_param_vector, sample_gaussian)
from shufflepriv._prox import Regularizer, prox_step, reg_value
from shufflepriv._schedule import EpochPlan
from shufflepriv._shuffle import PermutationStrategy, permutation_for_epoch
from shufflepriv._tasks import TaskObjective, step_function


logger = logging.getLogger(__name__)

# Iterates with a larger norm are treated as diverged.
DIVERGENCE_NORM = 1e12


@dataclass(frozen=True)
class RunConfig:
    """ Inputs of one run of the generalised shuffled gradient framework.

    Parameters
    ----------
    task : TaskObjective
        Loss and private clipping norm.
    reg : Regularizer
        psi, applied once per epoch through its proximal map.
    strategy : PermutationStrategy
        Order of private samples per epoch.
    plans : tuple of EpochPlan
        One plan per epoch; K = len(plans).
    eta : float
        Constant learning rate.
    seed : int
        Run seed; shuffling and noise use disjoint substreams of it.
    record_every_epoch : bool
        Record objective (and diagnostic iterates) after every epoch
        instead of only after the last one.
    public_task : TaskObjective, optional
        Objective used on public steps when its clipping norm differs.
    """
    task: TaskObjective
    reg: Regularizer
    strategy: PermutationStrategy
    plans: Tuple[EpochPlan, ...]
    eta: float
    seed: int = 0
    record_every_epoch: bool = True
    public_task: Optional[TaskObjective] = None

    def __post_init__(self):
        object.__setattr__(self, 'plans', tuple(self.plans))
        if not self.eta > 0:
            raise ConfigurationError(f'eta must be positive, got {self.eta}')
        if len(self.plans) < 1:
            raise ConfigurationError('a run needs at least one epoch plan')

    @property
    def K(self) -> int:
        return len(self.plans)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    objective: float
    loss: float
    excess_risk: float
    steps: int
    max_grad_norm: float


@dataclass
class Trajectory:
    """ Per-epoch record of a run plus its last iterate x_1^(K+1).

    `iterates` holds intermediate x_1^(s+1) values and is diagnostic only;
    the released result is `x`.
    """
    records: List[EpochRecord]
    x: np.ndarray
    iterates: List[np.ndarray] = field(default_factory=list)

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective

    @property
    def final_excess_risk(self) -> float:
        return self.records[-1].excess_risk

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [r.__dict__ for r in self.records],
            columns=['epoch', 'objective', 'loss', 'excess_risk', 'steps',
                     'max_grad_norm'])

    def write_csv(self, path):
        """ One row per epoch: epoch,objective,excess_risk. """
        frame = self.to_frame()[['epoch', 'objective', 'excess_risk']]
        frame.to_csv(path, index=False, float_format='%.17g',
                     lineterminator='\n', encoding='utf-8')


def evaluate_objective(task: TaskObjective, reg: Regularizer, x,
                       data: Dataset) -> float:
    """ G(x; D) = (1/n) sum_i f(x; d_i) + psi(x), with unclipped losses. """
    x = np.asarray(x, dtype=np.float64)
    if len(x) != data.d:
        raise DimensionError(f'x has dimension {len(x)}, data has {data.d}')
    return _mean_loss(task, x, data) + reg_value(reg, x)


def _mean_loss(task, x, data):
    return float(np.mean(task.losses(x, data.features, data.responses)))


def run(config: RunConfig, private_data: Dataset,
        public_data: Dataset = None, x0=None,
        x_star=None) -> Trajectory:
    """ Executes K epochs of the generalised shuffled gradient framework.

    Every epoch draws its private order, takes n_d clipped noisy steps on
    private samples followed by n - n_d on the scheduled public samples,
    then applies the proximal step. The objective is always measured on
    the full private dataset.

    Parameters
    ----------
    config : RunConfig
        Task, regulariser, strategy, plans and learning rate.
    private_data : Dataset
        D; its size n fixes the number of steps per epoch.
    public_data : Dataset, optional
        P; required when any plan has public steps.
    x0 : array_like, optional
        Starting point (zeros by default).
    x_star : array_like, optional
        Reference optimum for the excess risk column.

    Returns
    -------
    Trajectory

    Raises
    ------
    DivergenceError
        If the iterate becomes non-finite or exceeds `DIVERGENCE_NORM`.
    ConfigurationError
        If public steps are scheduled but no public dataset is given.
    """
    n, d = private_data.n, private_data.d
    x = np.zeros(d) if x0 is None else as_param_vector(x0, d)
    for s, plan in enumerate(config.plans, start=1):
        if plan.n != n:
            raise ConfigurationError(
                f'epoch {s} plans {plan.n} steps but n = {n}')
        if plan.public_indices and public_data is None:
            raise ConfigurationError(
                f'epoch {s} uses public samples but no public data given')
    if public_data is not None and public_data.d != d:
        raise DimensionError(
            f'public dimension {public_data.d} != private dimension {d}')

    reference = None
    if x_star is not None:
        x_star = as_param_vector(x_star, d)
        reference = evaluate_objective(config.task, config.reg, x_star,
                                       private_data)

    root = RngStream(config.seed)
    shuffle_rng = root.spawn(STREAM_SHUFFLE)
    noise_rng = root.spawn(STREAM_NOISE)
    strategy = config.strategy.prepare(n, shuffle_rng)
    private_grad = step_function(config.task, private_data)
    public_grad = None
    if public_data is not None:
        public_grad = step_function(config.public_task or config.task,
                                    public_data)
    eta = config.eta

    records, iterates = [], []
    steps = 0
    with np.errstate(over='ignore', invalid='ignore'):
        for s, plan in enumerate(config.plans, start=1):
            perm = permutation_for_epoch(strategy, n, s, shuffle_rng)
            # row i is the noise of step i; n * d draws at once equal n
            # successive draws of d
            if plan.sigma > 0:
                noise = sample_gaussian(GaussianNoiseSpec(plan.sigma), n * d,
                                        noise_rng.spawn(s)).reshape(n, d)
            else:
                noise = None
            max_norm = 0.0
            for i in range(n):
                if i < plan.n_d:
                    g = private_grad(x, perm[i])
                else:
                    g = public_grad(x, plan.public_indices[i - plan.n_d])
                max_norm = max(max_norm, float(np.linalg.norm(g)))
                if noise is not None:
                    g = g + noise[i]
                x = x - eta * g
            steps += n
            norm = np.linalg.norm(x)
            if not np.all(np.isfinite(x)) or norm > DIVERGENCE_NORM:
                raise DivergenceError(s)
            x = prox_step(config.reg, x, eta, n)
            if config.record_every_epoch or s == config.K:
                loss = _mean_loss(config.task, x, private_data)
                objective = loss + reg_value(config.reg, x)
                excess = (math.nan if reference is None
                          else objective - reference)
                records.append(EpochRecord(s, objective, loss, excess,
                                           steps, max_norm))
                if config.record_every_epoch:
                    iterates.append(x.copy())
    return Trajectory(records, x, iterates)


@dataclass
class OptimumResult:
    x: np.ndarray
    objective: float
    iterations: int
    converged: bool
    gradient_mapping_norm: float


def solve_optimum(task: TaskObjective, reg: Regularizer, data: Dataset,
                  max_iter: int = 10 ** 6, tol: float = 1e-10,
                  x0=None) -> OptimumResult:
    """ Full-batch proximal gradient for x* = argmin G(x; D).

    Uses step 1/L_hat with L_hat the power-iteration curvature estimate and
    stops once the gradient mapping ||x_{t+1} - x_t|| / step drops to `tol`.
    The regulariser enters the prox with n = 1 since the loss is averaged.
    """
    if data.n < 1:
        raise ConfigurationError('solve_optimum needs data')
    L = task.curvature(data)
    step = 1.0 / L if L > 0 else 1.0
    x = np.zeros(data.d) if x0 is None else as_param_vector(x0, data.d)
    best_x, best_obj = x, evaluate_objective(task, reg, x, data)
    gap = math.inf
    for t in range(1, max_iter + 1):
        v = x - step * task.full_gradient(x, data.features, data.responses)
        x_next = prox_step(reg, v, step, 1)
        gap = float(np.linalg.norm(x_next - x)) / step
        x = x_next
        if gap <= tol:
            obj = evaluate_objective(task, reg, x, data)
            logger.debug('optimum converged after %d iterations', t)
            return OptimumResult(x, obj, t, True, gap)
        if t % 1000 == 0:
            obj = evaluate_objective(task, reg, x, data)
            if obj < best_obj:
                best_x, best_obj = x, obj
    obj = evaluate_objective(task, reg, x, data)
    if obj < best_obj:
        best_x, best_obj = x, obj
    logger.warning('proximal gradient did not converge in %d iterations '
                   '(gradient mapping %.3g); returning best iterate',
                   max_iter, gap)
    return OptimumResult(best_x, best_obj, max_iter, False, gap)
