import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from shufflepriv._core import (ConfigurationError, Dataset, DimensionError,
                               Sample)


class Task(enum.Enum):
    MEAN_ESTIMATION = 'mean-estimation'
    RIDGE_REGRESSION = 'ridge'
    LASSO_LOGISTIC = 'lasso-logistic'


class LabelEncoding(enum.Enum):
    """How raw logistic labels map to the {0, 1} cross-entropy target."""
    PM1 = 'pm1'
    ZERO_ONE = '01'


@dataclass(frozen=True)
class TaskObjective:
    """ A convex per-sample loss with a gradient clipping threshold.

    Parameters
    ----------
    kind : Task
        Which of the three objectives.
    clip_norm : float
        l2 clipping threshold c; also the Lipschitz surrogate handed to the
        privacy accountant.
    label_encoding : LabelEncoding
        Label convention for `Task.LASSO_LOGISTIC`.
    """
    kind: Task
    clip_norm: float = 10.0
    label_encoding: LabelEncoding = LabelEncoding.PM1

    def __post_init__(self):
        object.__setattr__(self, 'kind', Task(self.kind))
        object.__setattr__(self, 'label_encoding',
                           LabelEncoding(self.label_encoding))
        if not self.clip_norm > 0:
            raise ConfigurationError(
                f'clip_norm must be positive, got {self.clip_norm}')

    def targets(self, responses: np.ndarray) -> np.ndarray:
        """ Logistic targets in {0, 1}; validates the raw labels. """
        responses = np.asarray(responses, dtype=np.float64)
        if self.label_encoding is LabelEncoding.PM1:
            if not np.all((responses == 1) | (responses == -1)):
                raise ConfigurationError('logistic labels must be in {-1, +1}')
            return (responses + 1) / 2
        if not np.all((responses == 0) | (responses == 1)):
            raise ConfigurationError('logistic labels must be in {0, 1}')
        return responses

    def losses(self, x: np.ndarray, features: np.ndarray,
               responses: np.ndarray = None) -> np.ndarray:
        """ Vectorised per-row losses (unclipped). """
        _check_dims(self, x, features, responses)
        if self.kind is Task.MEAN_ESTIMATION:
            return 0.5 * np.sum((features - x) ** 2, axis=1)
        z = features @ x
        if self.kind is Task.RIDGE_REGRESSION:
            return (z - responses) ** 2
        t = self.targets(responses)
        # -t log h - (1 - t) log(1 - h) == log(1 + exp(-s z)), s = 2t - 1
        return np.logaddexp(0.0, -(2 * t - 1) * z)

    def full_gradient(self, x: np.ndarray, features: np.ndarray,
                      responses: np.ndarray = None) -> np.ndarray:
        """ Gradient of the mean loss over all rows (unclipped). """
        _check_dims(self, x, features, responses)
        n = len(features)
        if self.kind is Task.MEAN_ESTIMATION:
            return x - features.mean(axis=0)
        z = features @ x
        if self.kind is Task.RIDGE_REGRESSION:
            return 2 * features.T @ (z - responses) / n
        return features.T @ (expit(z) - self.targets(responses)) / n

    def smoothness(self, data: Dataset) -> float:
        """ Upper bound on the per-sample gradient Lipschitz constant L. """
        if self.kind is Task.MEAN_ESTIMATION:
            return 1.0
        sq = float(np.max(np.sum(data.features ** 2, axis=1)))
        if self.kind is Task.RIDGE_REGRESSION:
            return 2 * sq
        return sq / 4

    def curvature(self, data: Dataset, iterations: int = 1000,
                  tol: float = 1e-12) -> float:
        """ Power-iteration estimate of the full-batch smoothness constant.

        Returns the largest eigenvalue of the mean-loss Hessian bound:
        1 for mean estimation, 2 lambda_max(A^T A / n) for ridge and
        lambda_max(A^T A / n) / 4 for logistic regression.
        """
        if self.kind is Task.MEAN_ESTIMATION:
            return 1.0
        A = data.features
        n = len(A)
        v = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
        lam = 0.0
        for _ in range(iterations):
            w = A.T @ (A @ v) / n
            norm = np.linalg.norm(w)
            if norm == 0:
                return 0.0
            v = w / norm
            if abs(norm - lam) <= tol * norm:
                lam = norm
                break
            lam = norm
        scale = 2.0 if self.kind is Task.RIDGE_REGRESSION else 0.25
        return scale * lam


def _check_dims(task, x, features, responses):
    x = np.asarray(x)
    if features.ndim == 1:
        width = len(features)
    else:
        width = features.shape[-1]
    if len(x) != width:
        raise DimensionError(
            f'parameter dimension {len(x)} != feature dimension {width}')
    if task.kind is not Task.MEAN_ESTIMATION and responses is None:
        raise DimensionError(f'{task.kind.value} needs a response')


def _raw_grad(task: TaskObjective, x: np.ndarray, a: np.ndarray, y):
    if task.kind is Task.MEAN_ESTIMATION:
        return x - a
    z = a @ x
    if task.kind is Task.RIDGE_REGRESSION:
        return 2 * (z - y) * a
    return (expit(z) - y) * a


def _clip(g: np.ndarray, clip_norm: float) -> np.ndarray:
    norm = np.linalg.norm(g)
    if norm > clip_norm:
        return g * (clip_norm / norm)
    return g


def loss(task: TaskObjective, x, q: Sample) -> float:
    """ Loss of one sample at x. """
    return float(task.losses(np.asarray(x, dtype=np.float64),
                             np.atleast_2d(q.features),
                             None if q.response is None else [q.response])[0])


def grad(task: TaskObjective, x, q: Sample) -> np.ndarray:
    """ Exact (unclipped) gradient of the loss of one sample at x. """
    x = np.asarray(x, dtype=np.float64)
    _check_dims(task, x, np.asarray(q.features), q.response)
    y = q.response
    if task.kind is Task.LASSO_LOGISTIC:
        y = float(task.targets([y])[0])
    return _raw_grad(task, x, np.asarray(q.features, dtype=np.float64), y)


def clipped_grad(task: TaskObjective, x, q: Sample) -> np.ndarray:
    """ grad scaled by min(1, clip_norm / ||grad||). """
    return _clip(grad(task, x, q), task.clip_norm)


def step_function(task: TaskObjective, data: Dataset):
    """ Returns a fast `g(x, i)` computing the clipped gradient of row i.

    Labels are validated and encoded once up front so the engine's inner
    loop only does arithmetic.
    """
    features = data.features
    if task.kind is Task.MEAN_ESTIMATION:
        responses = None
    else:
        if data.responses is None:
            raise DimensionError(f'{task.kind.value} needs responses')
        responses = data.responses
        if task.kind is Task.LASSO_LOGISTIC:
            responses = task.targets(responses)
    clip_norm = task.clip_norm

    def g(x, i):
        y = None if responses is None else responses[i]
        return _clip(_raw_grad(task, x, features[i], y), clip_norm)
    return g
