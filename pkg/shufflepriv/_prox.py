""" End-of-epoch proximal maps.

Every operator solves

    argmin_x  n * psi(x) + ||x - v||^2 / (2 * eta)

Note the factor n on psi: thresholds and shrinkage scale with both eta and
n, exactly as in the epoch update of the shuffled gradient framework. The
full-batch solver passes n=1.
"""
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from shufflepriv._core import ConfigurationError, NumericError

# Relative slack when deciding ball feasibility, so that outputs of the
# projection (which may overshoot C by rounding) are treated as feasible.
_BALL_SLACK = 1e-12


class Penalty(enum.Enum):
    NONE = 'none'
    BALL = 'ball'
    L2 = 'l2'
    L1 = 'l1'


@dataclass(frozen=True)
class Regularizer:
    """ psi together with its exact proximal map.

    Parameters
    ----------
    kind : Penalty
        `BALL` is the indicator of the l2 ball of radius `strength`;
        `L2` is (strength / 2) ||x||^2; `L1` is strength * ||x||_1.
    strength : float, optional
        C, lambda_r or lambda_l; ignored for `NONE`.
    """
    kind: Penalty = Penalty.NONE
    strength: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', Penalty(self.kind))
        if self.kind is Penalty.NONE:
            return
        if self.strength is None or not self.strength > 0:
            raise ConfigurationError(
                f'{self.kind.value} needs a positive parameter, '
                f'got {self.strength}')

    @classmethod
    def ball(cls, radius: float) -> 'Regularizer':
        return cls(Penalty.BALL, radius)

    @classmethod
    def l2(cls, lambda_r: float) -> 'Regularizer':
        return cls(Penalty.L2, lambda_r)

    @classmethod
    def l1(cls, lambda_l: float) -> 'Regularizer':
        return cls(Penalty.L1, lambda_l)


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0)


def prox_step(reg: Regularizer, v, eta: float, n: int) -> np.ndarray:
    """ The regularisation step applied once at the end of every epoch.

    Parameters
    ----------
    reg : Regularizer
        psi.
    v : array_like
        Iterate after the last gradient step of the epoch.
    eta : float
        Learning rate.
    n : int
        Number of gradient steps per epoch; multiplies psi.

    Returns
    -------
    np.ndarray
        The minimiser of n psi(x) + ||x - v||^2 / (2 eta).
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NumericError('prox input has non-finite entries')
    if not eta > 0:
        raise ConfigurationError(f'eta must be positive, got {eta}')
    if reg.kind is Penalty.NONE:
        return v.copy()
    if reg.kind is Penalty.BALL:
        norm = np.linalg.norm(v)
        # projected points land within rounding of the sphere; keep them fixed
        if norm <= reg.strength * (1 + _BALL_SLACK):
            return v.copy()
        return (reg.strength / norm) * v
    if reg.kind is Penalty.L2:
        return v / (1 + eta * n * reg.strength)
    return soft_threshold(v, eta * reg.strength * n)


def reg_value(reg: Regularizer, x) -> float:
    """ psi(x). The ball indicator returns +inf for infeasible x. """
    x = np.asarray(x, dtype=np.float64)
    if reg.kind is Penalty.NONE:
        return 0.0
    if reg.kind is Penalty.BALL:
        if np.linalg.norm(x) <= reg.strength * (1 + _BALL_SLACK):
            return 0.0
        return math.inf
    if reg.kind is Penalty.L2:
        return 0.5 * reg.strength * float(x @ x)
    return reg.strength * float(np.sum(np.abs(x)))
