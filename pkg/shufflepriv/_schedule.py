import enum
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from shufflepriv._core import ConfigurationError, RngStream
from shufflepriv._privacy import (MechanismProfile, PrivacyBudget,
                                  noise_for_epsilon)


logger = logging.getLogger(__name__)


class Schedule(enum.Enum):
    DP_SHUFFLEG = 'dp'
    PRIV_PUB = 'priv-pub'
    PUB_PRIV = 'pub-priv'
    INTERLEAVED = 'interleaved'
    PUBLIC_ONLY = 'public-only'


_CARRIES_P = (Schedule.PRIV_PUB, Schedule.PUB_PRIV, Schedule.INTERLEAVED)

_ALIASES = {
    'dp-shuffleg': Schedule.DP_SHUFFLEG,
    'dp-shuffle': Schedule.DP_SHUFFLEG,
    'publiconly': Schedule.PUBLIC_ONLY,
    'privpub': Schedule.PRIV_PUB,
    'pubpriv': Schedule.PUB_PRIV,
}


def parse_schedule(name: str) -> Schedule:
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return Schedule(key)
    except ValueError:
        choices = ', '.join(s.value for s in Schedule)
        raise ConfigurationError(
            f'unknown schedule {name!r}; choose one of {choices}')


class PublicOrder(enum.Enum):
    FIXED = 'fixed'         # P^(s) = first n - n_d samples of P
    SHUFFLED = 'shuffled'   # fresh permutation of P per epoch, then prefix


@dataclass(frozen=True)
class ScheduleKind:
    """ A training schedule together with its private fraction p.

    Parameters
    ----------
    schedule : Schedule
        One of the five schedules.
    p : float, optional
        Fraction of gradient steps computed on private samples; required
        for priv-pub, pub-priv and interleaved, ignored otherwise.
    """
    schedule: Schedule
    p: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'schedule', Schedule(self.schedule))
        if self.schedule in _CARRIES_P:
            if self.p is None or not 0 < self.p <= 1:
                raise ConfigurationError(
                    f'{self.schedule.value} needs p in (0, 1], got {self.p}')
        else:
            object.__setattr__(self, 'p', None)

    @property
    def label(self) -> str:
        if self.p is None:
            return self.schedule.value
        return f'{self.schedule.value}-p{self.p:g}'


@dataclass(frozen=True)
class EpochPlan:
    """ One epoch of the generalised framework.

    The first `n_d` steps use private samples (in the epoch's permuted
    order), the remaining steps use `public_indices` into P in order; every
    step adds N(0, sigma^2 I) noise.
    """
    n_d: int
    public_indices: Tuple[int, ...]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, 'public_indices',
                           tuple(int(i) for i in self.public_indices))
        if self.n_d < 0:
            raise ConfigurationError('n_d must be non-negative')
        if not self.sigma >= 0:
            raise ConfigurationError(f'sigma must be >= 0, got {self.sigma}')

    @property
    def n(self) -> int:
        return self.n_d + len(self.public_indices)

    def to_dict(self) -> dict:
        return {'n_d': self.n_d, 'n_public': len(self.public_indices),
                'sigma': self.sigma}


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def private_count(kind: ScheduleKind, n: int, K: int) -> int:
    """ round(pK) for priv-pub / pub-priv, round(pn) for interleaved.

    Raises
    ------
    ConfigurationError
        If rounding leaves the valid range; the count is never clamped.
    """
    if kind.schedule in (Schedule.PRIV_PUB, Schedule.PUB_PRIV):
        S = _round_half_up(kind.p * K)
        if not 1 <= S <= K - 1:
            raise ConfigurationError(
                f'{kind.schedule.value}: round(p K) = {S} is outside '
                f'[1, {K - 1}] for p={kind.p}, K={K}')
        return S
    if kind.schedule is Schedule.INTERLEAVED:
        n_d = _round_half_up(kind.p * n)
        if not 1 <= n_d <= n:
            raise ConfigurationError(
                f'interleaved: round(p n) = {n_d} is outside [1, {n}] '
                f'for p={kind.p}, n={n}')
        return n_d
    raise ConfigurationError(f'{kind.schedule.value} carries no p')


def accounting_profile(kind: ScheduleKind, n: int, K: int,
                       budget: PrivacyBudget,
                       lipschitz: float) -> MechanismProfile:
    """ The (K_eff, m, sigma) triple charged by the accountant.

    `lipschitz` is the largest clipping norm applied to any noisy step
    (max of the private and public norms for interleaved).
    """
    _check_sizes(n, K)
    if kind.schedule is Schedule.PUBLIC_ONLY:
        K_eff, m = 0, 1
    elif kind.schedule is Schedule.DP_SHUFFLEG:
        K_eff, m = K, 1
    elif kind.schedule is Schedule.INTERLEAVED:
        n_d = private_count(kind, n, K)
        K_eff, m = K, n + 1 - n_d
    else:
        K_eff, m = private_count(kind, n, K), 1
    sigma = noise_for_epsilon(budget, lipschitz, K_eff, m)
    return MechanismProfile(lipschitz, K_eff, m, sigma)


def _check_sizes(n, K):
    if K < 2:
        raise ConfigurationError(f'K must be >= 2, got {K}')
    if n < 2:
        raise ConfigurationError(f'n must be >= 2, got {n}')


def build_plans(kind: ScheduleKind, n: int, K: int, budget: PrivacyBudget,
                lipschitz: float, n_public: int = None,
                public_order: PublicOrder = PublicOrder.FIXED,
                rng: RngStream = None) -> List[EpochPlan]:
    """ Realises a schedule as K per-epoch plans.

    Parameters
    ----------
    kind : ScheduleKind
        Schedule and private fraction.
    n : int
        Private dataset size (gradient steps per epoch).
    K : int
        Number of epochs.
    budget : PrivacyBudget
        Target (epsilon, delta).
    lipschitz : float
        Gradient norm bound handed to the accountant.
    n_public : int, optional
        Size of P (defaults to n).
    public_order : PublicOrder
        How P^(s) is chosen within P.
    rng : RngStream, optional
        Substream for `PublicOrder.SHUFFLED`.

    Returns
    -------
    list of EpochPlan
    """
    _check_sizes(n, K)
    if n_public is None:
        n_public = n
    public_order = PublicOrder(public_order)
    if public_order is PublicOrder.SHUFFLED and rng is None:
        raise ConfigurationError('shuffled public slices need an RngStream')
    profile = accounting_profile(kind, n, K, budget, lipschitz)
    sigma = profile.sigma
    schedule = kind.schedule

    def public(epoch, count):
        if count > n_public:
            raise ConfigurationError(
                f'{count} public steps per epoch but |P| = {n_public}')
        if public_order is PublicOrder.FIXED or count == 0:
            return tuple(range(count))
        order = rng.spawn(epoch).generator().permutation(n_public)
        return tuple(order[:count])

    plans = []
    for s in range(1, K + 1):
        if schedule is Schedule.DP_SHUFFLEG:
            plan = EpochPlan(n, (), sigma)
        elif schedule is Schedule.PUBLIC_ONLY:
            plan = EpochPlan(0, public(s, n), 0.0)
        elif schedule is Schedule.PRIV_PUB:
            S = profile.noisy_private_epochs
            plan = (EpochPlan(n, (), sigma) if s <= S
                    else EpochPlan(0, public(s, n), 0.0))
        elif schedule is Schedule.PUB_PRIV:
            S = K - profile.noisy_private_epochs
            plan = (EpochPlan(0, public(s, n), 0.0) if s <= S
                    else EpochPlan(n, (), sigma))
        else:
            n_d = n + 1 - profile.amplification
            plan = EpochPlan(n_d, public(s, n - n_d), sigma)
        plans.append(plan)
    logger.debug('%s: K_eff=%d m=%d sigma=%.6g', kind.label,
                 profile.noisy_private_epochs, profile.amplification, sigma)
    return plans


def private_steps(plans: List[EpochPlan]) -> int:
    return int(np.sum([plan.n_d for plan in plans]))
