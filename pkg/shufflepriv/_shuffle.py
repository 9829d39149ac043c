import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from shufflepriv._core import ConfigurationError, RngStream


class Strategy(enum.Enum):
    IG = 'ig'   # incremental gradient: identity order every epoch
    SO = 'so'   # shuffle once
    RR = 'rr'   # random reshuffling


@dataclass(frozen=True, eq=False)
class PermutationStrategy:
    """ Sample order per epoch.

    Parameters
    ----------
    kind : Strategy
        IG, SO or RR.
    so_permutation : np.ndarray, optional
        The stored shuffle-once order; filled in by `prepare`.
    """
    kind: Strategy = Strategy.RR
    so_permutation: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', Strategy(self.kind))
        if self.so_permutation is not None:
            perm = np.array(self.so_permutation, dtype=np.int64)
            if not np.array_equal(np.sort(perm), np.arange(len(perm))):
                raise ConfigurationError('so_permutation is not a bijection')
            perm.setflags(write=False)
            object.__setattr__(self, 'so_permutation', perm)

    def prepare(self, n: int, rng: RngStream) -> 'PermutationStrategy':
        """ Returns a copy with the shuffle-once order drawn (SO only). """
        if self.kind is not Strategy.SO:
            return self
        if self.so_permutation is not None and len(self.so_permutation) == n:
            return self
        return PermutationStrategy(self.kind, _draw(n, rng.spawn(0)))

    def __eq__(self, other):
        if not isinstance(other, PermutationStrategy):
            return NotImplemented
        if self.kind is not other.kind:
            return False
        if self.so_permutation is None or other.so_permutation is None:
            return self.so_permutation is other.so_permutation
        return np.array_equal(self.so_permutation, other.so_permutation)

    def __hash__(self):
        return hash(self.kind)


def _draw(n: int, rng: RngStream) -> np.ndarray:
    # Generator.permutation is a Fisher-Yates shuffle of arange(n)
    return rng.generator().permutation(n)


def permutation_for_epoch(strategy: PermutationStrategy, n: int, epoch: int,
                          rng: RngStream) -> np.ndarray:
    """ The processing order pi^(s) for epoch s.

    Parameters
    ----------
    strategy : PermutationStrategy
        IG / SO / RR.
    n : int
        Number of private samples.
    epoch : int
        1-based epoch index.
    rng : RngStream
        The run's shuffling substream. SO draws once from `rng.spawn(0)`,
        RR draws from `rng.spawn(epoch)`.

    Returns
    -------
    np.ndarray
        A permutation of 0..n-1.
    """
    if n < 1:
        raise ConfigurationError(f'n must be positive, got {n}')
    if epoch < 1:
        raise ConfigurationError(f'epoch must be >= 1, got {epoch}')
    if strategy.kind is Strategy.IG:
        return np.arange(n)
    if strategy.kind is Strategy.SO:
        if strategy.so_permutation is not None:
            if len(strategy.so_permutation) != n:
                raise ConfigurationError(
                    f'stored permutation has length '
                    f'{len(strategy.so_permutation)}, expected {n}')
            return strategy.so_permutation.copy()
        return _draw(n, rng.spawn(0))
    return _draw(n, rng.spawn(epoch))
