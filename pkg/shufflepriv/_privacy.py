""" Renyi-DP accounting for shuffled gradient methods.

Each noisy epoch is a contractive noisy iteration whose intermediate
iterates stay hidden, so its RDP cost at order alpha is bounded by
privacy amplification by iteration:

    2 alpha G^2 / (sigma^2 m)

where G is the (clipped) Lipschitz constant and m the number of noisy
steps between the worst-case position of the differing sample and the end
of the epoch (m = 1 for fully private epochs, n + 1 - n_d for the
interleaved schedule). The proximal step at the end of an epoch breaks
contraction, so epochs compose linearly.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from shufflepriv._core import ConfigurationError, PrivacyError


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float = 1e-6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError(
                f'epsilon must be positive, got {self.epsilon}')
        if not 0 < self.delta < 1:
            raise ConfigurationError(
                f'delta must lie in (0, 1), got {self.delta}')


@dataclass(frozen=True)
class MechanismProfile:
    """ The quantities an accountant needs about one training schedule.

    Parameters
    ----------
    lipschitz : float
        G*, the gradient norm bound (the clipping norm).
    noisy_private_epochs : int
        K_eff, epochs in which private samples are touched.
    amplification : int
        m, the PABI divisor of every noisy private epoch.
    sigma : float
        Per-coordinate noise standard deviation of those epochs.
    """
    lipschitz: float
    noisy_private_epochs: int
    amplification: int = 1
    sigma: float = 0.0

    def __post_init__(self):
        if not self.lipschitz > 0:
            raise ConfigurationError(
                f'lipschitz must be positive, got {self.lipschitz}')
        if self.noisy_private_epochs < 0:
            raise ConfigurationError('noisy_private_epochs must be >= 0')
        if self.amplification < 1:
            raise ConfigurationError('amplification must be >= 1')
        if not self.sigma >= 0:
            raise ConfigurationError(f'sigma must be >= 0, got {self.sigma}')


def rdp_epoch_loss(profile: MechanismProfile, alpha: float) -> float:
    """ RDP cost of one noisy private epoch at order alpha. """
    if not alpha > 1:
        raise ConfigurationError(f'alpha must exceed 1, got {alpha}')
    if profile.sigma == 0:
        if profile.noisy_private_epochs == 0:
            return 0.0
        raise PrivacyError('sigma = 0 on private epochs: privacy loss is '
                           'infinite')
    return (2 * alpha * profile.lipschitz ** 2
            / (profile.sigma ** 2 * profile.amplification))


def compose_epochs(per_epoch: float, count: int) -> float:
    """ Linear RDP composition at a fixed order. """
    if per_epoch < 0:
        raise ConfigurationError('per-epoch RDP must be non-negative')
    if count < 0:
        raise ConfigurationError('count must be non-negative')
    return count * per_epoch


def rdp_to_dp(rdp_eps: float, alpha: float, delta: float) -> float:
    """ (alpha, rdp_eps)-RDP implies (rdp_eps + log(1/delta)/(alpha-1), delta)-DP. """
    if not alpha > 1:
        raise ConfigurationError(f'alpha must exceed 1, got {alpha}')
    return rdp_eps + math.log(1 / delta) / (alpha - 1)


def _rdp_slope(profile: MechanismProfile) -> float:
    # a in  eps(alpha) = a * alpha + L / (alpha - 1)
    return (2 * profile.lipschitz ** 2 * profile.noisy_private_epochs
            / (profile.sigma ** 2 * profile.amplification))


def epsilon_for_noise(profile: MechanismProfile,
                      delta: float) -> Tuple[float, Optional[float]]:
    """ Tightest (epsilon, delta)-DP guarantee over the RDP order.

    Minimises a alpha + L / (alpha - 1) in closed form:
    alpha* = 1 + sqrt(L / a), epsilon = a + 2 sqrt(a L), with
    a = 2 G^2 K_eff / (sigma^2 m) and L = log(1 / delta).
    The guarantee is evaluated by composing the per-epoch RDP cost at
    alpha* and converting it to (epsilon, delta).

    Returns
    -------
    epsilon : float
        0 when no private epoch is noisy-touched.
    alpha_star : float or None
        The optimal order; None when K_eff = 0.
    """
    if not 0 < delta < 1:
        raise ConfigurationError(f'delta must lie in (0, 1), got {delta}')
    if profile.noisy_private_epochs == 0:
        return 0.0, None
    if profile.sigma == 0:
        raise PrivacyError('sigma = 0 on private epochs: privacy loss is '
                           'infinite')
    a = _rdp_slope(profile)
    L = math.log(1 / delta)
    alpha = 1 + math.sqrt(L / a)
    rdp = compose_epochs(rdp_epoch_loss(profile, alpha),
                         profile.noisy_private_epochs)
    return rdp_to_dp(rdp, alpha, delta), alpha


def noise_for_epsilon(budget: PrivacyBudget, lipschitz: float, K_eff: int,
                      amplification: int = 1) -> float:
    """ Smallest sigma whose optimal-order guarantee meets the budget.

    Inverts epsilon = a + 2 sqrt(a L):  sqrt(a) = sqrt(L + eps) - sqrt(L),
    so with A = 2 G^2 K_eff / m,

        sigma = sqrt(A) / (sqrt(L + eps) - sqrt(L))
              = sqrt(A) (sqrt(L + eps) + sqrt(L)) / eps.

    The second form avoids cancellation for small eps.
    """
    if K_eff < 0:
        raise ConfigurationError('K_eff must be non-negative')
    if amplification < 1:
        raise ConfigurationError('amplification must be >= 1')
    if not lipschitz > 0:
        raise ConfigurationError(f'lipschitz must be positive, got {lipschitz}')
    if K_eff == 0:
        return 0.0
    A = 2 * lipschitz ** 2 * K_eff / amplification
    L = math.log(1 / budget.delta)
    eps = budget.epsilon
    return math.sqrt(A) * (math.sqrt(L + eps) + math.sqrt(L)) / eps


def validate_contraction(eta: float, smoothness: float) -> bool:
    """ True iff eta <= 1 / L, the precondition for amplification by iteration. """
    if not smoothness > 0:
        raise ConfigurationError(
            f'smoothness must be positive, got {smoothness}')
    return eta <= 1 / smoothness
