import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from shufflepriv._core import (STREAM_DATA, ConfigurationError, Dataset,
                               Origin, RngStream)
from shufflepriv._data import Normalization, normalize_features


class SyntheticKind(enum.Enum):
    SHIFTED_MEAN = 'shifted-mean'
    ROTATION_CORRUPTED = 'rotation-corrupted'
    CLASS_SUBSET = 'class-subset'
    LABEL_SHIFT = 'label-shift'


@dataclass(frozen=True)
class SyntheticSpec:
    """ Recipe for a private / public dataset pair with distribution shift.

    Parameters
    ----------
    kind : SyntheticKind
        Which construction.
    d : int
        Feature dimension.
    n : int
        Samples per dataset (both D and P have n rows).
    seed : int
        Generation seed.
    shift : float
        shifted-mean: distance between the private and public means.
    cluster_std : float
        shifted-mean: per-coordinate standard deviation around each mean.
    center_norm : float
        shifted-mean: norm of the private mean (along ones / sqrt(d)).
    rotation_scale : float
        rotation-corrupted: eps_r in R = I + eps_r E.
    base_std : float
        rotation-corrupted / class-subset: feature standard deviation.
    response_noise : float
        Standard deviation of the noise on planted regression responses.
    n_classes, public_classes : int
        class-subset: total classes and how many P keeps.
    private_rate, public_rate : float
        label-shift: probability of a positive label in D and in P.
    normalize : Normalization
        Applied jointly to D and P (a common scale factor).
    """
    kind: SyntheticKind
    d: int = 20
    n: int = 200
    seed: int = 0
    shift: float = 1.0
    cluster_std: float = 0.1
    center_norm: float = 2.0
    rotation_scale: float = 0.05
    base_std: float = 1.0
    response_noise: float = 0.1
    n_classes: int = 10
    public_classes: int = 4
    private_rate: float = 0.5
    public_rate: float = 0.05
    normalize: Normalization = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', SyntheticKind(self.kind))
        if self.normalize is None:
            default = (Normalization.NONE
                       if self.kind is SyntheticKind.SHIFTED_MEAN
                       else Normalization.UNIT_BALL)
            object.__setattr__(self, 'normalize', default)
        object.__setattr__(self, 'normalize', Normalization(self.normalize))
        if self.n < 2:
            raise ConfigurationError(f'n must be >= 2, got {self.n}')
        if self.d < 1:
            raise ConfigurationError(f'd must be >= 1, got {self.d}')
        for name in ('shift', 'cluster_std', 'center_norm', 'rotation_scale',
                     'base_std', 'response_noise'):
            if getattr(self, name) < 0:
                raise ConfigurationError(f'{name} must be >= 0')
        for name in ('private_rate', 'public_rate'):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigurationError(f'{name} must lie in [0, 1]')
        if not 1 <= self.public_classes <= self.n_classes:
            raise ConfigurationError(
                'public_classes must lie in [1, n_classes]')

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out['kind'] = self.kind.value
        out['normalize'] = self.normalize.value
        return out


def _shift_direction(d: int) -> np.ndarray:
    u = np.zeros(d)
    u[0] = 1.0
    return u


def _shifted_mean(spec, state):
    mu = spec.center_norm * np.ones(spec.d) / np.sqrt(spec.d)
    private = state.normal(mu, spec.cluster_std, size=(spec.n, spec.d))
    public = state.normal(mu + spec.shift * _shift_direction(spec.d),
                          spec.cluster_std, size=(spec.n, spec.d))
    return private, None, public, None


def _rotation_base(spec, state):
    """ Planted linear model split into two halves (X_priv, y_priv, X0, y0). """
    X = state.normal(0, spec.base_std, size=(2 * spec.n, spec.d))
    w = state.normal(0, 1, size=spec.d) / np.sqrt(spec.d)
    y = X @ w + state.normal(0, spec.response_noise, size=2 * spec.n)
    return X[:spec.n], y[:spec.n], X[spec.n:], y[spec.n:]


def _rotation_corrupted(spec, state):
    X_priv, y_priv, X0, y0 = _rotation_base(spec, state)
    E = state.normal(0, 1, size=(spec.d, spec.d))
    if spec.rotation_scale == 0:
        public = X0.copy()
    else:
        public = X0 @ (np.eye(spec.d) + spec.rotation_scale * E)
    return X_priv, y_priv, public, y0


def _class_subset(spec, state):
    centers = state.normal(0, spec.base_std, size=(spec.n_classes, spec.d))
    weights = state.normal(0, 1, size=(spec.n_classes, spec.d)) / np.sqrt(
        spec.d)
    private_labels = np.arange(spec.n) % spec.n_classes
    public_labels = np.arange(spec.n) % spec.public_classes

    def draw(labels):
        X = centers[labels] + state.normal(0, spec.base_std,
                                           size=(len(labels), spec.d))
        y = np.einsum('ij,ij->i', X, weights[labels]) + state.normal(
            0, spec.response_noise, size=len(labels))
        return X, y

    X_priv, y_priv = draw(private_labels)
    X_pub, y_pub = draw(public_labels)
    return X_priv, y_priv, X_pub, y_pub


def _label_shift(spec, state):
    direction = state.normal(0, 1, size=spec.d)
    direction /= np.linalg.norm(direction)

    def draw(rate):
        labels = np.where(state.uniform(size=spec.n) < rate, 1.0, -1.0)
        X = labels[:, None] * direction + state.normal(
            0, spec.base_std, size=(spec.n, spec.d))
        return X, labels

    X_priv, y_priv = draw(spec.private_rate)
    X_pub, y_pub = draw(spec.public_rate)
    return X_priv, y_priv, X_pub, y_pub


_GENERATORS = {
    SyntheticKind.SHIFTED_MEAN: _shifted_mean,
    SyntheticKind.ROTATION_CORRUPTED: _rotation_corrupted,
    SyntheticKind.CLASS_SUBSET: _class_subset,
    SyntheticKind.LABEL_SHIFT: _label_shift,
}


def generate(spec: SyntheticSpec) -> Tuple[Dataset, Dataset]:
    """ Simulates a private dataset D and a shifted public dataset P.

    Parameters
    ----------
    spec : SyntheticSpec
        Construction and its parameters.

    Returns
    -------
    private : Dataset
        D, origin private.
    public : Dataset
        P, origin public.

    Notes
    -----
    shifted-mean: D ~ N(mu, s^2 I), P ~ N(mu + shift u, s^2 I), u = e_1.
    rotation-corrupted: a planted linear model split in halves; P is the
    second half times R = I + eps_r E with E standard normal.
    class-subset: D covers every class round-robin, P only the first k;
    row i of class c has response <w_c, a_i> plus noise, one planted w_c
    per class.
    label-shift: +-1 labels with class-conditional Gaussian features and
    different positive rates in D and P.
    """
    state = RngStream(spec.seed, (STREAM_DATA,)).generator()
    X_priv, y_priv, X_pub, y_pub = _GENERATORS[spec.kind](spec, state)
    if spec.normalize is not Normalization.NONE:
        both = normalize_features(np.vstack([X_priv, X_pub]), spec.normalize)
        X_priv, X_pub = both[:spec.n], both[spec.n:]
    return (Dataset(X_priv, y_priv, Origin.PRIVATE),
            Dataset(X_pub, y_pub, Origin.PUBLIC))
