import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np


class ShufflePrivError(Exception):
    """Base class for every error raised by shufflepriv."""


class DimensionError(ShufflePrivError, ValueError):
    pass


class ConfigurationError(ShufflePrivError, ValueError):
    pass


class PrivacyError(ShufflePrivError, ValueError):
    pass


class NumericError(ShufflePrivError, ArithmeticError):
    pass


class DivergenceError(NumericError):
    """ Raised when the iterate leaves the finite / bounded region.

    Parameters
    ----------
    epoch : int
        1-based epoch in which the divergence was detected.
    """
    def __init__(self, epoch: int, message: str = None):
        self.epoch = epoch
        if message is None:
            message = f'iterate diverged in epoch {epoch}'
        super().__init__(message)


class CSVParseError(ShufflePrivError, ValueError):
    """ Malformed CSV input.

    `row` and `column` are 1-based file coordinates (None when the
    error does not point at a single cell).
    """
    def __init__(self, reason: str, row: Optional[int] = None,
                 column: Optional[int] = None, detail: str = ''):
        self.reason = reason
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f'row {row}')
        if column is not None:
            where.append(f'column {column}')
        msg = reason
        if where:
            msg += ' at ' + ', '.join(where)
        if detail:
            msg += f': {detail}'
        super().__init__(msg)


class Origin(enum.Enum):
    PRIVATE = 'private'
    PUBLIC = 'public'


def as_param_vector(values, d: int = None) -> np.ndarray:
    """ Coerces `values` into a ParamVector (1-d float64 array).

    Parameters
    ----------
    values : array_like
        Coordinates.
    d : int, optional
        Expected dimension.

    Returns
    -------
    np.ndarray
        A fresh float64 copy.

    Raises
    ------
    DimensionError
        If the array is not 1-d or its length differs from `d`.
    NumericError
        If any coordinate is NaN or infinite.
    """
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f'expected a vector, got shape {x.shape}')
    if d is not None and len(x) != d:
        raise DimensionError(f'expected dimension {d}, got {len(x)}')
    if not np.all(np.isfinite(x)):
        raise NumericError('parameter vector has non-finite entries')
    return x


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    response: Optional[float] = None
    origin: Origin = Origin.PRIVATE


class Dataset:
    """ An ordered collection of samples sharing one dimension and origin.

    Samples are held column-wise: a (n, d) feature matrix plus an optional
    length-n response vector.

    Parameters
    ----------
    features : array_like
        Feature matrix of shape (n, d).
    responses : array_like, optional
        Response / label per row.
    origin : Origin
        Whether the rows are private or public.
    """
    def __init__(self, features, responses=None,
                 origin: Origin = Origin.PRIVATE):
        features = np.array(features, dtype=np.float64)
        if features.ndim != 2:
            raise DimensionError(
                f'features must be a matrix, got shape {features.shape}')
        if len(features) < 1:
            raise ConfigurationError('a dataset needs at least one sample')
        if not np.all(np.isfinite(features)):
            raise NumericError('features have non-finite entries')
        if responses is not None:
            responses = np.array(responses, dtype=np.float64).ravel()
            if len(responses) != len(features):
                raise DimensionError(
                    f'{len(responses)} responses for {len(features)} rows')
            if not np.all(np.isfinite(responses)):
                raise NumericError('responses have non-finite entries')
        self.features = features
        self.responses = responses
        self.origin = Origin(origin)
        self.features.setflags(write=False)
        if self.responses is not None:
            self.responses.setflags(write=False)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> 'Dataset':
        if len(samples) == 0:
            raise ConfigurationError('a dataset needs at least one sample')
        origins = {s.origin for s in samples}
        if len(origins) != 1:
            raise ConfigurationError('samples have mixed origins')
        dims = {len(s.features) for s in samples}
        if len(dims) != 1:
            raise DimensionError(f'samples have mixed dimensions {dims}')
        has_response = [s.response is not None for s in samples]
        if any(has_response) and not all(has_response):
            raise ConfigurationError('responses must be all set or all unset')
        responses = None
        if all(has_response):
            responses = [s.response for s in samples]
        return cls(np.vstack([s.features for s in samples]),
                   responses, origins.pop())

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> Sample:
        response = None if self.responses is None else float(self.responses[i])
        return Sample(self.features[i], response, self.origin)

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def subset(self, indices) -> 'Dataset':
        indices = np.asarray(indices, dtype=np.int64)
        responses = None if self.responses is None else self.responses[indices]
        return Dataset(self.features[indices], responses, self.origin)

    def __repr__(self):
        return (f'Dataset(n={self.n}, d={self.d}, origin={self.origin.value}, '
                f'responses={self.responses is not None})')


# Substream purposes. The (seed, purpose, ...) tuple selects an independent
# Philox stream; these values are part of the reproducibility contract.
STREAM_SHUFFLE = 1
STREAM_NOISE = 2
STREAM_PUBLIC_SLICE = 3
STREAM_DATA = 4
STREAM_DIAGNOSTIC = 5


@dataclass(frozen=True)
class RngStream:
    """ Counter-based splittable random stream.

    A stream is the pair (seed, stream_id) where `stream_id` is a tuple of
    unsigned integers selecting a substream. Each stream is realised as a
    numpy `Generator` over the Philox counter-based bit generator keyed by
    `SeedSequence(seed, spawn_key=stream_id)`, so equal pairs give equal
    bit streams and distinct pairs give independent ones.
    """
    seed: int
    stream_id: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigurationError(f'seed {self.seed} is not a 64-bit '
                                     'unsigned integer')
        object.__setattr__(self, 'stream_id',
                           tuple(int(k) for k in self.stream_id))

    def spawn(self, *keys: int) -> 'RngStream':
        return RngStream(self.seed, self.stream_id + tuple(keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(rng: Union[RngStream, np.random.Generator]):
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


@dataclass(frozen=True)
class GaussianNoiseSpec:
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ConfigurationError(f'sigma must be >= 0, got {self.sigma}')


def sample_gaussian(spec: GaussianNoiseSpec, d: int,
                    rng: Union[RngStream, np.random.Generator]) -> np.ndarray:
    """ Draws d iid N(0, sigma^2) values.

    Normal deviates come from numpy's ziggurat sampler
    (`Generator.standard_normal`); this is the single place that choice is
    made, and bit-reproducibility is only promised for it. Drawing n*d
    values at once yields the same numbers as n successive draws of d.

    Parameters
    ----------
    spec : GaussianNoiseSpec
        Noise standard deviation.
    d : int
        Number of coordinates.
    rng : RngStream or np.random.Generator
        A stream (a fresh generator is built from it) or a live generator
        whose state advances.

    Returns
    -------
    np.ndarray
        Vector of length d; exactly zero when sigma == 0.
    """
    if d < 1:
        raise DimensionError(f'd must be positive, got {d}')
    if spec.sigma == 0:
        return np.zeros(d)
    return spec.sigma * _as_generator(rng).standard_normal(d)


def vec_axpy(alpha: float, x, y) -> np.ndarray:
    """ Returns alpha * x + y. """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f'length mismatch: {x.shape} vs {y.shape}')
    return alpha * x + y
