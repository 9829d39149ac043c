import csv
import enum
import io
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from shufflepriv._core import (CSVParseError, Dataset, DimensionError,
                               Origin, RngStream)
from shufflepriv._tasks import TaskObjective, grad as sample_grad


logger = logging.getLogger(__name__)

ColumnSpec = Union[int, str]


class Normalization(enum.Enum):
    NONE = 'none'
    ZSCORE = 'zscore'          # per-column z-score
    UNIT_BALL = 'unit-ball'    # divide every row by the max row norm


def normalize_features(features: np.ndarray,
                       normalize: Normalization) -> np.ndarray:
    """ Applies a feature normalisation.

    Columns with zero standard deviation are only centred by the z-score,
    and an all-zero matrix is left untouched by the unit-ball scaling.
    """
    normalize = Normalization(normalize)
    features = np.asarray(features, dtype=np.float64)
    if normalize is Normalization.ZSCORE:
        centred = features - features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0] = 1.0
        return centred / std
    if normalize is Normalization.UNIT_BALL:
        scale = np.max(np.linalg.norm(features, axis=1))
        if scale == 0:
            return features.copy()
        return features / scale
    return features.copy()


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_text(path) -> str:
    with open(path, 'rb') as fh:
        payload = fh.read()
    try:
        return payload.decode('utf-8')
    except UnicodeDecodeError as e:
        raise CSVParseError('encoding', detail=f'{path}: {e}')


def _check_widths(text: str):
    # pandas pads short rows, so field counts are checked on the raw records
    reader = csv.reader(io.StringIO(text, newline=''))
    width = None
    for record in reader:
        if not record:
            continue
        if width is None:
            width = len(record)
        elif len(record) != width:
            raise CSVParseError(
                'ragged', row=reader.line_num,
                detail=f'expected {width} fields, saw {len(record)}')


def _read_cells(path) -> pd.DataFrame:
    text = _read_text(path)
    if not text.strip():
        raise CSVParseError('empty', detail=str(path))
    _check_widths(text)
    try:
        raw = pd.read_csv(io.StringIO(text), header=None, dtype=str,
                          keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise CSVParseError('empty', detail=str(path))
    return raw


def _resolve(spec: ColumnSpec, header, width: int) -> int:
    if isinstance(spec, str) and not spec.lstrip('-').isdigit():
        if header is None or spec not in header:
            raise CSVParseError('unknown-column', detail=spec)
        return header.index(spec)
    index = int(spec)
    if index < 0:
        index += width
    if not 0 <= index < width:
        raise CSVParseError('unknown-column', detail=str(spec))
    return index


def load_csv(path, feature_columns: Optional[Sequence[ColumnSpec]] = None,
             label_column: Optional[ColumnSpec] = None,
             origin: Origin = Origin.PRIVATE,
             normalize: Normalization = Normalization.NONE) -> Dataset:
    """ Reads a numeric comma-separated file into a Dataset.

    A first row whose first field is not numeric is taken as a header.
    Column specs are 0-based indices (negative counts from the end) or
    header names.

    Parameters
    ----------
    path : str or path-like
        UTF-8 file; LF or CRLF line endings.
    feature_columns : list, optional
        Feature columns; default is every column except the label.
    label_column : int or str, optional
        Response / label column.
    origin : Origin
        Origin tag of every sample.
    normalize : Normalization
        Feature normalisation applied after parsing.

    Returns
    -------
    Dataset

    Raises
    ------
    CSVParseError
        `empty`, `ragged`, `non-numeric` (NaN and infinities included) or
        `encoding`, with 1-based row/column.
    """
    raw = _read_cells(path)
    cells = raw.to_numpy(dtype=object)
    if cells.size == 0:
        raise CSVParseError('empty', detail=str(path))
    header = None
    first_row = 1
    if not _is_number(str(cells[0, 0]).strip()):
        header = [str(c).strip() for c in cells[0]]
        cells = cells[1:]
        first_row = 2
    if len(cells) == 0:
        raise CSVParseError('empty', detail='header without data rows')
    width = cells.shape[1]
    values = np.empty(cells.shape, dtype=np.float64)
    for r in range(cells.shape[0]):
        for c in range(width):
            text = str(cells[r, c]).strip()
            try:
                value = float(text)
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                raise CSVParseError('non-numeric', row=r + first_row,
                                    column=c + 1, detail=repr(text))
            values[r, c] = value

    label = None
    if label_column is not None:
        label = _resolve(label_column, header, width)
    if feature_columns is None:
        features_idx = [c for c in range(width) if c != label]
    else:
        features_idx = [_resolve(c, header, width) for c in feature_columns]
    if not features_idx:
        raise DimensionError('no feature columns selected')
    features = normalize_features(values[:, features_idx], normalize)
    responses = None if label is None else values[:, label]
    logger.debug('loaded %d rows x %d features from %s',
                 len(features), len(features_idx), path)
    return Dataset(features, responses, origin)


def write_csv(dataset: Dataset, path, header: bool = True):
    """ Writes features (then the response, if any) with 17 significant
    digits and LF line endings. """
    columns = [f'x{j}' for j in range(dataset.d)]
    frame = pd.DataFrame(np.asarray(dataset.features), columns=columns)
    if dataset.responses is not None:
        frame['y'] = np.asarray(dataset.responses)
    frame.to_csv(path, index=False, header=header, float_format='%.17g',
                 lineterminator='\n', encoding='utf-8')


def _exact_sum(rows: np.ndarray) -> np.ndarray:
    # correctly rounded column sums, independent of row order
    return np.array([math.fsum(col) for col in rows.T])


def _gradients(task: TaskObjective, x, data: Dataset) -> np.ndarray:
    return np.vstack([sample_grad(task, x, q) for q in data])


def estimate_dissimilarity(private: Dataset, public_slice: Optional[Dataset],
                           task: TaskObjective, x, n_d: int, num_perms: int,
                           rng: RngStream) -> float:
    """ Monte-Carlo estimate of the dissimilarity constant C_n.

    With the true order fixed to the identity, averages over `num_perms`
    random permutations pi_hat of D the norm of

        sum_{j <= n_d} (grad f(x; d_j) - grad f(x; d_{pi_hat_j}))
      + sum_{j > n_d}  (grad f(x; d_j) - grad f(x; p_{j - n_d}))

    This is a diagnostic estimate: the supremum over true orders is
    replaced by the identity order.
    """
    n = private.n
    if not 0 <= n_d <= n:
        raise DimensionError(f'n_d={n_d} outside [0, {n}]')
    if num_perms < 1:
        raise DimensionError('num_perms must be >= 1')
    n_public = 0 if public_slice is None else public_slice.n
    if n_public != n - n_d:
        raise DimensionError(
            f'public slice has {n_public} samples, expected {n - n_d}')
    if public_slice is not None and public_slice.d != private.d:
        raise DimensionError('public and private dimensions differ')
    if n_public == 0:
        return 0.0
    x = np.asarray(x, dtype=np.float64)
    g_private = _gradients(task, x, private)
    g_public = _gradients(task, x, public_slice)
    true_sum = _exact_sum(g_private)
    gen = rng.generator()
    total = 0.0
    for _ in range(num_perms):
        perm = gen.permutation(n)
        surrogate = np.vstack([g_private[perm[:n_d]], g_public])
        # both sums are exactly rounded, so equal multisets cancel to 0
        diff = true_sum - _exact_sum(surrogate)
        total += float(np.linalg.norm(diff))
    return total / num_perms

