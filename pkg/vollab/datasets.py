"""
Return series and the workbench's file formats.

Series files are UTF-8 CSV with header `date,value`, ISO-8601 dates and
decimal-point numbers written in shortest round-trip form, so re-reading
an emitted file reproduces the values exactly. Reports are flat
`key = value` documents.
"""
from dataclasses import dataclass
import io
import math
import os

import numpy as np
import pandas as pd
from dateutil.parser import isoparse
from scipy.stats import skew, kurtosis

import config
from .common import log, DomainError, DataError


KINDS = ('returns', 'prices')


@dataclass(frozen=True, eq=False)
class ReturnsDataset:
    dates: tuple
    values: np.ndarray
    kind: str = 'returns'
    split_index: int = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'dates', tuple(self.dates))
        if self.kind not in KINDS:
            raise DomainError('Unknown series kind {}; expected one of {}'.format(
                self.kind, ', '.join(KINDS)))
        if len(self.dates) != len(values):
            raise DomainError('Dates and values differ in length')
        if not np.all(np.isfinite(values)):
            raise DomainError('Series values must be finite')
        if self.kind == 'prices' and np.any(values <= 0):
            raise DomainError('Prices must be positive')
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise DomainError('Dates must be strictly increasing ({} after {})'.format(cur, prev))
        if self.split_index is None:
            object.__setattr__(self, 'split_index', default_split(len(values)))
        if len(values) > 1 and not 0 < self.split_index < len(values):
            raise DomainError('Split index must lie in (0, {}), got {}'.format(
                len(values), self.split_index))

    def __len__(self):
        return len(self.values)

    @property
    def in_sample(self):
        return self.values[:self.split_index]

    @property
    def out_of_sample(self):
        return self.values[self.split_index:]

    def with_split(self, split):
        """ split given as an index (>= 1) or as an in-sample fraction (< 1) """
        if split is None:
            return self
        split = float(split)
        index = int(round(split * len(self))) if split < 1 else int(split)
        return ReturnsDataset(self.dates, self.values, self.kind, index)

    def stats(self):
        return descriptive_stats(self.values)


def default_split(n):
    return max(1, min(n - 1, int(round(n * config.SPLIT_FRACTION))))


def descriptive_stats(values):
    """
    count, mean, std, min, max, skewness and excess kurtosis;
    a constant series is flagged as degenerate.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if not n:
        raise DomainError('Empty series')
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    ret = {
        'count': n,
        'mean': float(np.mean(values)),
        'std': std,
        'min': float(np.min(values)),
        'max': float(np.max(values)),
        'degenerate': std == 0,
    }
    if std == 0:
        log.warning('Series of {} observations has zero variance'.format(n))
        ret['skewness'] = ret['kurtosis'] = float('nan')
    else:
        ret['skewness'] = float(skew(values))
        ret['kurtosis'] = float(kurtosis(values))
    return ret


def prices_to_returns(values):
    """ percentage log returns 100 (ln p_t - ln p_{t-1}) """
    return 100 * np.diff(np.log(np.asarray(values, dtype=float)))


def _parse_date(val):
    return isoparse(val).date()


def _read_text(path):
    with open(path, 'rb') as f:
        raw = f.read()
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise DataError('Not valid UTF-8 (byte 0x{:02x})'.format(raw[e.start]),
                        line=raw.count(b'\n', 0, e.start) + 1, path=path)


def read_series(path):
    """
    Reads a `date,value` CSV; returns (dates, values).
    Errors carry the offending line number.
    """
    try:
        frame = pd.read_csv(io.StringIO(_read_text(path)), dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError('File is empty', path=path)
    except pd.errors.ParserError as e:
        raise DataError('Malformed CSV: {}'.format(e), path=path)
    columns = [col.strip().lower() for col in frame.columns]
    if columns != ['date', 'value']:
        raise DataError('Header must be "date,value", got "{}"'.format(','.join(frame.columns)),
                        line=1, path=path)
    dates, values = [], []
    for line, (raw_date, raw_value) in enumerate(frame.itertuples(index=False, name=None), 2):
        try:
            day = _parse_date(raw_date.strip())
        except (ValueError, OverflowError):
            raise DataError('Bad date "{}"'.format(raw_date), line=line, path=path)
        try:
            val = float(raw_value)
        except ValueError:
            raise DataError('Bad value "{}"'.format(raw_value), line=line, path=path)
        if not math.isfinite(val):
            raise DataError('Non-finite value "{}"'.format(raw_value), line=line, path=path)
        if dates and day <= dates[-1]:
            raise DataError('Date {} is not after {}'.format(day, dates[-1]), line=line, path=path)
        dates.append(day)
        values.append(val)
    return dates, np.array(values)


def ingest(path, kind='returns', split=None):
    """
    Loads returns (or prices, converted to percentage log returns)
    and logs their descriptive statistics.
    """
    if kind not in KINDS:
        raise DomainError('Unknown series kind {}; expected one of {}'.format(kind, ', '.join(KINDS)))
    dates, values = read_series(path)
    if kind == 'prices':
        bad = np.flatnonzero(values <= 0)
        if len(bad):
            raise DataError('Non-positive price {}'.format(values[bad[0]]), line=int(bad[0]) + 2,
                            path=path)
        values = prices_to_returns(values)
        dates = dates[1:]
    if not len(values):
        raise DataError('No observations', path=path)
    dataset = ReturnsDataset(dates, values, 'returns').with_split(split)
    stats = dataset.stats()
    log.info('Loaded {}: {count} returns, mean {mean:.4f}, std {std:.4f}, '
             'min {min:.4f}, max {max:.4f}'.format(path, **stats))
    return dataset


def business_dates(n, start=None):
    return [ts.date() for ts in pd.bdate_range(start or config.SIMULATION_START, periods=n)]


def _format(val):
    if isinstance(val, (bool, np.bool_)):
        return 'true' if val else 'false'
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (list, tuple)):
        return ', '.join(_format(x) for x in val)
    return str(val)


def _ensure_dir(path):
    folder = os.path.dirname(os.fspath(path))
    if folder:
        os.makedirs(folder, exist_ok=True)


def write_series(path, dates, values):
    _ensure_dir(path)
    frame = pd.DataFrame({
        'date': [day.isoformat() for day in dates],
        'value': [_format(float(val)) for val in values],
    })
    frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    return path


def write_table(path, columns):
    """ CSV with the given ordered column mapping; floats round-trip """
    _ensure_dir(path)
    frame = pd.DataFrame({name: [_format(val) for val in vals] for name, vals in columns.items()})
    frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    return path


def read_table(path):
    try:
        return pd.read_csv(io.StringIO(_read_text(path)), float_precision='round_trip')
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DataError('Malformed table: {}'.format(e), path=path)


def write_document(path, doc):
    """ flat `key = value` text, keys in insertion order """
    _ensure_dir(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for key, val in doc.items():
            f.write('{} = {}\n'.format(key, _format(val)))
    return path


def parse_document(lines, path=None, convert=None):
    """
    key -> value from `key = value` lines; `#` starts a comment.
    `convert(key, raw)` may type-check each entry; its ValueError
    is reported with the line number.
    """
    ret = {}
    for line_no, line in enumerate(lines, 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise DataError('Expected "key = value", got "{}"'.format(line), line=line_no, path=path)
        key, val = (part.strip() for part in line.split('=', 1))
        if not key:
            raise DataError('Empty key', line=line_no, path=path)
        if key in ret:
            raise DataError('Duplicate key {}'.format(key), line=line_no, path=path)
        if convert:
            try:
                val = convert(key, val)
            except ValueError as e:
                raise DataError(str(e), line=line_no, path=path)
        ret[key] = val
    return ret


def read_document(path, convert=None):
    return parse_document(_read_text(path).splitlines(), path, convert)


def write_states_rle(path, states):
    """
    Run-length encoded regime paths: one row per run
    (draw, start index, length, regime numbered from 1).
    """
    draws, starts, lengths, regimes = [], [], [], []
    for k, path_z in enumerate(np.asarray(states)):
        change = np.flatnonzero(np.diff(path_z)) + 1
        begin = np.concatenate(([0], change))
        end = np.concatenate((change, [len(path_z)]))
        draws.extend([k] * len(begin))
        starts.extend(begin.tolist())
        lengths.extend((end - begin).tolist())
        regimes.extend((path_z[begin] + 1).tolist())
    return write_table(path, {'draw': draws, 'start': starts, 'length': lengths, 'regime': regimes})
