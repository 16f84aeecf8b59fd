from datetime import date

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
import pytest

from vollab.common import DomainError, DataError
from vollab.datasets import (ReturnsDataset, descriptive_stats, prices_to_returns, read_series,
                             ingest, business_dates, write_series, write_table, read_table,
                             write_document, parse_document, read_document, write_states_rle)


def write(tmp_path, text, name='series.csv'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


def test_read_series(tmp_path):
    path = write(tmp_path, 'date,value\n2015-01-28,-1.35\n2015-01-29,0.95\n2015-01-30,-1.31\n')
    dates, values = read_series(path)
    assert dates == [date(2015, 1, 28), date(2015, 1, 29), date(2015, 1, 30)]
    assert_array_equal(values, [-1.35, 0.95, -1.31])


@pytest.mark.parametrize('text,line,fragment', [
    ('day,value\n2015-01-28,1.0\n', 1, 'Header'),
    ('date,value\n2015-01-28,1.0\n2015-13-01,2.0\n', 3, 'Bad date'),
    ('date,value\n2015-01-28,1.0\n2015-01-29,abc\n', 3, 'Bad value'),
    ('date,value\n2015-01-28,1.0\n2015-01-29,nan\n', 3, 'Non-finite'),
    ('date,value\n2015-01-28,1.0\n2015-01-28,2.0\n', 3, 'not after'),
])
def test_read_series_reports_line(tmp_path, text, line, fragment):
    with pytest.raises(DataError) as info:
        read_series(write(tmp_path, text))
    assert info.value.line == line
    assert fragment in str(info.value)
    assert 'line {}'.format(line) in str(info.value)


def test_empty_file(tmp_path):
    with pytest.raises(DataError):
        read_series(write(tmp_path, ''))


def test_invalid_utf8_reports_line(tmp_path):
    path = tmp_path / 'series.csv'
    path.write_bytes(b'date,value\n2015-01-28,1.0\n2015-01-29,\xff\xfe\n')
    with pytest.raises(DataError) as info:
        read_series(str(path))
    assert info.value.line == 3
    assert 'UTF-8' in str(info.value)

    path = tmp_path / 'run.cfg'
    path.write_bytes(b'model.m = 2\nmodel.family = \xff\n')
    with pytest.raises(DataError) as info:
        read_document(str(path))
    assert info.value.line == 2
    assert str(info.value).startswith(str(path))


def test_ingest_prices(tmp_path):
    path = write(tmp_path, 'date,value\n2015-01-02,100\n2015-01-05,101\n2015-01-06,99.99\n')
    dataset = ingest(path, kind='prices')
    assert dataset.dates == (date(2015, 1, 5), date(2015, 1, 6))
    assert_allclose(dataset.values, [100 * np.log(1.01), 100 * np.log(99.99 / 101)])


def test_ingest_rejects_non_positive_prices(tmp_path):
    path = write(tmp_path, 'date,value\n2015-01-02,100\n2015-01-05,0\n')
    with pytest.raises(DataError) as info:
        ingest(path, kind='prices')
    assert info.value.line == 3
    with pytest.raises(DomainError):
        ingest(path, kind='volumes')


def test_series_written_values_read_back_exactly(tmp_path):
    values = np.random.default_rng(1).standard_normal(50) / 3
    dates = business_dates(50)
    path = write_series(str(tmp_path / 'out' / 'returns.csv'), dates, values)
    read_dates, read_values = read_series(path)
    assert read_dates == dates
    assert_array_equal(read_values, values)
    with open(path, encoding='utf-8') as f:
        assert f.readline() == 'date,value\n'


def test_business_dates():
    dates = business_dates(3, '2015-01-30')
    assert dates == [date(2015, 1, 30), date(2015, 2, 2), date(2015, 2, 3)]


def test_descriptive_stats():
    stats = descriptive_stats([1.0, 2.0, 3.0, 4.0, 10.0])
    assert stats['count'] == 5
    assert stats['mean'] == pytest.approx(4.0)
    assert stats['std'] == pytest.approx(np.std([1, 2, 3, 4, 10], ddof=1))
    assert stats['max'] == 10.0
    assert stats['skewness'] > 0
    assert not stats['degenerate']

    flat = descriptive_stats([2.0, 2.0, 2.0])
    assert flat['degenerate']
    assert np.isnan(flat['kurtosis'])
    with pytest.raises(DomainError):
        descriptive_stats([])


def test_prices_to_returns():
    assert_allclose(prices_to_returns([100.0, 110.0, 99.0]),
                    [100 * np.log(1.1), 100 * np.log(0.9)])


def test_dataset_split():
    dates = business_dates(1500)
    dataset = ReturnsDataset(dates, np.zeros(1500))
    assert dataset.split_index == 1000
    assert len(dataset.in_sample) == 1000
    assert len(dataset.out_of_sample) == 500
    assert dataset.with_split(0.5).split_index == 750
    assert dataset.with_split(1200).split_index == 1200
    with pytest.raises(DomainError):
        dataset.with_split(1500)


def test_dataset_validation():
    dates = business_dates(3)
    with pytest.raises(DomainError):
        ReturnsDataset(dates, [1.0, 2.0])
    with pytest.raises(DomainError):
        ReturnsDataset(dates, [1.0, np.inf, 2.0])
    with pytest.raises(DomainError):
        ReturnsDataset(dates[::-1], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        ReturnsDataset(dates, [1.0, -2.0, 3.0], kind='prices')


def test_documents(tmp_path):
    path = write_document(str(tmp_path / 'summary.txt'), {
        'family': 'msst-hygarch', 'm': 2, 'a0_1.mean': 0.1 + 0.2, 'stable': True,
        'levels': (0.05, 0.1),
    })
    with open(path, encoding='utf-8') as f:
        text = f.read()
    assert text.splitlines() == [
        'family = msst-hygarch', 'm = 2', 'a0_1.mean = 0.30000000000000004',
        'stable = true', 'levels = 0.05, 0.1',
    ]
    doc = read_document(path)
    assert float(doc['a0_1.mean']) == 0.1 + 0.2


def test_parse_document_errors():
    lines = ['# comment', '', 'a = 1  # trailing', 'b=two']
    assert parse_document(lines) == {'a': '1', 'b': 'two'}
    with pytest.raises(DataError) as info:
        parse_document(['a = 1', 'oops'])
    assert info.value.line == 2
    with pytest.raises(DataError) as info:
        parse_document(['a = 1', 'a = 2'])
    assert 'Duplicate' in str(info.value)
    with pytest.raises(DataError) as info:
        parse_document(['= 1'])
    assert info.value.line == 1

    def convert(key, raw):
        return int(raw)
    with pytest.raises(DataError) as info:
        parse_document(['a = 1', 'b = x'], path='run.cfg', convert=convert)
    assert info.value.line == 2
    assert str(info.value).startswith('run.cfg:line 2')


def test_tables(tmp_path):
    path = write_table(str(tmp_path / 'draws.csv'), {'a0_1': [0.1, 1 / 3], 'p11': [0.9, 0.8]})
    frame = read_table(path)
    assert list(frame.columns) == ['a0_1', 'p11']
    assert frame['a0_1'].iloc[1] == 1 / 3


def test_states_run_length_encoding(tmp_path):
    states = np.array([[0, 0, 1, 1, 1, 0], [1, 1, 1, 1, 1, 1]])
    frame = read_table(write_states_rle(str(tmp_path / 'states.csv'), states))
    assert frame.values.tolist() == [
        [0, 0, 2, 1], [0, 2, 3, 2], [0, 5, 1, 1],
        [1, 0, 6, 2],
    ]
