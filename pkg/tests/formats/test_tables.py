import numpy as np
import pytest

from stressnet import errors
from stressnet.formats import tables
from stressnet.timeseries import EventSeries, Signal


def describe_signals():

    def round_trip_is_exact(tmp_path, rng):
        sig = Signal(rng.normal(size=40), 15.0, t0_seconds=2.0)
        path = tmp_path / 'sig.csv'
        tables.write_signal(path, sig)
        back = tables.read_signal(path)
        assert np.array_equal(back.samples, sig.samples)
        assert back.sample_rate_hz == pytest.approx(15.0)
        assert back.t0_seconds == 2.0

    def writes_a_header_and_one_row_per_sample(tmp_path):
        path = tmp_path / 'sig.csv'
        tables.write_signal(path, Signal([1.0, 2.5], 2.0))
        assert path.read_text() == 't_seconds,value\n0.0,1.0\n0.5,2.5\n'

    def needs_uniform_spacing(tmp_path):
        path = tmp_path / 'sig.csv'
        path.write_text('t_seconds,value\n0,1\n1,2\n3,3\n')
        with pytest.raises(errors.MalformedCsv):
            tables.read_signal(path)

    def needs_two_samples(tmp_path):
        path = tmp_path / 'sig.csv'
        path.write_text('t_seconds,value\n0,1\n')
        with pytest.raises(errors.MalformedCsv):
            tables.read_signal(path)

    def rejects_text_values(tmp_path):
        path = tmp_path / 'sig.csv'
        path.write_text('t_seconds,value\n0,1\n1,abc\n')
        with pytest.raises(errors.MalformedCsv):
            tables.read_signal(path)

    def rejects_unknown_headers(tmp_path):
        path = tmp_path / 'sig.csv'
        path.write_text('time,v\n0,1\n1,2\n')
        with pytest.raises(errors.MalformedCsv):
            tables.read_signal(path)


def describe_events():

    def round_trip(tmp_path):
        path = tmp_path / 'peaks.csv'
        tables.write_events(path, EventSeries([0.25, 1.0, 1.75]))
        assert tables.read_events(path).times_s.tolist() == [0.25, 1.0, 1.75]

    def are_not_signals(tmp_path):
        path = tmp_path / 'peaks.csv'
        tables.write_events(path, EventSeries([0.25, 1.0]))
        with pytest.raises(errors.MalformedCsv):
            tables.read_signal(path)


def test_tables_keep_column_order(tmp_path):
    path = tmp_path / 'scores.csv'
    tables.write_table(path, ('trial_id', 'score'),
                       [{'trial_id': 'a', 'score': '0.5'}])
    assert path.read_text() == 'trial_id,score\na,0.5\n'
    assert tables.read_table(path) == [{'trial_id': 'a', 'score': '0.5'}]
