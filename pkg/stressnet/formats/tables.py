"""
Signal and table CSV files.

Signals are stored as UTF-8 text with the header ``t_seconds,value`` and
one sample per line; event lists use the single column ``t_seconds``.
Numbers are written in their shortest round-trip representation so equal
inputs give byte-identical files.
"""
import csv
import logging
import os
import typing as tp

import numpy as np

from stressnet import errors
from stressnet.timeseries import EventSeries, Signal

LOG = logging.getLogger(__name__)

SIGNAL_HEADER = ['t_seconds', 'value']
EVENT_HEADER = ['t_seconds']
RATE_TOLERANCE = 1e-6

PathT = tp.Union[str, 'os.PathLike[str]']


def _fmt(value: float) -> str:
    return repr(float(value))


def write_signal(path: PathT, sig: Signal) -> None:
    """Write a uniform signal as ``t_seconds,value`` rows."""
    with open(path, 'w', encoding='utf-8', newline='') as outf:
        outf.write(','.join(SIGNAL_HEADER) + '\n')
        for t, v in zip(sig.times, sig.samples):
            outf.write(f'{_fmt(t)},{_fmt(v)}\n')


def write_events(path: PathT, events: EventSeries) -> None:
    """Write an event list as a single ``t_seconds`` column."""
    with open(path, 'w', encoding='utf-8', newline='') as outf:
        outf.write(EVENT_HEADER[0] + '\n')
        for t in events.times_s:
            outf.write(_fmt(t) + '\n')


def _read_rows(path: PathT) -> tp.Tuple[tp.List[str], tp.List[tp.List[str]]]:
    try:
        with open(path, 'r', encoding='utf-8', newline='') as inf:
            rows = [row for row in csv.reader(inf) if row]
    except UnicodeDecodeError as err:
        raise errors.MalformedCsv(f'{path}: not UTF-8 text') from err
    if not rows:
        raise errors.MalformedCsv(f'{path}: missing header line')
    return [h.strip() for h in rows[0]], rows[1:]


def _floats(path: PathT, rows: tp.List[tp.List[str]],
            width: int) -> np.ndarray:
    try:
        data = np.array([[float(cell) for cell in row] for row in rows],
                        dtype=np.float64)
    except ValueError as err:
        raise errors.MalformedCsv(f'{path}: {err}') from err
    if data.size == 0:
        return np.zeros((0, width))
    if data.ndim != 2 or data.shape[1] != width:
        raise errors.MalformedCsv(f'{path}: expected {width} column(s)')
    return data


def read_any(path: PathT) -> tp.Union[Signal, EventSeries]:
    """
    Read either a uniform signal or an event list, depending on the header.

    For signals the rate is inferred from the first two timestamps and
    every gap is checked against it.
    """
    header, rows = _read_rows(path)
    if header == EVENT_HEADER:
        data = _floats(path, rows, 1)
        return EventSeries(data[:, 0])
    if header != SIGNAL_HEADER:
        raise errors.MalformedCsv(f'{path}: unexpected header {header}')

    data = _floats(path, rows, 2)
    if data.shape[0] < 2:
        raise errors.MalformedCsv(
            f'{path}: need two samples to infer the sample rate'
        )
    times, values = data[:, 0], data[:, 1]
    step = times[1] - times[0]
    if step <= 0:
        raise errors.MalformedCsv(f'{path}: timestamps must increase')
    gaps = np.diff(times)
    if np.any(np.abs(gaps - step) > RATE_TOLERANCE * step):
        raise errors.MalformedCsv(f'{path}: samples are not uniformly spaced')
    return Signal(values, 1.0 / step, times[0])


def read_signal(path: PathT) -> Signal:
    sig = read_any(path)
    if not isinstance(sig, Signal):
        raise errors.MalformedCsv(f'{path}: expected a signal, got events')
    return sig


def read_events(path: PathT) -> EventSeries:
    """Read a single-column event list."""
    events = read_any(path)
    if not isinstance(events, EventSeries):
        raise errors.MalformedCsv(f'{path}: expected events, got a signal')
    return events


def read_table(path: PathT) -> tp.List[tp.Dict[str, str]]:
    """Read a CSV table with a header line into a list of row dicts."""
    with open(path, 'r', encoding='utf-8', newline='') as inf:
        reader = csv.DictReader(inf)
        if reader.fieldnames is None:
            raise errors.MalformedCsv(f'{path}: missing header line')
        return [{k.strip(): (v or '').strip()
                 for k, v in row.items()
                 if k is not None}
                for row in reader]


def write_table(
    path: PathT, fieldnames: tp.Sequence[str],
    rows: tp.Iterable[tp.Mapping[str, tp.Any]]
) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as outf:
        writer = csv.DictWriter(
            outf, fieldnames=list(fieldnames), lineterminator='\n'
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(dict(row))
