"""
Uniform time-series primitives.

Every other stage of the pipeline builds on the three value types defined
here: `Signal` (uniformly sampled values), `EventSeries` (strictly
increasing timestamps) and `Knots` (irregular (t, v) pairs). The operations
are pure functions of their inputs.
"""
import bisect
import logging
import math
import typing as tp

import attr
import numpy as np
from scipy import interpolate, ndimage
from scipy import signal as sps

from stressnet import errors

LOG = logging.getLogger(__name__)


def as_float_array(values: tp.Any) -> np.ndarray:
    """Convert anything array-like to a 1-D float64 array."""
    return np.asarray(values, dtype=np.float64).reshape(-1)


def _all_finite(instance: tp.Any, attribute: 'attr.Attribute[tp.Any]',
                value: np.ndarray) -> None:
    del instance
    if not np.all(np.isfinite(value)):
        raise errors.NonFiniteInput(f'{attribute.name} contains NaN or Inf')


@attr.s(frozen=True, eq=False)
class Signal:
    """
    A uniformly sampled real-valued time series.

    The time of sample i is ``t0_seconds + i / sample_rate_hz``.

    Examples:
        >>> sig = Signal([1.0, 2.0, 3.0], 2.0, t0_seconds=1.0)
        >>> sig.times.tolist()
        [1.0, 1.5, 2.0]
    """
    samples: np.ndarray = attr.ib(
        converter=as_float_array, validator=_all_finite
    )
    sample_rate_hz: float = attr.ib(converter=float)
    t0_seconds: float = attr.ib(default=0.0, converter=float)

    @sample_rate_hz.validator
    def _positive_rate(self, attribute: 'attr.Attribute[float]',
                       value: float) -> None:
        del attribute
        if not (math.isfinite(value) and value > 0):
            raise errors.ValidationError(
                f'sample rate must be positive, got {value}'
            )

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def times(self) -> np.ndarray:
        return self.t0_seconds + np.arange(len(self)) / self.sample_rate_hz

    @property
    def t_end(self) -> float:
        """Time of the last sample."""
        return self.t0_seconds + (len(self) - 1) / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_samples(self, samples: tp.Any) -> 'Signal':
        """A signal on the same time grid with new sample values."""
        return Signal(samples, self.sample_rate_hz, self.t0_seconds)


@attr.s(frozen=True, eq=False)
class EventSeries:
    """Strictly increasing event timestamps in seconds."""
    times_s: np.ndarray = attr.ib(
        converter=as_float_array, validator=_all_finite
    )

    @times_s.validator
    def _strictly_increasing(self, attribute: 'attr.Attribute[np.ndarray]',
                             value: np.ndarray) -> None:
        del attribute
        if np.any(np.diff(value) <= 0):
            raise errors.ValidationError(
                'event times must be strictly increasing'
            )

    def __len__(self) -> int:
        return int(self.times_s.size)

    def shifted(self, offset_s: float) -> 'EventSeries':
        return EventSeries(self.times_s + offset_s)


@attr.s(frozen=True, eq=False)
class Knots:
    """Irregularly spaced (t, v) pairs with strictly increasing t."""
    t_s: np.ndarray = attr.ib(converter=as_float_array, validator=_all_finite)
    v: np.ndarray = attr.ib(converter=as_float_array, validator=_all_finite)

    @t_s.validator
    def _monotonic(self, attribute: 'attr.Attribute[np.ndarray]',
                   value: np.ndarray) -> None:
        del attribute
        if np.any(np.diff(value) <= 0):
            raise errors.NonMonotonicKnots(
                'knot times must be strictly increasing'
            )

    @v.validator
    def _same_length(self, attribute: 'attr.Attribute[np.ndarray]',
                     value: np.ndarray) -> None:
        del attribute
        if value.size != self.t_s.size:
            raise errors.LengthMismatch(
                f'{self.t_s.size} knot times but {value.size} values'
            )

    def __len__(self) -> int:
        return int(self.t_s.size)


@attr.s(frozen=True)
class Absolute:
    """Peaks must exceed a fixed level."""
    theta: float = attr.ib(converter=float)

    def level(self, values: np.ndarray) -> float:
        del values
        return self.theta


@attr.s(frozen=True)
class Adaptive:
    """Peaks must exceed ``mean + k * stddev`` of the signal."""
    k: float = attr.ib(converter=float)

    def level(self, values: np.ndarray) -> float:
        return float(np.mean(values) + self.k * np.std(values))


ThresholdMode = tp.Union[Absolute, Adaptive]


def threshold_from_config(mode: str, value: float) -> ThresholdMode:
    """
    Build a threshold mode from its configuration name.

    Examples:
        >>> threshold_from_config('adaptive', 2)
        Adaptive(k=2.0)
    """
    modes: tp.Dict[str, tp.Type[tp.Any]] = {
        'absolute': Absolute,
        'adaptive': Adaptive
    }
    if mode not in modes:
        raise errors.ConfigError(f'unknown threshold mode {mode!r}')
    return tp.cast(ThresholdMode, modes[mode](value))


def detect_peaks(
    sig: Signal,
    threshold_mode: ThresholdMode = Adaptive(1.0),
    min_distance_s: float = 0.0
) -> EventSeries:
    """
    Detect local maxima above a threshold with sub-sample timing.

    A sample is a candidate when it rises above its left neighbour and does
    not fall below its right neighbour; flat two-sample tops therefore
    yield one peak centred between them. Candidates are refined by a
    parabola through the three samples around the maximum and then pruned
    greedily from the largest amplitude down, so that no two surviving
    peaks are closer than `min_distance_s`.

    Args:
        sig: The signal to search.
        threshold_mode: `Absolute` level or `Adaptive` mean + k*std.
        min_distance_s: Minimum spacing between surviving peaks.

    Returns:
        The peak times.
    """
    values = sig.samples
    if values.size < 3:
        raise errors.EmptySignal(
            f'peak detection needs at least 3 samples, got {values.size}'
        )
    if min_distance_s < 0:
        raise errors.ValidationError('min_distance_s must not be negative')

    level = threshold_mode.level(values)
    mid = values[1:-1]
    idx = np.flatnonzero((mid > values[:-2]) & (mid >= values[2:])) + 1
    idx = idx[values[idx] > level]
    if idx.size == 0:
        return EventSeries([])

    left, centre, right = values[idx - 1], values[idx], values[idx + 1]
    # strictly negative: centre > left and centre >= right
    curvature = left - 2.0 * centre + right
    offset = 0.5 * (left - right) / curvature
    times = sig.t0_seconds + (idx + offset) / sig.sample_rate_hz
    heights = centre - 0.25 * (left - right) * offset

    kept: tp.List[float] = []
    for i in np.argsort(-heights, kind='stable'):
        candidate = float(times[i])
        pos = bisect.bisect_left(kept, candidate)
        too_close_left = pos > 0 and candidate - kept[pos - 1] < min_distance_s
        too_close_right = pos < len(kept) and \
            kept[pos] - candidate < min_distance_s
        if too_close_left or too_close_right:
            continue
        kept.insert(pos, candidate)

    LOG.debug(
        'detect_peaks: %d candidates, %d kept (level %.4g)', idx.size,
        len(kept), level
    )
    return EventSeries(kept)


def cubic_interpolate(knots: Knots, query_times: tp.Any) -> np.ndarray:
    """
    Evaluate the natural cubic spline through `knots`.

    Queries outside the knot span take the value of the nearest end knot.

    Examples:
        >>> cubic_interpolate(Knots([0, 1], [0, 1]), [0.5]).tolist()
        [0.5]
    """
    if len(knots) < 2:
        raise errors.TooFewKnots(
            f'a spline needs at least 2 knots, got {len(knots)}'
        )
    query = as_float_array(query_times)
    if not np.all(np.isfinite(query)):
        raise errors.NonFiniteInput('query times contain NaN or Inf')

    spline = interpolate.CubicSpline(knots.t_s, knots.v, bc_type='natural')
    clamped = np.clip(query, knots.t_s[0], knots.t_s[-1])
    values = spline(clamped)
    values[clamped == knots.t_s[0]] = knots.v[0]
    values[clamped == knots.t_s[-1]] = knots.v[-1]
    return np.asarray(values, dtype=np.float64)


def fir_tap_count(sample_rate_hz: float, low_hz: float) -> int:
    """
    Number of taps used by `fir_bandpass`.

    At least ``4 * ceil(fs) + 1``; longer when needed so that the Hamming
    main lobe (half width ``2 * fs / taps``) fits below `low_hz` twice.

    Examples:
        >>> fir_tap_count(250.0, 5.0)
        1001
        >>> fir_tap_count(15.0, 0.1)
        601
    """
    base = 4 * math.ceil(sample_rate_hz) + 1
    resolving = 2 * math.ceil(2.0 * sample_rate_hz / low_hz) + 1
    return max(base, resolving)


def fir_taps(
    sample_rate_hz: float,
    low_hz: float,
    high_hz: float,
    numtaps: tp.Optional[int] = None
) -> np.ndarray:
    """Design the windowed-sinc (Hamming) band-pass taps."""
    if not 0 < low_hz < high_hz < sample_rate_hz / 2.0:
        raise errors.InvalidBand(
            f'need 0 < {low_hz} < {high_hz} < {sample_rate_hz / 2.0}'
        )
    if numtaps is None:
        numtaps = fir_tap_count(sample_rate_hz, low_hz)
    if numtaps < 3 or numtaps % 2 == 0:
        raise errors.ValidationError(
            f'tap count must be odd and >= 3, got {numtaps}'
        )
    return np.asarray(
        sps.firwin(
            numtaps, [low_hz, high_hz],
            pass_zero=False,
            window='hamming',
            fs=sample_rate_hz
        ),
        dtype=np.float64
    )


def fir_bandpass(
    sig: Signal,
    low_hz: float,
    high_hz: float,
    numtaps: tp.Optional[int] = None
) -> Signal:
    """
    Zero-phase-aligned FIR band-pass.

    The linear-phase filter is applied to the edge-replicated signal and the
    group delay is removed, so the result has the input's length and grid.
    """
    taps = fir_taps(sig.sample_rate_hz, low_hz, high_hz, numtaps)
    if len(sig) < taps.size:
        raise errors.SignalTooShort(
            f'signal has {len(sig)} samples, filter needs {taps.size}'
        )
    half = taps.size // 2
    padded = np.pad(sig.samples, half, mode='edge')
    filtered = np.convolve(padded, taps, mode='valid')
    return sig.with_samples(filtered)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """
    Discrete Gaussian truncated at ``ceil(3 sigma)`` and summing to one.

    Examples:
        >>> gaussian_kernel(1.0).size
        7
    """
    if not sigma > 0:
        raise errors.NonPositiveSigma(f'sigma must be positive, got {sigma}')
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma)**2)
    return kernel / kernel.sum()


def gaussian_smooth_1d(values: tp.Any, sigma: float,
                       axis: int = -1) -> np.ndarray:
    """
    Gaussian smoothing along one axis with replicate padding.

    Examples:
        >>> np.round(gaussian_smooth_1d([5, 5, 5, 5, 5], 2.0), 9).tolist()
        [5.0, 5.0, 5.0, 5.0, 5.0]
    """
    kernel = gaussian_kernel(sigma)
    data = np.asarray(values, dtype=np.float64)
    return np.asarray(
        ndimage.correlate1d(data, kernel, axis=axis, mode='nearest'),
        dtype=np.float64
    )


def resample_fixed(sig: Signal, n: int) -> np.ndarray:
    """
    Linearly resample `sig` at `n` equally spaced times over its span.

    Examples:
        >>> resample_fixed(Signal([0, 2], 1.0), 3).tolist()
        [0.0, 1.0, 2.0]
    """
    if len(sig) == 0:
        raise errors.EmptySignal('cannot resample an empty signal')
    if n < 2:
        raise errors.ValidationError(f'need at least 2 output points, got {n}')
    query = np.linspace(sig.t0_seconds, sig.t_end, n)
    return np.interp(query, sig.times, sig.samples)
