"""
Ground-truth ISTI and the comparison features derived from cardiac and
thermal recordings.

ISTI is the delay between an ECG R-peak and the following peak of the
impedance derivative dZ/dt. One value per heartbeat is placed at the R-peak
time and a natural cubic spline turns the beat-wise values into a signal on
the video frame grid. HR, HRV (RMSSD) and the nostril breathing trace are
the features the stress classifier is compared against.
"""
import logging
import typing as tp

import attr
import numpy as np

from stressnet import errors
from stressnet.emission import Rect, ThermalClip, check_rect
from stressnet.timeseries import (
    Adaptive,
    EventSeries,
    Knots,
    Signal,
    ThresholdMode,
    cubic_interpolate,
    detect_peaks,
    fir_bandpass,
    threshold_from_config,
)

LOG = logging.getLogger(__name__)

MIN_OVERLAP_S = 2.0


@attr.s(frozen=True, eq=False)
class CardiacPair:
    """Simultaneous ECG and dZ/dt recordings."""
    ecg: Signal = attr.ib()
    dzdt: Signal = attr.ib()

    @dzdt.validator
    def _overlap(self, attribute: 'attr.Attribute[Signal]',
                 value: Signal) -> None:
        del attribute
        start = max(self.ecg.t0_seconds, value.t0_seconds)
        end = min(self.ecg.t_end, value.t_end)
        if end - start < MIN_OVERLAP_S:
            raise errors.ValidationError(
                f'ECG and dZ/dt overlap by {end - start:.3f} s, '
                f'need {MIN_OVERLAP_S} s'
            )


@attr.s(frozen=True)
class DetectorConfig:
    """Peak detector settings for both cardiac channels."""
    ecg_threshold: ThresholdMode = attr.ib(default=Adaptive(2.0))
    dzdt_threshold: ThresholdMode = attr.ib(default=Adaptive(2.0))
    min_distance_s: float = attr.ib(default=0.3)

    @classmethod
    def from_config(cls, cfg: tp.Any) -> 'DetectorConfig':
        peaks = cfg['peaks']
        return cls(
            ecg_threshold=threshold_from_config(
                str(peaks['ecg_mode']), float(peaks['ecg_value'].value)
            ),
            dzdt_threshold=threshold_from_config(
                str(peaks['dzdt_mode']), float(peaks['dzdt_value'].value)
            ),
            min_distance_s=float(peaks['min_distance_s'].value)
        )


@attr.s(frozen=True, eq=False)
class IstiGroundTruth:
    """Beat-wise ISTI knots (ms) and their interpolation on a frame grid."""
    knots: Knots = attr.ib()
    continuous: Signal = attr.ib()
    skipped_beats: int = attr.ib()


def pair_peaks(r_peaks: EventSeries, z_peaks: EventSeries,
               max_lag_s: float) -> tp.Tuple[Knots, int]:
    """
    Pair every R-peak with the first dZ/dt peak in ``(t_r, t_r + max_lag]``.

    Returns:
        Knots of (R-peak time, ISTI in ms) and the number of unmatched beats.

    Examples:
        >>> knots, skipped = pair_peaks(
        ...     EventSeries([1.0, 2.0, 3.0]), EventSeries([1.15, 3.12]), 0.5)
        >>> knots.v.round(6).tolist(), skipped
        ([150.0, 120.0], 1)
    """
    if not max_lag_s > 0:
        raise errors.ValidationError(
            f'max_lag_s must be positive, got {max_lag_s}'
        )
    z_times = z_peaks.times_s
    knot_t: tp.List[float] = []
    knot_v: tp.List[float] = []
    skipped = 0
    for t_r in r_peaks.times_s:
        pos = int(np.searchsorted(z_times, t_r, side='right'))
        if pos < z_times.size and z_times[pos] - t_r <= max_lag_s:
            knot_t.append(float(t_r))
            knot_v.append(float(z_times[pos] - t_r) * 1000.0)
        else:
            skipped += 1
    return Knots(knot_t, knot_v), skipped


def compute_isti_knots(
    pair: CardiacPair,
    detector: tp.Optional[DetectorConfig] = None,
    max_lag_s: float = 0.5
) -> tp.Tuple[Knots, int]:
    """
    Beat-wise ISTI from an ECG / dZ/dt pair.

    Beats without a dZ/dt peak inside the lag window are skipped and
    counted rather than interpolated.
    """
    if detector is None:
        detector = DetectorConfig()
    r_peaks = detect_peaks(
        pair.ecg, detector.ecg_threshold, detector.min_distance_s
    )
    z_peaks = detect_peaks(
        pair.dzdt, detector.dzdt_threshold, detector.min_distance_s
    )
    if len(r_peaks) == 0 or len(z_peaks) == 0:
        raise errors.NoPeaksDetected(
            f'{len(r_peaks)} ECG peaks, {len(z_peaks)} dZ/dt peaks'
        )

    knots, skipped = pair_peaks(r_peaks, z_peaks, max_lag_s)
    if len(knots) < 2:
        raise errors.FewerThanTwoKnots(
            f'only {len(knots)} beats could be paired ({skipped} skipped)'
        )
    if skipped:
        LOG.warning('%d beat(s) without a dZ/dt partner were skipped', skipped)
    return knots, skipped


def frame_times(fps: float, duration_s: float, t0_seconds: float = 0.0
               ) -> np.ndarray:
    """
    Timestamps of every frame of a recording.

    Examples:
        >>> frame_times(15.0, 40.0).size
        600
    """
    count = int(round(duration_s * fps))
    return t0_seconds + np.arange(count) / fps


def isti_continuous(knots: Knots, frame_times_s: tp.Any) -> Signal:
    """Spline the ISTI knots onto a uniform frame grid."""
    query = np.asarray(frame_times_s, dtype=np.float64).reshape(-1)
    if query.size < 2:
        raise errors.ValidationError('need at least two frame timestamps')
    values = cubic_interpolate(knots, query)
    rate = 1.0 / float(query[1] - query[0])
    return Signal(values, rate, query[0])


def ground_truth(
    pair: CardiacPair,
    frame_times_s: tp.Any,
    detector: tp.Optional[DetectorConfig] = None,
    max_lag_s: float = 0.5
) -> IstiGroundTruth:
    """Knots plus their continuous interpolation, in one go."""
    knots, skipped = compute_isti_knots(pair, detector, max_lag_s)
    return IstiGroundTruth(
        knots, isti_continuous(knots, frame_times_s), skipped
    )


def normalize_isti(ms_values: tp.Any, isti_max_ms: float = 300.0
                  ) -> np.ndarray:
    """
    Map milliseconds onto [0, 1] by a fixed scale.

    Examples:
        >>> normalize_isti([150.0, 400.0]).tolist()
        [0.5, 1.0]
    """
    if not isti_max_ms > 0:
        raise errors.NonPositiveScale(
            f'isti_max_ms must be positive, got {isti_max_ms}'
        )
    values = np.asarray(ms_values, dtype=np.float64)
    return np.clip(values / isti_max_ms, 0.0, 1.0)


def denormalize_isti(values_01: tp.Any, isti_max_ms: float = 300.0
                    ) -> np.ndarray:
    """Inverse of `normalize_isti` on its unclamped range."""
    if not isti_max_ms > 0:
        raise errors.NonPositiveScale(
            f'isti_max_ms must be positive, got {isti_max_ms}'
        )
    return np.asarray(values_01, dtype=np.float64) * isti_max_ms


def _window_ends(peaks: EventSeries, window_s: float, stride_s: float,
                 span: tp.Optional[tp.Tuple[float, float]]) -> np.ndarray:
    if not (window_s > 0 and stride_s > 0):
        raise errors.ValidationError('window and stride must be positive')
    if span is None:
        if len(peaks) == 0:
            # nothing to anchor on: a single window without beats
            span = (0.0, window_s)
        else:
            span = (float(peaks.times_s[0]), float(peaks.times_s[-1]))
    start, end = span
    if end - start < window_s:
        raise errors.WindowLongerThanRecord(
            f'record of {end - start:.3f} s is shorter than the '
            f'{window_s} s window'
        )
    count = int(np.floor((end - start - window_s) / stride_s + 1e-9)) + 1
    return start + window_s + np.arange(count) * stride_s


def compute_hr(
    peaks: EventSeries,
    window_s: float = 15.0,
    stride_s: float = 1.0,
    span: tp.Optional[tp.Tuple[float, float]] = None
) -> Signal:
    """
    Heart rate in bpm by counting beats in sliding windows.

    Each value belongs to the window ``[end - window_s, end)`` and is placed
    at the window end. `span` is the recording's (start, end); it defaults
    to the first and last event, or to one window when there are no
    events at all.

    Examples:
        >>> compute_hr(EventSeries([]), 10.0).samples.tolist()
        [0.0]
    """
    ends = _window_ends(peaks, window_s, stride_s, span)
    times = peaks.times_s
    counts = np.searchsorted(times, ends, side='left') - \
        np.searchsorted(times, ends - window_s, side='left')
    return Signal(counts * 60.0 / window_s, 1.0 / stride_s, ends[0])


def rmssd(peak_times_s: tp.Any) -> float:
    """
    RMSSD in ms of the RR intervals between consecutive peaks.

    Fewer than three peaks give 0.

    Examples:
        >>> rmssd([0.0, 0.8, 1.8, 2.6])
        200.0
    """
    times = np.asarray(peak_times_s, dtype=np.float64)
    if times.size < 3:
        return 0.0
    # nanosecond resolution keeps millisecond RR values exact
    rr_ms = np.round(np.diff(times) * 1000.0, 6)
    return float(np.sqrt(np.mean(np.diff(rr_ms)**2)))


def compute_hrv_rmssd(
    peaks: EventSeries,
    window_s: float = 15.0,
    stride_s: float = 1.0,
    span: tp.Optional[tp.Tuple[float, float]] = None
) -> Signal:
    """Windowed RMSSD on the same grid as `compute_hr`."""
    ends = _window_ends(peaks, window_s, stride_s, span)
    times = peaks.times_s
    lo = np.searchsorted(times, ends - window_s, side='left')
    hi = np.searchsorted(times, ends, side='left')
    values = [rmssd(times[a:b]) for a, b in zip(lo, hi)]
    return Signal(values, 1.0 / stride_s, ends[0])


def roi_signal(clip: ThermalClip, roi: Rect) -> Signal:
    """Mean raw count inside `roi` for every frame."""
    check_rect(clip.width, clip.height, roi, errors.RoiOutOfBounds)
    x0, y0, w, h = roi
    region = clip.frames[:, y0:y0 + h, x0:x0 + w].astype(np.float64)
    return Signal(region.mean(axis=(1, 2)), clip.fps, clip.t0_seconds)


def breathing_signal(
    clip: ThermalClip,
    roi: Rect,
    low_hz: float = 0.1,
    high_hz: float = 0.85
) -> Signal:
    """Band-passed ROI temperature trace (0.1-0.85 Hz by default)."""
    return fir_bandpass(roi_signal(clip, roi), low_hz, high_hz)
