import numpy as np
import pytest

from stressnet import errors
from stressnet.timeseries import (
    Absolute,
    Adaptive,
    EventSeries,
    Knots,
    Signal,
    cubic_interpolate,
    detect_peaks,
    fir_bandpass,
    fir_tap_count,
    gaussian_kernel,
    gaussian_smooth_1d,
    resample_fixed,
    threshold_from_config,
)


def describe_signal():

    def times_follow_rate_and_offset():
        sig = Signal(np.zeros(4), 4.0, t0_seconds=2.0)
        assert sig.times.tolist() == [2.0, 2.25, 2.5, 2.75]
        assert sig.t_end == 2.75
        assert sig.duration_s == 1.0

    def rejects_non_finite_samples():
        with pytest.raises(errors.NonFiniteInput):
            Signal([0.0, np.nan], 1.0)

    def rejects_non_positive_rate():
        with pytest.raises(errors.ValidationError):
            Signal([0.0, 1.0], 0.0)

    def with_samples_keeps_the_grid():
        sig = Signal([1, 2, 3], 10.0, 0.5).with_samples([4, 5, 6])
        assert sig.sample_rate_hz == 10.0
        assert sig.t0_seconds == 0.5
        assert sig.samples.tolist() == [4.0, 5.0, 6.0]


def describe_knots():

    def must_be_strictly_increasing():
        with pytest.raises(errors.NonMonotonicKnots):
            Knots([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def must_pair_times_and_values():
        with pytest.raises(errors.LengthMismatch):
            Knots([0.0, 1.0], [1.0])

    def event_series_must_increase():
        with pytest.raises(errors.ValidationError):
            EventSeries([1.0, 0.5])


def describe_detect_peaks():

    def finds_every_sine_crest():
        fs = 100.0
        t = np.arange(500) / fs
        peaks = detect_peaks(Signal(np.sin(2 * np.pi * t), fs), Adaptive(1.0))
        expected = np.array([0.25, 1.25, 2.25, 3.25, 4.25])
        assert len(peaks) == 5
        assert np.max(np.abs(peaks.times_s - expected)) < 1e-3

    def flat_top_gives_one_centred_peak():
        peaks = detect_peaks(Signal([0, 1, 1, 0, 0], 1.0), Absolute(0.5))
        assert peaks.times_s.tolist() == [1.5]

    def threshold_above_maximum_finds_nothing():
        peaks = detect_peaks(Signal([0, 1, 0, 2, 0], 1.0), Absolute(5.0))
        assert len(peaks) == 0

    def keeps_the_larger_of_close_peaks():
        values = np.zeros(30)
        values[10] = 1.0
        values[13] = 2.0
        sig = Signal(values, 100.0)

        both = detect_peaks(sig, Absolute(0.5))
        assert np.allclose(both.times_s, [0.10, 0.13])

        pruned = detect_peaks(sig, Absolute(0.5), min_distance_s=0.1)
        assert np.allclose(pruned.times_s, [0.13])

    def survivors_keep_the_minimum_distance(rng):
        sig = Signal(rng.standard_normal(400), 100.0)
        peaks = detect_peaks(sig, Absolute(0.0), min_distance_s=0.05)

        gaps = np.diff(peaks.times_s)
        assert len(peaks) > 10
        assert np.all(gaps > 0.0)
        assert np.all(gaps >= 0.05)

    def needs_three_samples():
        with pytest.raises(errors.EmptySignal):
            detect_peaks(Signal([1.0, 2.0], 1.0))

    def modes_come_from_configuration_names():
        assert threshold_from_config('absolute', 3) == Absolute(3.0)
        with pytest.raises(errors.ConfigError):
            threshold_from_config('median', 1)


def describe_cubic_interpolate():

    def reproduces_linear_data():
        knots = Knots([0.0, 1.0, 2.0, 4.0], [0.0, 2.0, 4.0, 8.0])
        values = cubic_interpolate(knots, [0.5, 1.5, 3.0])
        assert np.allclose(values, [1.0, 3.0, 6.0])

    def passes_through_cubic_knots_exactly():
        t = np.array([0.0, 1.0, 2.0, 3.0])
        values = cubic_interpolate(Knots(t, t**3), t)
        assert np.max(np.abs(values - t**3)) < 1e-9

    def second_derivative_is_continuous_at_interior_knots(rng):
        t = np.cumsum(rng.uniform(0.5, 1.5, size=8))
        knots = Knots(t, rng.standard_normal(8))
        h = 1e-3

        def second_derivative(centres):
            values = cubic_interpolate(knots, np.concatenate(
                [centres - h, centres, centres + h]
            )).reshape(3, -1)
            return (values[0] - 2.0 * values[1] + values[2]) / h**2

        # second derivatives are linear inside a piece: extrapolate to the knot
        inner = t[1:-1]
        left = 2.0 * second_derivative(inner - h) - \
            second_derivative(inner - 2.0 * h)
        right = 2.0 * second_derivative(inner + h) - \
            second_derivative(inner + 2.0 * h)
        assert np.max(np.abs(left - right)) < 1e-6

    def holds_end_values_outside_the_span():
        knots = Knots([1.0, 2.0, 3.0], [5.0, 7.0, 6.0])
        values = cubic_interpolate(knots, [0.0, 1.0, 3.0, 10.0])
        assert values.tolist() == [5.0, 5.0, 6.0, 6.0]

    def needs_two_knots():
        with pytest.raises(errors.TooFewKnots):
            cubic_interpolate(Knots([1.0], [1.0]), [1.0])

    def rejects_non_finite_queries():
        knots = Knots([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(errors.NonFiniteInput):
            cubic_interpolate(knots, [np.inf])


def describe_fir_bandpass():

    def passes_the_band_and_removes_the_offset():
        fs = 100.0
        t = np.arange(2000) / fs
        wave = np.sin(2 * np.pi * 2.0 * t)
        out = fir_bandpass(Signal(wave + 5.0, fs), 0.5, 5.0)

        assert len(out) == 2000
        assert out.t0_seconds == 0.0
        assert np.max(np.abs(out.samples[500:1500] - wave[500:1500])) < 0.05

    def shifting_the_input_shifts_the_output(rng):
        fs, shift = 15.0, 37
        x = rng.standard_normal(2000)
        half = fir_tap_count(fs, 0.1) // 2

        full = fir_bandpass(Signal(x, fs), 0.1, 0.85).samples
        late = fir_bandpass(Signal(x[shift:], fs), 0.1, 0.85).samples

        assert np.max(np.abs(full[shift + half:-half] - late[half:-half])) \
            < 1e-9

    def rejects_bands_beyond_nyquist():
        with pytest.raises(errors.InvalidBand):
            fir_bandpass(Signal(np.zeros(5000), 10.0), 1.0, 5.0)

    def rejects_inverted_bands():
        with pytest.raises(errors.InvalidBand):
            fir_bandpass(Signal(np.zeros(5000), 10.0), 2.0, 1.0)

    def needs_a_signal_longer_than_the_filter():
        assert fir_tap_count(15.0, 0.1) == 601
        with pytest.raises(errors.SignalTooShort):
            fir_bandpass(Signal(np.zeros(600), 15.0), 0.1, 0.85)


def describe_gaussian():

    def kernel_sums_to_one():
        assert gaussian_kernel(2.5).sum() == pytest.approx(1.0)

    def sigma_must_be_positive():
        with pytest.raises(errors.NonPositiveSigma):
            gaussian_kernel(0.0)

    def is_linear(rng):
        a, b = rng.standard_normal((2, 50))
        both = gaussian_smooth_1d(a + b, 2.0)
        apart = gaussian_smooth_1d(a, 2.0) + gaussian_smooth_1d(b, 2.0)
        assert np.max(np.abs(both - apart)) < 1e-9

    def never_raises_the_maximum(rng):
        x = rng.standard_normal(100)
        assert gaussian_smooth_1d(x, 1.5).max() <= x.max() + 1e-12
        assert gaussian_smooth_1d(x, 1.5).min() >= x.min() - 1e-12

    def smoothing_preserves_the_mean_of_a_ramp_centre():
        ramp = np.arange(21, dtype=float)
        smooth = gaussian_smooth_1d(ramp, 1.0)
        assert smooth[10] == pytest.approx(10.0)


def test_resample_fixed_spans_the_signal():
    sig = Signal([0.0, 1.0, 2.0, 3.0], 1.0, 5.0)
    assert resample_fixed(sig, 7).tolist() == [
        0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0
    ]
    with pytest.raises(errors.ValidationError):
        resample_fixed(sig, 1)
