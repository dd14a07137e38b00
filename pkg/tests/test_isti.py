import numpy as np
import pytest

from stressnet import errors, isti, metrics
from stressnet.emission import ThermalClip
from stressnet.synth import CardiacProfile, constant_isti, gen_cardiac
from stressnet.timeseries import EventSeries, Knots, Signal


@pytest.fixture
def steady_pair():
    profile = CardiacProfile(20.0, constant_isti(160.0, 20.0))
    ecg, dzdt, beats = gen_cardiac(profile)
    return isti.CardiacPair(ecg, dzdt), beats


def describe_ground_truth():

    def recovers_a_constant_isti_at_every_beat(steady_pair):
        pair, beats = steady_pair
        knots, skipped = isti.compute_isti_knots(pair)

        assert skipped == 0
        assert len(knots) == len(beats) == 20
        assert np.max(np.abs(knots.v - 160.0)) < 6.0
        assert np.max(np.abs(knots.t_s - beats.t_s)) < 1.0 / 250.0

    def follows_a_varying_trajectory():
        trajectory = Knots([0.0, 15.0, 30.0], [120.0, 190.0, 140.0])
        ecg, dzdt, beats = gen_cardiac(CardiacProfile(30.0, trajectory))
        knots, _ = isti.compute_isti_knots(isti.CardiacPair(ecg, dzdt))

        assert len(knots) == len(beats)
        assert metrics.pearson(knots.v, beats.v) >= 0.99
        assert np.max(np.abs(knots.v - beats.v)) <= 6.0

    def interpolates_onto_the_frame_grid(steady_pair):
        pair, _ = steady_pair
        grid = isti.frame_times(15.0, 20.0)
        truth = isti.ground_truth(pair, grid)

        assert len(truth.continuous) == 300
        assert truth.continuous.sample_rate_hz == pytest.approx(15.0)
        assert np.max(np.abs(truth.continuous.samples - 160.0)) < 6.0

    def counts_beats_without_a_partner():
        r_peaks = EventSeries([1.0, 2.0, 3.0, 4.0])
        z_peaks = EventSeries([1.2, 2.9, 3.1, 4.15])
        knots, skipped = isti.pair_peaks(r_peaks, z_peaks, 0.5)
        assert knots.t_s.tolist() == [1.0, 3.0, 4.0]
        assert skipped == 1

    def a_lone_pair_is_a_single_knot():
        r_peaks = EventSeries([1.0, 2.0])
        knots, skipped = isti.pair_peaks(r_peaks, EventSeries([2.1]), 0.5)
        assert len(knots) == 1 and skipped == 1

    def needs_overlapping_recordings(steady_pair):
        pair, _ = steady_pair
        late = Signal(pair.dzdt.samples[:250], 250.0, 100.0)
        with pytest.raises(errors.ValidationError):
            isti.CardiacPair(pair.ecg, late)


def describe_normalisation():

    def clamps_into_the_unit_interval():
        values = isti.normalize_isti([-10.0, 150.0, 600.0])
        assert values.tolist() == [0.0, 0.5, 1.0]

    def inverts_inside_the_range():
        assert isti.denormalize_isti([0.25], 200.0).tolist() == [50.0]

    def needs_a_positive_scale():
        with pytest.raises(errors.NonPositiveScale):
            isti.normalize_isti([1.0], 0.0)


def describe_heart_rate():

    @pytest.fixture
    def beats():
        return EventSeries(0.5 + np.arange(20.0))

    def counts_sixty_bpm(beats):
        hr = isti.compute_hr(beats, 15.0, 1.0, span=(0.0, 20.0))
        assert hr.samples.tolist() == [60.0] * 6
        assert hr.t0_seconds == 15.0
        assert hr.sample_rate_hz == 1.0

    def steady_rhythm_has_no_variability(beats):
        hrv = isti.compute_hrv_rmssd(beats, 15.0, 1.0, span=(0.0, 20.0))
        assert np.allclose(hrv.samples, 0.0)

    def counts_a_hundred_and_twenty_bpm():
        beats = EventSeries(0.25 + 0.5 * np.arange(40))
        hr = isti.compute_hr(beats, 15.0, 1.0, span=(0.0, 20.0))
        assert hr.samples.tolist() == [120.0] * 6

    def no_beats_give_zero():
        empty = EventSeries([])
        assert isti.compute_hr(empty, 15.0).samples.tolist() == [0.0]
        assert isti.compute_hrv_rmssd(empty, 15.0).samples.tolist() == [0.0]

    def a_global_time_shift_changes_nothing(rng):
        beats = EventSeries(np.cumsum(rng.uniform(0.6, 1.1, size=60)))
        later = beats.shifted(12.5)

        hr, hr_later = isti.compute_hr(beats), isti.compute_hr(later)
        assert hr.samples.tolist() == hr_later.samples.tolist()
        assert hr_later.t0_seconds == pytest.approx(hr.t0_seconds + 12.5)

        hrv = isti.compute_hrv_rmssd(beats)
        hrv_later = isti.compute_hrv_rmssd(later)
        assert np.allclose(hrv.samples, hrv_later.samples, atol=1e-5)

    def window_must_fit_the_record(beats):
        with pytest.raises(errors.WindowLongerThanRecord):
            isti.compute_hr(beats, 15.0, 1.0, span=(0.0, 10.0))

    def rmssd_of_alternating_intervals():
        assert isti.rmssd([0.0, 0.8, 1.8, 2.6]) == 200.0
        assert isti.rmssd([0.0, 1.0]) == 0.0


def describe_breathing():

    @pytest.fixture
    def breathing_clip():
        t = np.arange(900) / 15.0
        wave = 50.0 * np.sin(2.0 * np.pi * 0.25 * t)
        frames = np.round(1000.0 + wave)[:, None, None] * np.ones((1, 4, 4))
        return ThermalClip(frames, 15.0), wave

    def band_passes_the_roi_trace(breathing_clip):
        clip, wave = breathing_clip
        sig = isti.breathing_signal(clip, (0, 0, 2, 2))
        assert len(sig) == 900
        assert np.max(np.abs(sig.samples[300:600] - wave[300:600])) < 5.0

    def roi_must_fit_the_frame(breathing_clip):
        clip, _ = breathing_clip
        with pytest.raises(errors.RoiOutOfBounds):
            isti.roi_signal(clip, (3, 3, 4, 4))

    def short_clips_are_rejected(breathing_clip):
        clip, _ = breathing_clip
        short = ThermalClip(clip.frames[:100], clip.fps)
        with pytest.raises(errors.SignalTooShort):
            isti.breathing_signal(short, (0, 0, 2, 2))
