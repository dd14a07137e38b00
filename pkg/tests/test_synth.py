import os

import numpy as np
import pytest

from stressnet import errors, metrics, synth
from stressnet.formats import manifest as mf
from stressnet.formats import tables, video
from stressnet.isti import frame_times
from stressnet.timeseries import Knots


def still_profile(**overrides):
    """An emission profile whose only time-varying term is the pulse."""
    values = dict(a1=0.0, b1=0.0, a2=0.0, motion_amplitude_px=0.0,
                  breathing_amplitude=0.0)
    values.update(overrides)
    return synth.EmissionProfile(**values)


@pytest.fixture
def cardiac():
    return synth.CardiacProfile(8.0, synth.constant_isti(160.0, 8.0))


@pytest.fixture
def short_layout():
    return synth.TrialLayout(base_s=2.0, prep_s=2.0, immersion_s=4.0,
                             recovery_s=2.0)


def describe_cardiac_profile():

    def rejects_implausible_isti():
        with pytest.raises(errors.InvalidProfile):
            synth.CardiacProfile(5.0, synth.constant_isti(600.0, 5.0))
        with pytest.raises(errors.InvalidProfile):
            synth.CardiacProfile(5.0, synth.constant_isti(0.0, 5.0))

    def rejects_rr_modulation_beyond_half_a_beat():
        with pytest.raises(errors.InvalidProfile):
            synth.CardiacProfile(5.0, synth.constant_isti(160.0, 5.0),
                                 rr_mod_amplitude_s=0.6)

    def rejects_negative_noise():
        with pytest.raises(errors.InvalidProfile):
            synth.CardiacProfile(5.0, synth.constant_isti(160.0, 5.0),
                                 noise_std=-1.0)

    def needs_two_beats():
        profile = synth.CardiacProfile(1.0, synth.constant_isti(160.0, 1.0))
        with pytest.raises(errors.InvalidProfile):
            synth.gen_cardiac(profile)


def describe_gen_cardiac():

    def channels_share_the_cardiac_grid(cardiac):
        ecg, dzdt, beats = synth.gen_cardiac(cardiac)
        assert len(ecg) == len(dzdt) == 2000
        assert ecg.sample_rate_hz == 250.0
        assert beats.t_s.tolist() == [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5]

    def waves_peak_at_the_programmed_delay(cardiac):
        ecg, dzdt, beats = synth.gen_cardiac(cardiac)
        first = (ecg.times > 1.0) & (ecg.times < 2.0)
        r_peak = ecg.times[first][np.argmax(ecg.samples[first])]
        z_peak = dzdt.times[first][np.argmax(dzdt.samples[first])]
        assert r_peak == pytest.approx(1.5)
        assert z_peak - r_peak == pytest.approx(0.16)

    def noise_is_seeded():
        profile = synth.CardiacProfile(5.0, synth.constant_isti(160.0, 5.0),
                                       noise_std=0.05, seed=9)
        first, _, _ = synth.gen_cardiac(profile)
        second, _, _ = synth.gen_cardiac(profile)
        assert np.array_equal(first.samples, second.samples)


def describe_emission_profile():

    def mask_must_match_the_frame():
        with pytest.raises(errors.InvalidProfile):
            synth.EmissionProfile(width=8, height=8,
                                  face_mask=np.ones((4, 4)))

    def mask_values_must_be_fractions():
        with pytest.raises(errors.InvalidProfile):
            synth.EmissionProfile(width=4, height=4,
                                  face_mask=np.full((4, 4), 2.0))

    def emissivities_lie_in_the_unit_interval():
        with pytest.raises(errors.InvalidProfile):
            synth.EmissionProfile(eps_b=0.0)

    def breathing_roi_must_fit():
        with pytest.raises(errors.InvalidProfile):
            synth.EmissionProfile(width=16, height=16,
                                  breathing_roi=(12, 20, 8, 4))

    def default_mask_covers_the_centre():
        mask = synth.default_face_mask(32, 32)
        assert mask[16, 16] == 1.0
        assert mask[0, 0] == 0.0


def describe_gen_thermal():

    def renders_uint16_frames_at_the_profile_rate(cardiac):
        clip, beats = synth.gen_thermal(synth.EmissionProfile(), cardiac)
        assert clip.frames.shape == (120, 32, 32)
        assert clip.frames.dtype == np.uint16
        assert clip.fps == 15.0
        assert len(beats) == 8

    def without_pulse_or_motion_frames_are_constant(cardiac):
        clip, _ = synth.gen_thermal(still_profile(pulse_isti_gain=0.0),
                                    cardiac)
        assert np.all(clip.frames == clip.frames[0])

    def centre_pixel_follows_the_pulse(cardiac):
        profile = still_profile()
        clip, beats = synth.gen_thermal(profile, cardiac)
        times = frame_times(profile.fps, cardiac.duration_s)
        pulse = synth.pulse_wave(times, beats, profile)
        trace = clip.frames[:, 16, 16].astype(float)
        assert metrics.pearson(trace, pulse) > 0.999

    def pulse_strength_grows_with_isti():
        profile = still_profile()
        delay = synth.pulse_peak_delay(profile.pulse_rise_s,
                                       profile.pulse_decay_s)
        heights = []
        for isti_ms in (120.0, 240.0):
            beats = Knots(t_s=[1.0], v=[isti_ms])
            peak = np.array([1.0 + isti_ms / 1000.0 + delay])
            height = synth.pulse_wave(peak, beats, profile)
            assert np.allclose(height, synth.pulse_strength([isti_ms],
                                                            profile))
            heights.append(float(height[0]))
        assert heights[1] > heights[0]

    def pulse_starts_isti_after_the_beat():
        profile = still_profile()
        beats = Knots(t_s=[1.0], v=[200.0])
        times = np.array([0.5, 1.0, 1.19, 1.25])
        wave = synth.pulse_wave(times, beats, profile)
        assert wave[:3].tolist() == [0.0, 0.0, 0.0]
        assert wave[3] > 0.0

    def a_pulse_decaying_faster_than_it_rises_is_refused():
        with pytest.raises(errors.InvalidProfile):
            synth.EmissionProfile(pulse_rise_s=0.5, pulse_decay_s=0.1)

    def refuses_to_clip_counts(cardiac):
        with pytest.raises(errors.CountOverflowRisk):
            synth.gen_thermal(synth.EmissionProfile(gain=1e6), cardiac)

    def quantize_rounds_and_offsets():
        profile = synth.EmissionProfile(width=2, height=1,
                                        breathing_amplitude=0.0, gain=10.0,
                                        offset=5.0)
        counts = synth.quantize(np.array([[[0.04, 1.26]]]), profile)
        assert counts.tolist() == [[[5, 18]]]


def describe_trials():

    def layout_phases_tile_the_recording(short_layout):
        phases = short_layout.phases()
        assert short_layout.duration_s == 10.0
        assert phases[0] == ('base', 0.0, 2.0)
        assert phases[-1] == ('recovery', 8.0, 10.0)

    def layout_reads_the_configuration(cfg):
        cfg["synth"]["immersion_s"] = 5.0
        layout = synth.TrialLayout.from_config(cfg, recovery_s=1.0)
        assert layout.immersion_s == 5.0
        assert layout.recovery_s == 1.0

    def stress_dips_during_immersion():
        layout = synth.TrialLayout()
        calm = synth.isti_trajectory(layout, False, np.random.default_rng(4))
        tense = synth.isti_trajectory(layout, True, np.random.default_rng(4))
        gap = calm.v - tense.v
        base = calm.t_s < 10.0
        immersion = (calm.t_s >= 25.0) & (calm.t_s <= 40.0)
        assert np.all(gap[base] == 0.0)
        assert np.all((gap[immersion] >= 35.0) & (gap[immersion] <= 50.0))
        assert np.all((calm.v > 140.0) & (calm.v < 185.0))

    def class_assignment_is_balanced():
        flags = synth.class_assignment(7, 0.5, np.random.default_rng(1))
        assert int(flags.sum()) == 4


def describe_gen_dataset():

    def writes_every_trial(tmp_path, short_layout):
        path = synth.gen_dataset(str(tmp_path), 2, seed=3,
                                 layout=short_layout)
        rows = mf.read_manifest(path)
        assert [row.trial_id for row in rows] == ['trial000', 'trial001']
        assert sorted(row.label for row in rows) == [False, True]
        for row in rows:
            clip = video.read_tvf(row.clip_path)
            assert clip.frames.shape == (150, 32, 32)
            assert len(tables.read_signal(row.isti_csv_path)) == 150
            assert os.path.exists(row.ecg_path)
            assert os.path.exists(row.dzdt_path)
            assert len(mf.read_phases(row.phases_path)) == 4
            # ten seconds are too short for the breathing band-pass
            assert row.breathing_csv_path is None

    def is_deterministic(tmp_path, short_layout):
        first = synth.gen_dataset(str(tmp_path / 'a'), 2, seed=5,
                                  layout=short_layout)
        second = synth.gen_dataset(str(tmp_path / 'b'), 2, seed=5,
                                   layout=short_layout)
        for name in ('manifest.csv', 'trial000.tvf', 'trial001_isti.csv'):
            a = os.path.join(os.path.dirname(first), name)
            b = os.path.join(os.path.dirname(second), name)
            with open(a, 'rb') as fa, open(b, 'rb') as fb:
                assert fa.read() == fb.read()

    def reports_every_trial_in_order(tmp_path, short_layout):
        seen = []
        synth.gen_dataset(str(tmp_path), 3, seed=4, layout=short_layout,
                          on_trial=seen.append)
        assert [row['trial_id'] for row in seen] == [
            'trial000', 'trial001', 'trial002'
        ]

    def needs_both_classes(tmp_path, short_layout):
        with pytest.raises(errors.ValidationError):
            synth.gen_dataset(str(tmp_path), 2, stress_fraction=1.0,
                              layout=short_layout)

    @pytest.mark.slow
    def workers_do_not_change_the_output(tmp_path, short_layout):
        serial = synth.gen_dataset(str(tmp_path / 's'), 4, seed=2,
                                   layout=short_layout)
        pooled = synth.gen_dataset(str(tmp_path / 'p'), 4, seed=2,
                                   layout=short_layout, jobs=2)
        for i in range(4):
            name = f'trial{i:03d}.tvf'
            a = os.path.join(os.path.dirname(serial), name)
            b = os.path.join(os.path.dirname(pooled), name)
            with open(a, 'rb') as fa, open(b, 'rb') as fb:
                assert fa.read() == fb.read()

    @pytest.mark.slow
    def full_trials_carry_breathing(tmp_path):
        path = synth.gen_dataset(str(tmp_path), 2, seed=1)
        for row in mf.read_manifest(path):
            breathing = tables.read_signal(row.breathing_csv_path)
            assert len(breathing) == 750
