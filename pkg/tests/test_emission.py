import attr
import numpy as np
import pytest

from stressnet import errors
from stressnet.emission import (
    FeatureClip,
    PreprocessConfig,
    ThermalClip,
    crop,
    preprocess,
    sign_log,
    spatiotemporal_gaussian,
    temporal_derivative,
)
from stressnet.timeseries import gaussian_kernel


@pytest.fixture
def ramp_clip():
    """Every pixel rises by 3 counts per frame."""
    frames = 100 + 3 * np.arange(10)[:, None, None] * np.ones((1, 6, 8))
    return ThermalClip(frames, 15.0, 2.0)


def describe_thermal_clip():

    def exposes_its_geometry(ramp_clip):
        assert (ramp_clip.num_frames, ramp_clip.height, ramp_clip.width) == \
            (10, 6, 8)
        assert ramp_clip.frames.dtype == np.uint16
        assert ramp_clip.times[1] == pytest.approx(2.0 + 1 / 15.0)

    def rejects_counts_beyond_sixteen_bits():
        with pytest.raises(errors.ValidationError):
            ThermalClip(np.full((2, 2, 2), 70000), 15.0)

    def rejects_flat_arrays():
        with pytest.raises(errors.ShapeMismatch):
            ThermalClip(np.zeros((4, 4)), 15.0)

    def feature_frames_must_be_finite():
        with pytest.raises(errors.NonFiniteInput):
            FeatureClip(np.full((1, 2, 2), np.nan), 15.0)


def describe_stages():

    def crop_cuts_every_frame(ramp_clip):
        out = crop(ramp_clip, 2, 1, 4, 3)
        assert out.frames.shape == (10, 3, 4)
        with pytest.raises(errors.RectOutOfBounds):
            crop(ramp_clip, 6, 0, 4, 3)

    def derivative_drops_the_last_frame(ramp_clip):
        fc = temporal_derivative(ramp_clip)
        assert fc.num_frames == 9
        assert fc.t0_seconds == 2.0
        assert np.all(fc.frames == 3.0)

    def derivative_needs_two_frames(ramp_clip):
        with pytest.raises(errors.TooFewFrames):
            temporal_derivative(ThermalClip(ramp_clip.frames[:1], 15.0))

    def sign_log_is_odd():
        fc = FeatureClip(np.array([-3.0, 0.0, 3.0]).reshape(3, 1, 1), 15.0)
        out = sign_log(fc).frames.reshape(-1)
        assert out[0] == -out[2]
        assert out[1] == 0.0
        assert out[2] == pytest.approx(np.log(4.0))

    def derivative_telescopes_back_to_the_frames(rng):
        clip = ThermalClip(rng.integers(0, 60000, size=(20, 4, 5)), 15.0)
        fc = temporal_derivative(clip)
        rebuilt = clip.frames[0] + np.cumsum(fc.frames, axis=0)
        assert np.max(np.abs(rebuilt - clip.frames[1:])) < 1e-9

    def separable_gaussian_matches_a_dense_convolution(rng):
        block = rng.standard_normal((9, 9, 9))
        sigma_s, sigma_t = 3.0, 4.0
        kernel = np.einsum(
            'i,j,k->ijk', gaussian_kernel(sigma_t), gaussian_kernel(sigma_s),
            gaussian_kernel(sigma_s)
        )
        rt, rs = kernel.shape[0] // 2, kernel.shape[1] // 2
        padded = np.pad(block, ((rt, rt), (rs, rs), (rs, rs)), mode='edge')
        dense = np.empty_like(block)
        for t, y, x in np.ndindex(*block.shape):
            window = padded[t:t + 2 * rt + 1, y:y + 2 * rs + 1,
                            x:x + 2 * rs + 1]
            dense[t, y, x] = np.sum(window * kernel)

        out = spatiotemporal_gaussian(
            FeatureClip(block, 15.0), sigma_s, sigma_t
        )
        assert np.max(np.abs(out.frames - dense)) < 1e-9

    def gaussian_keeps_constant_frames():
        fc = FeatureClip(np.full((12, 5, 7), 2.5), 15.0)
        out = spatiotemporal_gaussian(fc, 1.5, 2.0)
        assert np.allclose(out.frames, 2.5)


def describe_preprocess():

    def runs_every_stage_by_default(ramp_clip):
        fc = preprocess(ramp_clip)
        assert fc.frames.shape == (9, 6, 8)
        assert np.allclose(fc.frames, np.log(4.0))

    def dropping_frames_shifts_the_output(rng):
        clip = ThermalClip(rng.integers(0, 5000, size=(60, 10, 10)), 15.0)
        skip = 5
        # temporal kernel radius at the default sigma of 4 frames
        radius = 12
        full = preprocess(clip).frames
        late = preprocess(ThermalClip(clip.frames[skip:], 15.0)).frames

        inner = full[skip + radius:full.shape[0] - radius]
        assert inner.shape[0] > 0
        assert np.max(np.abs(
            inner - late[radius:late.shape[0] - radius]
        )) < 1e-9

    def centres_the_crop():
        config = PreprocessConfig(crop_width=4, crop_height=2)
        assert config.rect(8, 6) == (2, 2, 4, 2)

    def ablation_only_crops(ramp_clip):
        config = PreprocessConfig(crop_width=4).without_emission()
        fc = preprocess(ramp_clip, config)
        assert fc.frames.shape == (10, 6, 4)
        assert fc.frames[3, 0, 0] == 109.0

    def out_of_frame_crops_fail(ramp_clip):
        config = attr.evolve(PreprocessConfig(), crop_x0=5, crop_width=4)
        with pytest.raises(errors.RectOutOfBounds):
            preprocess(ramp_clip, config)

    def reads_the_configuration(cfg):
        cfg['emission']['gaussian'] = False
        cfg['crop']['width'] = 16
        config = PreprocessConfig.from_config(cfg)
        assert not config.gaussian
        assert config.crop_width == 16
        assert config.signlog
