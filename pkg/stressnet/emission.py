"""
Inverse direction of the thermal emission model.

Raw thermal frames W(t) are turned into the network input X(t):

    crop -> W'(t) = W(t+1) - W(t) -> sign(W') * ln(1 + |W'|) -> Gaussian

The temporal difference removes every constant term of the emission
model (the skin black-body baseline), the sign-log compresses the
dynamic range and the separable Gaussian removes high-frequency noise.
Atmospheric absorption is not modelled.
"""
import logging
import typing as tp

import attr
import numpy as np

from stressnet import errors
from stressnet.timeseries import gaussian_smooth_1d

LOG = logging.getLogger(__name__)

MAX_COUNT = 65535


def _as_counts(frames: tp.Any) -> np.ndarray:
    data = np.asarray(frames)
    if data.ndim != 3:
        raise errors.ShapeMismatch(
            f'frames must be (frames, height, width), got {data.shape}'
        )
    if data.dtype != np.uint16:
        if data.size and (np.min(data) < 0 or np.max(data) > MAX_COUNT):
            raise errors.ValidationError('counts must lie in [0, 65535]')
        data = data.astype(np.uint16)
    return data


def _as_features(frames: tp.Any) -> np.ndarray:
    data = np.asarray(frames, dtype=np.float64)
    if data.ndim != 3:
        raise errors.ShapeMismatch(
            f'frames must be (frames, height, width), got {data.shape}'
        )
    if not np.all(np.isfinite(data)):
        raise errors.NonFiniteInput('feature frames contain NaN or Inf')
    return data


def _positive_fps(instance: tp.Any, attribute: 'attr.Attribute[float]',
                  value: float) -> None:
    del instance, attribute
    if not value > 0:
        raise errors.ValidationError(f'fps must be positive, got {value}')


@attr.s(frozen=True, eq=False)
class ThermalClip:
    """Raw 16-bit thermal frames, shape (frames, height, width)."""
    frames: np.ndarray = attr.ib(converter=_as_counts)
    fps: float = attr.ib(converter=float, validator=_positive_fps)
    t0_seconds: float = attr.ib(default=0.0, converter=float)

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def times(self) -> np.ndarray:
        return self.t0_seconds + np.arange(self.num_frames) / self.fps


@attr.s(frozen=True, eq=False)
class FeatureClip:
    """Real-valued preprocessed frames X(t), shape (frames, height, width)."""
    frames: np.ndarray = attr.ib(converter=_as_features)
    fps: float = attr.ib(converter=float, validator=_positive_fps)
    t0_seconds: float = attr.ib(default=0.0, converter=float)

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def times(self) -> np.ndarray:
        return self.t0_seconds + np.arange(self.num_frames) / self.fps


Rect = tp.Tuple[int, int, int, int]


def check_rect(width: int, height: int, rect: Rect,
               error: tp.Type[errors.ValidationError]) -> None:
    """Raise `error` unless ``(x0, y0, w, h)`` is a non-empty in-frame rect."""
    x0, y0, w, h = rect
    if w <= 0 or h <= 0 or x0 < 0 or y0 < 0 or \
            x0 + w > width or y0 + h > height:
        raise error(
            f'rectangle {rect} does not fit into a {width}x{height} frame'
        )


def centered_rect(width: int, height: int, crop_width: int,
                  crop_height: int) -> Rect:
    """
    The crop rectangle of the given size centred in the frame.

    Examples:
        >>> centered_rect(640, 240, 360, 240)
        (140, 0, 360, 240)
    """
    return ((width - crop_width) // 2, (height - crop_height) // 2,
            crop_width, crop_height)


def crop(clip: ThermalClip, x0: int, y0: int, w: int, h: int) -> ThermalClip:
    """Cut the same sub-rectangle out of every frame."""
    check_rect(clip.width, clip.height, (x0, y0, w, h), errors.RectOutOfBounds)
    return ThermalClip(
        clip.frames[:, y0:y0 + h, x0:x0 + w], clip.fps, clip.t0_seconds
    )


def temporal_derivative(clip: ThermalClip) -> FeatureClip:
    """
    Forward difference along time in counts per frame.

    Element t of the result carries the timestamp of input frame t, so the
    clip shortens by one frame at its end.
    """
    if clip.num_frames < 2:
        raise errors.TooFewFrames(
            f'a temporal derivative needs 2 frames, got {clip.num_frames}'
        )
    counts = clip.frames.astype(np.float64)
    return FeatureClip(np.diff(counts, axis=0), clip.fps, clip.t0_seconds)


def sign_log(fc: FeatureClip) -> FeatureClip:
    """
    ``sign(x) * ln(1 + |x|)`` on every pixel.

    Examples:
        >>> fc = FeatureClip(np.full((1, 1, 1), np.e - 1), 15.0)
        >>> round(float(sign_log(fc).frames[0, 0, 0]), 12)
        1.0
    """
    frames = fc.frames
    return FeatureClip(
        np.sign(frames) * np.log1p(np.abs(frames)), fc.fps, fc.t0_seconds
    )


def spatiotemporal_gaussian(
    fc: FeatureClip,
    sigma_spatial: float = 3.0,
    sigma_temporal: float = 4.0
) -> FeatureClip:
    """
    Separable Gaussian: along rows, then columns, then frames.

    `sigma_spatial` is measured in pixels, `sigma_temporal` in frames. All
    three passes replicate the edge values.
    """
    frames = gaussian_smooth_1d(fc.frames, sigma_spatial, axis=2)
    frames = gaussian_smooth_1d(frames, sigma_spatial, axis=1)
    frames = gaussian_smooth_1d(frames, sigma_temporal, axis=0)
    return FeatureClip(frames, fc.fps, fc.t0_seconds)


@attr.s(frozen=True)
class PreprocessConfig:
    """
    Which preprocessing stages run, and how.

    A crop width/height of None keeps the full frame along that axis; a
    crop origin of None centres the crop.
    """
    crop_x0: tp.Optional[int] = attr.ib(default=None)
    crop_y0: tp.Optional[int] = attr.ib(default=None)
    crop_width: tp.Optional[int] = attr.ib(default=None)
    crop_height: tp.Optional[int] = attr.ib(default=None)
    derivative: bool = attr.ib(default=True)
    signlog: bool = attr.ib(default=True)
    gaussian: bool = attr.ib(default=True)
    sigma_spatial: float = attr.ib(default=3.0)
    sigma_temporal: float = attr.ib(default=4.0)

    @classmethod
    def from_config(cls, cfg: tp.Any) -> 'PreprocessConfig':
        """Read the ``crop`` and ``emission`` sections of a configuration."""
        crop_cfg = cfg['crop']
        em_cfg = cfg['emission']
        return cls(
            crop_x0=crop_cfg['x0'].value,
            crop_y0=crop_cfg['y0'].value,
            crop_width=crop_cfg['width'].value,
            crop_height=crop_cfg['height'].value,
            derivative=bool(em_cfg['derivative']),
            signlog=bool(em_cfg['signlog']),
            gaussian=bool(em_cfg['gaussian']),
            sigma_spatial=float(em_cfg['sigma_spatial'].value),
            sigma_temporal=float(em_cfg['sigma_temporal'].value)
        )

    def rect(self, width: int, height: int) -> Rect:
        """Resolve the crop rectangle for a frame of the given size."""
        crop_w = width if self.crop_width is None else int(self.crop_width)
        crop_h = height if self.crop_height is None else int(self.crop_height)
        cx0, cy0, _, _ = centered_rect(width, height, crop_w, crop_h)
        x0 = cx0 if self.crop_x0 is None else int(self.crop_x0)
        y0 = cy0 if self.crop_y0 is None else int(self.crop_y0)
        return (x0, y0, crop_w, crop_h)

    def without_emission(self) -> 'PreprocessConfig':
        """The ablation variant: crop only."""
        return attr.evolve(
            self, derivative=False, signlog=False, gaussian=False
        )


def preprocess(
    clip: ThermalClip, config: tp.Optional[PreprocessConfig] = None
) -> FeatureClip:
    """
    Turn a raw clip into network input.

    Stages run in order crop, derivative, sign-log, Gaussian; each one but
    the crop can be switched off through `config`.
    """
    if config is None:
        config = PreprocessConfig()

    x0, y0, w, h = config.rect(clip.width, clip.height)
    cropped = crop(clip, x0, y0, w, h)

    if config.derivative:
        fc = temporal_derivative(cropped)
    else:
        fc = FeatureClip(
            cropped.frames.astype(np.float64), cropped.fps, cropped.t0_seconds
        )
    if config.signlog:
        fc = sign_log(fc)
    if config.gaussian:
        fc = spatiotemporal_gaussian(
            fc, config.sigma_spatial, config.sigma_temporal
        )

    LOG.debug(
        'preprocess: %dx%dx%d -> %dx%dx%d', clip.num_frames, clip.height,
        clip.width, fc.num_frames, fc.height, fc.width
    )
    return fc
