"""
Deterministic synthetic recordings.

`gen_cardiac` produces an ECG / dZ/dt pair whose R-peak to dZ/dt-peak
delays follow a programmed ISTI trajectory. `gen_thermal` renders a thermal
clip from the linearised emission model

    W = K + E0 * eps_b * mask * (p + a1 * m + b1 * p) + E0 * eps_s * a2 * m

with ``K = 2 * E0 * eps_s``, a rise-and-decay blood volume pulse p(t) that
starts ISTI after every R-peak and grows with the ISTI, and a sinusoidal
head motion m(t) that translates the E0 field. `gen_dataset` writes whole
trials (clip, cardiac CSVs, truth ISTI, phases, breathing trace) plus a
manifest.
"""
import contextlib
import logging
import os
import typing as tp

import attr
import numpy as np
import pathos.multiprocessing as mp
from scipy import ndimage

from stressnet import errors
from stressnet.emission import MAX_COUNT, Rect, ThermalClip, check_rect
from stressnet.formats import tables, video
from stressnet.isti import breathing_signal, frame_times, isti_continuous
from stressnet.stress import format_label
from stressnet.timeseries import Knots, Signal

LOG = logging.getLogger(__name__)

MANIFEST_FIELDS = (
    'trial_id', 'isti_csv_path', 'label', 'breathing_csv_path', 'clip_path',
    'ecg_path', 'dzdt_path', 'phases_path'
)
PHASE_FIELDS = ('phase', 'start_s', 'end_s')
CLIP_OVERFLOW_TOLERANCE = 0.01
MAX_ISTI_MS = 500.0


def _positive(instance: tp.Any, attribute: 'attr.Attribute[float]',
              value: float) -> None:
    del instance
    if not value > 0:
        raise errors.InvalidProfile(f'{attribute.name} must be positive')


def constant_isti(value_ms: float, duration_s: float) -> Knots:
    """A flat ISTI trajectory covering the whole recording."""
    return Knots([0.0, duration_s], [value_ms, value_ms])


@attr.s(frozen=True, eq=False)
class CardiacProfile:
    """Parameters of a synthetic ECG / dZ/dt recording."""
    duration_s: float = attr.ib(converter=float, validator=_positive)
    isti_trajectory: Knots = attr.ib()
    cardiac_rate_hz: float = attr.ib(
        default=250.0, converter=float, validator=_positive
    )
    base_rr_s: float = attr.ib(default=1.0, converter=float,
                               validator=_positive)
    rr_mod_amplitude_s: float = attr.ib(default=0.0, converter=float)
    rr_mod_period_s: float = attr.ib(
        default=10.0, converter=float, validator=_positive
    )
    r_wave_width_s: float = attr.ib(
        default=0.01, converter=float, validator=_positive
    )
    z_wave_width_s: float = attr.ib(
        default=0.02, converter=float, validator=_positive
    )
    noise_std: float = attr.ib(default=0.0, converter=float)
    seed: int = attr.ib(default=0)

    @isti_trajectory.validator
    def _plausible_isti(self, attribute: 'attr.Attribute[Knots]',
                        value: Knots) -> None:
        del attribute
        if len(value) == 0 or np.any(value.v <= 0) or \
                np.any(value.v >= MAX_ISTI_MS):
            raise errors.InvalidProfile(
                f'ISTI trajectory must stay inside (0, {MAX_ISTI_MS}) ms'
            )

    @rr_mod_amplitude_s.validator
    def _slower_than_beats(self, attribute: 'attr.Attribute[float]',
                           value: float) -> None:
        del attribute
        if not 0 <= value < self.base_rr_s / 2:
            raise errors.InvalidProfile(
                'RR modulation must be non-negative and below half the '
                'base RR interval'
            )

    @noise_std.validator
    def _non_negative(self, attribute: 'attr.Attribute[float]',
                      value: float) -> None:
        del attribute
        if value < 0:
            raise errors.InvalidProfile('noise_std must not be negative')


def beat_schedule(profile: CardiacProfile) -> Knots:
    """
    R-peak times and the programmed ISTI (ms) of every beat.

    Beats start half an RR interval into the recording and stop early
    enough for each dZ/dt wave to end inside it.

    Examples:
        >>> beats = beat_schedule(CardiacProfile(5.0, constant_isti(160, 5)))
        >>> beats.t_s.tolist(), beats.v.tolist()
        ([0.5, 1.5, 2.5, 3.5, 4.5], [160.0, 160.0, 160.0, 160.0, 160.0])
    """
    traj = profile.isti_trajectory
    beats: tp.List[float] = []
    t_beat = 0.5 * profile.base_rr_s
    while True:
        isti_s = float(np.interp(t_beat, traj.t_s, traj.v)) / 1000.0
        if t_beat + isti_s + 5 * profile.z_wave_width_s > profile.duration_s:
            break
        beats.append(t_beat)
        t_beat += profile.base_rr_s + profile.rr_mod_amplitude_s * \
            np.sin(2.0 * np.pi * t_beat / profile.rr_mod_period_s)
    times = np.array(beats)
    return Knots(times, np.interp(times, traj.t_s, traj.v))


def _bump_train(times: np.ndarray, centres: np.ndarray, width: float,
                amplitudes: tp.Optional[np.ndarray] = None) -> np.ndarray:
    if amplitudes is None:
        amplitudes = np.ones_like(centres)
    offsets = (times[None, :] - centres[:, None]) / width
    return np.sum(amplitudes[:, None] * np.exp(-0.5 * offsets**2), axis=0)


def gen_cardiac(profile: CardiacProfile) -> tp.Tuple[Signal, Signal, Knots]:
    """
    Render the ECG and dZ/dt channels of `profile`.

    Returns:
        ECG, dZ/dt (both at ``cardiac_rate_hz``) and the truth knots
        (beat time, ISTI in ms).
    """
    beats = beat_schedule(profile)
    if len(beats) < 2:
        raise errors.InvalidProfile(
            f'{profile.duration_s} s hold fewer than two beats'
        )
    rate = profile.cardiac_rate_hz
    times = np.arange(int(round(profile.duration_s * rate))) / rate
    ecg = _bump_train(times, beats.t_s, profile.r_wave_width_s)
    dzdt = _bump_train(times, beats.t_s + beats.v / 1000.0,
                       profile.z_wave_width_s)
    if profile.noise_std > 0:
        rng = np.random.default_rng(profile.seed)
        ecg = ecg + rng.normal(0.0, profile.noise_std, size=ecg.size)
        dzdt = dzdt + rng.normal(0.0, profile.noise_std, size=dzdt.size)
    return Signal(ecg, rate), Signal(dzdt, rate), beats


def default_face_mask(width: int, height: int) -> np.ndarray:
    """Elliptical face region: 1 inside, fading to 0 over two pixels."""
    y, x = np.mgrid[0:height, 0:width]
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    radius = np.sqrt(((x - cx) / (0.4 * width))**2 +
                     ((y - cy) / (0.45 * height))**2)
    edge = 2.0 / min(width, height)
    return np.clip((1.0 - radius) / edge, 0.0, 1.0)


def default_e0_field(width: int, height: int) -> np.ndarray:
    """Smooth black-body emission: a warm face centre on a cooler frame."""
    y, x = np.mgrid[0:height, 0:width]
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    blob = np.exp(-(((x - cx) / (0.35 * width))**2 +
                    ((y - cy) / (0.35 * height))**2))
    return 1.0 + 0.2 * blob + 0.05 * x / max(width - 1, 1)


def _emissivity(instance: tp.Any, attribute: 'attr.Attribute[float]',
                value: float) -> None:
    del instance
    if not 0 < value <= 1:
        raise errors.InvalidProfile(f'{attribute.name} must lie in (0, 1]')


@attr.s(frozen=True, eq=False)
class EmissionProfile:
    """
    Parameters of the thermal forward model.

    `face_mask` and `e0_field` default to `default_face_mask` and
    `default_e0_field`. The pulse of a beat starts ISTI after its R-peak
    and peaks at ``pulse_isti_gain * (isti_ms / pulse_isti_ref_ms) **
    pulse_isti_exponent``, so frames carry the ISTI in timing and strength.
    """
    width: int = attr.ib(default=32, converter=int)
    height: int = attr.ib(default=32, converter=int)
    fps: float = attr.ib(default=15.0, converter=float, validator=_positive)
    face_mask: np.ndarray = attr.ib(default=None)
    e0_field: np.ndarray = attr.ib(default=None)
    eps_s: float = attr.ib(default=0.98, validator=_emissivity)
    eps_b: float = attr.ib(default=0.5, validator=_emissivity)
    a1: float = attr.ib(default=0.2)
    b1: float = attr.ib(default=0.1)
    a2: float = attr.ib(default=0.3)
    motion_amplitude_px: float = attr.ib(default=0.5)
    motion_period_s: float = attr.ib(default=7.0, validator=_positive)
    pulse_rise_s: float = attr.ib(default=0.08, validator=_positive)
    pulse_decay_s: float = attr.ib(default=0.4, validator=_positive)
    pulse_isti_gain: float = attr.ib(default=0.5)
    pulse_isti_ref_ms: float = attr.ib(default=165.0, validator=_positive)
    pulse_isti_exponent: float = attr.ib(default=4.0)
    breathing_rate_hz: float = attr.ib(default=0.25)
    breathing_amplitude: float = attr.ib(default=0.05)
    breathing_roi: Rect = attr.ib(default=(12, 20, 8, 4), converter=tuple)
    gain: float = attr.ib(default=10000.0, validator=_positive)
    offset: float = attr.ib(default=1000.0)
    sensor_noise: float = attr.ib(default=0.0)
    seed: int = attr.ib(default=0)

    def __attrs_post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise errors.InvalidProfile('frame size must be positive')
        if not self.pulse_rise_s < self.pulse_decay_s:
            raise errors.InvalidProfile(
                'the pulse must rise faster than it decays'
            )
        if self.face_mask is None:
            object.__setattr__(
                self, 'face_mask', default_face_mask(self.width, self.height)
            )
        if self.e0_field is None:
            object.__setattr__(
                self, 'e0_field', default_e0_field(self.width, self.height)
            )
        mask = np.asarray(self.face_mask, dtype=np.float64)
        field = np.asarray(self.e0_field, dtype=np.float64)
        for name, grid in (('face_mask', mask), ('e0_field', field)):
            if grid.shape != (self.height, self.width):
                raise errors.InvalidProfile(
                    f'{name} must have shape {(self.height, self.width)}, '
                    f'got {grid.shape}'
                )
        if np.any(mask < 0) or np.any(mask > 1):
            raise errors.InvalidProfile('face_mask values must lie in [0, 1]')
        object.__setattr__(self, 'face_mask', mask)
        object.__setattr__(self, 'e0_field', field)
        if self.breathing_amplitude:
            check_rect(self.width, self.height, self.breathing_roi,
                       errors.InvalidProfile)


def pulse_peak_delay(rise_s: float, decay_s: float) -> float:
    """
    Time from onset to maximum of the rise-and-decay pulse.

    Examples:
        >>> round(pulse_peak_delay(0.08, 0.4), 4)
        0.1609
    """
    return float(np.log(decay_s / rise_s) * rise_s * decay_s /
                 (decay_s - rise_s))


def pulse_strength(isti_ms: tp.Any, profile: EmissionProfile) -> np.ndarray:
    """
    Peak height of the pulse of a beat with the given ISTI.

    Examples:
        >>> pulse_strength([165.0], EmissionProfile(width=4, height=4,
        ...                breathing_amplitude=0.0)).tolist()
        [0.5]
    """
    ratio = np.asarray(isti_ms, dtype=np.float64) / profile.pulse_isti_ref_ms
    return profile.pulse_isti_gain * ratio**profile.pulse_isti_exponent


def pulse_wave(times: np.ndarray, beats: Knots,
               profile: EmissionProfile) -> np.ndarray:
    """
    Blood volume pulse: one bump per beat, starting ISTI after the R-peak.

    Each bump rises with time constant `pulse_rise_s`, decays with
    `pulse_decay_s` and peaks at `pulse_strength` of its beat.
    """
    rise, decay = profile.pulse_rise_s, profile.pulse_decay_s
    delay = pulse_peak_delay(rise, decay)
    peak = np.exp(-delay / decay) - np.exp(-delay / rise)
    # zero before the onset
    since = np.maximum(
        times[:, None] - (beats.t_s + beats.v / 1000.0)[None, :], 0.0
    )
    shape = (np.exp(-since / decay) - np.exp(-since / rise)) / peak
    return shape @ pulse_strength(beats.v, profile)


def motion_wave(times: np.ndarray, profile: EmissionProfile) -> np.ndarray:
    """Normalised head motion m(t) in [-1, 1]."""
    return np.sin(2.0 * np.pi * times / profile.motion_period_s)


def emission_frames(profile: EmissionProfile, cardiac: CardiacProfile,
                    beats: Knots) -> np.ndarray:
    """Noise-free radiance W of every frame, shape (T, H, W)."""
    times = frame_times(profile.fps, cardiac.duration_s)
    pulse = pulse_wave(times, beats, profile)
    motion = motion_wave(times, profile)
    mask = profile.face_mask
    x0, y0, w, h = profile.breathing_roi
    phase = np.random.default_rng(profile.seed).uniform(0.0, 2.0 * np.pi)
    breath = profile.breathing_amplitude * np.sin(
        2.0 * np.pi * profile.breathing_rate_hz * times + phase
    )

    frames = np.empty((times.size, profile.height, profile.width))
    for i, (p_t, m_t) in enumerate(zip(pulse, motion)):
        shift = profile.motion_amplitude_px * m_t
        e0_t = profile.e0_field if shift == 0 else ndimage.shift(
            profile.e0_field, (0.0, shift), order=1, mode='nearest'
        )
        k_term = 2.0 * e0_t * profile.eps_s
        body = e0_t * profile.eps_b * mask * \
            (p_t + profile.a1 * m_t + profile.b1 * p_t)
        surface = e0_t * profile.eps_s * profile.a2 * m_t
        frame = k_term + body + surface
        frame[y0:y0 + h, x0:x0 + w] += \
            e0_t[y0:y0 + h, x0:x0 + w] * profile.eps_s * breath[i]
        frames[i] = frame
    return frames


def quantize(radiance: np.ndarray, profile: EmissionProfile) -> np.ndarray:
    """
    ``clamp(round(gain * W + offset), 0, 65535)`` as uint16.

    Raises:
        CountOverflowRisk: if more than 1% of the pixels would clip.
    """
    counts = np.round(profile.gain * radiance + profile.offset)
    if profile.sensor_noise > 0:
        rng = np.random.default_rng(profile.seed + 1)
        counts = np.round(
            counts + rng.normal(0.0, profile.sensor_noise, counts.shape)
        )
    clipped = np.count_nonzero((counts < 0) | (counts > MAX_COUNT))
    if clipped > CLIP_OVERFLOW_TOLERANCE * counts.size:
        raise errors.CountOverflowRisk(
            f'{clipped} of {counts.size} pixels would clip; lower the gain '
            f'or offset'
        )
    return np.clip(counts, 0, MAX_COUNT).astype(np.uint16)


def gen_thermal(profile: EmissionProfile,
                cardiac: CardiacProfile) -> tp.Tuple[ThermalClip, Knots]:
    """Render the thermal clip of a recording and return its truth knots."""
    beats = beat_schedule(cardiac)
    if len(beats) < 2:
        raise errors.InvalidProfile('the recording holds fewer than two beats')
    counts = quantize(emission_frames(profile, cardiac, beats), profile)
    return ThermalClip(counts, profile.fps), beats


@attr.s(frozen=True)
class TrialLayout:
    """Phase lengths and clip geometry of generated trials."""
    fps: float = attr.ib(default=15.0)
    width: int = attr.ib(default=32)
    height: int = attr.ib(default=32)
    base_s: float = attr.ib(default=10.0)
    prep_s: float = attr.ib(default=10.0)
    immersion_s: float = attr.ib(default=20.0)
    recovery_s: float = attr.ib(default=10.0)

    @classmethod
    def from_config(cls, cfg: tp.Any, **overrides: tp.Any) -> 'TrialLayout':
        synth = cfg['synth']
        values = {
            key: synth[key].value
            for key in ('fps', 'width', 'height', 'base_s', 'prep_s',
                        'immersion_s', 'recovery_s')
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def duration_s(self) -> float:
        return self.base_s + self.prep_s + self.immersion_s + self.recovery_s

    def phases(self) -> tp.List[tp.Tuple[str, float, float]]:
        """
        (name, start_s, end_s) of the four phases.

        Examples:
            >>> [p[0] for p in TrialLayout().phases()]
            ['base', 'prep', 'immersion', 'recovery']
        """
        bounds = np.cumsum(
            [0.0, self.base_s, self.prep_s, self.immersion_s, self.recovery_s]
        )
        names = ('base', 'prep', 'immersion', 'recovery')
        return [(name, float(bounds[i]), float(bounds[i + 1]))
                for i, name in enumerate(names)]


def _smooth_step(times: np.ndarray, start: float, ramp: float) -> np.ndarray:
    x = np.clip((times - start) / ramp, 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * x)


def isti_trajectory(layout: TrialLayout, stress: bool,
                    rng: np.random.Generator) -> Knots:
    """
    Programmed ISTI knots (ms) of one trial, one per second.

    Both conditions drift slowly around 150-180 ms; stress trials dip by
    roughly 35-50 ms during prep and immersion and recover afterwards.
    """
    times = np.arange(0.0, layout.duration_s + 1.0, 1.0)
    level = rng.uniform(155.0, 172.0)
    drift = rng.uniform(3.0, 8.0) * np.sin(
        2.0 * np.pi * times / rng.uniform(20.0, 40.0) + rng.uniform(0, np.pi)
    )
    values = level + drift
    if stress:
        _, prep_start, _ = layout.phases()[1]
        _, _, immersion_end = layout.phases()[2]
        depth = rng.uniform(35.0, 50.0)
        ramp = min(3.0, layout.prep_s)
        dip = _smooth_step(times, prep_start, ramp) * \
            (1.0 - _smooth_step(times, immersion_end, ramp))
        values = values - depth * dip
    return Knots(times, values)


@attr.s(frozen=True)
class TrialSpec:
    """Everything needed to generate one trial in isolation."""
    index: int = attr.ib()
    stress: bool = attr.ib()
    seed: int = attr.ib()
    layout: TrialLayout = attr.ib()
    out_dir: str = attr.ib()
    breathing_roi: Rect = attr.ib(default=(12, 20, 8, 4))

    @property
    def trial_id(self) -> str:
        return f'trial{self.index:03d}'


def generate_trial(spec: TrialSpec) -> tp.Dict[str, str]:
    """Write all files of one trial and return its manifest row."""
    rng = np.random.default_rng(spec.seed)
    layout = spec.layout
    stress = spec.stress
    traj = isti_trajectory(layout, stress, rng)
    rr_range = (0.82, 0.92) if stress else (0.86, 0.96)
    cardiac = CardiacProfile(
        duration_s=layout.duration_s,
        isti_trajectory=traj,
        base_rr_s=rng.uniform(*rr_range),
        rr_mod_amplitude_s=rng.uniform(0.0, 0.03),
        rr_mod_period_s=rng.uniform(4.0, 8.0),
        seed=int(rng.integers(2**31))
    )
    breath_rate = rng.uniform(0.38, 0.5) if stress else rng.uniform(0.18, 0.3)
    emission = EmissionProfile(
        width=layout.width,
        height=layout.height,
        fps=layout.fps,
        a1=rng.uniform(0.005, 0.02),
        a2=rng.uniform(0.005, 0.02),
        motion_amplitude_px=rng.uniform(0.1, 0.3),
        motion_period_s=rng.uniform(5.0, 9.0),
        breathing_rate_hz=breath_rate,
        breathing_amplitude=0.02,
        breathing_roi=spec.breathing_roi,
        seed=int(rng.integers(2**31))
    )

    ecg, dzdt, truth = gen_cardiac(cardiac)
    clip, _ = gen_thermal(emission, cardiac)
    isti = isti_continuous(truth, clip.times)
    try:
        breathing: tp.Optional[Signal] = breathing_signal(
            clip, spec.breathing_roi
        )
    except errors.SignalTooShort:
        LOG.warning('%s is too short for the breathing filter',
                    spec.trial_id)
        breathing = None

    tid = spec.trial_id
    names = {
        'clip_path': f'{tid}.tvf',
        'ecg_path': f'{tid}_ecg.csv',
        'dzdt_path': f'{tid}_dzdt.csv',
        'isti_csv_path': f'{tid}_isti.csv',
        'breathing_csv_path': f'{tid}_breathing.csv',
        'phases_path': f'{tid}_phases.csv'
    }
    out = spec.out_dir
    video.write_tvf(os.path.join(out, names['clip_path']), clip)
    tables.write_signal(os.path.join(out, names['ecg_path']), ecg)
    tables.write_signal(os.path.join(out, names['dzdt_path']), dzdt)
    tables.write_signal(os.path.join(out, names['isti_csv_path']), isti)
    if breathing is None:
        names['breathing_csv_path'] = ''
    else:
        tables.write_signal(
            os.path.join(out, names['breathing_csv_path']), breathing
        )
    tables.write_table(
        os.path.join(out, names['phases_path']), PHASE_FIELDS,
        [dict(zip(PHASE_FIELDS, (name, repr(start), repr(end))))
         for name, start, end in layout.phases()]
    )
    LOG.debug('generated %s (%s)', tid, format_label(stress))
    return dict(trial_id=tid, label=format_label(stress), **names)


def class_assignment(n_clips: int, stress_fraction: float,
                     rng: np.random.Generator) -> np.ndarray:
    """
    Shuffled stress flags with ``round(n_clips * stress_fraction)`` set.

    Examples:
        >>> int(class_assignment(10, 0.5, np.random.default_rng(0)).sum())
        5
    """
    n_stress = int(round(n_clips * stress_fraction))
    flags = np.zeros(n_clips, dtype=bool)
    flags[:n_stress] = True
    return rng.permutation(flags)


def gen_dataset(out_dir: str,
                n_clips: int,
                stress_fraction: float = 0.5,
                seed: int = 0,
                layout: tp.Optional[TrialLayout] = None,
                jobs: int = 1,
                breathing_roi: Rect = (12, 20, 8, 4),
                on_trial: tp.Optional[tp.Callable[[tp.Dict[str, str]],
                                                  None]] = None) -> str:
    """
    Generate `n_clips` trials under `out_dir`.

    Trial i is generated from ``seed + i`` alone, so results do not depend
    on `jobs`. `on_trial` is called with the manifest row of every finished
    trial, in trial order.

    Returns:
        Path of the written ``manifest.csv``.
    """
    if layout is None:
        layout = TrialLayout()
    flags = class_assignment(
        n_clips, stress_fraction, np.random.default_rng(seed)
    )
    if n_clips < 2 or flags.all() or not flags.any():
        raise errors.ValidationError(
            f'{n_clips} clips at stress fraction {stress_fraction} do not '
            f'give both classes'
        )
    os.makedirs(out_dir, exist_ok=True)
    specs = [
        TrialSpec(i, bool(flags[i]), seed + i, layout, out_dir, breathing_roi)
        for i in range(n_clips)
    ]

    rows = []
    with contextlib.ExitStack() as stack:
        if jobs > 1:
            pool = stack.enter_context(mp.Pool(jobs))
            finished = pool.imap(generate_trial, specs)
        else:
            finished = map(generate_trial, specs)
        for row in finished:
            rows.append(row)
            if on_trial is not None:
                on_trial(row)

    manifest = os.path.join(out_dir, 'manifest.csv')
    tables.write_table(manifest, MANIFEST_FIELDS, rows)
    LOG.info('wrote %d trials (%d stress) to %s', n_clips, int(flags.sum()),
             out_dir)
    return manifest
