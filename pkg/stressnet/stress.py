"""
Trial-level stress classification.

A whole trial signal is resampled to a fixed number of points and fed to
a small fully connected network that outputs the probability of stress.
ISTI, HR and HRV traces use the resampled values themselves; the
breathing trace uses its low-frequency magnitude spectrum, since the
breathing rate rather than its phase carries the condition.
"""
import logging
import typing as tp

import attr
import numpy as np

from stressnet import errors
from stressnet.neural import layers
from stressnet.neural.loss import bce, bce_logits
from stressnet.timeseries import Signal, resample_fixed

LOG = logging.getLogger(__name__)

PHASE_NAMES = ('base', 'prep', 'immersion', 'recovery')
SIGNAL_KINDS = ('isti', 'hr', 'hrv', 'breathing')
SPECTRUM_MAX_HZ = 1.0

# value mapped to 1.0 for each level-encoded signal kind
DEFAULT_SCALES = {'isti': 300.0, 'hr': 200.0, 'hrv': 200.0, 'breathing': 1.0}


@attr.s(frozen=True)
class Phase:
    """A named section ``[start_s, end_s)`` of a trial."""
    name: str = attr.ib()
    start_s: float = attr.ib(converter=float)
    end_s: float = attr.ib(converter=float)

    @name.validator
    def _known(self, attribute: 'attr.Attribute[str]', value: str) -> None:
        del attribute
        if value not in PHASE_NAMES:
            raise errors.ValidationError(f'unknown phase {value!r}')

    @end_s.validator
    def _ordered(self, attribute: 'attr.Attribute[float]',
                 value: float) -> None:
        del attribute
        if not value > self.start_s:
            raise errors.ValidationError(
                f'phase {self.name} ends before it starts'
            )


def _check_phases(instance: tp.Any, attribute: tp.Any,
                  value: tp.Sequence[Phase]) -> None:
    del instance, attribute
    for before, after in zip(value, value[1:]):
        if after.start_s < before.end_s:
            raise errors.ValidationError(
                f'phase {after.name} overlaps {before.name}'
            )


def parse_label(raw: tp.Any) -> tp.Optional[bool]:
    """
    True for stress, False for no stress, None when unknown.

    Examples:
        >>> parse_label('stress'), parse_label('0'), parse_label('')
        (True, False, None)
    """
    text = str(raw).strip().lower()
    if text in ('stress', '1', 'true'):
        return True
    if text in ('no_stress', '0', 'false'):
        return False
    if text in ('', 'none', 'unknown'):
        return None
    raise errors.ValidationError(f'unknown label {raw!r}')


def format_label(label: tp.Optional[bool]) -> str:
    if label is None:
        return ''
    return 'stress' if label else 'no_stress'


@attr.s(frozen=True, eq=False)
class TrialRecord:
    """One recorded (or synthesised) trial."""
    isti: Signal = attr.ib()
    phases: tp.Tuple[Phase, ...] = attr.ib(
        default=(), converter=tuple, validator=_check_phases
    )
    label: tp.Optional[bool] = attr.ib(default=None)
    breathing: tp.Optional[Signal] = attr.ib(default=None)
    trial_id: str = attr.ib(default='')


@attr.s(frozen=True)
class StressArchitecture:
    """Layer widths plus how a trial signal becomes the input vector."""
    n_in: int = attr.ib(default=128, converter=int)
    hidden: tp.Tuple[int, ...] = attr.ib(
        default=(64, 16),
        converter=lambda v: tuple(
            int(x) for x in (v.split(',') if isinstance(v, str) else v)
        )
    )
    signal: str = attr.ib(default='isti')
    scale: float = attr.ib(default=300.0, converter=float)

    @n_in.validator
    def _enough_inputs(self, attribute: 'attr.Attribute[int]',
                       value: int) -> None:
        del attribute
        if value < 2:
            raise errors.ValidationError(f'n_in must be >= 2, got {value}')

    @signal.validator
    def _known_signal(self, attribute: 'attr.Attribute[str]',
                      value: str) -> None:
        del attribute
        if value not in SIGNAL_KINDS:
            raise errors.ConfigError(f'unknown signal kind {value!r}')

    @property
    def widths(self) -> tp.Tuple[int, ...]:
        return (self.n_in,) + self.hidden + (1,)

    def param_shapes(self) -> tp.Dict[str, tp.Tuple[int, ...]]:
        shapes: tp.Dict[str, tp.Tuple[int, ...]] = {}
        widths = self.widths
        for i, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
            shapes[f'fc{i}.weight'] = (fan_in, fan_out)
            shapes[f'fc{i}.bias'] = (fan_out,)
        return shapes

    def to_descriptor(self) -> tp.Dict[str, str]:
        return {
            'kind': 'stress',
            'n_in': str(self.n_in),
            'hidden': ','.join(str(h) for h in self.hidden),
            'signal': self.signal,
            'scale': repr(self.scale)
        }

    @classmethod
    def from_descriptor(cls,
                        desc: tp.Mapping[str, str]) -> 'StressArchitecture':
        return cls(**{k: v for k, v in desc.items() if k != 'kind'})


Params = tp.Dict[str, np.ndarray]


@attr.s(frozen=True, eq=False)
class StressModel:
    arch: StressArchitecture = attr.ib()
    params: Params = attr.ib()

    @params.validator
    def _consistent(self, attribute: 'attr.Attribute[Params]',
                    value: Params) -> None:
        del attribute
        expected = self.arch.param_shapes()
        if list(expected) != list(value):
            raise errors.ShapeMismatch(
                f'parameter names {sorted(value)} do not match the classifier'
            )
        for name, shape in expected.items():
            if value[name].shape != shape:
                raise errors.ShapeMismatch(
                    f'{name}: expected {shape}, got {value[name].shape}'
                )


def init_stress_model(arch: StressArchitecture,
                      rng: tp.Union[int, np.random.Generator] = 0
                     ) -> StressModel:
    """Uniform ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` initialisation."""
    gen = rng if isinstance(rng, np.random.Generator) else \
        np.random.default_rng(rng)
    params: Params = {}
    for name, shape in arch.param_shapes().items():
        fan_in = params[name.replace('.bias', '.weight')].shape[0] \
            if name.endswith('.bias') else shape[0]
        bound = 1.0 / np.sqrt(fan_in)
        params[name] = gen.uniform(-bound, bound, size=shape)
    return StressModel(arch, params)


def spectrum_features(sig: Signal, n_in: int) -> np.ndarray:
    """
    Magnitude spectrum of the standardised signal on ``[0, 1] Hz``.

    The spectrum is sampled at `n_in` equally spaced frequencies and scaled
    so that its largest value is 1.
    """
    if len(sig) < 2:
        raise errors.EmptySignal('need at least two samples for a spectrum')
    values = sig.samples - sig.samples.mean()
    std = values.std()
    if std > 0:
        values = values / std
    magnitude = np.abs(np.fft.rfft(values))
    freqs = np.fft.rfftfreq(values.size, d=1.0 / sig.sample_rate_hz)
    grid = np.linspace(0.0, SPECTRUM_MAX_HZ, n_in)
    curve = np.interp(grid, freqs, magnitude)
    peak = curve.max()
    return curve / peak if peak > 0 else curve


def featurize_signal(sig: Signal, n_in: int = 128, scale: float = 300.0,
                     kind: str = 'isti') -> np.ndarray:
    """Encode any trial signal as a fixed-length vector in [0, 1]."""
    if len(sig) == 0:
        raise errors.EmptySignal('cannot featurize an empty signal')
    if kind == 'breathing':
        return spectrum_features(sig, n_in)
    if not scale > 0:
        raise errors.NonPositiveScale(f'scale must be positive, got {scale}')
    return np.clip(resample_fixed(sig, n_in) / scale, 0.0, 1.0)


def featurize(trial: TrialRecord, n_in: int = 128,
              isti_max_ms: float = 300.0) -> np.ndarray:
    """
    The trial's ISTI resampled to `n_in` points and normalised to [0, 1].

    Examples:
        >>> trial = TrialRecord(Signal(np.full(300, 160.0), 15.0))
        >>> vec = featurize(trial)
        >>> vec.size, round(float(vec[0]), 4)
        (128, 0.5333)
    """
    return featurize_signal(trial.isti, n_in, isti_max_ms, 'isti')


def features_for(model: StressModel, trial: TrialRecord) -> np.ndarray:
    """Input vector of `trial` for the signal kind `model` was trained on."""
    arch = model.arch
    if arch.signal == 'breathing':
        if trial.breathing is None:
            raise errors.ValidationError(
                f'trial {trial.trial_id!r} has no breathing signal'
            )
        return featurize_signal(trial.breathing, arch.n_in, kind='breathing')
    return featurize_signal(trial.isti, arch.n_in, arch.scale, arch.signal)


def _forward(model: StressModel,
             x: np.ndarray) -> tp.Tuple[np.ndarray, tp.List[tp.Any]]:
    """Logits for a batch (N, n_in)."""
    caches: tp.List[tp.Any] = []
    n_layers = len(model.arch.widths) - 1
    for i in range(n_layers):
        x, fc_cache = layers.fc_forward(
            x, model.params[f'fc{i}.weight'], model.params[f'fc{i}.bias']
        )
        relu_cache = None
        if i < n_layers - 1:
            x, relu_cache = layers.relu_forward(x)
        caches.append((fc_cache, relu_cache))
    return x[:, 0], caches


def _backward(model: StressModel, dlogits: np.ndarray,
              caches: tp.List[tp.Any]) -> Params:
    grads: Params = {}
    dx = dlogits[:, None]
    for i in reversed(range(len(caches))):
        fc_cache, relu_cache = caches[i]
        if relu_cache is not None:
            dx = layers.relu_backward(dx, relu_cache)
        dx, dw, db = layers.fc_backward(dx, fc_cache)
        grads[f'fc{i}.weight'] = dw
        grads[f'fc{i}.bias'] = db
    return {name: grads[name] for name in model.params}


def stress_forward(model: StressModel, vector: tp.Any) -> float:
    """
    Probability of stress for one input vector.

    Examples:
        >>> arch = StressArchitecture(n_in=4, hidden=(3,))
        >>> zero = StressModel(arch, {
        ...     k: np.zeros(s) for k, s in arch.param_shapes().items()})
        >>> stress_forward(zero, np.ones(4))
        0.5
    """
    x = np.asarray(vector, dtype=np.float64).reshape(-1)
    if x.size != model.arch.n_in:
        raise errors.ShapeMismatch(
            f'input of length {x.size}, model expects {model.arch.n_in}'
        )
    logits, _ = _forward(model, x[None, :])
    return float(layers.sigmoid(logits)[0])


def stress_probabilities(model: StressModel, matrix: np.ndarray) -> np.ndarray:
    logits, _ = _forward(model, np.asarray(matrix, dtype=np.float64))
    return layers.sigmoid(logits)


def loss_and_grads(model: StressModel, x: np.ndarray,
                   y: np.ndarray) -> tp.Tuple[float, Params]:
    """Mean BCE over a batch and its parameter gradients."""
    logits, caches = _forward(model, x)
    loss, dlogits = bce_logits(logits, y)
    return loss, _backward(model, dlogits, caches)


@attr.s(frozen=True)
class StressTrainConfig:
    lr: float = attr.ib(default=0.1)
    epochs: int = attr.ib(default=2000)
    seed: int = attr.ib(default=0)

    @lr.validator
    def _positive(self, attribute: 'attr.Attribute[float]',
                  value: float) -> None:
        del attribute
        if not value > 0:
            raise errors.ValidationError(f'lr must be positive, got {value}')

    @classmethod
    def from_config(cls, cfg: tp.Any, **overrides: tp.Any
                   ) -> 'StressTrainConfig':
        values = dict(
            lr=float(cfg['stress']['lr'].value),
            epochs=int(cfg['stress']['epochs'].value),
            seed=int(cfg['seed'].value)
        )
        values.update(overrides)
        return cls(**values)


def stress_train(
    trials: tp.Sequence[TrialRecord],
    config: tp.Optional[StressTrainConfig] = None,
    arch: tp.Optional[StressArchitecture] = None,
    on_epoch: tp.Optional[tp.Callable[[int, float], None]] = None
) -> StressModel:
    """
    Full-batch SGD on the binary cross-entropy of labelled trials.

    Raises:
        SingleClassDataset: unless both classes are present.
    """
    if config is None:
        config = StressTrainConfig()
    if arch is None:
        arch = StressArchitecture()
    labelled = [t for t in trials if t.label is not None]
    labels = np.array([1.0 if t.label else 0.0 for t in labelled])
    if labels.size == 0 or labels.min() == labels.max():
        raise errors.SingleClassDataset(
            'stress training needs trials of both classes'
        )

    model = init_stress_model(arch, config.seed)
    x = np.stack([features_for(model, t) for t in labelled])
    params = model.params
    loss = float('nan')
    for epoch in range(config.epochs):
        loss, grads = loss_and_grads(model, x, labels)
        params = {k: v - config.lr * grads[k] for k, v in params.items()}
        model = StressModel(arch, params)
        if on_epoch is not None:
            on_epoch(epoch, loss)
    final = bce(stress_probabilities(model, x), labels)
    LOG.info(
        'stress classifier: %d trials, %d epochs, final BCE %.6f (last epoch '
        '%.6f)', labels.size, config.epochs, final, loss
    )
    return model


def fuse_breathing(p_isti: float, p_breath: float) -> float:
    """
    Multiply two stress probabilities into one ranking score.

    Examples:
        >>> fuse_breathing(0.5, 1.0)
        0.5
    """
    for name, p in (('p_isti', p_isti), ('p_breath', p_breath)):
        if not 0.0 <= p <= 1.0:
            raise errors.OutOfRangeProbability(f'{name}={p} is not in [0, 1]')
    return float(p_isti) * float(p_breath)


def score_trials(
    model: StressModel,
    trials: tp.Sequence[TrialRecord],
    breathing_model: tp.Optional[StressModel] = None
) -> np.ndarray:
    """Stress scores of trials, fused with a breathing model if given."""
    scores = np.array([stress_forward(model, features_for(model, t))
                       for t in trials])
    if breathing_model is not None:
        breath = [stress_forward(breathing_model,
                                 features_for(breathing_model, t))
                  for t in trials]
        scores = np.array([fuse_breathing(p, q)
                           for p, q in zip(scores, breath)])
    return scores


def phase_mask(times: np.ndarray, phases: tp.Sequence[Phase],
               name: str) -> np.ndarray:
    """Boolean mask of the samples at `times` inside the named phase."""
    mask = np.zeros(times.shape, dtype=bool)
    for phase in phases:
        if phase.name == name:
            mask |= (times >= phase.start_s) & (times < phase.end_s)
    return mask
