"""
Training and inference of the ISTI network.

Clips are cut into contiguous sequences of ``round(fps * seq_seconds)``
frames, tiled from a random phase each epoch. Sequences are grouped into
batches of about `batch_frames` frames and trained with plain SGD. The
backbone and the rest of the network use separate learning rates, both
decayed stepwise every `decay_period_epochs`. Inference reads every frame
off a window that ends at it.
"""
import logging
import typing as tp

import attr
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from stressnet import errors
from stressnet.emission import FeatureClip
from stressnet.isti import denormalize_isti, normalize_isti
from stressnet.neural import layers
from stressnet.neural import loss as losses
from stressnet.neural import model as nn
from stressnet.timeseries import Signal

LOG = logging.getLogger(__name__)

ALIGN_TOLERANCE_FRAMES = 0.5
PREDICT_CHUNK = 512


def _positive(instance: tp.Any, attribute: 'attr.Attribute[float]',
              value: float) -> None:
    del instance
    if not value > 0:
        raise errors.ValidationError(f'{attribute.name} must be positive')


@attr.s(frozen=True)
class TrainConfig:
    """Optimiser and batching settings."""
    lr_backbone: float = attr.ib(default=0.001, validator=_positive)
    lr_head: float = attr.ib(default=0.01, validator=_positive)
    lr_decay_factor: float = attr.ib(default=0.1, validator=_positive)
    decay_period_epochs: int = attr.ib(default=10, validator=_positive)
    epochs: int = attr.ib(default=30)
    batch_frames: int = attr.ib(default=500, validator=_positive)
    n_bins: int = attr.ib(default=33)
    alpha: float = attr.ib(default=1.0)
    seq_seconds: float = attr.ib(default=1.0, validator=_positive)
    seed: int = attr.ib(default=0)
    loss: str = attr.ib(default='ce')

    @n_bins.validator
    def _bins(self, attribute: 'attr.Attribute[int]', value: int) -> None:
        del attribute
        if value < 2:
            raise errors.ValidationError(f'need at least 2 bins, got {value}')

    @alpha.validator
    def _alpha(self, attribute: 'attr.Attribute[float]', value: float) -> None:
        del attribute
        if value < 0:
            raise errors.ValidationError(f'alpha must be >= 0, got {value}')

    @loss.validator
    def _loss(self, attribute: 'attr.Attribute[str]', value: str) -> None:
        del attribute
        if value not in losses.LOSS_VARIANTS:
            raise errors.ConfigError(f'unknown loss variant {value!r}')

    @classmethod
    def from_config(cls, cfg: tp.Any, **overrides: tp.Any) -> 'TrainConfig':
        train = cfg['train']
        values = dict(
            lr_backbone=float(train['lr_backbone'].value),
            lr_head=float(train['lr_head'].value),
            lr_decay_factor=float(train['decay_factor'].value),
            decay_period_epochs=int(train['decay_period'].value),
            epochs=int(train['epochs'].value),
            batch_frames=int(train['batch_frames'].value),
            n_bins=int(cfg['model']['n_bins'].value),
            alpha=float(train['alpha'].value),
            seq_seconds=float(train['seq_seconds'].value),
            seed=int(cfg['seed'].value),
            loss=str(train['loss'].value)
        )
        values.update(overrides)
        return cls(**values)

    def sequence_length(self, fps: float) -> int:
        """
        Frames per sequence at the given frame rate.

        Examples:
            >>> TrainConfig().sequence_length(15.0)
            15
        """
        return max(1, int(round(fps * self.seq_seconds)))

    def learning_rates(self, epoch: int) -> tp.Tuple[float, float]:
        """
        (backbone, head) learning rates in effect during `epoch`.

        Examples:
            >>> round(TrainConfig().learning_rates(10)[1], 9)
            0.001
        """
        decay = self.lr_decay_factor**(epoch // self.decay_period_epochs)
        return (float(np.float64(self.lr_backbone) * decay),
                float(np.float64(self.lr_head) * decay))


@attr.s(frozen=True)
class EpochRecord:
    """One row of the training history."""
    epoch: int = attr.ib()
    loss: float = attr.ib()
    ce: float = attr.ib()
    mse: float = attr.ib()
    lr_head: float = attr.ib()
    lr_backbone: float = attr.ib()


HISTORY_FIELDS = ('epoch', 'loss', 'ce', 'mse', 'lr_head', 'lr_backbone')

Sample = tp.Tuple[FeatureClip, Signal]


def sgd_step(model: nn.Model, grads: nn.Grads, epoch: int,
             config: TrainConfig) -> nn.Model:
    """
    ``theta <- theta - lr * decay**(epoch // period) * grad``.

    Backbone parameters use `lr_backbone`, everything else `lr_head`.
    """
    lr_backbone, lr_head = config.learning_rates(epoch)
    updated: nn.Params = {}
    for name, value in model.params.items():
        grad = grads.get(name)
        if grad is None or grad.shape != value.shape:
            raise errors.ShapeMismatch(f'gradient for {name} has wrong shape')
        rate = lr_backbone if name.startswith(nn.BACKBONE_PREFIX) else lr_head
        updated[name] = value - rate * grad
    return model.with_params(updated)


def align_targets(fc: FeatureClip, isti_ms: Signal,
                  isti_max_ms: float = 300.0) -> Signal:
    """
    Normalised ISTI at every feature frame time.

    The ISTI signal must cover the feature frames to within half a frame;
    values in between are linearly interpolated.
    """
    times = fc.times
    slack = ALIGN_TOLERANCE_FRAMES / fc.fps
    if len(isti_ms) == 0 or times[0] < isti_ms.t0_seconds - slack or \
            times[-1] > isti_ms.t_end + slack:
        raise errors.AlignmentError(
            f'ISTI covers [{isti_ms.t0_seconds:.3f}, {isti_ms.t_end:.3f}] s, '
            f'frames span [{times[0]:.3f}, {times[-1]:.3f}] s'
        )
    values = np.interp(times, isti_ms.times, isti_ms.samples)
    return Signal(normalize_isti(values, isti_max_ms), fc.fps, fc.t0_seconds)


def _check_sample(fc: FeatureClip, target: Signal) -> None:
    if len(target) != fc.num_frames:
        raise errors.AlignmentError(
            f'{len(target)} targets for {fc.num_frames} frames'
        )
    if abs(target.sample_rate_hz - fc.fps) > 1e-6 * fc.fps or \
            abs(target.t0_seconds - fc.t0_seconds) > 0.5 / fc.fps:
        raise errors.AlignmentError('targets are not on the frame grid')
    if np.any(target.samples < 0) or np.any(target.samples > 1):
        raise errors.TargetOutOfRange('targets must be normalised to [0, 1]')


def make_sequences(dataset: tp.Sequence[Sample],
                   seq_len: int,
                   offset: int = 0) -> tp.List[tp.Tuple[int, int]]:
    """
    (clip index, first frame) of every full-length sequence.

    Sequences start at `offset` and tile each clip; frames before the
    offset and trailing frames that do not fill a sequence are not part of
    this tiling.

    Examples:
        >>> clip = FeatureClip(np.zeros((7, 2, 2)), 3.0)
        >>> make_sequences([(clip, Signal(np.zeros(7), 3.0))], 3)
        [(0, 0), (0, 3)]
        >>> make_sequences([(clip, Signal(np.zeros(7), 3.0))], 3, offset=1)
        [(0, 1), (0, 4)]
    """
    return [(i, start)
            for i, (fc, _) in enumerate(dataset)
            for start in range(offset, fc.num_frames - seq_len + 1, seq_len)]


def batch_loss(model: nn.Model, clips: np.ndarray, targets: np.ndarray,
               config: TrainConfig
              ) -> tp.Tuple[losses.LossTerms, nn.ForwardCache]:
    """Mean multi-loss of a batch (S, T, H, W) with targets (S, T)."""
    logits, cache = nn.network_forward(model, clips)
    terms = losses.multi_loss_logits(
        logits, nn.time_major(targets), config.alpha, config.loss
    )
    return terms, cache


def batch_gradients(model: nn.Model, clips: np.ndarray, targets: np.ndarray,
                    config: TrainConfig
                   ) -> tp.Tuple[losses.LossTerms, nn.Grads]:
    terms, cache = batch_loss(model, clips, targets, config)
    return terms, nn.network_backward(model, terms.dlogits, cache)


ProgressHook = tp.Callable[[EpochRecord], None]


def train(
    dataset: tp.Sequence[Sample],
    config: TrainConfig,
    arch: tp.Optional[nn.Architecture] = None,
    on_epoch: tp.Optional[ProgressHook] = None
) -> tp.Tuple[nn.Model, tp.List[EpochRecord]]:
    """
    Fit a fresh model to ``(features, normalised ISTI)`` pairs.

    Everything random (initialisation and sequence order) derives from
    ``config.seed``, so two runs with the same inputs produce bitwise equal
    parameters.
    """
    if not dataset:
        raise errors.EmptyDataset('no training clips')
    for fc, target in dataset:
        _check_sample(fc, target)

    first = dataset[0][0]
    if arch is None:
        arch = nn.Architecture(first.height, first.width, n_bins=config.n_bins)
    if arch.n_bins != config.n_bins:
        raise errors.ShapeMismatch('architecture and config disagree on bins')

    seq_len = config.sequence_length(first.fps)
    sequences = make_sequences(dataset, seq_len)
    if not sequences:
        raise errors.EmptyDataset(
            f'no clip holds a full sequence of {seq_len} frames'
        )
    per_batch = max(1, config.batch_frames // seq_len)

    init_seq, order_seq = np.random.SeedSequence(config.seed).spawn(2)
    model = nn.init_model(arch, np.random.default_rng(init_seq))
    order_rng = np.random.default_rng(order_seq)

    history: tp.List[EpochRecord] = []
    for epoch in range(config.epochs):
        # a fresh tiling phase every epoch
        offset = int(order_rng.integers(seq_len))
        epoch_sequences = make_sequences(dataset, seq_len, offset) or sequences
        order = order_rng.permutation(len(epoch_sequences))
        sums = np.zeros(3)
        frames_seen = 0
        for first_idx in range(0, len(order), per_batch):
            batch = order[first_idx:first_idx + per_batch]
            chosen = [epoch_sequences[k] for k in batch]
            clips = np.stack([
                dataset[i][0].frames[s:s + seq_len] for i, s in chosen
            ])
            targets = np.stack([
                dataset[i][1].samples[s:s + seq_len] for i, s in chosen
            ])
            terms, grads = batch_gradients(model, clips, targets, config)
            model = sgd_step(model, grads, epoch, config)
            count = targets.size
            sums += count * np.array(
                [terms.loss, terms.classification, terms.regression]
            )
            frames_seen += count

        lr_backbone, lr_head = config.learning_rates(epoch)
        mean = sums / frames_seen
        record = EpochRecord(
            epoch, float(mean[0]), float(mean[1]), float(mean[2]), lr_head,
            lr_backbone
        )
        history.append(record)
        LOG.info(
            'epoch %d: loss=%.6f ce=%.6f mse=%.6f', epoch, record.loss,
            record.ce, record.mse
        )
        if on_epoch is not None:
            on_epoch(record)
    return model, history


def _decode(model: nn.Model, l0: np.ndarray) -> np.ndarray:
    logits, _ = nn.head_forward(model, l0)
    return layers.softmax(logits) @ losses.bin_centers(model.arch.n_bins)


def predict_normalized(model: nn.Model, fc: FeatureClip,
                       seq_seconds: float = 1.0) -> np.ndarray:
    """
    Decoded [0, 1] prediction for every frame of `fc`.

    Frame t is read off the last step of the window of `seq_seconds` that
    ends at t, so every prediction has a full window of context. Frames
    before the end of the first window take the steps of that window.
    """
    seq_len = min(max(1, int(round(fc.fps * seq_seconds))), fc.num_frames)
    f0 = np.concatenate([
        nn.backbone_forward(model, fc.frames[start:start + PREDICT_CHUNK])[0]
        for start in range(0, fc.num_frames, PREDICT_CHUNK)
    ])
    # (windows, features, steps) -> (steps, windows, features)
    windows = sliding_window_view(f0, seq_len, axis=0).transpose(2, 0, 1)
    l0, _ = nn.lstm_stack_forward(model, windows)

    preds = np.empty(fc.num_frames)
    preds[seq_len - 1:] = _decode(model, l0[-1])
    preds[:seq_len - 1] = _decode(model, l0[:seq_len - 1, 0])
    return preds


def predict_isti(model: nn.Model,
                 fc: FeatureClip,
                 isti_max_ms: float = 300.0,
                 seq_seconds: float = 1.0) -> Signal:
    """Predicted ISTI in milliseconds on the frame grid of `fc`."""
    if (fc.height, fc.width) != (model.arch.input_height,
                                 model.arch.input_width):
        raise errors.ShapeMismatch(
            f'clip frames {(fc.height, fc.width)} do not match the model'
        )
    values = predict_normalized(model, fc, seq_seconds)
    return Signal(
        denormalize_isti(values, isti_max_ms), fc.fps, fc.t0_seconds
    )
