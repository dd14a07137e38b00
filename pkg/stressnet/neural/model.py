"""
The spatial-temporal ISTI network.

A frame goes through a small convolutional backbone followed by global
average pooling (f0), an LSTM stack runs over the per-frame features of a
sequence (l0), and a fully connected detection head turns every l0 into
bin probabilities::

    frame -> [conv 3x3/2 -> ReLU] x len(channels) -> GAP -> f0
    f0 sequence -> LSTM x lstm_layers -> l0 sequence
    l0 -> FC -> ReLU -> FC -> softmax -> bins

Parameters live in a flat, ordered name -> array mapping. Names starting
with ``backbone.`` form the backbone learning-rate group.
"""
import logging
import typing as tp

import attr
import numpy as np

from stressnet import errors
from stressnet.neural import layers

LOG = logging.getLogger(__name__)

Params = tp.Dict[str, np.ndarray]
Grads = tp.Dict[str, np.ndarray]

BACKBONE_PREFIX = 'backbone.'
KERNEL = 3
STRIDE = 2
PAD = 1


def _int_tuple(value: tp.Any) -> tp.Tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(',') if v.strip()]
    return tuple(int(v) for v in value)


def conv_output_size(size: int) -> int:
    """
    Spatial size after one 3x3, stride 2, pad 1 convolution.

    Examples:
        >>> [conv_output_size(s) for s in (32, 16, 5)]
        [16, 8, 3]
    """
    return (size + 2 * PAD - KERNEL) // STRIDE + 1


@attr.s(frozen=True)
class Architecture:
    """Shape descriptor of a `Model`."""
    input_height: int = attr.ib(converter=int)
    input_width: int = attr.ib(converter=int)
    channels: tp.Tuple[int, ...] = attr.ib(
        default=(8, 16, 32), converter=_int_tuple
    )
    hidden: int = attr.ib(default=32, converter=int)
    lstm_layers: int = attr.ib(default=1, converter=int)
    head_hidden: int = attr.ib(default=64, converter=int)
    n_bins: int = attr.ib(default=33, converter=int)

    @n_bins.validator
    def _enough_bins(self, attribute: 'attr.Attribute[int]',
                     value: int) -> None:
        del attribute
        if value < 2:
            raise errors.ValidationError(f'need at least 2 bins, got {value}')

    @channels.validator
    def _some_channels(self, attribute: 'attr.Attribute[tp.Tuple[int, ...]]',
                       value: tp.Tuple[int, ...]) -> None:
        del attribute
        if not value or min(value) <= 0:
            raise errors.ValidationError(f'invalid backbone widths {value}')

    @classmethod
    def from_config(cls, cfg: tp.Any, input_height: int,
                    input_width: int) -> 'Architecture':
        model = cfg['model']
        return cls(
            input_height=input_height,
            input_width=input_width,
            channels=model['channels'].value,
            hidden=model['hidden'].value,
            lstm_layers=model['lstm_layers'].value,
            head_hidden=model['head_hidden'].value,
            n_bins=model['n_bins'].value
        )

    def to_descriptor(self) -> tp.Dict[str, str]:
        """Flatten into string key/value pairs for model files."""
        return {
            'kind': 'isti',
            'input_height': str(self.input_height),
            'input_width': str(self.input_width),
            'channels': ','.join(str(c) for c in self.channels),
            'hidden': str(self.hidden),
            'lstm_layers': str(self.lstm_layers),
            'head_hidden': str(self.head_hidden),
            'n_bins': str(self.n_bins)
        }

    @classmethod
    def from_descriptor(cls, desc: tp.Mapping[str, str]) -> 'Architecture':
        return cls(**{k: v for k, v in desc.items() if k != 'kind'})

    def param_shapes(self) -> tp.Dict[str, tp.Tuple[int, ...]]:
        """Expected shape of every parameter, in initialisation order."""
        shapes: tp.Dict[str, tp.Tuple[int, ...]] = {}
        in_ch = 1
        for i, out_ch in enumerate(self.channels):
            shapes[f'backbone.conv{i}.weight'] = (
                out_ch, in_ch, KERNEL, KERNEL
            )
            shapes[f'backbone.conv{i}.bias'] = (out_ch,)
            in_ch = out_ch
        in_dim = in_ch
        for i in range(self.lstm_layers):
            shapes[f'lstm.{i}.w_input'] = (in_dim, 4 * self.hidden)
            shapes[f'lstm.{i}.w_recurrent'] = (self.hidden, 4 * self.hidden)
            shapes[f'lstm.{i}.bias'] = (4 * self.hidden,)
            in_dim = self.hidden
        shapes['head.fc0.weight'] = (self.hidden, self.head_hidden)
        shapes['head.fc0.bias'] = (self.head_hidden,)
        shapes['head.fc1.weight'] = (self.head_hidden, self.n_bins)
        shapes['head.fc1.bias'] = (self.n_bins,)
        return shapes


def _fan_in(name: str, shape: tp.Tuple[int, ...],
            arch: Architecture) -> int:
    if name.startswith(BACKBONE_PREFIX):
        if name.endswith('.weight'):
            return int(np.prod(shape[1:]))
        return int(np.prod(shape))
    if name.startswith('lstm.'):
        if name.endswith('.w_input'):
            return shape[0]
        return arch.hidden
    # fully connected: weight (in, out), bias fans in like its weight
    if name.endswith('.weight'):
        return shape[0]
    return arch.hidden if name.startswith('head.fc0') else arch.head_hidden


def _check_params(arch: Architecture, params: Params) -> None:
    expected = arch.param_shapes()
    if list(expected) != list(params):
        raise errors.ShapeMismatch(
            f'parameter names {sorted(params)} do not match the architecture'
        )
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise errors.ShapeMismatch(
                f'{name}: expected {shape}, got {params[name].shape}'
            )


@attr.s(frozen=True, eq=False)
class Model:
    """Named parameter tensors plus the architecture they belong to."""
    arch: Architecture = attr.ib()
    params: Params = attr.ib()

    @params.validator
    def _consistent(self, attribute: 'attr.Attribute[Params]',
                    value: Params) -> None:
        del attribute
        _check_params(self.arch, value)

    def with_params(self, params: Params) -> 'Model':
        return Model(self.arch, params)


def init_model(arch: Architecture,
               rng: tp.Union[int, np.random.Generator] = 0) -> Model:
    """
    Draw every parameter uniformly from ``[-a, a]``, ``a = 1/sqrt(fan_in)``.

    Parameters are drawn in `Architecture.param_shapes` order, so equal
    seeds give bitwise equal models.
    """
    gen = rng if isinstance(rng, np.random.Generator) else \
        np.random.default_rng(rng)
    params: Params = {}
    for name, shape in arch.param_shapes().items():
        bound = 1.0 / np.sqrt(_fan_in(name, shape, arch))
        params[name] = gen.uniform(-bound, bound, size=shape)
    return Model(arch, params)


def zeros_like_model(model: Model) -> Grads:
    return {name: np.zeros_like(p) for name, p in model.params.items()}


ForwardCache = tp.Dict[str, tp.Any]


def backbone_forward(model: Model,
                     frames: np.ndarray) -> tp.Tuple[np.ndarray, ForwardCache]:
    """
    Per-frame features f0 for a stack of frames of shape (N, H, W).

    Returns:
        f0 of shape (N, channels[-1]) and the cache for the backward pass.
    """
    arch = model.arch
    if frames.ndim != 3 or frames.shape[1:] != (arch.input_height,
                                                arch.input_width):
        raise errors.ShapeMismatch(
            f'frames {frames.shape[1:]} do not match the model input '
            f'{(arch.input_height, arch.input_width)}'
        )
    x = frames[:, None, :, :].astype(np.float64)
    caches = []
    for i in range(len(arch.channels)):
        x, conv_cache = layers.conv2d_forward(
            x, model.params[f'backbone.conv{i}.weight'],
            model.params[f'backbone.conv{i}.bias'], STRIDE, PAD
        )
        x, relu_cache = layers.relu_forward(x)
        caches.append((conv_cache, relu_cache))
    f0, gap_cache = layers.gap_forward(x)
    return f0, {'layers': caches, 'gap': gap_cache}


def backbone_backward(model: Model, df0: np.ndarray, cache: ForwardCache,
                      grads: Grads) -> None:
    dx = layers.gap_backward(df0, cache['gap'])
    for i in reversed(range(len(model.arch.channels))):
        conv_cache, relu_cache = cache['layers'][i]
        dx = layers.relu_backward(dx, relu_cache)
        dx, dw, db = layers.conv2d_backward(dx, conv_cache)
        grads[f'backbone.conv{i}.weight'] += dw
        grads[f'backbone.conv{i}.bias'] += db


def lstm_stack_forward(model: Model,
                       seq: np.ndarray) -> tp.Tuple[np.ndarray, ForwardCache]:
    """
    Run the LSTM stack over ``seq`` of shape (T, B, D).

    Returns:
        l0 of shape (T, B, hidden).
    """
    caches = []
    x = seq
    for i in range(model.arch.lstm_layers):
        x, cache = layers.lstm_forward(
            x, model.params[f'lstm.{i}.w_input'],
            model.params[f'lstm.{i}.w_recurrent'],
            model.params[f'lstm.{i}.bias']
        )
        caches.append(cache)
    return x, {'layers': caches}


def lstm_stack_backward(model: Model, dl0: np.ndarray, cache: ForwardCache,
                        grads: Grads) -> np.ndarray:
    dx = dl0
    for i in reversed(range(model.arch.lstm_layers)):
        dx, dw_in, dw_rec, db = layers.lstm_backward(dx, cache['layers'][i])
        grads[f'lstm.{i}.w_input'] += dw_in
        grads[f'lstm.{i}.w_recurrent'] += dw_rec
        grads[f'lstm.{i}.bias'] += db
    return dx


def lstm_forward(model: Model, seq: tp.Sequence[np.ndarray]) -> np.ndarray:
    """l0 vectors for a single sequence of f0 vectors."""
    data = np.asarray(seq, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise errors.ShapeMismatch('expected a non-empty sequence of vectors')
    expected = model.params['lstm.0.w_input'].shape[0]
    if data.shape[1] != expected:
        raise errors.ShapeMismatch(
            f'f0 length {data.shape[1]} != LSTM input {expected}'
        )
    l0, _ = lstm_stack_forward(model, data[:, None, :])
    return l0[:, 0, :]


def head_forward(model: Model,
                 l0: np.ndarray) -> tp.Tuple[np.ndarray, ForwardCache]:
    """Logits of the detection head for l0 of shape (N, hidden)."""
    if l0.shape[-1] != model.arch.hidden:
        raise errors.ShapeMismatch(
            f'l0 length {l0.shape[-1]} != hidden {model.arch.hidden}'
        )
    x, fc0 = layers.fc_forward(
        l0, model.params['head.fc0.weight'], model.params['head.fc0.bias']
    )
    x, relu = layers.relu_forward(x)
    logits, fc1 = layers.fc_forward(
        x, model.params['head.fc1.weight'], model.params['head.fc1.bias']
    )
    return logits, {'fc0': fc0, 'relu': relu, 'fc1': fc1}


def head_backward(dlogits: np.ndarray, cache: ForwardCache,
                  grads: Grads) -> np.ndarray:
    dx, dw, db = layers.fc_backward(dlogits, cache['fc1'])
    grads['head.fc1.weight'] += dw
    grads['head.fc1.bias'] += db
    dx = layers.relu_backward(dx, cache['relu'])
    dx, dw, db = layers.fc_backward(dx, cache['fc0'])
    grads['head.fc0.weight'] += dw
    grads['head.fc0.bias'] += db
    return dx


def detection_head(model: Model, l0: np.ndarray) -> np.ndarray:
    """Bin probabilities for one l0 vector (or a stack of them)."""
    logits, _ = head_forward(model, np.atleast_2d(l0))
    probs = layers.softmax(logits)
    return probs[0] if np.ndim(l0) == 1 else probs


def network_forward(model: Model,
                    clips: np.ndarray) -> tp.Tuple[np.ndarray, ForwardCache]:
    """
    Logits for a batch of sequences.

    Args:
        clips: (S, T, H, W) frames of S sequences of T frames each.

    Returns:
        Logits of shape (T * S, n_bins), time-major: row ``t * S + s`` is
        frame t of sequence s.
    """
    n_seq, steps = clips.shape[0], clips.shape[1]
    frames = clips.transpose(1, 0, 2, 3).reshape(
        steps * n_seq, clips.shape[2], clips.shape[3]
    )
    f0, bb_cache = backbone_forward(model, frames)
    l0, lstm_cache = lstm_stack_forward(model, f0.reshape(steps, n_seq, -1))
    logits, head_cache = head_forward(model, l0.reshape(steps * n_seq, -1))
    cache = {
        'backbone': bb_cache,
        'lstm': lstm_cache,
        'head': head_cache,
        'steps': steps,
        'n_seq': n_seq
    }
    return logits, cache


def network_backward(model: Model, dlogits: np.ndarray,
                     cache: ForwardCache) -> Grads:
    """Parameter gradients given the gradient of the logits."""
    grads = zeros_like_model(model)
    steps, n_seq = cache['steps'], cache['n_seq']
    dl0 = head_backward(dlogits, cache['head'], grads)
    df0 = lstm_stack_backward(
        model, dl0.reshape(steps, n_seq, -1), cache['lstm'], grads
    )
    backbone_backward(model, df0.reshape(steps * n_seq, -1),
                      cache['backbone'], grads)
    return grads


def time_major(values: np.ndarray) -> np.ndarray:
    """
    Reorder per-frame values of shape (S, T) to the network's row order.

    Examples:
        >>> time_major(np.array([[1, 2], [3, 4]])).tolist()
        [1, 3, 2, 4]
    """
    return np.ascontiguousarray(values.T).reshape(-1)
