"""
Forward and backward passes of the network building blocks.

Every layer is a pair of functions: ``*_forward`` returns the output and a
cache, ``*_backward`` takes the upstream gradient and that cache and
returns the input gradient plus parameter gradients. Everything runs in
float64.
"""
import typing as tp

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

Cache = tp.Dict[str, tp.Any]


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function without overflow for large negative inputs."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                   stride: int = 2,
                   pad: int = 1) -> tp.Tuple[np.ndarray, Cache]:
    """
    2-D cross-correlation of ``x`` (N, C, H, W) with ``w`` (F, C, K, K).

    Examples:
        >>> x = np.arange(25.0).reshape(1, 1, 5, 5)
        >>> w = np.zeros((1, 1, 3, 3)); w[0, 0, 1, 1] = 1.0
        >>> out, _ = conv2d_forward(x, w, np.zeros(1), stride=1, pad=0)
        >>> out[0, 0].tolist()
        [[6.0, 7.0, 8.0], [11.0, 12.0, 13.0], [16.0, 17.0, 18.0]]
    """
    kernel = w.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(xp, (kernel, kernel),
                                  axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    cache = {
        'x_shape': x.shape,
        'xp_shape': xp.shape,
        'windows': windows,
        'w': w,
        'stride': stride,
        'pad': pad
    }
    return np.ascontiguousarray(out), cache


def conv2d_backward(
    dout: np.ndarray, cache: Cache
) -> tp.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients with respect to input, kernel and bias."""
    windows, w = cache['windows'], cache['w']
    stride, pad = cache['stride'], cache['pad']
    _, _, height, width = cache['x_shape']
    kernel = w.shape[2]
    out_h, out_w = dout.shape[2], dout.shape[3]

    db = dout.sum(axis=(0, 2, 3))
    dw = np.tensordot(dout, windows, axes=([0, 2, 3], [0, 2, 3]))

    # (N, Ho, Wo, C, K, K)
    dwindows = np.tensordot(dout, w, axes=([1], [0]))
    dxp = np.zeros(cache['xp_shape'])
    for i in range(kernel):
        for j in range(kernel):
            dxp[:, :, i:i + stride * (out_h - 1) + 1:stride,
                j:j + stride * (out_w - 1) + 1:stride] += \
                dwindows[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    dx = dxp[:, :, pad:pad + height, pad:pad + width]
    return np.ascontiguousarray(dx), dw, db


def relu_forward(x: np.ndarray) -> tp.Tuple[np.ndarray, Cache]:
    return np.maximum(x, 0.0), {'mask': x > 0}


def relu_backward(dout: np.ndarray, cache: Cache) -> np.ndarray:
    return dout * cache['mask']


def gap_forward(x: np.ndarray) -> tp.Tuple[np.ndarray, Cache]:
    """Global average pooling over the two trailing spatial axes."""
    return x.mean(axis=(2, 3)), {'shape': x.shape}


def gap_backward(dout: np.ndarray, cache: Cache) -> np.ndarray:
    shape = cache['shape']
    area = shape[2] * shape[3]
    return np.broadcast_to(dout[:, :, None, None] / area, shape).copy()


def fc_forward(x: np.ndarray, w: np.ndarray,
               b: np.ndarray) -> tp.Tuple[np.ndarray, Cache]:
    """Affine map ``x @ w + b`` with ``w`` of shape (in, out)."""
    return x @ w + b, {'x': x, 'w': w}


def fc_backward(
    dout: np.ndarray, cache: Cache
) -> tp.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, w = cache['x'], cache['w']
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def lstm_forward(x: np.ndarray, w_input: np.ndarray, w_recurrent: np.ndarray,
                 bias: np.ndarray) -> tp.Tuple[np.ndarray, Cache]:
    """
    One LSTM layer over a sequence ``x`` of shape (T, B, D).

    Gate blocks in the weight columns are ordered i, f, g, o. The state
    starts at zero and one hidden vector is emitted per step.
    """
    steps, batch, _ = x.shape
    hidden = w_recurrent.shape[0]
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    hs = np.zeros((steps, batch, hidden))
    cs = np.zeros((steps, batch, hidden))
    gates = np.zeros((steps, batch, 4 * hidden))
    for t in range(steps):
        act = x[t] @ w_input + h @ w_recurrent + bias
        gate = np.empty_like(act)
        gate[:, :2 * hidden] = sigmoid(act[:, :2 * hidden])
        gate[:, 2 * hidden:3 * hidden] = np.tanh(act[:, 2 * hidden:3 * hidden])
        gate[:, 3 * hidden:] = sigmoid(act[:, 3 * hidden:])
        i_g = gate[:, :hidden]
        f_g = gate[:, hidden:2 * hidden]
        g_g = gate[:, 2 * hidden:3 * hidden]
        o_g = gate[:, 3 * hidden:]
        c = f_g * c + i_g * g_g
        h = o_g * np.tanh(c)
        hs[t], cs[t], gates[t] = h, c, gate
    cache = {
        'x': x,
        'hs': hs,
        'cs': cs,
        'gates': gates,
        'w_input': w_input,
        'w_recurrent': w_recurrent
    }
    return hs, cache


def lstm_backward(
    dhs: np.ndarray, cache: Cache
) -> tp.Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Backpropagation through time for `lstm_forward`.

    Returns:
        Gradients for the input sequence, input weights, recurrent weights
        and bias.
    """
    x, hs, cs, gates = cache['x'], cache['hs'], cache['cs'], cache['gates']
    w_input, w_recurrent = cache['w_input'], cache['w_recurrent']
    steps, batch, hidden = hs.shape

    dx = np.zeros_like(x)
    dw_input = np.zeros_like(w_input)
    dw_recurrent = np.zeros_like(w_recurrent)
    dbias = np.zeros(4 * hidden)
    dh_next = np.zeros((batch, hidden))
    dc_next = np.zeros((batch, hidden))

    for t in reversed(range(steps)):
        gate = gates[t]
        i_g = gate[:, :hidden]
        f_g = gate[:, hidden:2 * hidden]
        g_g = gate[:, 2 * hidden:3 * hidden]
        o_g = gate[:, 3 * hidden:]
        c_prev = cs[t - 1] if t > 0 else np.zeros((batch, hidden))
        h_prev = hs[t - 1] if t > 0 else np.zeros((batch, hidden))
        tanh_c = np.tanh(cs[t])

        dh = dhs[t] + dh_next
        dc = dh * o_g * (1.0 - tanh_c**2) + dc_next
        dact = np.concatenate([
            dc * g_g * i_g * (1.0 - i_g),
            dc * c_prev * f_g * (1.0 - f_g),
            dc * i_g * (1.0 - g_g**2),
            dh * tanh_c * o_g * (1.0 - o_g),
        ], axis=1)

        dw_input += x[t].T @ dact
        dw_recurrent += h_prev.T @ dact
        dbias += dact.sum(axis=0)
        dx[t] = dact @ w_input.T
        dh_next = dact @ w_recurrent.T
        dc_next = dc * f_g
    return dx, dw_input, dw_recurrent, dbias


def softmax(logits: np.ndarray) -> np.ndarray:
    """
    Row-wise softmax.

    Examples:
        >>> softmax(np.zeros((1, 4))).tolist()
        [[0.25, 0.25, 0.25, 0.25]]
    """
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_backward(dprobs: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Gradient of the logits from the gradient of the probabilities."""
    return probs * (dprobs - np.sum(dprobs * probs, axis=-1, keepdims=True))
