"""
Binned-expectation decoding and the training losses.

The detection head predicts a distribution over `n_bins` uniform bins of
[0, 1]. The decoded value is the probability-weighted mean of the bin
centres. Training combines a classification term on the bin containing
the target with an alpha-weighted squared error on the decoded value.
"""
import typing as tp

import numpy as np

from stressnet import errors
from stressnet.neural import layers

LOSS_VARIANTS = ('ce', 'bce')
PROB_FLOOR = 1e-12


def bin_centers(n_bins: int) -> np.ndarray:
    """
    Centres ``(j + 0.5) / n_bins`` of the uniform bins of [0, 1].

    Examples:
        >>> bin_centers(4).tolist()
        [0.125, 0.375, 0.625, 0.875]
    """
    if n_bins < 2:
        raise errors.ValidationError(f'need at least 2 bins, got {n_bins}')
    return (np.arange(n_bins) + 0.5) / n_bins


def bins_expectation(probs: tp.Any, n_bins: tp.Optional[int] = None) -> float:
    """
    Expected bin centre under `probs`.

    Examples:
        >>> round(bins_expectation(np.full(33, 1 / 33)), 12)
        0.5
    """
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    n_bins = p.size if n_bins is None else n_bins
    if p.size != n_bins:
        raise errors.ShapeMismatch(f'{p.size} probabilities for {n_bins} bins')
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-6:
        raise errors.NotADistribution('probabilities must be >= 0, sum to 1')
    return float(p @ bin_centers(n_bins))


def target_bin(target: tp.Any, n_bins: int) -> np.ndarray:
    """
    Index of the bin holding each target value.

    Examples:
        >>> target_bin([0.0, 0.5, 1.0], 33).tolist()
        [0, 16, 32]
    """
    values = np.asarray(target, dtype=np.float64)
    if np.any(values < 0) or np.any(values > 1) or \
            not np.all(np.isfinite(values)):
        raise errors.TargetOutOfRange('targets must lie in [0, 1]')
    return np.minimum(np.floor(values * n_bins).astype(np.int64), n_bins - 1)


def multi_loss(probs: tp.Any, pred_value: float, target_value_01: float,
               alpha: float = 1.0) -> tp.Tuple[float, int]:
    """
    ``-ln p[target_bin] + alpha * (pred - target)**2`` for one frame.

    Examples:
        >>> loss, k = multi_loss(np.full(33, 1 / 33), 0.5, 0.5)
        >>> round(loss, 4), k
        (3.4965, 16)
    """
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    k = int(target_bin(target_value_01, p.size))
    with np.errstate(divide='ignore'):
        classification = -float(np.log(p[k]))
    regression = (float(pred_value) - float(target_value_01))**2
    return classification + alpha * regression, k


class LossTerms(tp.NamedTuple):
    """Batch-mean loss, its two terms and the gradient of the logits."""
    loss: float
    classification: float
    regression: float
    dlogits: np.ndarray
    predictions: np.ndarray


def multi_loss_logits(logits: np.ndarray,
                      targets: np.ndarray,
                      alpha: float = 1.0,
                      variant: str = 'ce') -> LossTerms:
    """
    Mean multi-loss over a batch of frames and its logit gradient.

    Args:
        logits: (frames, n_bins) detection head outputs.
        targets: (frames,) normalised ISTI in [0, 1].
        alpha: Weight of the regression term.
        variant: 'ce' for categorical cross-entropy over the softmax bins,
            'bce' for per-bin binary cross-entropy against the one-hot bin.
    """
    if variant not in LOSS_VARIANTS:
        raise errors.ConfigError(f'unknown loss variant {variant!r}')
    frames, n_bins = logits.shape
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if targets.size != frames:
        raise errors.ShapeMismatch(f'{targets.size} targets, {frames} frames')

    bins = target_bin(targets, n_bins)
    onehot = np.zeros_like(logits)
    onehot[np.arange(frames), bins] = 1.0
    centers = bin_centers(n_bins)

    probs = layers.softmax(logits)
    preds = probs @ centers
    residual = preds - targets

    if variant == 'ce':
        logp = layers.log_softmax(logits)
        cls_terms = -logp[np.arange(frames), bins]
        dlogits_cls = probs - onehot
    else:
        clipped = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
        cls_terms = -np.sum(
            onehot * np.log(clipped) + (1 - onehot) * np.log(1 - clipped),
            axis=1
        )
        dprobs = -onehot / clipped + (1 - onehot) / (1 - clipped)
        dlogits_cls = layers.softmax_backward(dprobs, probs)

    dlogits_reg = 2.0 * alpha * residual[:, None] * probs * \
        (centers[None, :] - preds[:, None])

    cls_mean = float(np.mean(cls_terms))
    reg_mean = float(np.mean(residual**2))
    return LossTerms(
        loss=cls_mean + alpha * reg_mean,
        classification=cls_mean,
        regression=reg_mean,
        dlogits=(dlogits_cls + dlogits_reg) / frames,
        predictions=preds
    )


def bce(prob: np.ndarray, label: np.ndarray) -> float:
    """
    Mean binary cross-entropy.

    Examples:
        >>> round(bce(np.array([0.5]), np.array([1.0])), 6)
        0.693147
    """
    p = np.clip(prob, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(-np.mean(label * np.log(p) + (1 - label) * np.log(1 - p)))


def bce_logits(logits: np.ndarray,
               labels: np.ndarray) -> tp.Tuple[float, np.ndarray]:
    """Mean BCE on sigmoid(logits) and its logit gradient."""
    labels = np.asarray(labels, dtype=np.float64).reshape(logits.shape)
    # ln(1 + e^z) computed stably
    softplus = np.logaddexp(0.0, logits)
    loss = float(np.mean(softplus - labels * logits))
    dlogits = (layers.sigmoid(logits) - labels) / logits.size
    return loss, dlogits
