"""
Evaluation metrics: MSE, Pearson correlation and average precision.
"""
import typing as tp

import attr
import numpy as np

from stressnet import errors


def _pair(pred: tp.Any, truth: tp.Any,
          minimum: int) -> tp.Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(pred, dtype=np.float64).reshape(-1)
    b = np.asarray(truth, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise errors.LengthMismatch(f'{a.size} vs. {b.size} values')
    if a.size < minimum:
        raise errors.LengthMismatch(
            f'need at least {minimum} values, got {a.size}'
        )
    return a, b


def mse(pred: tp.Any, truth: tp.Any) -> float:
    """
    Mean squared error.

    Examples:
        >>> mse([0, 0], [3, 4])
        12.5
    """
    a, b = _pair(pred, truth, 1)
    return float(np.mean((a - b)**2))


def pearson(x: tp.Any, y: tp.Any) -> float:
    """
    Pearson correlation coefficient.

    Examples:
        >>> round(pearson([1, 2, 3], [3, 2, 1]), 12)
        -1.0
    """
    a, b = _pair(x, y, 2)
    da = a - a.mean()
    db = b - b.mean()
    var_a = float(np.mean(da * da))
    var_b = float(np.mean(db * db))
    if var_a == 0.0 or var_b == 0.0:
        raise errors.ZeroVariance('pearson needs non-constant inputs')
    rho = float(np.mean(da * db)) / np.sqrt(var_a * var_b)
    return float(np.clip(rho, -1.0, 1.0))


@attr.s(frozen=True, eq=False)
class ScoredLabels:
    """Scores with binary labels (True = positive)."""
    scores: np.ndarray = attr.ib(
        converter=lambda v: np.asarray(v, dtype=np.float64).reshape(-1)
    )
    labels: np.ndarray = attr.ib(
        converter=lambda v: np.asarray(v, dtype=bool).reshape(-1)
    )

    @labels.validator
    def _check(self, attribute: 'attr.Attribute[np.ndarray]',
               value: np.ndarray) -> None:
        del attribute
        if value.size != self.scores.size:
            raise errors.LengthMismatch(
                f'{self.scores.size} scores but {value.size} labels'
            )
        if not np.all(np.isfinite(self.scores)):
            raise errors.NonFiniteInput('scores contain NaN or Inf')


def average_precision(sl: ScoredLabels) -> float:
    """
    Mean precision at the rank of every positive.

    Ranks come from a stable descending sort of the scores, so ties keep
    their input order.

    Examples:
        >>> sl = ScoredLabels([4, 3, 2, 1], [1, 0, 1, 0])
        >>> round(average_precision(sl), 6)
        0.833333
    """
    n_pos = int(np.count_nonzero(sl.labels))
    if n_pos == 0:
        raise errors.NoPositives('average precision needs a positive label')
    order = np.argsort(-sl.scores, kind='stable')
    ranked = sl.labels[order]
    hits = np.cumsum(ranked)
    ranks = np.arange(1, ranked.size + 1)
    precision_at_hits = hits[ranked] / ranks[ranked]
    return float(np.mean(precision_at_hits))
