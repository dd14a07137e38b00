"""
Finite-difference verification of the analytic gradients.

Central differences are compared with the backward pass on randomly chosen
coordinates of every parameter tensor. A coordinate whose perturbation
flips a ReLU mask sits on a kink where the numeric derivative is
meaningless; such coordinates are redrawn, as are coordinates whose
analytic and numeric gradients both fall below `NOISE_FLOOR`.
"""
import logging
import typing as tp

import attr
import numpy as np

from stressnet.neural import loss as losses
from stressnet.neural import model as nn

LOG = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
MAX_REDRAWS = 50
# below this magnitude central differences are dominated by rounding
NOISE_FLOOR = 1e-6


def relative_error(analytic: float, numeric: float) -> float:
    """
    ``|a - n| / max(1e-8, |a| + |n|)``.

    Examples:
        >>> relative_error(0.0, 0.0)
        0.0
        >>> relative_error(1.0, 3.0)
        0.5
    """
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def numeric_gradient(fn: tp.Callable[[], float], array: np.ndarray,
                     index: tp.Tuple[int, ...], eps: float = 1e-5) -> float:
    """
    Central difference of `fn` with respect to ``array[index]``.

    `array` is perturbed in place and restored afterwards.
    """
    original = array[index]
    array[index] = original + eps
    plus = fn()
    array[index] = original - eps
    minus = fn()
    array[index] = original
    return (plus - minus) / (2.0 * eps)


@attr.s(frozen=True)
class GradCheckReport:
    """Worst relative error per parameter tensor."""
    errors: tp.Dict[str, float] = attr.ib()
    checked: int = attr.ib()
    skipped_kinks: int = attr.ib(default=0)
    skipped_flat: int = attr.ib(default=0)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def passed(self, tolerance: float = DEFAULT_TOLERANCE) -> bool:
        return self.max_error < tolerance

    def worst(self) -> tp.Tuple[str, float]:
        name = max(self.errors, key=self.errors.__getitem__)
        return name, self.errors[name]


def _relu_masks(cache: nn.ForwardCache) -> tp.List[np.ndarray]:
    masks = [relu['mask'] for _, relu in cache['backbone']['layers']]
    masks.append(cache['head']['relu']['mask'])
    return masks


def _same_masks(a: tp.List[np.ndarray], b: tp.List[np.ndarray]) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def random_batch(arch: nn.Architecture,
                 n_seq: int = 2,
                 steps: int = 3,
                 seed: int = 0) -> tp.Tuple[np.ndarray, np.ndarray]:
    """Standard-normal frames (S, T, H, W), uniform [0, 1] targets (S, T)."""
    rng = np.random.default_rng(seed)
    clips = rng.standard_normal(
        (n_seq, steps, arch.input_height, arch.input_width)
    )
    targets = rng.uniform(0.0, 1.0, size=(n_seq, steps))
    return clips, targets


def grad_check(model: nn.Model,
               clips: np.ndarray,
               targets: np.ndarray,
               eps: float = 1e-5,
               coords: int = 20,
               seed: int = 0,
               alpha: float = 1.0,
               variant: str = 'ce') -> GradCheckReport:
    """
    Compare analytic and numeric gradients of the batch multi-loss.

    Args:
        model: Model under test; its parameters are perturbed in place
            during the check and restored.
        clips: (S, T, H, W) batch of sequences.
        targets: (S, T) normalised targets.
        coords: Coordinates checked per tensor (all of them if the tensor
            is smaller).
    """
    flat_targets = nn.time_major(np.asarray(targets, dtype=np.float64))

    def evaluate() -> tp.Tuple[float, tp.List[np.ndarray]]:
        logits, cache = nn.network_forward(model, clips)
        terms = losses.multi_loss_logits(logits, flat_targets, alpha, variant)
        return terms.loss, _relu_masks(cache)

    logits, cache = nn.network_forward(model, clips)
    terms = losses.multi_loss_logits(logits, flat_targets, alpha, variant)
    grads = nn.network_backward(model, terms.dlogits, cache)
    base_masks = _relu_masks(cache)

    rng = np.random.default_rng(seed)
    errors: tp.Dict[str, float] = {}
    checked = 0
    skipped = 0
    flat_skipped = 0
    for name, param in model.params.items():
        worst = 0.0
        n_checks = min(coords, param.size)
        candidates = rng.permutation(param.size)
        used = 0
        for flat in candidates:
            if used == n_checks:
                break
            index = np.unravel_index(flat, param.shape)
            original = param[index]
            param[index] = original + eps
            plus, plus_masks = evaluate()
            param[index] = original - eps
            minus, minus_masks = evaluate()
            param[index] = original
            if not (_same_masks(base_masks, plus_masks) and
                    _same_masks(base_masks, minus_masks)):
                skipped += 1
                if skipped > MAX_REDRAWS * len(model.params):
                    break
                continue
            numeric = (plus - minus) / (2.0 * eps)
            analytic = float(grads[name][index])
            if max(abs(analytic), abs(numeric)) < NOISE_FLOOR:
                flat_skipped += 1
                continue
            err = relative_error(analytic, numeric)
            worst = max(worst, err)
            used += 1
        errors[name] = worst
        checked += used
        LOG.debug('%s: max relative error %.3e over %d coords', name, worst,
                  used)
    return GradCheckReport(errors, checked, skipped, flat_skipped)
