"""Subcommand scoring predictions against ground truth."""
import logging
import typing as tp

import numpy as np
from plumbum import cli

from stressnet import errors, metrics, stress
from stressnet.cli.main import Command
from stressnet.formats import manifest as mf
from stressnet.formats import tables
from stressnet.timeseries import Signal

LOG = logging.getLogger(__name__)


def common_grid(
    pred: Signal, truth: Signal
) -> tp.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Both signals on the sample times of `pred`.

    Signals on the same grid are compared as they are; otherwise `truth`
    is linearly interpolated and only the overlapping samples are kept.
    """
    same_grid = (len(pred) == len(truth) and
                 np.isclose(pred.sample_rate_hz, truth.sample_rate_hz) and
                 np.isclose(pred.t0_seconds, truth.t0_seconds))
    if same_grid:
        return pred.times, pred.samples, truth.samples
    times = pred.times
    inside = (times >= truth.t0_seconds) & (times <= truth.times[-1])
    if not np.any(inside):
        raise errors.LengthMismatch('prediction and truth do not overlap')
    LOG.info('interpolating truth onto %d prediction samples',
             int(np.count_nonzero(inside)))
    values = np.interp(times[inside], truth.times, truth.samples)
    return times[inside], pred.samples[inside], values


def format_pair(pred: np.ndarray, truth: np.ndarray) -> str:
    try:
        rho = metrics.pearson(pred, truth)
    except errors.ValidationError as err:
        LOG.warning('pearson undefined: %s', err)
        rho = float('nan')
    return f'mse={metrics.mse(pred, truth):.6g}, pearson={rho:.6g}'


class StressNetEval(Command):
    """Print MSE and Pearson of a prediction, or AP of stress scores."""

    pred = cli.SwitchAttr('--pred', str, default=None,
                          help="Predicted signal CSV")
    gt = cli.SwitchAttr('--gt', str, default=None, help="Ground-truth CSV")
    phases = cli.SwitchAttr(
        '--phases', str, default=None,
        help="Also break the scores down by phase (phase,start_s,end_s)"
    )
    scores = cli.SwitchAttr(
        '--scores', str, default=None, help="score,label CSV"
    )

    def eval_signals(self) -> None:
        if not (self.pred and self.gt):
            raise errors.ValidationError('--pred and --gt go together')
        times, pred, truth = common_grid(
            tables.read_signal(self.pred), tables.read_signal(self.gt)
        )
        print(format_pair(pred, truth))
        if not self.phases:
            return
        for phase in mf.read_phases(self.phases):
            mask = stress.phase_mask(times, [phase], phase.name)
            if not np.any(mask):
                LOG.warning('phase %s has no samples', phase.name)
                continue
            print(f'{phase.name}: {format_pair(pred[mask], truth[mask])}')

    def eval_scores(self) -> None:
        rows = tables.read_table(self.scores)
        try:
            scored = metrics.ScoredLabels(
                [float(row['score']) for row in rows],
                [bool(stress.parse_label(row['label'])) for row in rows]
            )
        except KeyError as err:
            raise errors.MalformedCsv(
                f'{self.scores}: needs score and label columns'
            ) from err
        except ValueError as err:
            raise errors.ValidationError(
                f'{self.scores}: {err}'
            ) from err
        print(f'ap={metrics.average_precision(scored):.6g}')

    def main(self) -> int:
        if self.scores is None and self.pred is None and self.gt is None:
            raise errors.ValidationError('give --pred/--gt or --scores')
        if self.pred is not None or self.gt is not None:
            self.eval_signals()
        if self.scores is not None:
            self.eval_scores()
        return 0
