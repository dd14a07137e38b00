"""Subcommand computing ground-truth ISTI from ECG and dZ/dt."""
import logging
import os
import sys
import typing as tp

from plumbum import cli

from stressnet import errors, isti
from stressnet.cli.main import Command
from stressnet.formats import tables, video
from stressnet.settings import CFG
from stressnet.timeseries import Signal

LOG = logging.getLogger(__name__)


def normalized_path(out: str) -> str:
    """
    Default location of the normalised ISTI next to the ms one.

    Examples:
        >>> normalized_path('run/isti.csv')
        'run/isti_norm.csv'
    """
    stem, ext = os.path.splitext(out)
    return f'{stem}_norm{ext or ".csv"}'


class StressNetGt(Command):
    """Pair R-peaks with dZ/dt peaks and spline ISTI onto a frame grid."""

    ecg = cli.SwitchAttr('--ecg', str, mandatory=True, help="ECG signal CSV")
    dzdt = cli.SwitchAttr(
        '--dzdt', str, mandatory=True, help="dZ/dt signal CSV"
    )
    out = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True, help="Continuous ISTI CSV (ms)"
    )
    norm_out = cli.SwitchAttr(
        '--norm-out',
        str,
        default=None,
        help="Normalised ISTI CSV, defaults to <out>_norm.csv"
    )
    knots_out = cli.SwitchAttr(
        '--knots', str, default=None, help="Also write the beat-wise knots"
    )
    clip = cli.SwitchAttr(
        '--clip', str, default=None, help="Take the frame grid from a TVF"
    )
    fps = cli.SwitchAttr(
        '--fps', float, default=None, help="Frame rate of the output grid"
    )
    duration = cli.SwitchAttr(
        '--duration',
        float,
        default=None,
        help="Length of the output grid in seconds, defaults to the overlap "
        "of both signals"
    )

    def frame_grid(self, pair: isti.CardiacPair) -> tp.Any:
        if self.clip is not None:
            return video.read_tvf(self.clip).times
        if self.fps is None:
            raise errors.ValidationError('give either --clip or --fps')
        start = max(pair.ecg.t0_seconds, pair.dzdt.t0_seconds)
        end = min(pair.ecg.t0_seconds + pair.ecg.duration_s,
                  pair.dzdt.t0_seconds + pair.dzdt.duration_s)
        duration = end - start
        if self.duration is not None:
            if not self.duration > 0:
                raise errors.ValidationError(
                    f'--duration must be positive, got {self.duration}'
                )
            duration = self.duration
        return isti.frame_times(self.fps, duration, start)

    def main(self) -> int:
        pair = isti.CardiacPair(
            tables.read_signal(self.ecg), tables.read_signal(self.dzdt)
        )
        isti_max_ms = float(CFG["isti"]["max_ms"])
        truth = isti.ground_truth(
            pair,
            self.frame_grid(pair),
            isti.DetectorConfig.from_config(CFG),
            float(CFG["isti"]["max_lag_s"])
        )
        continuous = truth.continuous
        tables.write_signal(self.out, continuous)
        tables.write_signal(
            self.norm_out or normalized_path(self.out),
            Signal(
                isti.normalize_isti(continuous.samples, isti_max_ms),
                continuous.sample_rate_hz, continuous.t0_seconds
            )
        )
        if self.knots_out:
            tables.write_table(
                self.knots_out, ('t_seconds', 'isti_ms'),
                [{'t_seconds': repr(float(t)), 'isti_ms': repr(float(v))}
                 for t, v in zip(truth.knots.t_s, truth.knots.v)]
            )
        if truth.skipped_beats:
            LOG.warning('%d beats had no dZ/dt peak', truth.skipped_beats)
        print(f'beats={len(truth.knots)}, skipped={truth.skipped_beats}',
              file=sys.stderr)
        return 0
