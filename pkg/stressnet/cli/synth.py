"""Subcommand for synthetic dataset generation."""
import logging

from plumbum import cli

from stressnet import synth
from stressnet.cli.main import Command, parse_size
from stressnet.settings import CFG
from stressnet.utils import ui
from stressnet.utils.settings import get_number_of_jobs

LOG = logging.getLogger(__name__)


class StressNetSynth(Command):
    """Generate synthetic trials: thermal clips, cardiac CSVs, truth ISTI."""

    out_dir = cli.SwitchAttr(
        '--out', str, mandatory=True, help="Output directory"
    )
    n_clips = cli.SwitchAttr(
        '--clips', cli.Range(2, 100000), default=10, help="Number of trials"
    )
    stress_fraction = cli.SwitchAttr(
        '--stress-fraction',
        float,
        default=0.5,
        help="Share of stress trials"
    )
    seed = cli.SwitchAttr('--seed', int, default=None, help="Base seed")
    fps = cli.SwitchAttr('--fps', float, default=None, help="Frame rate")
    size = cli.SwitchAttr(
        '--size', str, default=None, help="Frame size as WxH"
    )
    duration = cli.SwitchAttr(
        '--duration',
        float,
        default=None,
        help="Trial length in seconds; the four phases scale along"
    )
    jobs = cli.SwitchAttr(
        ['-j', '--jobs'], int, default=None, help="Worker processes"
    )
    quiet = cli.Flag(['-q', '--quiet'], help="No progress bar")

    def main(self) -> int:
        if self.seed is not None:
            CFG["seed"] = self.seed
        if self.jobs is not None:
            CFG["jobs"] = self.jobs
        overrides = {'fps': self.fps}
        if self.size is not None:
            overrides['width'], overrides['height'] = parse_size(self.size)
        layout = synth.TrialLayout.from_config(CFG, **overrides)
        if self.duration is not None:
            factor = self.duration / layout.duration_s
            layout = synth.TrialLayout(
                layout.fps, layout.width, layout.height,
                layout.base_s * factor, layout.prep_s * factor,
                layout.immersion_s * factor, layout.recovery_s * factor
            )
        roi = tuple(
            int(CFG["roi"][k]) for k in ('x0', 'y0', 'width', 'height')
        )

        with ui.count_progress('trials', self.n_clips,
                               not self.quiet) as on_trial:
            manifest = synth.gen_dataset(
                self.out_dir,
                self.n_clips,
                self.stress_fraction,
                seed=int(CFG["seed"]),
                layout=layout,
                jobs=get_number_of_jobs(CFG),
                breathing_roi=roi,
                on_trial=on_trial
            )
        print(manifest)
        return 0
