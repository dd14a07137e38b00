"""Subcommand turning a raw thermal clip into network input."""
import logging
import typing as tp

import attr
from plumbum import cli

from stressnet.cli.main import Command, parse_ints
from stressnet.emission import PreprocessConfig, preprocess
from stressnet.formats import video
from stressnet.settings import CFG

LOG = logging.getLogger(__name__)


def preprocess_config(no_emission: bool = False,
                      crop: tp.Optional[str] = None
                     ) -> PreprocessConfig:
    """The configured preprocessing, adjusted by command-line switches."""
    config = PreprocessConfig.from_config(CFG)
    if crop:
        x0, y0, w, h = parse_ints(crop, 4)
        config = attr.evolve(
            config, crop_x0=x0, crop_y0=y0, crop_width=w, crop_height=h
        )
    if no_emission:
        config = config.without_emission()
    return config


class StressNetPreprocess(Command):
    """Crop, differentiate, sign-log and smooth a TVF clip into an FVF."""

    in_path = cli.SwitchAttr(
        ['-i', '--in'], str, mandatory=True, help="Input TVF clip"
    )
    out_path = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True, help="Output FVF clip"
    )
    crop = cli.SwitchAttr(
        '--crop', str, default=None, help="Crop rectangle x0,y0,w,h"
    )
    no_emission = cli.Flag(
        '--no-emission', help="Crop only, skip the emission-model stages"
    )

    def main(self) -> int:
        clip = video.read_tvf(self.in_path)
        fc = preprocess(clip, preprocess_config(self.no_emission, self.crop))
        video.write_fvf(self.out_path, fc)
        LOG.info('%s: %d frames of %dx%d', self.out_path, fc.num_frames,
                 fc.width, fc.height)
        return 0
