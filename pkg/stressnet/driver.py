#!/usr/bin/env python3
"""Console entry point of stressnet."""
import logging
import sys
import typing as tp

from stressnet import errors
from stressnet.cli.config import StressNetConfig
from stressnet.cli.eval import StressNetEval
from stressnet.cli.features import StressNetFeatures
from stressnet.cli.gradcheck import StressNetGradcheck
from stressnet.cli.gt import StressNetGt
from stressnet.cli.main import StressNet, UsageError
from stressnet.cli.preprocess import StressNetPreprocess
from stressnet.cli.stress import StressNetStressPredict, StressNetStressTrain
from stressnet.cli.synth import StressNetSynth
from stressnet.cli.train import StressNetPredict, StressNetTrain

LOG = logging.getLogger(__name__)

PROGRAM = 'stressnet'


def register() -> None:
    StressNet.subcommand('config', StressNetConfig)
    StressNet.subcommand('eval', StressNetEval)
    StressNet.subcommand('features', StressNetFeatures)
    StressNet.subcommand('gradcheck', StressNetGradcheck)
    StressNet.subcommand('gt', StressNetGt)
    StressNet.subcommand('predict', StressNetPredict)
    StressNet.subcommand('preprocess', StressNetPreprocess)
    StressNet.subcommand('stress-predict', StressNetStressPredict)
    StressNet.subcommand('stress-train', StressNetStressTrain)
    StressNet.subcommand('synth', StressNetSynth)
    StressNet.subcommand('train', StressNetTrain)


def main(argv: tp.Optional[tp.Sequence[str]] = None) -> int:
    """
    Run one stressnet command line and return its exit code.

    Validation problems exit with 1, I/O and file format problems with 2.
    """
    register()
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        _, retcode = StressNet.run([PROGRAM] + args, exit=False)
    except UsageError as err:
        print(f'Error: {err}', file=sys.stderr)
        err.app.help()
        return 1
    except errors.UnknownSubcommand as err:
        print(f'Error: {err}', file=sys.stderr)
        StressNet(PROGRAM).help()
        return 1
    except errors.ValidationError as err:
        LOG.debug('validation error', exc_info=True)
        print(f'Error: {err}', file=sys.stderr)
        return 1
    except OSError as err:
        LOG.debug('I/O error', exc_info=True)
        print(f'Error: {err}', file=sys.stderr)
        return 2
    return int(retcode or 0)


if __name__ == '__main__':
    sys.exit(main())
