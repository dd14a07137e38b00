"""Main CLI unit of stressnet."""
import os
import typing as tp

from plumbum import cli

from stressnet import errors, settings
from stressnet.utils import log
from stressnet.utils import settings as s


class UsageError(errors.ValidationError):
    """The command line itself is malformed."""

    def __init__(self, message: str, app: cli.Application):
        super().__init__(message)
        self.app = app


class Command(cli.Application):
    """
    Base of all stressnet (sub)commands.

    Unknown switches and bad switch arguments surface as `UsageError`
    instead of plumbum's own error path, so the driver owns the exit code.
    """

    def _parse_args(self, argv: tp.List[str]) -> tp.Any:
        try:
            return super()._parse_args(argv)
        except cli.SwitchError as err:
            raise UsageError(str(err), self) from err

    def _validate_args(self, swfuncs: tp.Any, tailargs: tp.Any) -> tp.Any:
        try:
            return super()._validate_args(swfuncs, tailargs)
        except cli.SwitchError as err:
            raise UsageError(str(err), self) from err


class StressNet(Command):
    """Contact-free stress detection from thermal video."""

    VERSION = s.__version__

    verbosity = cli.CountOf('-v', help="Enable verbose output")
    debug = cli.Flag('-d', help="Enable debugging output")
    config_file = cli.SwitchAttr(
        '--config',
        str,
        default=None,
        help="Configuration file, replaces the one named by STRESSNET_CONFIG"
    )

    def main(self, *args: str) -> int:
        cfg = settings.CFG
        if self.config_file:
            s.setup_config(cfg, self.config_file)

        self.verbosity = self.verbosity if self.verbosity < 6 else 5
        if self.debug:
            self.verbosity = 3
        verbosity = int(os.getenv('STRESSNET_VERBOSITY', self.verbosity))

        cfg["verbosity"] = verbosity
        cfg["debug"] = self.debug or bool(cfg["debug"])

        log.configure()

        if args:
            raise errors.UnknownSubcommand(
                "Unknown command {0!r}".format(args[0])
            )
        if not self.nested_command:
            self.help()

        return 0


def parse_size(raw: str) -> tp.Tuple[int, int]:
    """
    ``WxH`` to (width, height).

    Examples:
        >>> parse_size('32x24')
        (32, 24)
    """
    try:
        width, height = (int(v) for v in raw.lower().split('x'))
    except ValueError as err:
        raise errors.ValidationError(f'expected WxH, got {raw!r}') from err
    if width <= 0 or height <= 0:
        raise errors.ValidationError(f'size must be positive, got {raw!r}')
    return width, height


def parse_ints(raw: str, count: int) -> tp.Tuple[int, ...]:
    """
    Comma-separated integers.

    Examples:
        >>> parse_ints('1,2,3,4', 4)
        (1, 2, 3, 4)
    """
    try:
        values = tuple(int(v) for v in raw.split(','))
    except ValueError as err:
        raise errors.ValidationError(
            f'expected integers, got {raw!r}'
        ) from err
    if len(values) != count:
        raise errors.ValidationError(
            f'expected {count} comma-separated values, got {raw!r}'
        )
    return values


def parse_floats(raw: str, count: int) -> tp.Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in raw.split(','))
    except ValueError as err:
        raise errors.ValidationError(f'expected numbers, got {raw!r}') from err
    if len(values) != count:
        raise errors.ValidationError(
            f'expected {count} comma-separated values, got {raw!r}'
        )
    return values
