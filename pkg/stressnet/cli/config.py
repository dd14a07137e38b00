"""Subcommand for configuration handling."""
import os

from plumbum import cli

from stressnet import settings
from stressnet.cli.main import Command


class StressNetConfig(Command):
    """Manage stressnet's configuration."""

    def main(self) -> int:
        if not self.nested_command:
            self.help()
        return 0


class StressNetConfigView(Command):
    """View the resolved configuration as environment variables."""

    def main(self) -> int:
        print(repr(settings.CFG))
        return 0


class StressNetConfigWrite(Command):
    """Write the resolved configuration to a ``key = value`` file."""

    def main(self, config_path: str = "stressnet.cfg") -> int:
        settings.CFG.store(config_path)
        print("Storing config in {0}".format(os.path.abspath(config_path)))
        return 0


StressNetConfig.subcommand("view", StressNetConfigView)
StressNetConfig.subcommand("write", StressNetConfigWrite)
