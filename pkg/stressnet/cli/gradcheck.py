"""Subcommand checking the analytic gradients of the ISTI network."""
import logging

from plumbum import cli

from stressnet.cli.main import Command, parse_size
from stressnet.neural import gradcheck as gc
from stressnet.neural import model as nn

LOG = logging.getLogger(__name__)


def toy_architecture(width: int, height: int,
                     n_bins: int = 9) -> nn.Architecture:
    """A network small enough to finite-difference every tensor."""
    return nn.Architecture(
        input_height=height,
        input_width=width,
        channels=(4, 8),
        hidden=6,
        lstm_layers=1,
        head_hidden=10,
        n_bins=n_bins
    )


class StressNetGradcheck(Command):
    """Compare backpropagated gradients against central differences."""

    seed = cli.SwitchAttr('--seed', int, default=0, help="Model/batch seed")
    eps = cli.SwitchAttr('--eps', float, default=1e-5, help="Step size")
    coords = cli.SwitchAttr(
        '--coords', cli.Range(1, 100000), default=20,
        help="Coordinates checked per tensor"
    )
    size = cli.SwitchAttr(
        '--size', str, default='16x16', help="Toy frame size, WxH"
    )
    sequences = cli.SwitchAttr('--sequences', cli.Range(1, 64), default=2)
    steps = cli.SwitchAttr('--steps', cli.Range(1, 64), default=3)
    loss = cli.SwitchAttr('--loss', cli.Set('ce', 'bce'), default='ce')
    alpha = cli.SwitchAttr('--alpha', float, default=1.0)

    def main(self) -> int:
        width, height = parse_size(self.size)
        arch = toy_architecture(width, height)
        model = nn.init_model(arch, self.seed)
        clips, targets = gc.random_batch(
            arch, self.sequences, self.steps, self.seed
        )
        report = gc.grad_check(
            model, clips, targets,
            eps=self.eps,
            coords=self.coords,
            seed=self.seed,
            alpha=self.alpha,
            variant=self.loss
        )
        for name in sorted(report.errors):
            LOG.info('%-24s %.3e', name, report.errors[name])
        name, worst = report.worst()
        print(f'max_rel_error={worst:.3e} ({name}), checked={report.checked},'
              f' skipped_kinks={report.skipped_kinks},'
              f' skipped_flat={report.skipped_flat}')
        return 0 if report.passed() else 1
