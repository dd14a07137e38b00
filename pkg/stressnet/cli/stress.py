"""Subcommands training and applying the stress classifier."""
import logging
import typing as tp

from plumbum import cli

from stressnet import errors, metrics, stress
from stressnet.cli.main import Command
from stressnet.formats import manifest as mf
from stressnet.formats import snw, tables
from stressnet.settings import CFG
from stressnet.utils import ui

LOG = logging.getLogger(__name__)


def load_trials(path: str,
                with_breathing: bool) -> tp.List[stress.TrialRecord]:
    trials = [
        mf.load_trial(row, with_breathing) for row in mf.read_manifest(path)
    ]
    if not trials:
        raise errors.EmptyDataset(f'{path} lists no trials')
    return trials


def signal_scale(signal: str) -> float:
    if signal == 'isti':
        return float(CFG["isti"]["max_ms"])
    return stress.DEFAULT_SCALES[signal]


class StressNetStressTrain(Command):
    """
    Train the stress classifier on labelled trials.

    With ``--signal hr`` or ``--signal hrv`` the manifest's ISTI column is
    expected to point at the matching feature CSVs; ``--signal breathing``
    reads the breathing column.
    """

    manifest = cli.SwitchAttr(
        ['-m', '--manifest'], str, mandatory=True, help="Trial manifest"
    )
    out = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True, help="Output model (SNW)"
    )
    signal = cli.SwitchAttr(
        '--signal', cli.Set(*stress.SIGNAL_KINDS), default='isti',
        help="Input signal of the classifier"
    )
    epochs = cli.SwitchAttr('--epochs', int, default=None)
    lr = cli.SwitchAttr('--lr', float, default=None)
    seed = cli.SwitchAttr('--seed', int, default=None)
    quiet = cli.Flag(['-q', '--quiet'], help="No progress bar")

    def main(self) -> int:
        overrides = {
            k: v for k, v in (('epochs', self.epochs), ('lr', self.lr),
                              ('seed', self.seed)) if v is not None
        }
        config = stress.StressTrainConfig.from_config(CFG, **overrides)
        arch = stress.StressArchitecture(
            n_in=CFG["stress"]["n_in"].value,
            hidden=CFG["stress"]["hidden"].value,
            signal=self.signal,
            scale=signal_scale(self.signal)
        )
        trials = load_trials(self.manifest, self.signal == 'breathing')
        with ui.step_progress('stress classifier', config.epochs,
                              not self.quiet) as on_epoch:
            model = stress.stress_train(trials, config, arch, on_epoch)
        snw.write_snw(self.out, model)
        return 0


class StressNetStressPredict(Command):
    """Score trials with a trained stress classifier."""

    manifest = cli.SwitchAttr(
        ['-m', '--manifest'], str, mandatory=True, help="Trial manifest"
    )
    model_path = cli.SwitchAttr(
        '--model', str, mandatory=True, help="Stress model (SNW)"
    )
    breathing_model = cli.SwitchAttr(
        '--breathing-model', str, default=None,
        help="Fuse with a classifier trained on breathing"
    )
    out = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True,
        help="Scores CSV (trial_id,score,label)"
    )

    def main(self) -> int:
        model = snw.read_stress_model(self.model_path)
        breathing = None
        if self.breathing_model:
            breathing = snw.read_stress_model(self.breathing_model)
        needs_breathing = model.arch.signal == 'breathing' or \
            breathing is not None
        trials = load_trials(self.manifest, needs_breathing)
        scores = stress.score_trials(model, trials, breathing)

        tables.write_table(
            self.out, ('trial_id', 'score', 'label'),
            [{'trial_id': t.trial_id,
              'score': repr(float(score)),
              'label': stress.format_label(t.label)}
             for t, score in zip(trials, scores)]
        )

        labels = [t.label for t in trials]
        if all(label is not None for label in labels) and any(labels):
            ap = metrics.average_precision(
                metrics.ScoredLabels(scores, labels)
            )
            print(f'ap={ap:.6g}')
        else:
            LOG.info('labels incomplete, average precision not computed')
        return 0
