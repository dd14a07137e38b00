"""Subcommands training the ISTI network and applying it to clips."""
import logging
import os
import typing as tp

from plumbum import cli

from stressnet import errors
from stressnet.cli.main import Command
from stressnet.cli.preprocess import preprocess_config
from stressnet.emission import FeatureClip, PreprocessConfig, preprocess
from stressnet.formats import manifest as mf
from stressnet.formats import snw, tables, video
from stressnet.neural import model as nn
from stressnet.neural import train as tr
from stressnet.settings import CFG
from stressnet.stress import format_label
from stressnet.utils import ui

LOG = logging.getLogger(__name__)


def load_features(row: mf.ManifestRow,
                  config: PreprocessConfig) -> FeatureClip:
    return preprocess(video.read_tvf(row.require('clip_path')), config)


def load_training_set(rows: tp.Sequence[mf.ManifestRow],
                      config: PreprocessConfig,
                      isti_max_ms: float) -> tp.List[tr.Sample]:
    """Preprocessed clips paired with their normalised ISTI targets."""
    dataset = []
    for row in rows:
        fc = load_features(row, config)
        isti_ms = tables.read_signal(row.require('isti_csv_path'))
        dataset.append((fc, tr.align_targets(fc, isti_ms, isti_max_ms)))
    return dataset


def select_rows(rows: tp.List[mf.ManifestRow],
                trials: tp.Optional[str]) -> tp.List[mf.ManifestRow]:
    """Keep the comma-separated trial ids, or everything."""
    if not trials:
        return rows
    wanted = [t.strip() for t in trials.split(',') if t.strip()]
    known = {row.trial_id for row in rows}
    missing = [t for t in wanted if t not in known]
    if missing:
        raise errors.ValidationError(f'unknown trial ids {missing}')
    return [row for row in rows if row.trial_id in wanted]


class StressNetTrain(Command):
    """Train the ISTI network on the clips of a manifest."""

    manifest = cli.SwitchAttr(
        ['-m', '--manifest'], str, mandatory=True, help="Trial manifest"
    )
    out = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True, help="Output model (SNW)"
    )
    history = cli.SwitchAttr(
        '--history', str, default=None, help="Write the epoch history CSV"
    )
    trials = cli.SwitchAttr(
        '--trials', str, default=None, help="Comma-separated trial ids to use"
    )
    epochs = cli.SwitchAttr('--epochs', int, default=None)
    seed = cli.SwitchAttr('--seed', int, default=None)
    alpha = cli.SwitchAttr('--alpha', float, default=None)
    loss = cli.SwitchAttr('--loss', cli.Set('ce', 'bce'), default=None)
    no_emission = cli.Flag(
        '--no-emission', help="Train on cropped raw counts"
    )
    quiet = cli.Flag(['-q', '--quiet'], help="No progress bar")

    def main(self) -> int:
        if self.seed is not None:
            CFG["seed"] = self.seed
        overrides = {
            k: v for k, v in (('epochs', self.epochs), ('alpha', self.alpha),
                              ('loss', self.loss)) if v is not None
        }
        config = tr.TrainConfig.from_config(CFG, **overrides)
        rows = select_rows(mf.read_manifest(self.manifest), self.trials)
        dataset = load_training_set(
            rows, preprocess_config(self.no_emission),
            float(CFG["isti"]["max_ms"])
        )
        if not dataset:
            raise errors.EmptyDataset(f'{self.manifest} lists no trials')
        first = dataset[0][0]
        arch = nn.Architecture.from_config(CFG, first.height, first.width)

        with ui.epoch_progress('training', config.epochs,
                               not self.quiet) as on_epoch:
            model, history = tr.train(dataset, config, arch, on_epoch)

        snw.write_snw(self.out, model)
        if self.history:
            tables.write_table(
                self.history, tr.HISTORY_FIELDS,
                [{k: repr(getattr(rec, k)) for k in tr.HISTORY_FIELDS}
                 for rec in history]
            )
        if history:
            print(f'loss={history[-1].loss:.6g}')
        return 0


class StressNetPredict(Command):
    """Predict per-frame ISTI (ms) with a trained network."""

    model_path = cli.SwitchAttr(
        '--model', str, mandatory=True, help="Trained model (SNW)"
    )
    clip = cli.SwitchAttr('--clip', str, default=None, help="TVF clip")
    features = cli.SwitchAttr(
        '--features', str, default=None, help="Preprocessed FVF clip"
    )
    manifest = cli.SwitchAttr(
        ['-m', '--manifest'], str, default=None,
        help="Predict every clip of a manifest"
    )
    out = cli.SwitchAttr(
        ['-o', '--out'], str, mandatory=True,
        help="Prediction CSV, or output directory with --manifest"
    )
    no_emission = cli.Flag(
        '--no-emission', help="The model was trained on raw counts"
    )

    def predict_one(self, model: nn.Model, fc: FeatureClip, out: str) -> None:
        pred = tr.predict_isti(
            model, fc, float(CFG["isti"]["max_ms"]),
            float(CFG["train"]["seq_seconds"])
        )
        tables.write_signal(out, pred)

    def main(self) -> int:
        sources = [self.clip, self.features, self.manifest]
        if sum(x is not None for x in sources) != 1:
            raise errors.ValidationError(
                'give exactly one of --clip, --features, --manifest'
            )
        model = snw.read_isti_model(self.model_path)
        config = preprocess_config(self.no_emission)

        if self.manifest is None:
            if self.features is not None:
                fc = video.read_fvf(self.features)
            else:
                fc = preprocess(video.read_tvf(self.clip), config)
            self.predict_one(model, fc, self.out)
            return 0

        os.makedirs(self.out, exist_ok=True)
        rows = []
        for row in mf.read_manifest(self.manifest):
            target = os.path.abspath(
                os.path.join(self.out, f'{row.trial_id}_pred.csv')
            )
            self.predict_one(model, load_features(row, config), target)
            entry = {
                field: getattr(row, field) or ''
                for field in mf.PATH_FIELDS
            }
            entry.update(
                trial_id=row.trial_id,
                label=format_label(row.label),
                isti_csv_path=target
            )
            rows.append(entry)
        out_manifest = os.path.join(self.out, 'manifest.csv')
        tables.write_table(
            out_manifest, ('trial_id', 'label') + mf.PATH_FIELDS, rows
        )
        print(out_manifest)
        return 0
