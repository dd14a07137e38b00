"""End-to-end runs on generated trials: regression, ablation, stress."""
import numpy as np
import pytest

from stressnet import metrics, stress, synth
from stressnet.emission import PreprocessConfig, preprocess
from stressnet.formats import manifest as mf
from stressnet.formats import tables, video
from stressnet.neural import train as tr

pytestmark = pytest.mark.slow

ISTI_MAX_MS = 300.0

# training budget for eight fifty-second clips
SYNTH_RECIPE = tr.TrainConfig(
    lr_backbone=0.02,
    lr_head=0.1,
    lr_decay_factor=0.5,
    decay_period_epochs=15,
    epochs=40,
    batch_frames=150,
    seed=0
)


@pytest.fixture(scope='module')
def trials(tmp_path_factory):
    """Twenty fifty-second trials, half of them stress."""
    out = tmp_path_factory.mktemp('trials')
    path = synth.gen_dataset(str(out), 20, seed=11, jobs=2)
    return mf.read_manifest(path)


@pytest.fixture(scope='module')
def split(trials):
    """(training rows, held-out rows): three of each class held out."""
    stressed = [row for row in trials if row.label]
    calm = [row for row in trials if not row.label]
    held_out = stressed[:3] + calm[:3]
    training = [row for row in trials if row not in held_out]
    return training, held_out


def regression_rows(split):
    """Eight training clips and one held-out clip of each class."""
    training, held_out = split
    stressed = [row for row in training if row.label][:4]
    calm = [row for row in training if not row.label][:4]
    return stressed + calm, [held_out[0], held_out[3]]


def load_sample(row, config):
    fc = preprocess(video.read_tvf(row.clip_path), config)
    truth = tables.read_signal(row.isti_csv_path)
    return fc, tr.align_targets(fc, truth, ISTI_MAX_MS)


def fit_and_score(split, config):
    """Train on eight clips; pooled held-out (pearson, normalised MSE)."""
    training, held_out = regression_rows(split)
    model, _ = tr.train([load_sample(row, config) for row in training],
                        SYNTH_RECIPE)
    preds, truths = [], []
    for row in held_out:
        fc, target = load_sample(row, config)
        preds.append(tr.predict_normalized(model, fc,
                                           SYNTH_RECIPE.seq_seconds))
        truths.append(target.samples)
    pred, truth = np.concatenate(preds), np.concatenate(truths)
    return model, metrics.pearson(pred, truth), metrics.mse(pred, truth)


@pytest.fixture(scope='module')
def emission_run(split):
    return fit_and_score(split, PreprocessConfig())


def test_held_out_isti_follows_the_truth(emission_run):
    _, pearson, nmse = emission_run
    assert pearson >= 0.8
    assert nmse <= 0.02


def test_raw_counts_predict_worse(split, emission_run):
    _, _, with_emission = emission_run
    _, _, without = fit_and_score(split, PreprocessConfig().without_emission())
    assert without > with_emission


def test_stress_is_ranked_from_isti(split, emission_run):
    training, held_out = split
    model, _, _ = emission_run
    classifier = stress.stress_train(
        [mf.load_trial(row) for row in training]
    )
    labels = [bool(row.label) for row in held_out]

    truth = [mf.load_trial(row) for row in held_out]
    predicted = []
    for row in held_out:
        fc = preprocess(video.read_tvf(row.clip_path))
        isti = tr.predict_isti(model, fc, ISTI_MAX_MS,
                               SYNTH_RECIPE.seq_seconds)
        predicted.append(
            stress.TrialRecord(isti, label=row.label, trial_id=row.trial_id)
        )

    ap_truth = metrics.average_precision(
        metrics.ScoredLabels(stress.score_trials(classifier, truth), labels)
    )
    ap_predicted = metrics.average_precision(
        metrics.ScoredLabels(stress.score_trials(classifier, predicted),
                             labels)
    )
    assert ap_truth >= 0.9
    assert ap_truth >= ap_predicted
