import inspect

import numpy as np
import pytest

import stressnet.neural
from stressnet import errors
from stressnet.emission import FeatureClip
from stressnet.neural import model as nn
from stressnet.neural import train as tr
from stressnet.timeseries import Signal


@pytest.fixture
def arch():
    return nn.Architecture(8, 8, channels=(2,), hidden=3, head_hidden=4,
                           n_bins=5)


@pytest.fixture
def config():
    return tr.TrainConfig(
        lr_backbone=0.01,
        lr_head=0.05,
        decay_period_epochs=100,
        epochs=15,
        batch_frames=10,
        n_bins=5,
        seq_seconds=0.5
    )


@pytest.fixture
def dataset(rng):
    clips = []
    for _ in range(2):
        fc = FeatureClip(rng.standard_normal((30, 8, 8)), 10.0)
        clips.append((fc, Signal(np.full(30, 0.5), 10.0)))
    return clips


def describe_config():

    def decays_both_rates_stepwise():
        config = tr.TrainConfig()
        assert config.learning_rates(0) == (0.001, 0.01)
        assert config.learning_rates(9) == (0.001, 0.01)
        backbone, head = config.learning_rates(25)
        assert backbone == pytest.approx(1e-5)
        assert head == pytest.approx(1e-4)

    def sequence_length_follows_the_frame_rate():
        assert tr.TrainConfig(seq_seconds=2.0).sequence_length(15.0) == 30

    def rejects_unknown_losses():
        with pytest.raises(errors.ConfigError):
            tr.TrainConfig(loss='hinge')

    def reads_the_configuration(cfg):
        cfg['train']['epochs'] = 3
        config = tr.TrainConfig.from_config(cfg, alpha=0.0)
        assert config.epochs == 3
        assert config.alpha == 0.0
        assert config.n_bins == 33


def describe_sgd_step():

    def uses_one_rate_per_group(arch):
        model = nn.init_model(arch)
        grads = {k: np.ones_like(v) for k, v in model.params.items()}
        config = tr.TrainConfig(lr_backbone=0.5, lr_head=0.25, n_bins=5)
        stepped = tr.sgd_step(model, grads, 0, config)

        conv = 'backbone.conv0.weight'
        assert np.allclose(model.params[conv] - stepped.params[conv], 0.5)
        head = 'head.fc0.bias'
        assert np.allclose(model.params[head] - stepped.params[head], 0.25)
        lstm = 'lstm.0.bias'
        assert np.allclose(model.params[lstm] - stepped.params[lstm], 0.25)

    def later_epochs_step_less(arch):
        model = nn.init_model(arch)
        grads = {k: np.ones_like(v) for k, v in model.params.items()}
        config = tr.TrainConfig(lr_head=1.0, lr_decay_factor=0.5,
                                decay_period_epochs=2, n_bins=5)
        stepped = tr.sgd_step(model, grads, 2, config)
        delta = model.params['head.fc1.bias'] - stepped.params['head.fc1.bias']
        assert np.allclose(delta, 0.5)

    def rejects_mismatched_gradients(arch):
        model = nn.init_model(arch)
        grads = {k: np.ones_like(v) for k, v in model.params.items()}
        grads['head.fc1.bias'] = np.ones(3)
        with pytest.raises(errors.ShapeMismatch):
            tr.sgd_step(model, grads, 0, tr.TrainConfig(n_bins=5))


def describe_align_targets():

    def normalises_onto_the_frame_grid():
        fc = FeatureClip(np.zeros((10, 2, 2)), 15.0)
        isti_ms = Signal(np.linspace(150.0, 210.0, 11), 15.0)
        target = tr.align_targets(fc, isti_ms, 300.0)
        assert len(target) == 10
        assert target.samples[0] == pytest.approx(0.5)
        assert target.samples[5] == pytest.approx(0.6)

    def needs_truth_covering_the_frames():
        fc = FeatureClip(np.zeros((10, 2, 2)), 15.0)
        late = Signal(np.full(20, 160.0), 15.0, t0_seconds=1.0)
        with pytest.raises(errors.AlignmentError):
            tr.align_targets(fc, late)


def describe_train():

    def is_deterministic(dataset, config, arch):
        first, history = tr.train(dataset, config, arch)
        second, _ = tr.train(dataset, config, arch)
        assert len(history) == 15
        for name, value in first.params.items():
            assert np.array_equal(value, second.params[name])

    def lowers_the_loss_on_a_constant_target(dataset, config, arch):
        _, history = tr.train(dataset, config, arch)
        assert history[-1].loss < history[0].loss
        assert history[0].lr_head == 0.05
        assert history[0].loss == pytest.approx(
            history[0].ce + config.alpha * history[0].mse
        )

    def reports_every_epoch(dataset, config, arch):
        seen = []
        tr.train(dataset, config, arch, on_epoch=seen.append)
        assert [record.epoch for record in seen] == list(range(15))

    @pytest.mark.slow
    def overfits_a_single_clip(rng):
        frames = rng.normal(0.0, 0.1, (30, 8, 8))
        frames[:15] -= 1.0
        frames[15:] += 1.0
        target = np.where(np.arange(30) < 15, 0.3, 0.7)
        clip = [(FeatureClip(frames, 10.0), Signal(target, 10.0))]
        toy = nn.Architecture(8, 8, channels=(4,), hidden=8, head_hidden=16,
                              n_bins=9)
        config = tr.TrainConfig(lr_backbone=0.02, lr_head=0.1,
                                decay_period_epochs=1000, epochs=200,
                                batch_frames=5, n_bins=9, seq_seconds=0.5)
        _, history = tr.train(clip, config, toy)
        assert history[-1].loss < 0.05 * history[0].loss

    def needs_data(config):
        with pytest.raises(errors.EmptyDataset):
            tr.train([], config)

    def needs_one_full_sequence(config, arch, rng):
        short = FeatureClip(rng.standard_normal((3, 8, 8)), 10.0)
        with pytest.raises(errors.EmptyDataset):
            tr.train([(short, Signal(np.full(3, 0.5), 10.0))], config, arch)

    def rejects_unnormalised_targets(config, arch, rng):
        fc = FeatureClip(rng.standard_normal((10, 8, 8)), 10.0)
        with pytest.raises(errors.TargetOutOfRange):
            tr.train([(fc, Signal(np.full(10, 160.0), 10.0))], config, arch)

    def rejects_misaligned_targets(config, arch, rng):
        fc = FeatureClip(rng.standard_normal((10, 8, 8)), 10.0)
        with pytest.raises(errors.AlignmentError):
            tr.train([(fc, Signal(np.full(9, 0.5), 10.0))], config, arch)


def describe_predict():

    def covers_every_frame_including_the_tail(arch, rng):
        model = nn.init_model(arch)
        fc = FeatureClip(rng.standard_normal((13, 8, 8)), 10.0, 1.0)
        pred = tr.predict_isti(model, fc, 300.0, seq_seconds=0.5)
        assert len(pred) == 13
        assert pred.t0_seconds == 1.0
        assert np.all((pred.samples > 0.0) & (pred.samples < 300.0))

    def each_frame_sees_the_window_ending_there(arch, rng):
        model = nn.init_model(arch)
        frames = rng.standard_normal((12, 8, 8))
        whole = tr.predict_normalized(model, FeatureClip(frames, 10.0), 0.5)
        later = tr.predict_normalized(model, FeatureClip(frames[3:], 10.0),
                                      0.5)
        # from the fifth frame on both read the same five-frame windows
        assert np.allclose(whole[7:], later[4:])

    def clips_shorter_than_a_window_still_predict(arch, rng):
        model = nn.init_model(arch)
        fc = FeatureClip(rng.standard_normal((3, 8, 8)), 10.0)
        assert len(tr.predict_isti(model, fc, seq_seconds=0.5)) == 3

    def zero_head_weights_predict_half_the_range(arch, rng):
        params = dict(nn.init_model(arch).params)
        for name in ('head.fc1.weight', 'head.fc1.bias'):
            params[name] = np.zeros_like(params[name])
        model = nn.Model(arch, params)
        fc = FeatureClip(rng.standard_normal((12, 8, 8)), 10.0)
        pred = tr.predict_isti(model, fc, 300.0, seq_seconds=0.5)
        assert np.allclose(pred.samples, 150.0)

    def checks_the_frame_size(arch, rng):
        model = nn.init_model(arch)
        fc = FeatureClip(rng.standard_normal((10, 6, 8)), 10.0)
        with pytest.raises(errors.ShapeMismatch):
            tr.predict_isti(model, fc)


def test_the_package_exposes_the_training_module():
    assert inspect.ismodule(stressnet.neural.train)
    assert tr.train is stressnet.neural.train.train
