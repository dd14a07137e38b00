import numpy as np
import pytest

from stressnet.cli.gradcheck import toy_architecture
from stressnet.neural import gradcheck as gc
from stressnet.neural import layers
from stressnet.neural import model as nn


@pytest.fixture
def toy():
    arch = toy_architecture(16, 16)
    model = nn.init_model(arch, 7)
    clips, targets = gc.random_batch(arch, 2, 3, 7)
    return model, clips, targets


def describe_grad_check():

    @pytest.mark.parametrize('variant', ['ce', 'bce'])
    def backward_pass_agrees_with_differences(toy, variant):
        model, clips, targets = toy
        report = gc.grad_check(model, clips, targets, seed=7, variant=variant)
        assert report.passed()
        assert set(report.errors) == set(model.params)
        assert report.checked > 0

    def leaves_the_parameters_untouched(toy):
        model, clips, targets = toy
        before = {k: v.copy() for k, v in model.params.items()}
        gc.grad_check(model, clips, targets, coords=3)
        for name, value in model.params.items():
            assert np.array_equal(value, before[name])

    def catches_a_broken_recurrence(toy, monkeypatch):
        model, clips, targets = toy
        real = layers.lstm_backward

        def halved(dhs, cache):
            dx, dw_in, dw_rec, dbias = real(dhs, cache)
            return dx, dw_in, 0.5 * dw_rec, dbias

        monkeypatch.setattr(layers, 'lstm_backward', halved)
        report = gc.grad_check(model, clips, targets)
        assert not report.passed()
        assert report.errors['lstm.0.w_recurrent'] > 0.1

    def zero_loss_configuration_passes(toy):
        model, clips, _ = toy
        model.params['head.fc1.bias'][4] = 1000.0
        targets = np.full((2, 3), 0.5)
        report = gc.grad_check(model, clips, targets)
        assert report.max_error < 1e-4


def test_relative_error_is_symmetric():
    assert gc.relative_error(1.0, 3.0) == gc.relative_error(3.0, 1.0) == 0.5
    assert gc.relative_error(1e-12, 0.0) == pytest.approx(1e-4)
