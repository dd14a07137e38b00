import numpy as np
import pytest

from stressnet import errors
from stressnet.neural import model as nn


@pytest.fixture
def arch():
    return nn.Architecture(16, 12, channels=(4, 8), hidden=6, head_hidden=10,
                           n_bins=9)


def describe_architecture():

    def lists_every_parameter_in_order(arch):
        shapes = arch.param_shapes()
        assert list(shapes)[:2] == ['backbone.conv0.weight',
                                    'backbone.conv0.bias']
        assert shapes['backbone.conv1.weight'] == (8, 4, 3, 3)
        assert shapes['lstm.0.w_input'] == (8, 24)
        assert shapes['lstm.0.w_recurrent'] == (6, 24)
        assert shapes['head.fc1.weight'] == (10, 9)

    def survives_a_descriptor_round_trip(arch):
        assert nn.Architecture.from_descriptor(arch.to_descriptor()) == arch

    def needs_two_bins():
        with pytest.raises(errors.ValidationError):
            nn.Architecture(8, 8, n_bins=1)

    def reads_the_configuration(cfg):
        cfg['model']['channels'] = [2, 3]
        built = nn.Architecture.from_config(cfg, 8, 10)
        assert built.channels == (2, 3)
        assert (built.input_height, built.input_width) == (8, 10)
        assert built.n_bins == 33

    def stacked_lstm_layers_feed_each_other():
        deep = nn.Architecture(8, 8, channels=(4,), hidden=5, lstm_layers=2)
        assert deep.param_shapes()['lstm.1.w_input'] == (5, 20)


def describe_model():

    def same_seed_gives_same_parameters(arch):
        first = nn.init_model(arch, 3)
        second = nn.init_model(arch, 3)
        other = nn.init_model(arch, 4)
        for name in arch.param_shapes():
            assert np.array_equal(first.params[name], second.params[name])
        assert not np.array_equal(first.params['head.fc0.weight'],
                                  other.params['head.fc0.weight'])

    def rejects_missing_parameters(arch):
        params = dict(nn.init_model(arch).params)
        del params['head.fc1.bias']
        with pytest.raises(errors.ShapeMismatch):
            nn.Model(arch, params)

    def backbone_pools_to_one_vector_per_frame(arch, rng):
        model = nn.init_model(arch)
        f0, _ = nn.backbone_forward(model, rng.standard_normal((5, 16, 12)))
        assert f0.shape == (5, 8)
        assert np.all(f0 >= 0.0)

    def backbone_checks_the_frame_size(arch, rng):
        model = nn.init_model(arch)
        with pytest.raises(errors.ShapeMismatch):
            nn.backbone_forward(model, rng.standard_normal((5, 12, 16)))

    def lstm_emits_one_vector_per_step(arch, rng):
        model = nn.init_model(arch)
        l0 = nn.lstm_forward(model, rng.standard_normal((7, 8)))
        assert l0.shape == (7, 6)
        with pytest.raises(errors.ShapeMismatch):
            nn.lstm_forward(model, rng.standard_normal((7, 5)))

    def head_returns_a_distribution(arch, rng):
        model = nn.init_model(arch)
        probs = nn.detection_head(model, rng.standard_normal(6))
        assert probs.shape == (9,)
        assert probs.sum() == pytest.approx(1.0)
        assert np.all(probs > 0.0)

    def network_output_is_time_major(arch, rng):
        model = nn.init_model(arch)
        clips = rng.standard_normal((2, 3, 16, 12))
        logits, _ = nn.network_forward(model, clips)
        assert logits.shape == (6, 9)

        single, _ = nn.network_forward(model, clips[1:2])
        # row t * S + s holds frame t of sequence s
        assert np.allclose(logits[1::2], single)
