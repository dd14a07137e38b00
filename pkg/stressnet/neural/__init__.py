"""
From-scratch ISTI estimation network.

The building blocks live in `layers`, the network itself in `model`, the
losses in `loss`, training and inference in `train` and finite-difference
verification in `gradcheck`. The `train` function is not re-exported, so
`stressnet.neural.train` always names the module.
"""
from stressnet.neural.gradcheck import GradCheckReport, grad_check
from stressnet.neural.loss import bins_expectation, multi_loss
from stressnet.neural.model import (
    Architecture,
    Model,
    backbone_forward,
    detection_head,
    init_model,
    lstm_forward,
)
from stressnet.neural.train import (
    EpochRecord,
    TrainConfig,
    predict_isti,
    sgd_step,
)

__all__ = [
    'Architecture', 'EpochRecord', 'GradCheckReport', 'Model', 'TrainConfig',
    'backbone_forward', 'bins_expectation', 'detection_head', 'grad_check',
    'init_model', 'lstm_forward', 'multi_loss', 'predict_isti', 'sgd_step'
]
