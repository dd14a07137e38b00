# pylint: disable=useless-import-alias
"""
Public API of stressnet.
"""
# Export: Configuration
from .settings import CFG as CFG
# Export: signals and clips
from .timeseries import EventSeries as EventSeries
from .timeseries import Knots as Knots
from .timeseries import Signal as Signal
from .emission import FeatureClip as FeatureClip
from .emission import ThermalClip as ThermalClip
from .emission import preprocess as preprocess
# Export: ground truth and features
from .isti import CardiacPair as CardiacPair
from .isti import ground_truth as ground_truth
# Export: stress classification
from .stress import TrialRecord as TrialRecord
from .stress import score_trials as score_trials
from .stress import stress_train as stress_train
# Export: metrics
from . import metrics as metrics
