"""Instance hardness and per-instance hardness measures for tabular data."""

from .core import (
    CLASSIFICATION,
    REGRESSION,
    Dataset,
    HardnessProfile,
    ScaledView,
    load_csv,
    scale,
)
from .ih import IhResult, gamma_signal_power, ih_classification, ih_regression, instance_hardness, make_cv_plan
from .measures import classification_profile, regression_profile
from .synth import SweepSpec, gen_gaussians, gen_linear, gen_sweep

__version__ = "0.1.0"
