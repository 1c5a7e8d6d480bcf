"""Crowdsourced label aggregation when tasks come in an easy and a hard type.

The functional API lives in the submodules (``model``, ``spectral``,
``aggregators``, ``pipeline``, ``theory``); :mod:`twotype.estimators` wraps it
in scikit-learn style classes.
"""

from ._validation import DataError, NumericalError
from .aggregators import AggregationResult, er_labels, majority_vote, nitzan_paroush, te_estimate
from .model import TwoTypeModel, sample_responses, sample_truth, simulate
from .pipeline import PipelineConfig, PipelineResult, evaluate, run_pipeline
from .spectral import SpectralSummary, cluster_tasks, detection_statistic, should_cluster

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "NumericalError",
    "AggregationResult",
    "majority_vote",
    "nitzan_paroush",
    "er_labels",
    "te_estimate",
    "TwoTypeModel",
    "sample_truth",
    "sample_responses",
    "simulate",
    "PipelineConfig",
    "PipelineResult",
    "run_pipeline",
    "evaluate",
    "SpectralSummary",
    "cluster_tasks",
    "detection_statistic",
    "should_cluster",
]
