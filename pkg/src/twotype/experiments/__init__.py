"""Data generators, dataset loading, and the Monte Carlo experiment runner."""

from .config import load_spec, spec_from_mapping
from .datasets import DatasetBundle, impute_dataset, load_dataset, load_responses
from .harness import COLUMNS, KINDS, ExperimentError, ExperimentSpec, run_experiment, write_results

__all__ = [
    "load_spec",
    "spec_from_mapping",
    "DatasetBundle",
    "load_dataset",
    "load_responses",
    "impute_dataset",
    "COLUMNS",
    "KINDS",
    "ExperimentError",
    "ExperimentSpec",
    "run_experiment",
    "write_results",
]
