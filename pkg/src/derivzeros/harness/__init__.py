"""Experiment orchestration, probes, reports and the command line."""

from .config import DistanceConfig, ExperimentConfig, ProbeConfig, config_from_dict, load_config
from .experiments import Record, Report, run_convergence, run_coulomb
from .pairing import pairing_stats
from .probes import probe_small_values, probe_tightness
from .report import emit

__all__ = [
    "DistanceConfig", "ExperimentConfig", "ProbeConfig", "Record", "Report",
    "config_from_dict", "emit", "load_config", "pairing_stats", "probe_small_values",
    "probe_tightness", "run_convergence", "run_coulomb",
]
