from .baselines import BASELINE_KINDS, STRATEGY_KINDS, baseline_action, make_strategy
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .experiments import (
    bootstrap_pvalue_less,
    moving_average,
    run_compare,
    run_demo,
    run_episode,
    run_eval,
    run_sweep,
    run_train,
    write_csv,
)

__all__ = [
    "BASELINE_KINDS",
    "STRATEGY_KINDS",
    "baseline_action",
    "make_strategy",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "bootstrap_pvalue_less",
    "moving_average",
    "run_compare",
    "run_demo",
    "run_episode",
    "run_eval",
    "run_sweep",
    "run_train",
    "write_csv",
]
