"""Command-line orchestration of the benchmark pipeline."""

from .config import ExperimentConfig, load_config, validate
from .pipeline import cmd_eval, cmd_generate, cmd_report, cmd_run, cmd_train

__all__ = ["ExperimentConfig", "cmd_eval", "cmd_generate", "cmd_report", "cmd_run", "cmd_train", "load_config", "validate"]
