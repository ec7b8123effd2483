from pathlib import Path

from schemas.experiment import ExperimentConfig


def output_path(config: ExperimentConfig, name: str) -> Path:
    return Path(config.out_dir) / name
