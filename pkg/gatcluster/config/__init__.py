"""Configuration management for training runs and datasets."""

from .manager import ConfigManager
from .default_configs import (
    SWEEP_EMBED_DIMS,
    get_available_datasets,
    get_dataset_profile_by_name,
    get_default_dataset_profiles,
    get_default_train_config,
)

__all__ = [
    "ConfigManager",
    "SWEEP_EMBED_DIMS",
    "get_available_datasets",
    "get_dataset_profile_by_name",
    "get_default_dataset_profiles",
    "get_default_train_config",
]
