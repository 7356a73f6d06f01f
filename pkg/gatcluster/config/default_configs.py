"""
Default training settings and profiles of the standard citation benchmarks.
Shapes follow the published statistics of each dataset.
"""

from typing import Dict, List, Optional

from ..models.graph_models import DatasetManifest, NormalizationMode
from ..models.training_models import DatasetProfile, TrainConfig

# Embedding widths of the parameter study
SWEEP_EMBED_DIMS: List[int] = [4, 16, 64, 256, 1024]

DEFAULT_SEEDS: List[int] = [0, 1, 2, 3, 4]


def get_default_dataset_profiles() -> Dict[str, DatasetProfile]:
    """Get profiles of the standard citation benchmarks."""

    profiles = {
        "cora": DatasetProfile(
            name="cora",
            nodes=2708,
            features=1433,
            clusters=7,
            links=5429
        ),
        "citeseer": DatasetProfile(
            name="citeseer",
            nodes=3327,
            features=3703,
            clusters=6,
            links=4732
        ),
        "pubmed": DatasetProfile(
            name="pubmed",
            nodes=19717,
            features=500,
            clusters=3,
            links=44338
        ),
    }

    return profiles


def get_dataset_profile_by_name(name: Optional[str]) -> Optional[DatasetProfile]:
    """Get a specific dataset profile by name."""
    if not name:
        return None
    return get_default_dataset_profiles().get(name.lower())


def get_available_datasets() -> List[str]:
    """Get list of known dataset names."""
    return list(get_default_dataset_profiles().keys())


def default_normalization(manifest: DatasetManifest) -> NormalizationMode:
    """Resolve the attribute normalization of a manifest."""
    if manifest.normalization is not None:
        return manifest.normalization
    if manifest.kind == "citation" or get_dataset_profile_by_name(manifest.name) is not None:
        return "row-sum"
    return "none"


def get_default_train_config() -> TrainConfig:
    """Get the default training configuration (gamma=10, t=2, 256 -> 16)."""
    return TrainConfig()
