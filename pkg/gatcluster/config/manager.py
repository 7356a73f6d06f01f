"""
Configuration manager for loading, merging and saving training configurations
and dataset manifests.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from ..core.exceptions import ConfigurationException
from ..models.graph_models import DatasetManifest
from ..models.training_models import TrainConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ConfigManager:
    """Manager for training configuration and manifest files."""

    DEFAULT_CONFIG_FILE = "config.json"

    def __init__(self, config_path: Optional[PathLike] = None):
        """
        Initialize the configuration manager.

        Args:
            config_path: JSON or YAML file with TrainConfig fields.
                         Defaults apply when None.
        """
        self.config_path = Path(config_path) if config_path is not None else None
        self._train_config: Optional[TrainConfig] = None

    def load_config(self, overrides: Optional[Dict[str, Any]] = None) -> TrainConfig:
        """
        Load the training configuration and apply overrides.

        Args:
            overrides: Field values that win over the file; None values are ignored.

        Raises:
            ConfigurationException: If the file is unreadable or a value is invalid.
        """
        if self._train_config is not None and not overrides:
            return self._train_config

        config_data: Dict[str, Any] = {}
        if self.config_path is not None:
            config_data = self._read_mapping(self.config_path)

        for key, value in (overrides or {}).items():
            if value is not None:
                config_data[key] = value

        try:
            train_config = TrainConfig(**config_data)
        except ValidationError as e:
            raise ConfigurationException(f"Invalid training configuration: {e}") from e

        self._train_config = train_config
        return train_config

    def save_config(self, train_config: TrainConfig, path: PathLike) -> Path:
        """Write a config echo; YAML for .yaml/.yml suffixes, JSON otherwise."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        config_data = train_config.model_dump(mode="json")

        with open(target, "w", encoding="utf-8") as f:
            if target.suffix.lower() in (".yaml", ".yml"):
                yaml.safe_dump(config_data, f, default_flow_style=False, sort_keys=True)
            else:
                json.dump(config_data, f, indent=2, sort_keys=True)
                f.write("\n")

        logger.debug("Saved config echo to %s", target)
        return target

    def load_manifest(self, manifest_path: PathLike) -> DatasetManifest:
        """
        Load a dataset manifest and resolve its file paths.

        Relative paths are taken relative to the manifest's directory.
        """
        path = Path(manifest_path)
        manifest_data = self._read_mapping(path)

        try:
            manifest = DatasetManifest(**manifest_data)
        except ValidationError as e:
            raise ConfigurationException(f"Invalid manifest '{path}': {e}") from e

        resolved: Dict[str, Any] = {}
        for field in ("edge_file", "attr_file", "label_file", "id_file"):
            value = getattr(manifest, field)
            if value is None:
                continue
            file_path = Path(value)
            if not file_path.is_absolute():
                file_path = path.parent / file_path
            if not file_path.exists():
                raise ConfigurationException(f"Manifest '{path}' references missing file '{file_path}'")
            resolved[field] = str(file_path)

        return manifest.model_copy(update=resolved)

    def save_manifest(self, manifest: DatasetManifest, path: PathLike) -> Path:
        """Write a manifest as JSON."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(mode="json", exclude_none=True), f, indent=2, sort_keys=True)
            f.write("\n")
        return target

    def _read_mapping(self, path: Path) -> Dict[str, Any]:
        """Read a JSON or YAML mapping from file."""
        if not path.exists():
            raise ConfigurationException(f"File not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                if path.suffix.lower() in (".yaml", ".yml"):
                    data = yaml.safe_load(f)
                else:
                    data = json.load(f)
        except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
            logger.error("Error loading %s: %s", path, e)
            raise ConfigurationException(f"Cannot read '{path}': {e}") from e

        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationException(f"'{path}' must contain a mapping, got {type(data).__name__}")
        return data
