"""
Utility helper functions for the CGO / Maxwell stability lab.
"""

import os
import json
import yaml
import hashlib
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.utils.exceptions import ConfigError


LOG_ENV_VAR = "CGO_MAXWELL_LOG"


def get_project_root() -> Path:
    """Get the project root directory."""
    return Path(__file__).parent.parent.parent


def load_config(config_path: str = None) -> dict:
    """
    Load configuration from YAML file.

    Args:
        config_path: Optional path to config file. Defaults to config/settings.yaml,
            falling back to config/settings.template.yaml when it does not exist.

    Returns:
        Configuration dictionary
    """
    if config_path is None:
        config_path = get_project_root() / "config" / "settings.yaml"
        if not Path(config_path).exists():
            config_path = get_project_root() / "config" / "settings.template.yaml"

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Malformed config file {config_path}: {e}") from e

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(f"Config file {config_path} must hold a mapping")
    return config


def config_section(config: dict, name: str) -> dict:
    """Return a config section, tolerating missing or empty sections."""
    section = (config or {}).get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"Config section '{name}' must be a mapping")
    return section


def resolve_log_level(level: Optional[int] = None) -> int:
    """
    Pick the logging level: explicit argument, then CGO_MAXWELL_LOG, then INFO.
    """
    if level is not None:
        return level
    raw = os.environ.get(LOG_ENV_VAR, "").strip()
    if not raw:
        return logging.INFO
    if raw.isdigit():
        return int(raw)
    value = logging.getLevelName(raw.upper())
    return value if isinstance(value, int) else logging.INFO


def setup_logging(log_file: str = None, level: int = None) -> logging.Logger:
    """
    Set up logging configuration.

    Args:
        log_file: Optional path to log file. Defaults to logs/app.log
        level: Logging level; None defers to the CGO_MAXWELL_LOG variable

    Returns:
        Configured logger instance
    """
    if log_file is None:
        log_file = get_project_root() / "logs" / "app.log"

    # Create logs directory if it doesn't exist
    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=resolve_log_level(level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler()
        ]
    )

    return logging.getLogger('cgo_maxwell')


def ensure_directories(*extra: Path):
    """Ensure all required directories exist."""
    root = get_project_root()
    directories = [
        root / "data",
        root / "logs",
        root / "config",
    ]
    directories.extend(Path(p) for p in extra)

    for directory in directories:
        directory.mkdir(parents=True, exist_ok=True)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, numpy scalars converted)."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(',', ':'))


def config_hash(obj: Any) -> str:
    """sha256 of the canonical JSON form of a config or spec."""
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Seeded generator; every random draw in the package goes through one."""
    return np.random.default_rng(seed)


def write_json(path: Path, payload: Any):
    """Write pretty JSON with stable key order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: Path) -> Any:
    """Read a JSON file, mapping parse errors to ConfigError."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {path}: {e}") from e
