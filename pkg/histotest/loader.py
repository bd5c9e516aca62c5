"""
Loader module for histotest experiment configurations and pmf files.

Handles loading and schema validation of YAML/JSON configuration files and
parsing of newline-separated probability vectors.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import jsonschema
import numpy as np
import yaml

from .config import ExperimentConfig, TesterConfig
from .dist_core import Measure, Pmf

logger = logging.getLogger(__name__)

CONFIG_SCHEMA = 'experiment_config.schema.json'


def load_yaml_or_json(file_path: str) -> Dict[str, Any]:
    """
    Load a YAML or JSON file.

    Args:
        file_path: Path to the file

    Returns:
        Parsed dictionary

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: If file cannot be parsed
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")

    content = path.read_text(encoding='utf-8')

    if path.suffix == '.json':
        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in {file_path}: {e}")
    else:
        try:
            data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in {file_path}: {e}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Expected dictionary at root of {file_path}")
    return data


def load_schema(schema_name: str) -> Dict[str, Any]:
    """
    Load a JSON schema from the repository schema directory.

    Raises:
        FileNotFoundError: If schema doesn't exist
    """
    schema_path = Path(__file__).parent.parent / 'schema' / schema_name
    if not schema_path.exists():
        raise FileNotFoundError(f"Schema not found: {schema_path}")
    return json.loads(schema_path.read_text(encoding='utf-8'))


def validate_against_schema(data: Dict[str, Any], schema: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """
    Validate data against a JSON schema.

    Returns:
        Tuple of (is_valid, error_messages), one message per violation
    """
    try:
        validator_cls = jsonschema.validators.validator_for(schema)
        validator_cls.check_schema(schema)
    except jsonschema.SchemaError as e:
        return False, [f"Invalid schema: {e.message}"]
    validator = validator_cls(schema)
    errors = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(e.path)):
        location = '.'.join(str(part) for part in error.path) or '<root>'
        errors.append(f"{location}: {error.message}")
    return not errors, errors


def load_and_validate_config(config_path: str) -> Tuple[Dict[str, Any], List[str]]:
    """
    Load and validate an experiment configuration file.

    Returns:
        Tuple of (config_data, error_messages)
    """
    try:
        data = load_yaml_or_json(config_path)
    except (FileNotFoundError, ValueError) as e:
        return {}, [str(e)]

    try:
        is_valid, errors = validate_against_schema(data, load_schema(CONFIG_SCHEMA))
    except FileNotFoundError as e:
        return data, [str(e)]
    return data, [] if is_valid else errors


def load_experiment_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Resolve an ExperimentConfig from an optional file plus overrides.

    Override values that are None are ignored; a 'constants' override is
    merged key by key into the file's constants.

    Raises:
        FileNotFoundError: If the config file doesn't exist
        ValueError: If the file is invalid or the merged values are out of range
    """
    data: Dict[str, Any] = {}
    if config_path:
        if not Path(config_path).exists():
            raise FileNotFoundError(f"File not found: {config_path}")
        data, errors = load_and_validate_config(config_path)
        if errors:
            raise ValueError(f"Invalid configuration {config_path}: " + "; ".join(errors))

    merged = dict(data)
    constants = dict(merged.pop('constants', {}) or {})
    sweep = merged.pop('sweep', None)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == 'constants':
            constants.update({k: v for k, v in value.items() if v is not None})
        elif key == 'sweep':
            sweep = value
        else:
            merged[key] = value

    if sweep:
        merged['sweep_param'] = sweep['param']
        merged['sweep_values'] = tuple(float(v) for v in sweep['values'])

    known = set(asdict(ExperimentConfig(constants=TesterConfig())))
    unknown = set(merged) - known
    if unknown:
        raise ValueError(f"Unknown configuration keys: {', '.join(sorted(unknown))}")
    merged['constants'] = TesterConfig().with_overrides(constants)
    config = ExperimentConfig(**merged)
    logger.debug("Resolved configuration: %s", config)
    return config


def read_pmf_values(file_path: str) -> np.ndarray:
    """
    Read newline-separated non-negative decimals; blank lines are skipped.

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: On an empty file or a bad line (with its line number)
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    values = []
    for number, line in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"{file_path}, line {number}: not a number: {text!r}")
        if not math.isfinite(value):
            raise ValueError(f"{file_path}, line {number}: non-finite value {text!r}")
        if value < 0:
            raise ValueError(f"{file_path}, line {number}: negative entry {value}")
        values.append(value)
    if not values:
        raise ValueError(f"{file_path}: empty pmf file")
    return np.array(values, dtype=np.float64)


@dataclass(frozen=True)
class PmfFile:
    """A normalized pmf together with the total of the values as read."""
    pmf: Pmf
    raw_total: float


def load_pmf_file(file_path: str) -> PmfFile:
    """
    Load and normalize a pmf file.

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: On a malformed file or zero total mass
    """
    raw = Measure(read_pmf_values(file_path))
    if raw.total <= 0:
        raise ValueError(f"{file_path}: total mass is zero")
    logger.info("Loaded %d entries from %s (total before normalization %.6g)", raw.n, file_path, raw.total)
    return PmfFile(pmf=raw.normalized(), raw_total=raw.total)
