"""
ASRAM Utilities Module
Settings loader, value formatting, hashing for run records and host-memory probes
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import gmpy2 as gmp
import psutil
import yaml

from src.core.errors import ConfigError, OracleSpecError
from src.core.hierarchy import DEFAULT_BUDGET, DEFAULT_CONFIRMATIONS, DEFAULT_LEVELS
from src.core.machine import DEFAULT_FUEL, DEFAULT_MEM_BITS, DEFAULT_PREVIEW
from src.core.oracle import parse_literal
from src.core.programs import DEFAULT_GENERAL_CAP, DEFAULT_TOWER_CAP

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config" / "defaults.yaml"
WIDE_VALUE_BITS = 512


@dataclass
class MachineSettings:
    fuel: int = DEFAULT_FUEL
    mem_bits: int = DEFAULT_MEM_BITS
    trace_preview: int = DEFAULT_PREVIEW


@dataclass
class OracleSettings:
    scales: Tuple[int, ...] = (1, 2, 3, 4)
    confirmations: int = 2
    workers: int = 1


@dataclass
class ProgramSettings:
    tower_cap: int = DEFAULT_TOWER_CAP
    general_tower_cap: int = DEFAULT_GENERAL_CAP


@dataclass
class HierarchySettings:
    levels: Tuple[int, ...] = DEFAULT_LEVELS
    confirmations: int = DEFAULT_CONFIRMATIONS
    budget: int = DEFAULT_BUDGET


@dataclass
class OutputSettings:
    wide_value_bits: int = WIDE_VALUE_BITS


@dataclass
class Settings:
    machine: MachineSettings = field(default_factory=MachineSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    programs: ProgramSettings = field(default_factory=ProgramSettings)
    hierarchy: HierarchySettings = field(default_factory=HierarchySettings)
    output: OutputSettings = field(default_factory=OutputSettings)


def _positive(section: str, key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{section}.{key} must be a positive integer, got {value!r}")
    return value


def _build_section(cls, name: str, data: Any):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(unknown))}")

    values = {}
    for key, value in data.items():
        if isinstance(getattr(cls(), key), tuple):
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{name}.{key} must be a non-empty list")
            values[key] = tuple(_positive(name, key, v) for v in value)
        else:
            values[key] = _positive(name, key, value)
    return cls(**values)


def load_settings(path=None) -> Settings:
    """
    Load settings from YAML, falling back to built-in defaults

    Args:
        path: YAML file; defaults to config/defaults.yaml when present

    Returns:
        Settings

    Raises:
        ConfigError: unreadable file, unknown sections or keys, bad values
    """
    if path is None:
        if not DEFAULT_CONFIG_PATH.exists():
            return Settings()
        path = DEFAULT_CONFIG_PATH

    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}")

    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    sections = {f.name: f.default_factory for f in fields(Settings)}
    unknown = set(data) - set(sections)
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    settings = Settings(**{
        name: _build_section(factory, name, data.get(name))
        for name, factory in sections.items()
    })
    if settings.oracle.confirmations < 2:
        raise ConfigError("oracle.confirmations must be at least 2")
    logger.debug("settings loaded from %s", path)
    return settings


def format_value(value, wide_bits: int = WIDE_VALUE_BITS) -> str:
    """Decimal up to wide_bits bits, then 2^e for exact powers of two, else the bit-length"""
    value = gmp.mpz(value)
    bits = int(gmp.bit_length(value))
    if bits <= wide_bits:
        return str(value)
    if value & (value - 1) == 0:
        return f"2^{bits - 1}"
    return f"<{bits} bits>"


def exact_value(value) -> str:
    """Full decimal text of a value, for machine-readable records"""
    return str(gmp.mpz(value))


def parse_input_literal(text: str) -> gmp.mpz:
    """Decimal, 0x-hex or 2^<e> input value; inputs are natural numbers"""
    try:
        value = parse_literal(text)
    except OracleSpecError:
        raise ValueError(f"invalid input value '{text}'")
    if value < 0:
        raise ValueError(f"input value must be non-negative, got {text}")
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def available_memory_bits() -> int:
    return psutil.virtual_memory().available * 8


def peak_rss_bytes() -> int:
    """Peak working set where the platform reports one, current RSS otherwise"""
    info = psutil.Process().memory_info()
    return getattr(info, "peak_wset", None) or info.rss


def check_memory_ceiling(mem_bits: int, values: int = 4) -> bool:
    """
    Warn when a few values at the ceiling would not fit in free host memory

    Returns:
        True if the ceiling looks affordable
    """
    available = available_memory_bits()
    if mem_bits * values > available:
        logger.warning("memory ceiling of %d bits exceeds what %d values can use on this host "
                       "(%d bits free)", mem_bits, values, available)
        return False
    return True


def record(**fields_: Any) -> Dict[str, Any]:
    """Machine-readable record with the process peak RSS attached"""
    data = dict(fields_)
    data['peak_rss'] = peak_rss_bytes()
    return data


def dump_record(data: Dict[str, Any]) -> str:
    return canonical_json(data)


def read_text_arg(text: str, base_dir: Optional[Path] = None) -> str:
    """Literal text, or the contents of a file when written as @path"""
    if not text.startswith("@"):
        return text
    path = Path(text[1:])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return path.read_text(encoding="utf-8")
