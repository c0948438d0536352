"""Settings from the environment (.env) and optional JSON config files."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import load_dotenv

from .estimator import DEFAULT_BETA, DEFAULT_GAMMA, EstimatorParams

load_dotenv()

logger = logging.getLogger(__name__)

REPO_ROOT = Path(__file__).resolve().parent.parent
DOCS_DIR = REPO_ROOT / "docs"
MAPPINGS_DIR = REPO_ROOT / "mappings"


def _int_env(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        return default


def _float_env(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, str(default)))
    except ValueError:
        return default


def _bool_env(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("true", "1", "yes")


@dataclass(frozen=True)
class Settings:
    gamma: float = DEFAULT_GAMMA
    beta: float = DEFAULT_BETA
    out_dir: Path = Path("out")
    horizon_cap: int = 2**20
    max_rejections: int = 1000
    log_level: str = "WARNING"
    es_url: Optional[str] = None
    es_api_key: Optional[str] = None
    es_verify_tls: bool = True
    es_index_prefix: str = "memwords"
    es_request_timeout: int = 10
    es_max_retries: int = 2


def load_settings() -> Settings:
    """Read MEMWORDS_* and ES_* variables; unparsable values fall back to defaults."""
    base = Settings()
    return Settings(
        gamma=_float_env("MEMWORDS_GAMMA", base.gamma),
        beta=_float_env("MEMWORDS_BETA", base.beta),
        out_dir=Path(os.getenv("MEMWORDS_OUT_DIR", str(base.out_dir))),
        horizon_cap=_int_env("MEMWORDS_HORIZON_CAP", base.horizon_cap),
        max_rejections=_int_env("MEMWORDS_MAX_REJECTIONS", base.max_rejections),
        log_level=os.getenv("MEMWORDS_LOG_LEVEL", base.log_level).upper(),
        es_url=os.getenv("ES_URL") or None,
        es_api_key=os.getenv("ES_API_KEY") or None,
        es_verify_tls=_bool_env("ES_VERIFY_TLS", base.es_verify_tls),
        es_index_prefix=os.getenv("ES_INDEX_PREFIX", "").strip() or base.es_index_prefix,
        es_request_timeout=_int_env("ES_REQUEST_TIMEOUT", base.es_request_timeout),
        es_max_retries=_int_env("ES_MAX_RETRIES", base.es_max_retries),
    )


@dataclass(frozen=True)
class RunConfig:
    """Merged parameters of one CLI command."""

    command: str
    gamma: float = DEFAULT_GAMMA
    beta: float = DEFAULT_BETA
    checkpoints: tuple[int, ...] = ()
    seeds: tuple[int, ...] = (0,)
    replicates: int = 200
    stages: int = 1
    margin: Optional[float] = None
    estimator: str = "shortest_word"
    process: str = "chain"
    chain: Optional[str] = None
    plan: Optional[str] = None
    horizons: tuple[int, ...] = ()
    length: int = 0
    input: Optional[str] = None
    output: Optional[str] = None
    horizon_cap: int = 2**20
    max_rejections: int = 1000
    grid: tuple[int, ...] = ()
    hoeffding: bool = False
    n: Optional[int] = None
    width: float = 1.0
    epsilon: Optional[float] = None
    store: bool = False
    run_id: Optional[str] = None

    def __post_init__(self) -> None:
        self.params()
        if not self.seeds:
            raise ValueError("At least one seed is required")

    def params(self) -> EstimatorParams:
        return EstimatorParams(gamma=self.gamma, beta=self.beta, checkpoints=self.checkpoints)


_TUPLE_KEYS = {"checkpoints", "seeds", "horizons", "grid"}


def config_keys() -> set[str]:
    return {f.name for f in fields(RunConfig)} - {"command"}


def load_config_file(path: str | Path) -> dict[str, Any]:
    """JSON object whose keys are flag names (dashes or underscores); unknown keys are rejected."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"{path}: unreadable config file ({e})") from e
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    out = {str(k).replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(out) - config_keys())
    if unknown:
        raise ValueError(f"{path}: unknown config keys {unknown}")
    return out


def _normalize(key: str, value: Any) -> Any:
    if key in _TUPLE_KEYS and value is not None:
        if isinstance(value, (int, float)):
            value = [value]
        return tuple(int(v) for v in value)
    return value


def build_run_config(
    command: str,
    settings: Settings,
    file_values: Mapping[str, Any],
    flag_values: Mapping[str, Any],
) -> RunConfig:
    """default < environment < config file < flags; flags left at None do not override."""
    merged: dict[str, Any] = {
        "gamma": settings.gamma,
        "beta": settings.beta,
        "horizon_cap": settings.horizon_cap,
        "max_rejections": settings.max_rejections,
    }
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None and k in config_keys()})
    merged = {k: _normalize(k, v) for k, v in merged.items()}
    logger.debug("run config for %s: %s", command, merged)
    return RunConfig(command=command, **merged)


SETTINGS = load_settings()
