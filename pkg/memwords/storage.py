"""Versioned archive of run reports in <prefix>-experiment_runs (optional, Elasticsearch)."""
from __future__ import annotations

import functools
import json
import logging
import re
from datetime import datetime, timezone
from typing import Any, Optional

from elasticsearch import Elasticsearch

from .config import MAPPINGS_DIR, SETTINGS, Settings

logger = logging.getLogger(__name__)

INDEX = "experiment_runs"
REQUEST_TIMEOUT = 60


class StoreError(RuntimeError):
    """Archive unreachable or misconfigured."""


def require_env(settings: Settings = SETTINGS) -> None:
    """Raise a clear error if ES_URL or ES_API_KEY are missing."""
    missing = [name for name, value in (("ES_URL", settings.es_url), ("ES_API_KEY", settings.es_api_key)) if not value]
    if missing:
        raise StoreError(f"Missing required env: {', '.join(missing)}. Set them in .env (see .env.example).")


@functools.lru_cache(maxsize=1)
def get_client() -> Elasticsearch:
    require_env()
    return Elasticsearch(
        SETTINGS.es_url,
        api_key=SETTINGS.es_api_key,
        verify_certs=SETTINGS.es_verify_tls,
        request_timeout=SETTINGS.es_request_timeout,
        max_retries=SETTINGS.es_max_retries,
        retry_on_timeout=True,
    )


def index_name(base: str = INDEX, prefix: Optional[str] = None) -> str:
    """Full index name with prefix (e.g. memwords-experiment_runs)."""
    prefix = prefix or SETTINGS.es_index_prefix
    return f"{prefix}-{base}" if base else prefix


def ensure_index(client: Any) -> str:
    """Create the archive index from mappings/experiment_runs.json if it does not exist."""
    idx = index_name()
    if not client.indices.exists(index=idx, request_timeout=REQUEST_TIMEOUT):
        raw = json.loads((MAPPINGS_DIR / f"{INDEX}.json").read_text(encoding="utf-8"))
        client.indices.create(index=idx, body={"mappings": raw["mappings"]}, request_timeout=REQUEST_TIMEOUT)
        logger.info("created index %s", idx)
    return idx


def _next_version(client: Any, run_id: str, artifact_type: str) -> str:
    """v1, v2, ... after the highest stored version of (run_id, artifact_type)."""
    max_n = 0
    try:
        r = client.search(
            index=index_name(),
            body={
                "size": 100,
                "query": {
                    "bool": {
                        "filter": [
                            {"term": {"run_id": run_id}},
                            {"term": {"artifact_type": artifact_type}},
                        ]
                    }
                },
                "_source": ["artifact_version"],
            },
        )
        for hit in (r.get("hits") or {}).get("hits") or []:
            ver = (hit.get("_source") or {}).get("artifact_version", "")
            m = re.match(r"v(\d+)$", ver) if isinstance(ver, str) else None
            if m:
                max_n = max(max_n, int(m.group(1)))
    except Exception as e:
        logger.warning("version lookup failed for %s/%s: %s", run_id, artifact_type, e)
    return f"v{max_n + 1}"


def store_artifact(
    client: Any,
    run_id: str,
    artifact_type: str,
    payload: dict,
    version: Optional[str] = None,
) -> str:
    """Store one report (stage_plan, memory_report, run_manifest). Returns the document id."""
    if version is None:
        version = _next_version(client, run_id, artifact_type)
    doc_id = f"{run_id}:{artifact_type}:{version}"
    body = {
        "run_id": run_id,
        "artifact_type": artifact_type,
        "artifact_version": version,
        "stored_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "payload": payload,
    }
    client.index(index=index_name(), id=doc_id, document=body)
    return doc_id


def list_artifacts(client: Any, run_id: str, size: int = 50) -> list[dict]:
    """Stored artifacts of a run, newest first: {doc_id, artifact_type, version, stored_at}."""
    try:
        r = client.search(
            index=index_name(),
            body={
                "size": size,
                "query": {"term": {"run_id": run_id}},
                "sort": [{"stored_at": {"order": "desc", "unmapped_type": "date"}}],
                "_source": ["artifact_type", "artifact_version", "stored_at"],
            },
        )
    except Exception as e:
        logger.warning("listing artifacts of %s failed: %s", run_id, e)
        return []
    out: list[dict] = []
    for hit in (r.get("hits") or {}).get("hits") or []:
        src = hit.get("_source") or {}
        out.append({
            "doc_id": hit.get("_id", ""),
            "artifact_type": src.get("artifact_type", ""),
            "version": src.get("artifact_version", ""),
            "stored_at": src.get("stored_at", ""),
        })
    return out


def get_artifact(client: Any, doc_id: str) -> dict:
    """Document _source (payload included), {} when missing."""
    try:
        r = client.get(index=index_name(), id=doc_id)
        return r.get("_source") or {}
    except Exception as e:
        logger.warning("fetching %s failed: %s", doc_id, e)
        return {}
