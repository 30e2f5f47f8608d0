"""Deterministic file output: 17-significant-digit floats, sorted JSON keys,
LF endings, and checksum manifests."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

__version_tag__ = "vsuq 0.1.0"


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def dumps_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits and sorted keys."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj, key=str):
            items.append(f"{pad} {json.dumps(str(k))}: "
                         f"{dumps_json(obj[k], indent + 1)}")
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        return "[" + ", ".join(dumps_json(v, indent + 1) for v in seq) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            return json.dumps(None)
        return fmt(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return json.dumps(obj)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj) + "\n", encoding="utf-8", newline="\n")


def write_csv(path, header: str, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_manifest(out_dir, *, config_hash: str, seed, timings: dict,
                   outputs) -> Path:
    """Record checksums of every emitted file plus stage wall times."""
    out_dir = Path(out_dir)
    doc = {
        "version": __version_tag__,
        "config_hash": config_hash,
        "seed": seed,
        "stage_timings_seconds": timings,
        "outputs": {name: sha256_file(out_dir / name) for name in sorted(outputs)},
    }
    path = out_dir / "manifest.json"
    write_json(path, doc)
    return path


def verify_manifest(manifest_path) -> list[str]:
    """Names of listed outputs whose checksum no longer matches."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from None
    bad = []
    base = manifest_path.parent
    for name, digest in doc.get("outputs", {}).items():
        target = base / name
        if not target.exists() or sha256_file(target) != digest:
            bad.append(name)
    return bad
