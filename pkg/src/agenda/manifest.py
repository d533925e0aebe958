"""Run manifests: every pipeline output directory gets exactly one manifest.json.

The manifest records the command, its effective config (and a hash of it),
content hashes of the input files it read and the output files it wrote,
the seeds used, package versions and any warnings raised during the run.
Downstream commands verify the recorded output hashes before consuming an
artifact directory, so stale or hand-edited artifacts are refused unless
the user forces the run.
"""
from __future__ import annotations

import datetime as dt
import hashlib
import json
import platform
from pathlib import Path

MANIFEST_NAME = "manifest.json"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _versions() -> dict:
    import numpy
    import scipy

    import agenda

    return {
        "agenda": agenda.__version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: dict,
    inputs: list[str | Path],
    seeds: list[int] | None = None,
    warnings: list[str] | None = None,
) -> Path:
    """Write manifest.json into out_dir, hashing inputs and all existing outputs.

    Call this after the command has written its output files; every file in
    out_dir other than the manifest itself is recorded as an output.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        p.relative_to(out_dir).as_posix(): file_sha256(p)
        for p in sorted(out_dir.rglob("*"))
        if p.is_file() and p.name != MANIFEST_NAME
    }
    doc = {
        "command": command,
        "created_utc": dt.datetime.now(dt.timezone.utc).isoformat(),
        "config": config,
        "config_hash": config_hash(config),
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": outputs,
        "seeds": list(seeds) if seeds is not None else [],
        "versions": _versions(),
        "warnings": list(warnings) if warnings else [],
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
    return path


def read_manifest(artifact_dir: str | Path) -> dict:
    path = Path(artifact_dir) / MANIFEST_NAME
    if not path.is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {artifact_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


def stale_outputs(artifact_dir: str | Path) -> list[str]:
    """Names of files whose current hash differs from the manifest record.

    Missing files count as stale; extra files are ignored.
    """
    artifact_dir = Path(artifact_dir)
    manifest = read_manifest(artifact_dir)
    bad = []
    for rel, digest in manifest.get("outputs", {}).items():
        p = artifact_dir / rel
        if not p.is_file() or file_sha256(p) != digest:
            bad.append(rel)
    return bad
