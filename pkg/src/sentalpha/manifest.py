"""Run manifests: inputs digested, config resolved, outputs listed.

Every CLI output directory gets exactly one manifest.json. The timestamp
honors SOURCE_DATE_EPOCH so archival runs can be byte-reproducible; without
it the current UTC time is recorded.
"""

import hashlib
import json
import os
import time
from datetime import datetime, timezone
from pathlib import Path

TOOL_NAME = "sentalpha"


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = int(epoch) if epoch is not None else int(time.time())
    return datetime.fromtimestamp(stamp, tz=timezone.utc).isoformat()


def write_manifest(out_dir, command: str, config: dict, seed: int,
                   inputs: dict, outputs) -> Path:
    """Write manifest.json into out_dir and return its path.

    Args:
        out_dir: directory the command wrote into.
        command: subcommand name.
        config: fully resolved parameter mapping.
        seed: run seed.
        inputs: label -> input file path; each is digested.
        outputs: file names (relative to out_dir) the command produced.
    """
    from . import __version__

    out_dir = Path(out_dir)
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {
            label: {"path": str(path), "sha256": file_sha256(path)}
            for label, path in sorted(inputs.items())
        },
        "outputs": sorted(str(o) for o in outputs),
        "tool": {"name": TOOL_NAME, "version": __version__},
        "timestamp": manifest_timestamp(),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
