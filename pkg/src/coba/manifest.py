"""Run manifests: a JSON record of what a CLI invocation did.

Written with status "running" before work starts and finalized afterwards
with artifact hashes and wall time, so a run directory is self-describing
and reruns can be compared hash-for-hash.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

__all__ = ["RunManifest", "sha256_of"]


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunManifest:
    def __init__(self, path, subcommand: str, config: dict, seed, inputs=None):
        self.path = path
        self.doc = {
            "subcommand": subcommand,
            "config": config,
            "seed": seed,
            "inputs": {str(k): str(v) for k, v in (inputs or {}).items()},
            "outputs": {},
            "artifact_sha256": {},
            "status": "running",
            "wall_time_s": None,
        }
        self._t0 = time.perf_counter()
        self._write()

    def _write(self):
        os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
        with open(self.path, "w") as fh:
            json.dump(self.doc, fh, indent=2, sort_keys=True)

    def finalize(self, outputs: dict):
        self.doc["outputs"] = {k: str(v) for k, v in outputs.items()}
        self.doc["artifact_sha256"] = {
            k: sha256_of(v) for k, v in outputs.items() if os.path.isfile(v)
        }
        self.doc["status"] = "ok"
        self.doc["wall_time_s"] = time.perf_counter() - self._t0
        self._write()
