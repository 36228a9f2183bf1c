"""Shared helpers: seed derivation, worker limits, canonical serialization."""

from __future__ import annotations

import hashlib
import json
import os
from typing import Any

import numpy as np

THREADS_ENV = "UU_AUDIT_THREADS"


def _component_to_int(component: int | str) -> int:
    if isinstance(component, int):
        return component
    digest = hashlib.sha256(component.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(master: int, *path: int | str) -> int:
    """Derive a child seed from a master seed and a namespacing path.

    All randomness in the pipeline flows from a single master seed through
    this function, so identical (master, path) pairs always yield the same
    child seed regardless of execution schedule.
    """
    key = tuple(_component_to_int(c) for c in path)
    ss = np.random.SeedSequence(entropy=master, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(master: int, *path: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *path))


def worker_count() -> int:
    """Worker cap from the UU_AUDIT_THREADS environment variable (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def canonical_json(obj: Any) -> str:
    """Stable JSON encoding: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal representation, for CSV cells."""
    return repr(float(x))
