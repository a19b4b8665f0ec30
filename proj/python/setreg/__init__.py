"""Verification of modulus, composition and coincidence estimates for
set-valued maps on finite sampled grids."""

import json
import os

from . import _setreg
from ._setreg import (
    DEFAULT_CAP,
    CapExceeded,
    Instance,
    InstanceError,
    ParseError,
    SetregError,
    content_digest,
    set_threads,
    threads,
    tool_version,
)

__all__ = [
    "DEFAULT_CAP",
    "CapExceeded",
    "Instance",
    "InstanceError",
    "ParseError",
    "SetregError",
    "content_digest",
    "linear_operator_moduli",
    "load",
    "run",
    "set_threads",
    "threads",
    "tool_version",
]


def _decode(value):
    if value == "inf":
        return float("inf")
    return value


def load(source, cap=DEFAULT_CAP):
    """Parse an instance from a dict, a JSON string, or a file path."""
    if isinstance(source, dict):
        return _setreg.parse_instance(json.dumps(source), cap)
    if isinstance(source, os.PathLike) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        return _setreg.load_instance(os.fspath(source), cap)
    return _setreg.parse_instance(source, cap)


def run(source, task="all", command=None, fail_fast=False, resolution=None,
        cap=DEFAULT_CAP):
    """Run tasks and return one dict per task.

    Each dict holds name, command, status, ok, payload (the deterministic
    report body), csv (file name -> contents) and wall_time.
    """
    inst = source if isinstance(source, Instance) else load(source, cap)
    out = []
    for r in inst.run(task, command, fail_fast, resolution):
        out.append({
            "name": r.name,
            "command": r.command,
            "status": r.status,
            "ok": r.ok,
            "payload": json.loads(r.payload_json),
            "csv": dict(r.csv),
            "wall_time": r.wall_time,
        })
    return out


def linear_operator_moduli(matrix):
    """Euclidean-norm moduli of x -> A x. Infinite values come back as inf."""
    rows = [[float(v) for v in row] for row in matrix]
    return {k: _decode(v) for k, v in json.loads(_setreg.linear_operator_moduli(rows)).items()}
