"""Deterministic CSV/JSON emission shared by the CLI commands."""

import hashlib
import json
import os

import numpy as np


def config_hash(raw):
    """Short stable hash of the raw config dict."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, columns, rows, meta):
    """CSV with one leading comment line carrying provenance key=values."""
    head = " ".join(f"{k}={_fmt(v)}" for k, v in meta.items())
    with open(path, "w") as fh:
        fh.write(f"# {head}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
