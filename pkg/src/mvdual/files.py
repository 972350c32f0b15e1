"""Matrix CSV and JSON result files."""

import json
import math
from importlib import metadata
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
MATRIX_HEADER = "matrix {rows}x{cols}; one row per line; columns are samples"


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def write_matrix(path, A, comment=None):
    """Write ``A`` as CSV with 17 significant digits so values round-trip exactly."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    lines = ["# " + MATRIX_HEADER.format(rows=A.shape[0], cols=A.shape[1])]
    if comment:
        lines.extend("# " + line for line in str(comment).splitlines())
    lines.extend(",".join(format(x, ".17g") for x in row) for row in A)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    """Read a CSV matrix; lines starting with ``#`` are comments."""
    A = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=float)
    if A.size == 0:
        raise ValueError(f"{path}: no matrix entries")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{path}: non-finite entries")
    return A


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, payload, kind):
    doc = {"schema": f"mvdual.{kind}", "schema_version": SCHEMA_VERSION}
    doc.update(_jsonable(payload))
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
