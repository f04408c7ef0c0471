"""
Field files: one JSON header line followed by raw little-endian float64 samples
(component-major, then C order over the nodes).
"""

import csv
import json
import logging
import os
from typing import Dict

import numpy as np

from ..core.errors import ConfigError, MaxPotError
from ..core.grid import Field, Grid

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
ENCODING = "f64le"


def field_header(field: Field) -> Dict[str, object]:
    header = field.grid.describe()
    header.update({
        "version": FORMAT_VERSION,
        "m": field.m,
        "encoding": ENCODING,
        "support_hint": field.support_hint,
        "provenance": field.provenance,
    })
    return header


def save_field(field: Field, path: str) -> None:
    """
    Write ``field`` to ``path``.

    Args:
        field: Field to store
        path: Output file path (parent directories are created)
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    header = json.dumps(field_header(field), sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8") + b"\n")
        fh.write(field.samples.astype("<f8").tobytes(order="C"))
    logger.info("field saved to %s", path)


def load_field(path: str) -> Field:
    """Read a field written by save_field."""
    try:
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            payload = fh.read()
    except OSError as exc:
        raise ConfigError("input", f"cannot read field file: {exc}", path) from exc
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError("input", f"malformed field header: {exc}", path) from exc

    if header.get("version") != FORMAT_VERSION or header.get("encoding") != ENCODING:
        raise ConfigError("input", f"unsupported field format {header.get('version')}/{header.get('encoding')}", path)
    try:
        grid = Grid(int(header["n"]), tuple(header["dims"]), float(header["h"]))
        m = int(header["m"])
    except KeyError as exc:
        raise ConfigError("input", f"field header lacks {exc}", path) from exc
    except MaxPotError as exc:
        raise ConfigError("input", str(exc), path) from exc
    expected = m * grid.size * 8
    if len(payload) != expected:
        raise ConfigError("input", f"expected {expected} sample bytes, found {len(payload)}", path)
    samples = np.frombuffer(payload, dtype="<f8").reshape((m,) + grid.dims)
    return Field(grid, samples, support_hint=header.get("support_hint"),
                 provenance=header.get("provenance"))


def export_field_csv(field: Field, path: str) -> None:
    """CSV with columns x1..xn, v1..vm, one row per node in C order."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    n = field.grid.n
    coords = field.grid.coordinates().reshape(n, -1)
    values = field.samples.reshape(field.m, -1)
    header = [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(field.m)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(coords.shape[1]):
            writer.writerow([repr(float(x)) for x in coords[:, k]] + [repr(float(v)) for v in values[:, k]])
    logger.info("field exported to %s", path)
