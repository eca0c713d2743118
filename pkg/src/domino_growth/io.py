"""Text formats: tiling dumps and CSV grids with provenance headers.

Dump format (one configuration of A_N)::

    # domino-dump 1
    N 3
    seed 7
    weights_sha256 <hex>
    time_parity 1
    <2N+2 rows of 2N+2 characters>

Rows run from the top vertex row (y = N+1) down to y = -N and columns from
x = -N to N+1.  Each character is the direction of the vertex's partner
(N, E, S, W) or ``.`` for vertices outside the diamond.

Grid CSV: ``# key: value`` provenance lines, a header row of column names,
then one row per grid point with floats written by ``repr`` so they
round-trip exactly.
"""

from __future__ import annotations

import csv
import io as _io
import json

import numpy as np

from .lattice import DIRECTION_CHARS, DimerConfig, aztec, validate_matching

DUMP_MAGIC = "# domino-dump 1"


class FormatError(ValueError):
    """A dump or grid file could not be parsed."""


def dump_text(config, seed, weights_sha256, time_parity=None):
    region = config.region
    if region.kind != "aztec":
        raise ValueError("dumps are defined for Aztec diamonds")
    N = region.size
    if time_parity is None:
        time_parity = config.time % 2
    d = config.directions()
    lines = [
        DUMP_MAGIC,
        f"N {N}",
        f"seed {seed}",
        f"weights_sha256 {weights_sha256}",
        f"time_parity {time_parity}",
    ]
    for col in range(d.shape[1] - 1, -1, -1):
        lines.append("".join(DIRECTION_CHARS[c] for c in d[:, col]))
    return "\n".join(lines) + "\n"


def write_dump(path, config, seed, weights_sha256, time_parity=None):
    with open(path, "w", newline="\n") as fh:
        fh.write(dump_text(config, seed, weights_sha256, time_parity))


def parse_dump(text):
    """Return ``(config, meta)`` from dump text; raises :class:`FormatError`."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != DUMP_MAGIC:
        raise FormatError("missing dump header")
    meta = {}
    i = 1
    for key in ("N", "seed", "weights_sha256", "time_parity"):
        if i >= len(lines):
            raise FormatError("truncated dump header")
        parts = lines[i].split(None, 1)
        if len(parts) != 2 or parts[0] != key:
            raise FormatError(f"expected '{key}' on line {i + 1}")
        meta[key] = parts[1].strip()
        i += 1
    try:
        N = int(meta["N"])
        meta["N"] = N
        meta["time_parity"] = int(meta["time_parity"])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    rows = [ln for ln in lines[i:] if ln.strip()]
    side = 2 * N + 2
    if len(rows) != side or any(len(r) != side for r in rows):
        raise FormatError(f"expected {side} rows of {side} characters")
    lookup = {c: k for k, c in enumerate(DIRECTION_CHARS)}
    d = np.zeros((side, side), dtype=np.int8)
    for r, row in enumerate(rows):
        col = side - 1 - r
        for x, ch in enumerate(row):
            if ch not in lookup:
                raise FormatError(f"bad character {ch!r}")
            d[x, col] = lookup[ch]
    try:
        config = DimerConfig.from_directions(aztec(N), N, d)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if not validate_matching(config):
        raise FormatError("dump is not a domino tiling of the Aztec diamond")
    return config, meta


def read_dump(path):
    with open(path) as fh:
        return parse_dump(fh.read())


# ---------------------------------------------------------------------------
# grids


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def grid_text(columns, rows, meta=None):
    buf = _io.StringIO()
    for key, value in (meta or {}).items():
        if not isinstance(value, str):
            value = json.dumps(value)
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match the columns")
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def export_grid(path, columns, rows, meta=None):
    """Write a CSV grid with ``# key: value`` provenance lines."""
    text = grid_text(columns, rows, meta)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def parse_grid(text):
    """Return ``(meta, columns, rows)``; numeric cells become floats."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, sep, value = line[2:].partition(": ")
            if not sep:
                raise FormatError(f"bad provenance line {line!r}")
            meta[key] = value
        elif line.strip():
            body.append(line)
    if not body:
        raise FormatError("missing column header")
    reader = csv.reader(body)
    columns = next(reader)
    rows = []
    for rec in reader:
        if len(rec) != len(columns):
            raise FormatError("ragged grid row")
        out = []
        for cell in rec:
            try:
                out.append(float(cell))
            except ValueError:
                out.append(cell)
        rows.append(out)
    return meta, columns, rows


def import_grid(path):
    with open(path) as fh:
        return parse_grid(fh.read())


SHAPE_COLUMNS = ["a", "b", "x1", "x2", "psi", "psi_se"]


def export_shape(path, shape):
    """Write an :class:`~domino_growth.growth.EmpiricalShape` (valid cells only)."""
    X1, X2 = shape.positions()
    rows = []
    for a, b in zip(*np.nonzero(shape.valid())):
        rows.append([int(a), int(b), X1[a, b], X2[a, b], shape.psi[a, b], shape.psi_se[a, b]])
    meta = {
        "kind": "empirical-limit-shape",
        "n": shape.n,
        "N": shape.N,
        "samples": shape.samples,
        "seed": shape.seed,
        "cell": shape.cell,
        "spacing": shape.spacing,
        "centers": " ".join(repr(float(t)) for t in shape.x1),
        "weights_sha256": shape.weights_sha256,
    }
    export_grid(path, SHAPE_COLUMNS, rows, meta)


def import_shape(path):
    from .growth import EmpiricalShape, _gradient

    meta, columns, rows = import_grid(path)
    if meta.get("kind") != "empirical-limit-shape" or columns != SHAPE_COLUMNS:
        raise FormatError("not an empirical limit shape grid")
    centers = np.array([float(t) for t in meta["centers"].split()])
    size = len(centers)
    n, N = int(meta["n"]), int(meta["N"])
    psi = np.full((size, size), np.nan)
    se = np.full((size, size), np.nan)
    for a, b, x1, x2, p, s in rows:
        a, b = int(a), int(b)
        psi[a, b], se[a, b] = p, s
    spacing = int(meta["spacing"])
    cell = int(meta["cell"])
    grad = _gradient(psi, spacing, cell / (2 * n * N))
    face = np.full((2 * N + 1, 2 * N + 1), np.nan)
    return EmpiricalShape(n, N, int(meta["samples"]), int(meta["seed"]), cell, spacing, centers,
                          centers.copy(), psi, se, grad, face, meta.get("weights_sha256", ""))
