"""Raster (PPM) and vector (SVG) pictures of Aztec tilings.

Each dimer is drawn as the domino made of the two unit squares centred at
its endpoints.  Dominoes are coloured by orientation and by the side of the
white endpoint, giving four classes; a frozen corner is a single class.
"""

from __future__ import annotations

import numpy as np

# class codes: 0 empty, then horizontal white-west/east, vertical white-south/north
EMPTY, H_WHITE_WEST, H_WHITE_EAST, V_WHITE_SOUTH, V_WHITE_NORTH = range(5)

PALETTE = np.array(
    [
        [255, 255, 255],
        [215, 48, 39],
        [69, 117, 180],
        [26, 152, 80],
        [254, 224, 139],
    ],
    dtype=np.uint8,
)


def domino_classes(config, time_parity=None):
    """Per-vertex class codes (both endpoints of a dimer get its class)."""
    p = config.time % 2 if time_parity is None else time_parity
    x0, y0 = config.region.origin
    sx, sy = config.region.shape
    X, Y = np.meshgrid(np.arange(sx) + x0, np.arange(sy) + y0, indexing="ij")
    white = (X + Y - p) % 2 == 0
    out = np.zeros((sx, sy), dtype=np.int8)
    h, v = np.asarray(config.hor), np.asarray(config.ver)
    hc = np.where(white, H_WHITE_WEST, H_WHITE_EAST)
    vc = np.where(white, V_WHITE_SOUTH, V_WHITE_NORTH)
    out[h] = hc[h]
    out[1:, :][h[:-1, :]] = hc[:-1, :][h[:-1, :]]
    out[v] = vc[v]
    out[:, 1:][v[:, :-1]] = vc[:, :-1][v[:, :-1]]
    return out


def ppm_bytes(config, scale=4, time_parity=None):
    """Binary PPM (P6) image, one ``scale`` x ``scale`` block per vertex, north up."""
    cls = domino_classes(config, time_parity)
    img = PALETTE[cls]  # (x, y, 3)
    img = np.transpose(img, (1, 0, 2))[::-1]  # rows top to bottom
    if scale > 1:
        img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    height, width = img.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img).tobytes()


def svg_text(config, scale=8, time_parity=None):
    """SVG with one rectangle per domino."""
    cls = domino_classes(config, time_parity)
    x0, y0 = config.region.origin
    sx, sy = config.region.shape
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{sx * scale}" height="{sy * scale}" '
        f'viewBox="0 0 {sx} {sy}">',
        f'<rect width="{sx}" height="{sy}" fill="white"/>',
    ]
    hor, ver = np.asarray(config.hor), np.asarray(config.ver)
    for x, y in zip(*np.nonzero(hor)):
        c = PALETTE[cls[x, y]]
        top = sy - 1 - y
        parts.append(f'<rect x="{x}" y="{top}" width="2" height="1" fill="rgb({c[0]},{c[1]},{c[2]})" '
                     'stroke="black" stroke-width="0.05"/>')
    for x, y in zip(*np.nonzero(ver)):
        c = PALETTE[cls[x, y]]
        top = sy - 2 - y
        parts.append(f'<rect x="{x}" y="{top}" width="1" height="2" fill="rgb({c[0]},{c[1]},{c[2]})" '
                     'stroke="black" stroke-width="0.05"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_tiling(config, path, fmt=None, scale=None, time_parity=None):
    """Write a PPM or SVG picture of ``config`` (format from ``fmt`` or the suffix)."""
    fmt = fmt or ("svg" if str(path).lower().endswith(".svg") else "ppm")
    if fmt == "svg":
        data = svg_text(config, scale or 8, time_parity).encode("utf-8")
    elif fmt == "ppm":
        data = ppm_bytes(config, scale or 4, time_parity)
    else:
        raise ValueError(f"unknown image format {fmt!r}")
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)
