"""binvox version-1 codec: run-length-encoded binary voxel volumes.

Serialization traverses the volume x fastest, then z, then y; runs are
(value, count) byte pairs with count in 1..255.  ``read_binvox`` is the
exact inverse of ``write_binvox``.
"""

from __future__ import annotations

import numpy as np

from .grids import VoxelGrid, unflatten


class BinvoxFormatError(ValueError):
    pass


def write_binvox(grid: VoxelGrid) -> bytes:
    """Encode a binary grid as binvox bytes."""
    t = grid.translate
    header = (
        "#binvox 1\n"
        f"dim {grid.dim} {grid.dim} {grid.dim}\n"
        f"translate {t[0]!r} {t[1]!r} {t[2]!r}\n"
        f"scale {grid.scale!r}\n"
        "data\n"
    ).encode("ascii")

    flat = grid.flat()
    if not np.isin(flat, (0, 1)).all():
        raise ValueError("binvox serialization requires binary occupancy")
    flat = flat.astype(np.uint8)

    out = bytearray(header)
    n = flat.size
    i = 0
    while i < n:
        value = flat[i]
        run = 1
        while i + run < n and run < 255 and flat[i + run] == value:
            run += 1
        out.append(int(value))
        out.append(run)
        i += run
    return bytes(out)


def read_binvox(data: bytes) -> VoxelGrid:
    """Decode binvox bytes produced by :func:`write_binvox` (or binvox 1)."""
    try:
        header_end = data.index(b"data\n") + len(b"data\n")
    except ValueError:
        raise BinvoxFormatError("missing 'data' line")
    header_lines = data[: header_end - 1].decode("ascii", errors="replace").splitlines()
    if not header_lines or not header_lines[0].startswith("#binvox"):
        raise BinvoxFormatError(f"bad magic line: {header_lines[0] if header_lines else ''!r}")
    tok = header_lines[0].split()
    if len(tok) != 2 or tok[1] != "1":
        raise BinvoxFormatError(f"unsupported binvox version: {header_lines[0]!r}")

    dim = None
    translate = (0.0, 0.0, 0.0)
    scale = 1.0
    for line in header_lines[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "dim":
            if len(parts) != 4:
                raise BinvoxFormatError(f"bad dim line: {line!r}")
            dx, dy, dz = (int(p) for p in parts[1:])
            if not (dx == dy == dz):
                raise BinvoxFormatError(f"non-cubic grid {dx}x{dy}x{dz} not supported")
            dim = dx
        elif parts[0] == "translate":
            translate = tuple(float(p) for p in parts[1:4])
        elif parts[0] == "scale":
            scale = float(parts[1])
        elif parts[0] == "data":
            break
        else:
            raise BinvoxFormatError(f"unknown header line: {line!r}")
    if dim is None:
        raise BinvoxFormatError("missing dim line")

    payload = data[header_end:]
    if len(payload) % 2 != 0:
        raise BinvoxFormatError("truncated stream: odd RLE payload length")
    pairs = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 2)
    values, counts = pairs[:, 0], pairs[:, 1]
    if np.any(counts == 0):
        raise BinvoxFormatError("zero run length")
    total = int(counts.sum())
    if total != dim**3:
        raise BinvoxFormatError(f"RLE totals {total} != dim^3 = {dim ** 3}")
    flat = np.repeat(values, counts)
    return VoxelGrid(dim, unflatten(flat, dim), translate, scale)


def read_binvox_file(path) -> VoxelGrid:
    with open(path, "rb") as f:
        return read_binvox(f.read())


def write_binvox_file(grid: VoxelGrid, path) -> None:
    with open(path, "wb") as f:
        f.write(write_binvox(grid))
