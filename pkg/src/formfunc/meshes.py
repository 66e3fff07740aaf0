"""Indexed triangle meshes, OFF parsing and OBJ output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OffFormatError(ValueError):
    """Raised on malformed OFF input, with the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class TriMesh:
    """Triangle mesh with shared vertices.

    ``vertices`` is float64 (n, 3) in meters; ``triangles`` is int64 (m, 3)
    of vertex indices.  A triangle never repeats a vertex index.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles):
            if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
                raise ValueError("triangle index out of vertex range")
            t = self.triangles
            if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
                raise ValueError("triangle repeats a vertex index")

    @classmethod
    def empty(cls) -> "TriMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """(min, max) corners over vertices referenced by triangles."""
        if self.is_empty():
            raise ValueError("empty mesh has no bounds")
        used = self.vertices[np.unique(self.triangles)]
        return used.min(axis=0), used.max(axis=0)

    def triangle_vertices(self) -> np.ndarray:
        """(m, 3, 3) array of per-triangle corner coordinates."""
        return self.vertices[self.triangles]


def parse_off(text: str) -> TriMesh:
    """Parse an OFF document into a TriMesh.

    Polygonal faces with more than three vertices are fan-triangulated from
    their first vertex.  Comment lines (#) and blank lines are skipped.
    Errors carry the 1-based line number of the offending line.
    """
    lines = text.splitlines()
    # (line_no, tokens) for non-blank, non-comment lines
    content = []
    for i, raw in enumerate(lines, start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            content.append((i, stripped))

    if not content:
        raise OffFormatError(1, "empty document, expected OFF header")

    pos = 0
    line_no, header = content[pos]
    counts_tokens = None
    if header == "OFF":
        pos += 1
    elif header.startswith("OFF"):
        # single-line variant "OFF nv nf ne"
        rest = header[3:].split()
        if rest:
            counts_tokens = (line_no, rest)
            pos += 1
        else:
            pos += 1
    else:
        raise OffFormatError(line_no, f"missing OFF header, got {header.split()[0]!r}")

    if counts_tokens is None:
        if pos >= len(content):
            raise OffFormatError(line_no, "missing vertex/face count line")
        counts_tokens = (content[pos][0], content[pos][1].split())
        pos += 1

    cline, ctok = counts_tokens
    if len(ctok) < 2:
        raise OffFormatError(cline, "count line needs at least vertex and face counts")
    try:
        n_vertices, n_faces = int(ctok[0]), int(ctok[1])
    except ValueError:
        raise OffFormatError(cline, f"counts are not integers: {' '.join(ctok)}")
    if n_vertices < 0 or n_faces < 0:
        raise OffFormatError(cline, "negative counts")

    if pos + n_vertices > len(content):
        raise OffFormatError(
            content[-1][0], f"declared {n_vertices} vertices, document ends early"
        )
    vertices = np.zeros((n_vertices, 3))
    for v in range(n_vertices):
        vline, vtext = content[pos + v]
        tok = vtext.split()
        if len(tok) < 3:
            raise OffFormatError(vline, f"vertex needs 3 coordinates, got {len(tok)}")
        try:
            vertices[v] = [float(tok[0]), float(tok[1]), float(tok[2])]
        except ValueError:
            raise OffFormatError(vline, f"bad vertex coordinates: {vtext}")
    pos += n_vertices

    if pos + n_faces > len(content):
        raise OffFormatError(
            content[-1][0], f"declared {n_faces} faces, document ends early"
        )
    triangles = []
    for f in range(n_faces):
        fline, ftext = content[pos + f]
        tok = ftext.split()
        try:
            n = int(tok[0])
        except (ValueError, IndexError):
            raise OffFormatError(fline, f"bad face line: {ftext}")
        if n < 3:
            raise OffFormatError(fline, f"face needs >= 3 vertices, got {n}")
        if len(tok) < 1 + n:
            raise OffFormatError(fline, f"face declares {n} vertices, line has fewer")
        try:
            idx = [int(t) for t in tok[1 : 1 + n]]
        except ValueError:
            raise OffFormatError(fline, f"bad face indices: {ftext}")
        for i in idx:
            if i < 0 or i >= n_vertices:
                raise OffFormatError(fline, f"vertex index {i} out of range 0..{n_vertices - 1}")
        if len(set(idx)) != n:
            raise OffFormatError(fline, "face repeats a vertex index")
        # fan triangulation from the first vertex
        for k in range(1, n - 1):
            triangles.append((idx[0], idx[k], idx[k + 1]))

    return TriMesh(vertices, np.array(triangles, dtype=np.int64).reshape(-1, 3))


def write_obj(mesh: TriMesh) -> str:
    """Serialize a mesh as Wavefront OBJ text (1-based face indices)."""
    out = []
    for v in mesh.vertices:
        out.append(f"v {v[0]!r} {v[1]!r} {v[2]!r}")
    for t in mesh.triangles:
        out.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    return "\n".join(out) + "\n"
