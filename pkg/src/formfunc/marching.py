"""Iso-surface extraction from voxel volumes with a 256-case cube lookup.

Cells are built on the lattice of voxel centers of a one-voxel zero-padded
field, so every iso-surface is closed.  The per-configuration triangulation
table is generated once at import: crossing points on each cube face are
paired with a fixed rule (each inside corner of an ambiguous face is cut
off separately), which makes adjacent cells agree on shared faces and
guarantees watertight output for any input.
"""

from __future__ import annotations

import numpy as np

from .grids import VoxelGrid
from .meshes import TriMesh

# cube corner c has offsets (c & 1, c >> 1 & 1, c >> 2 & 1)
_CORNER_OFFSET = np.array([[c & 1, (c >> 1) & 1, (c >> 2) & 1] for c in range(8)])

# 12 edges as (low corner, high corner), grouped by axis
_EDGES: list[tuple[int, int]] = []
for _axis in range(3):
    _bit = 1 << _axis
    for _c in range(8):
        if not _c & _bit:
            _EDGES.append((_c, _c | _bit))
_EDGE_AXIS = [0] * 4 + [1] * 4 + [2] * 4

# 6 faces: (axis, side) -> corner set
_FACES = [
    frozenset(c for c in range(8) if ((c >> axis) & 1) == side)
    for axis in range(3)
    for side in (0, 1)
]


def _face_segments(inside: tuple[bool, ...], face: frozenset) -> list[tuple[int, int]]:
    """Pair the crossing edges of one face into surface boundary segments."""
    face_edges = [
        i for i, (a, b) in enumerate(_EDGES) if a in face and b in face
    ]
    crossing = [i for i in face_edges if inside[_EDGES[i][0]] != inside[_EDGES[i][1]]]
    if len(crossing) == 0:
        return []
    if len(crossing) == 2:
        return [(crossing[0], crossing[1])]
    # ambiguous face: two diagonal inside corners; cut each off on its own
    segments = []
    for corner in face:
        if inside[corner]:
            adjacent = [i for i in crossing if corner in _EDGES[i]]
            segments.append((adjacent[0], adjacent[1]))
    return segments


def _loops_for_config(config: int) -> tuple[tuple[int, ...], ...]:
    inside = tuple(bool(config & (1 << c)) for c in range(8))
    adjacency: dict[int, list[int]] = {}
    for face in _FACES:
        for e1, e2 in _face_segments(inside, face):
            adjacency.setdefault(e1, []).append(e2)
            adjacency.setdefault(e2, []).append(e1)

    loops = []
    seen: set[int] = set()
    for start in sorted(adjacency):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = adjacency[cur][0] if adjacency[cur][0] != prev else adjacency[cur][1]
            if nxt == start:
                break
            loop.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        loops.append(_orient_outward(loop, inside))
    return tuple(loops)


def _orient_outward(loop: list[int], inside: tuple[bool, ...]) -> tuple[int, ...]:
    """Order the loop so triangle normals point from inside to outside."""
    pts = np.array(
        [(_CORNER_OFFSET[_EDGES[e][0]] + _CORNER_OFFSET[_EDGES[e][1]]) / 2.0 for e in loop]
    )
    # Newell area vector
    normal = np.zeros(3)
    for i in range(len(pts)):
        a, b = pts[i], pts[(i + 1) % len(pts)]
        normal += np.cross(a, b)
    ins, outs = [], []
    for e in loop:
        a, b = _EDGES[e]
        ins.append(_CORNER_OFFSET[a] if inside[a] else _CORNER_OFFSET[b])
        outs.append(_CORNER_OFFSET[b] if inside[a] else _CORNER_OFFSET[a])
    outward = np.mean(outs, axis=0) - np.mean(ins, axis=0)
    d = float(normal @ outward)
    assert abs(d) > 1e-12, f"ambiguous loop orientation for config {inside}"
    return tuple(loop) if d > 0 else tuple(reversed(loop))


def _build_table() -> list[tuple[tuple[int, ...], ...]]:
    return [_loops_for_config(c) for c in range(256)]


LOOP_TABLE = _build_table()


def marching_cubes(grid: VoxelGrid, iso: float = 0.5) -> TriMesh:
    """Extract the iso-surface of a (binary or probability) grid as a mesh.

    Vertices are linearly interpolated along lattice edges and expressed in
    physical coordinates through the grid's translate/scale.  The field is
    zero-padded by one voxel so the surface is always closed; an empty grid
    yields an empty mesh.
    """
    if not 0.0 < iso < 1.0:
        raise ValueError(f"iso must be in (0, 1), got {iso}")
    field = np.pad(np.asarray(grid.occupancy, dtype=np.float64), 1)
    inside = field > iso

    n = field.shape[0]  # dim + 2 samples per axis -> dim + 1 cells
    # config id per cell, bit c set when corner c is inside
    config = np.zeros((n - 1,) * 3, dtype=np.uint16)
    for c in range(8):
        ox, oy, oz = _CORNER_OFFSET[c]
        config |= inside[ox : ox + n - 1, oy : oy + n - 1, oz : oz + n - 1].astype(np.uint16) << c

    cells = np.argwhere((config != 0) & (config != 255))
    if len(cells) == 0:
        return TriMesh.empty()

    vox = grid.scale / grid.dim
    origin = np.asarray(grid.translate)

    vertex_ids: dict[tuple[int, int, int, int], int] = {}
    vertices: list[np.ndarray] = []
    triangles: list[tuple[int, int, int]] = []

    def vertex_on_edge(cell, edge_idx: int) -> int:
        a, b = _EDGES[edge_idx]
        pa = cell + _CORNER_OFFSET[a]
        key = (int(pa[0]), int(pa[1]), int(pa[2]), _EDGE_AXIS[edge_idx])
        vid = vertex_ids.get(key)
        if vid is not None:
            return vid
        pb = cell + _CORNER_OFFSET[b]
        va = field[pa[0], pa[1], pa[2]]
        vb = field[pb[0], pb[1], pb[2]]
        t = (iso - va) / (vb - va)
        t = min(max(t, 1e-6), 1.0 - 1e-6)
        # sample point p sits at the center of original voxel p-1
        coord = (pa + t * (pb - pa) - 0.5) * vox + origin
        vid = len(vertices)
        vertices.append(coord)
        vertex_ids[key] = vid
        return vid

    for cell in cells:
        for loop in LOOP_TABLE[config[cell[0], cell[1], cell[2]]]:
            ids = [vertex_on_edge(cell, e) for e in loop]
            for k in range(1, len(ids) - 1):
                triangles.append((ids[0], ids[k], ids[k + 1]))

    return TriMesh(np.array(vertices), np.array(triangles, dtype=np.int64))


def surface_statistics(mesh: TriMesh) -> dict:
    """V/E/F counts, Euler characteristic and boundary-edge count."""
    f = len(mesh.triangles)
    v = len(mesh.vertices)
    edge_use: dict[tuple[int, int], int] = {}
    for a, b, c in mesh.triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (min(i, j), max(i, j))
            edge_use[key] = edge_use.get(key, 0) + 1
    e = len(edge_use)
    boundary = sum(1 for n in edge_use.values() if n != 2)
    return {
        "vertices": v,
        "edges": e,
        "faces": f,
        "euler_characteristic": v - e + f,
        "open_edges": boundary,
    }
