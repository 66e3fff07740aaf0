"""Surface voxelization of triangle meshes by triangle/cell overlap."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .grids import VoxelGrid
from .meshes import TriMesh

# fraction of the cube edge the mesh bounding box is scaled to occupy
FIT_MARGIN = 0.9

_BOX_AXES = np.eye(3)


def triangle_box_overlap(tri: np.ndarray, box_center: np.ndarray, half_size) -> bool:
    """Separating-axis overlap test between one triangle and an AABB.

    ``tri`` is (3, 3); ``half_size`` a scalar or length-3 array.  Touching
    counts as overlap.
    """
    h = np.broadcast_to(np.asarray(half_size, dtype=np.float64), (3,))
    v = np.asarray(tri, dtype=np.float64) - np.asarray(box_center, dtype=np.float64)

    # box face normals
    lo, hi = v.min(axis=0), v.max(axis=0)
    if np.any(lo > h) or np.any(hi < -h):
        return False

    e = np.array([v[1] - v[0], v[2] - v[1], v[0] - v[2]])

    # triangle plane
    n = np.cross(e[0], e[1])
    r = float(np.abs(n) @ h)
    d = float(n @ v[0])
    if d > r or d < -r:
        return False

    # 9 edge cross-product axes
    for i in range(3):
        for j in range(3):
            axis = np.cross(_BOX_AXES[j], e[i])
            if not axis.any():
                continue
            p = v @ axis
            rad = float(np.abs(axis) @ h)
            if p.min() > rad or p.max() < -rad:
                return False
    return True


def mesh_to_grid_transform(mesh: TriMesh, dim: int):
    """Uniform scale + centering that fits the mesh bbox into the cube.

    Returns (translate, scale, to_voxel) where ``to_voxel`` maps physical
    points into voxel index coordinates of the grid and translate/scale are
    the VoxelGrid metadata making the mapping invertible.
    """
    lo, hi = mesh.bounds()
    extent = float((hi - lo).max())
    if extent <= 0:
        raise ValueError("degenerate mesh bounding box (zero extent in all axes)")
    # the cube's physical edge: bbox occupies FIT_MARGIN of it
    scale = extent / FIT_MARGIN
    center = (lo + hi) / 2.0
    translate = tuple(float(c) - scale / 2.0 for c in center)

    def to_voxel(points: np.ndarray) -> np.ndarray:
        return (np.asarray(points) - np.asarray(translate)) / scale * dim

    return translate, scale, to_voxel


def voxelize(mesh: TriMesh, dim: int, fill_interior: bool = False) -> VoxelGrid:
    """Surface-voxelize a mesh into a dim^3 grid.

    The mesh is uniformly scaled and centered so its bounding box occupies
    90% of the cube edge.  A voxel is occupied iff any triangle overlaps its
    cell.  ``fill_interior`` additionally floods enclosed cavities (off by
    default: training shapes are hollow shells).
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if mesh.is_empty():
        return VoxelGrid.empty(dim)

    translate, scale, to_voxel = mesh_to_grid_transform(mesh, dim)
    occ = np.zeros((dim,) * 3, dtype=np.uint8)

    tris = to_voxel(mesh.triangle_vertices())
    half = 0.5
    for tri in tris:
        lo = np.clip(np.floor(tri.min(axis=0) - 1e-9).astype(int), 0, dim - 1)
        hi = np.clip(np.ceil(tri.max(axis=0) + 1e-9).astype(int), 0, dim)
        for x in range(lo[0], hi[0]):
            for y in range(lo[1], hi[1]):
                for z in range(lo[2], hi[2]):
                    if occ[x, y, z]:
                        continue
                    center = np.array([x + 0.5, y + 0.5, z + 0.5])
                    if triangle_box_overlap(tri, center, half):
                        occ[x, y, z] = 1

    if fill_interior:
        occ = ndimage.binary_fill_holes(occ).astype(np.uint8)

    return VoxelGrid(dim, occ, translate, scale)
