"""Cubic binary voxel grids and index-space operations on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class VoxelGrid:
    """Cubic occupancy volume with physical placement metadata.

    ``occupancy`` is indexed ``[x, y, z]`` with the y axis vertical.  The
    canonical flat serialization order (x fastest, then z, then y) used by
    the binvox codec is exposed through :meth:`flat`.  ``translate`` is the
    physical position of the cube's (0,0,0) corner and ``scale`` the
    physical edge length of the whole cube, so voxel index ``(i,j,k)`` has
    its cell center at ``translate + (index + 0.5) / dim * scale``.

    Occupancy is normally binary (uint8 0/1) but real-valued probability
    volumes in [0,1] (decoder output) are accepted everywhere a grid is not
    being serialized to binvox.
    """

    dim: int
    occupancy: np.ndarray
    translate: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.scale <= 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        occ = np.asarray(self.occupancy)
        if occ.shape != (self.dim,) * 3:
            if occ.size == self.dim**3 and occ.ndim == 1:
                occ = unflatten(occ, self.dim)
            else:
                raise ValueError(
                    f"occupancy shape {occ.shape} does not match dim {self.dim}"
                )
        self.occupancy = occ
        self.translate = tuple(float(t) for t in self.translate)
        self.scale = float(self.scale)

    @classmethod
    def empty(cls, dim, translate=(0.0, 0.0, 0.0), scale=1.0) -> "VoxelGrid":
        return cls(dim, np.zeros((dim,) * 3, dtype=np.uint8), translate, scale)

    @classmethod
    def full(cls, dim, translate=(0.0, 0.0, 0.0), scale=1.0) -> "VoxelGrid":
        return cls(dim, np.ones((dim,) * 3, dtype=np.uint8), translate, scale)

    def flat(self) -> np.ndarray:
        """Occupancy in canonical x-fastest, then z, then y order."""
        return np.ascontiguousarray(self.occupancy.transpose(1, 2, 0)).ravel()

    def binary(self, threshold: float = 0.5) -> np.ndarray:
        """Occupancy thresholded to uint8 0/1."""
        return (np.asarray(self.occupancy) > threshold).astype(np.uint8)

    def voxel_size(self) -> float:
        return self.scale / self.dim

    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.binary()))

    def occupied_indices(self) -> np.ndarray:
        """(n, 3) integer array of occupied (x, y, z) indices."""
        return np.argwhere(self.binary() > 0)

    def with_occupancy(self, occupancy: np.ndarray) -> "VoxelGrid":
        return VoxelGrid(self.dim, occupancy, self.translate, self.scale)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.translate == other.translate
            and self.scale == other.scale
            and np.array_equal(self.occupancy, other.occupancy)
        )


def unflatten(flat: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :meth:`VoxelGrid.flat`: canonical order back to [x,y,z]."""
    flat = np.asarray(flat)
    if flat.size != dim**3:
        raise ValueError(f"flat length {flat.size} != dim^3 = {dim ** 3}")
    return np.ascontiguousarray(flat.reshape(dim, dim, dim).transpose(2, 0, 1))


def rotate_quarter(grid: VoxelGrid, quarter_turns: int) -> VoxelGrid:
    """Rotate the grid by ``quarter_turns`` * 90 degrees about the vertical axis.

    The vertical axis is y.  One quarter turn maps centered index
    coordinates (u, w) in the (x, z) plane to (-w, u); dim, translate and
    scale are preserved.
    """
    if quarter_turns not in (0, 1, 2, 3):
        raise ValueError(f"quarter_turns must be in 0..3, got {quarter_turns}")
    occ = grid.occupancy
    for _ in range(quarter_turns):
        occ = np.flip(occ.transpose(2, 1, 0), axis=0)
    return grid.with_occupancy(np.ascontiguousarray(occ))


def occupancy_fraction(grid: VoxelGrid) -> float:
    """Occupied voxel count over dim^3."""
    return grid.occupied_count() / grid.dim**3
