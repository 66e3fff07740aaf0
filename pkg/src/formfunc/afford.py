"""Deterministic geometric affordance tests.

Supportability lowers a rigid cube footprint onto the column heightmap and
asks whether the contact polygon stably holds the cube; containability
drops spheres into the shape until they overflow and reports the packed
volume against the occupied bounding box.  Both are exact, seed-free
stand-ins for dynamic drop experiments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grids import VoxelGrid

COLLISION_EPS = 1e-9


@dataclass
class CubeProbe:
    """Cube dropped onto the shape: 0.1 m^3 and 1 kg by default."""

    side: float = 0.1 ** (1.0 / 3.0)
    mass: float = 1.0
    flatness_tol: int = 1

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("probe side must be > 0")
        if self.mass <= 0:
            raise ValueError("probe mass must be > 0")


@dataclass
class SupportabilityMap:
    grid_dim: int
    footprint: int
    supported: np.ndarray  # bool, indexed [x0, z0] over probe positions

    def __post_init__(self):
        self.supported = np.asarray(self.supported, dtype=bool)
        lattice = self.grid_dim - self.footprint + 1
        if self.supported.shape != (lattice, lattice):
            raise ValueError("field dimensions do not match the probe lattice")

    def any_supported(self) -> bool:
        return bool(self.supported.any())

    def to_json_dict(self) -> dict:
        return {
            "grid_dim": self.grid_dim,
            "footprint": self.footprint,
            "shape": list(self.supported.shape),
            "supported": self.supported.ravel().astype(int).tolist(),
        }

    def to_pgm(self) -> str:
        """P2 image, white = supported; rows are z, columns are x."""
        rows, cols = self.supported.shape[1], self.supported.shape[0]
        lines = ["P2", f"{cols} {rows}", "255"]
        for z in range(rows):
            lines.append(" ".join("255" if self.supported[x, z] else "0" for x in range(cols)))
        return "\n".join(lines) + "\n"


@dataclass
class ContainabilityResult:
    spheres_placed: int
    contained_volume: float
    bounding_box_volume: float
    ratio: float
    centers: list[tuple[float, float, float]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "spheres_placed": self.spheres_placed,
            "contained_volume": self.contained_volume,
            "bounding_box_volume": self.bounding_box_volume,
            "ratio": self.ratio,
        }


def heightmap(grid: VoxelGrid) -> np.ndarray:
    """Highest occupied y index per (x, z) column; -1 for empty columns."""
    occ = grid.binary()
    ys = np.arange(grid.dim).reshape(1, -1, 1)
    return np.where(occ.any(axis=1), (occ * (ys + 1)).max(axis=1) - 1, -1)


def _hull(points: np.ndarray) -> list[np.ndarray]:
    """Monotone-chain convex hull, counterclockwise, collinear points dropped."""
    pts = sorted({(int(p[0]), int(p[1])) for p in points})
    if len(pts) < 3:
        return [np.array(p) for p in pts]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return [np.array(p) for p in hull]


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _strictly_inside(point, hull) -> bool:
    if len(hull) < 3:
        return False
    return all(
        _cross(hull[i], hull[(i + 1) % len(hull)], point) > 0 for i in range(len(hull))
    )


def probe_footprint(grid: VoxelGrid, probe: CubeProbe) -> int:
    return max(1, round(probe.side / grid.voxel_size()))


def supportability_test(grid: VoxelGrid, probe: CubeProbe) -> SupportabilityMap:
    """Map of probe positions where the lowered cube rests stably.

    The cube contacts the columns within ``flatness_tol`` of the footprint
    maximum; it is supported iff those contact points span a full 2D convex
    hull with the footprint centroid strictly inside.  Coordinates are
    doubled to keep all predicates in exact integer arithmetic.
    """
    f = probe_footprint(grid, probe)
    if f > grid.dim:
        raise ValueError(f"probe footprint {f} exceeds grid dim {grid.dim}")
    h = heightmap(grid)
    lattice = grid.dim - f + 1
    supported = np.zeros((lattice, lattice), dtype=bool)
    tol = probe.flatness_tol

    for x0 in range(lattice):
        for z0 in range(lattice):
            window = h[x0 : x0 + f, z0 : z0 + f]
            top = int(window.max())
            if top < 0:
                continue  # nothing under the footprint
            contact = np.argwhere(window >= top - tol)
            spread = top - int(window[tuple(contact.T)].min())
            if spread > tol:
                continue
            # doubled coordinates: cell centers at odd integers
            points = 2 * contact + 1
            centroid = (f, f)  # doubled (x0 + f/2, z0 + f/2) relative to window
            if _strictly_inside(centroid, _hull(points)):
                supported[x0, z0] = True
    return SupportabilityMap(grid_dim=grid.dim, footprint=f, supported=supported)


def containability_test(grid: VoxelGrid, sphere_radius: float | None = None) -> ContainabilityResult:
    """Greedy sphere drop: fill the shape until a sphere would overflow.

    Spheres descend along -y on a one-per-voxel (x, z) lattice anchored at
    the occupied bounding box (plus the sphere radius); each settles where
    it first touches occupied cells or already-placed spheres.  Placement
    stops once the lowest reachable resting center is no longer below the
    shape's top face.
    """
    if sphere_radius is not None and sphere_radius <= 0:
        raise ValueError("sphere_radius must be > 0")
    vox = grid.voxel_size()
    r = (sphere_radius / vox) if sphere_radius is not None else grid.dim / 16.0

    occupied = grid.occupied_indices()
    if len(occupied) == 0:
        return ContainabilityResult(0, 0.0, 0.0, 0.0)
    lo = occupied.min(axis=0).astype(float)
    hi = occupied.max(axis=0).astype(float) + 1.0
    bbox_volume = float(np.prod((hi - lo) * vox))
    top_face = hi[1]

    result_empty = ContainabilityResult(0, 0.0, bbox_volume, 0.0)
    xs = _drop_lattice(lo[0] + r, hi[0] - r)
    zs = _drop_lattice(lo[2] + r, hi[2] - r)
    if not len(xs) or not len(zs):
        return result_empty

    cells = occupied.astype(float)
    r_eff2 = max(r - COLLISION_EPS, 0.0) ** 2

    # per-candidate resting height against static voxels (None: falls through)
    static_rest = {}
    for x in xs:
        for z in zs:
            dx = np.maximum(cells[:, 0] - x, 0) + np.maximum(x - (cells[:, 0] + 1), 0)
            dz = np.maximum(cells[:, 2] - z, 0) + np.maximum(z - (cells[:, 2] + 1), 0)
            d2 = dx**2 + dz**2
            near = d2 < r_eff2
            if not near.any():
                continue
            m = np.sqrt(r_eff2 - d2[near])
            static_rest[(x, z)] = float((cells[near, 1] + 1.0 + m).max())

    placed: list[np.ndarray] = []
    rr2 = max(2 * r - COLLISION_EPS, 0.0) ** 2
    while True:
        best = None
        for x in xs:
            for z in zs:
                rest = static_rest.get((x, z))
                for c in placed:
                    d2 = (c[0] - x) ** 2 + (c[2] - z) ** 2
                    if d2 < rr2:
                        on_sphere = c[1] + math.sqrt(rr2 - d2)
                        rest = on_sphere if rest is None else max(rest, on_sphere)
                if rest is None:
                    continue
                key = (rest, x, z)
                if best is None or key < best:
                    best = key
        if best is None or best[0] >= top_face:
            break
        rest, x, z = best
        placed.append(np.array([x, rest, z]))

    volume = len(placed) * (4.0 / 3.0) * math.pi * (r * vox) ** 3
    return ContainabilityResult(
        spheres_placed=len(placed),
        contained_volume=volume,
        bounding_box_volume=bbox_volume,
        ratio=volume / bbox_volume,
        centers=[tuple(float(v) for v in c) for c in placed],
    )


def _drop_lattice(lo: float, hi: float) -> np.ndarray:
    if hi < lo - 1e-12:
        return np.array([])
    n = int(math.floor(hi - lo + 1e-12)) + 1
    return lo + 1.0 * np.arange(n)


def support_report_json(smap: SupportabilityMap) -> str:
    return json.dumps({"schema_version": 1, **smap.to_json_dict()}, sort_keys=True)


def contain_report_json(result: ContainabilityResult) -> str:
    return json.dumps({"schema_version": 1, **result.to_json_dict()}, sort_keys=True)
