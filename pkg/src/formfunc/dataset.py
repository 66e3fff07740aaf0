"""Labeled shape corpus: procedural generators, augmentation, OFF ingestion.

Four desk-scale classes stand in for a full household-object dataset:
table, chair, tub and monitor, each mapped to the functionality labels its
form provides.  All samples are axis-aligned, centered and sparse.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .binvox import read_binvox_file, write_binvox_file
from .grids import VoxelGrid, rotate_quarter
from .meshes import OffFormatError, parse_off
from .voxelize import voxelize

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


@dataclass
class ClassSpec:
    class_label: str
    affordances: frozenset[str]
    grid_dim: int = 32
    # inclusive (lo, hi) ranges in voxels, interpreted by the generator
    params: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        self.affordances = frozenset(self.affordances)
        if not self.affordances:
            raise ValueError("affordances must be non-empty")
        for name, (lo, hi) in self.params.items():
            if lo > hi:
                raise ValueError(f"degenerate range for {name}: ({lo}, {hi})")

    def rng_range(self, rng, name: str) -> int:
        lo, hi = self.params[name]
        return int(rng.integers(lo, hi + 1))


@dataclass
class LabeledShape:
    grid: VoxelGrid
    class_label: str
    affordances: frozenset[str]
    source: str = "procedural"

    def __post_init__(self):
        self.affordances = frozenset(self.affordances)
        if not self.affordances:
            raise ValueError("affordances must be non-empty")
        if self.source not in ("procedural", "external"):
            raise ValueError(f"unknown source {self.source!r}")


def default_class_specs(dim: int = 32) -> dict[str, ClassSpec]:
    """The registered class table: label -> spec with affordance labels."""
    if dim < 8:
        raise ValueError("procedural classes need dim >= 8")
    q = dim // 4

    def rng(lo, hi):
        return (max(lo, 1), max(hi, lo, 1))

    return {
        "table": ClassSpec(
            "table",
            {"support-ability"},
            dim,
            {
                "extent": rng(2 * q, 3 * q),
                "slab_thickness": (1, 2),
                "leg_height": rng(q, 2 * q - 2),
                "leg_side": (1, 2),
            },
        ),
        "chair": ClassSpec(
            "chair",
            {"sit-ability", "lean-ability"},
            dim,
            {
                "extent": rng(q + 2, 2 * q),
                "slab_thickness": (1, 2),
                "leg_height": rng(q - 2, q + 2),
                "leg_side": (1, 2),
                "back_height": rng(q, 2 * q - 2),
            },
        ),
        "tub": ClassSpec(
            "tub",
            {"contain-ability", "wash-ability"},
            dim,
            {
                "extent": rng(2 * q, 3 * q),
                "wall_thickness": (1, 2),
                "cavity_depth": rng(q - 1, 2 * q - 4),
            },
        ),
        "monitor": ClassSpec(
            "monitor",
            {"display-ability"},
            dim,
            {
                "extent": rng(2 * q, 3 * q),
                "panel_thickness": (1, 2),
                "stand_height": rng(2, q // 2 + 2),
            },
        ),
    }


def class_for_affordance(affordance: str, specs: dict[str, ClassSpec]) -> list[str]:
    return sorted(label for label, s in specs.items() if affordance in s.affordances)


def _center(occ: np.ndarray) -> np.ndarray:
    """Shift the occupied bounding box to the center of the grid."""
    idx = np.argwhere(occ)
    if len(idx) == 0:
        return occ
    lo, hi = idx.min(axis=0), idx.max(axis=0)
    shift = ((occ.shape[0] - 1 - hi - lo) // 2).astype(int)
    return np.roll(occ, shift, axis=(0, 1, 2))


def _build_table(occ, rng, spec):
    d = spec.grid_dim
    w = spec.rng_range(rng, "extent")
    dp = spec.rng_range(rng, "extent")
    t = spec.rng_range(rng, "slab_thickness")
    lh = spec.rng_range(rng, "leg_height")
    ls = spec.rng_range(rng, "leg_side")
    x0, z0 = (d - w) // 2, (d - dp) // 2
    occ[x0 : x0 + w, lh : lh + t, z0 : z0 + dp] = 1
    for cx in (x0, x0 + w - ls):
        for cz in (z0, z0 + dp - ls):
            occ[cx : cx + ls, 0:lh, cz : cz + ls] = 1


def _build_chair(occ, rng, spec):
    d = spec.grid_dim
    w = spec.rng_range(rng, "extent")
    t = spec.rng_range(rng, "slab_thickness")
    lh = spec.rng_range(rng, "leg_height")
    ls = spec.rng_range(rng, "leg_side")
    bh = spec.rng_range(rng, "back_height")
    x0, z0 = (d - w) // 2, (d - w) // 2
    occ[x0 : x0 + w, lh : lh + t, z0 : z0 + w] = 1  # seat
    for cx in (x0, x0 + w - ls):
        for cz in (z0, z0 + w - ls):
            occ[cx : cx + ls, 0:lh, cz : cz + ls] = 1
    top = min(lh + t + bh, d)
    occ[x0 : x0 + w, lh + t : top, z0 : z0 + t] = 1  # backrest


def _build_tub(occ, rng, spec):
    d = spec.grid_dim
    w = spec.rng_range(rng, "extent")
    dp = spec.rng_range(rng, "extent")
    wt = spec.rng_range(rng, "wall_thickness")
    depth = spec.rng_range(rng, "cavity_depth")
    x0, z0 = (d - w) // 2, (d - dp) // 2
    height = depth + wt
    occ[x0 : x0 + w, 0:height, z0 : z0 + dp] = 1
    occ[x0 + wt : x0 + w - wt, wt:height, z0 + wt : z0 + dp - wt] = 0  # cavity


def _build_monitor(occ, rng, spec):
    d = spec.grid_dim
    w = spec.rng_range(rng, "extent")
    ph = spec.rng_range(rng, "extent")
    t = spec.rng_range(rng, "panel_thickness")
    sh = spec.rng_range(rng, "stand_height")
    x0 = (d - w) // 2
    z0 = d // 2
    base_w = max(w // 3, 2)
    bx = (d - base_w) // 2
    occ[bx : bx + base_w, 0:1, z0 - 2 : z0 + 2] = 1  # base plate
    occ[d // 2 - 1 : d // 2 + 1, 1 : 1 + sh, z0 : z0 + t] = 1  # neck
    top = min(1 + sh + ph, d)
    occ[x0 : x0 + w, 1 + sh : top, z0 : z0 + t] = 1  # panel


_BUILDERS = {
    "table": _build_table,
    "chair": _build_chair,
    "tub": _build_tub,
    "monitor": _build_monitor,
}


def generate_class(spec: ClassSpec, count: int, rng_seed: int) -> list[LabeledShape]:
    """Deterministically generate `count` centered samples of one class."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if spec.class_label not in _BUILDERS:
        raise ValueError(f"no generator registered for class {spec.class_label!r}")
    build = _BUILDERS[spec.class_label]
    rng = np.random.default_rng(rng_seed)
    shapes = []
    for _ in range(count):
        occ = np.zeros((spec.grid_dim,) * 3, dtype=np.uint8)
        build(occ, rng, spec)
        if not occ.any():
            raise ValueError(f"generator for {spec.class_label} produced an empty grid")
        grid = VoxelGrid(spec.grid_dim, _center(occ))
        shapes.append(LabeledShape(grid, spec.class_label, spec.affordances))
    return shapes


def augment(shapes: list[LabeledShape]) -> list[LabeledShape]:
    """Each shape plus its three quarter-turn rotations, labels preserved."""
    if not shapes:
        raise ValueError("nothing to augment")
    out = []
    for s in shapes:
        for k in range(4):
            grid = s.grid if k == 0 else rotate_quarter(s.grid, k)
            out.append(LabeledShape(grid, s.class_label, s.affordances, s.source))
    return out


def ingest_off_directory(
    path, dim: int, specs: dict[str, ClassSpec] | None = None
) -> tuple[list[LabeledShape], int]:
    """Voxelize every OFF file under per-class subdirectories.

    Returns (shapes, skipped_count); unparseable files are skipped with a
    warning, unknown class directories are rejected.
    """
    specs = specs if specs is not None else default_class_specs(dim)
    shapes: list[LabeledShape] = []
    skipped = 0
    for entry in sorted(os.listdir(path)):
        class_dir = os.path.join(path, entry)
        if not os.path.isdir(class_dir):
            continue
        if entry not in specs:
            raise ValueError(f"unknown class directory {entry!r}")
        spec = specs[entry]
        for name in sorted(os.listdir(class_dir)):
            if not name.endswith(".off"):
                continue
            full = os.path.join(class_dir, name)
            try:
                with open(full) as f:
                    mesh = parse_off(f.read())
                grid = voxelize(mesh, dim)
            except (OffFormatError, ValueError) as exc:
                log.warning("skipping %s: %s", full, exc)
                skipped += 1
                continue
            shapes.append(LabeledShape(grid, entry, spec.affordances, source="external"))
    return shapes, skipped


def split(
    shapes: list[LabeledShape], train_fraction: float, rng_seed: int
) -> tuple[list[LabeledShape], list[LabeledShape]]:
    """Stratified train/held-out split, deterministic given the seed."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    by_class: dict[str, list[int]] = {}
    for i, s in enumerate(shapes):
        by_class.setdefault(s.class_label, []).append(i)
    rng = np.random.default_rng(rng_seed)
    train_idx: list[int] = []
    held_idx: list[int] = []
    for label in sorted(by_class):
        idx = by_class[label]
        if len(idx) < 2:
            raise ValueError(f"class {label!r} has fewer than 2 samples")
        perm = rng.permutation(len(idx))
        n_train = round(train_fraction * len(idx))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.extend(idx[i] for i in perm[:n_train])
        held_idx.extend(idx[i] for i in perm[n_train:])
    return [shapes[i] for i in sorted(train_idx)], [shapes[i] for i in sorted(held_idx)]


def save_corpus(shapes: list[LabeledShape], directory, seed: int | None = None) -> None:
    """Write one binvox per shape under class subdirectories plus a manifest."""
    os.makedirs(directory, exist_ok=True)
    counts: dict[str, int] = {}
    classes: dict[str, dict] = {}
    dims = set()
    for s in shapes:
        n = counts.get(s.class_label, 0)
        counts[s.class_label] = n + 1
        class_dir = os.path.join(directory, s.class_label)
        os.makedirs(class_dir, exist_ok=True)
        write_binvox_file(s.grid, os.path.join(class_dir, f"{s.class_label}_{n:04d}.binvox"))
        classes[s.class_label] = {
            "affordances": sorted(s.affordances),
            "count": counts[s.class_label],
            "source": s.source,
        }
        dims.add(s.grid.dim)
    manifest = {
        "schema_version": 1,
        "dim": sorted(dims)[0] if len(dims) == 1 else sorted(dims),
        "seed": seed,
        "classes": {k: classes[k] for k in sorted(classes)},
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_corpus(directory) -> tuple[list[LabeledShape], dict]:
    """Read a corpus written by :func:`save_corpus`."""
    with open(os.path.join(directory, MANIFEST_NAME)) as f:
        manifest = json.load(f)
    shapes = []
    for label in sorted(manifest["classes"]):
        info = manifest["classes"][label]
        class_dir = os.path.join(directory, label)
        for name in sorted(os.listdir(class_dir)):
            if not name.endswith(".binvox"):
                continue
            grid = read_binvox_file(os.path.join(class_dir, name))
            shapes.append(
                LabeledShape(
                    grid, label, frozenset(info["affordances"]), info.get("source", "procedural")
                )
            )
    return shapes, manifest
