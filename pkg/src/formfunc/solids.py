"""Mass properties of voxel solids and SDF/OBJ export for simulators."""

from __future__ import annotations

import os
from dataclasses import dataclass
from xml.etree import ElementTree as ET

import numpy as np

from .grids import VoxelGrid
from .meshes import TriMesh, write_obj


@dataclass
class InertiaResult:
    mass: float
    center_of_mass: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        self.center_of_mass = np.asarray(self.center_of_mass, dtype=np.float64).reshape(3)
        self.inertia = np.asarray(self.inertia, dtype=np.float64).reshape(3, 3)


def inertia_of(grid: VoxelGrid, mass: float) -> InertiaResult:
    """Inertia tensor of the occupied voxels, about their center of mass.

    ``mass`` is spread uniformly over occupied voxels; each voxel
    contributes its own solid-cube moment plus the parallel-axis point
    term, which makes the sum exact for solid blocks.
    """
    if mass <= 0:
        raise ValueError(f"mass must be > 0, got {mass}")
    idx = grid.occupied_indices()
    if len(idx) == 0:
        raise ValueError("inertia of an empty grid is undefined")

    s = grid.voxel_size()
    centers = (idx + 0.5) * s + np.asarray(grid.translate)
    m_vox = mass / len(idx)
    com = centers.mean(axis=0)

    r = centers - com
    r2 = (r**2).sum(axis=1)
    inertia = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                inertia[i, j] = m_vox * (r2 - r[:, i] ** 2).sum()
            else:
                inertia[i, j] = -m_vox * (r[:, i] * r[:, j]).sum()
    # per-voxel solid cube about its own center
    inertia += np.eye(3) * (mass * s**2 / 6.0)
    return InertiaResult(mass=float(mass), center_of_mass=com, inertia=inertia)


def sdf_document(mesh: TriMesh, inertia: InertiaResult, name: str, mesh_uri: str | None = None) -> str:
    """Build an SDF XML document for one rigid link with the given mesh.

    ``mesh_uri`` defaults to ``<name>.obj``, the sidecar written by
    :func:`export_sdf`.
    """
    if mesh.is_empty():
        raise ValueError("cannot export an empty mesh")
    uri = mesh_uri or f"{name}.obj"

    sdf = ET.Element("sdf", version="1.6")
    model = ET.SubElement(sdf, "model", name=name)
    ET.SubElement(model, "static").text = "false"
    link = ET.SubElement(model, "link", name=f"{name}_link")

    inertial = ET.SubElement(link, "inertial")
    com = inertia.center_of_mass
    ET.SubElement(inertial, "pose").text = f"{com[0]} {com[1]} {com[2]} 0 0 0"
    ET.SubElement(inertial, "mass").text = _num(inertia.mass)
    tensor = ET.SubElement(inertial, "inertia")
    I = inertia.inertia
    for tag, value in (
        ("ixx", I[0, 0]), ("ixy", I[0, 1]), ("ixz", I[0, 2]),
        ("iyy", I[1, 1]), ("iyz", I[1, 2]), ("izz", I[2, 2]),
    ):
        ET.SubElement(tensor, tag).text = _num(value)

    for section in ("collision", "visual"):
        el = ET.SubElement(link, section, name=f"{name}_{section}")
        geom = ET.SubElement(el, "geometry")
        mesh_el = ET.SubElement(geom, "mesh")
        ET.SubElement(mesh_el, "uri").text = uri

    ET.indent(sdf)
    return ET.tostring(sdf, encoding="unicode", xml_declaration=False) + "\n"


def _num(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else repr(float(x))


def export_sdf(mesh: TriMesh, inertia: InertiaResult, name: str, directory) -> str:
    """Write ``<name>.sdf`` plus the OBJ sidecar and return the SDF text."""
    os.makedirs(directory, exist_ok=True)
    obj_path = os.path.join(directory, f"{name}.obj")
    sdf_path = os.path.join(directory, f"{name}.sdf")
    with open(obj_path, "w") as f:
        f.write(write_obj(mesh))
    text = sdf_document(mesh, inertia, name)
    with open(sdf_path, "w") as f:
        f.write(text)
    return text
