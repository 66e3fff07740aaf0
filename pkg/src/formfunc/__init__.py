"""Voxel shape VAE with functionality arithmetic and scripted affordance tests."""

from .afford import (
    ContainabilityResult,
    CubeProbe,
    SupportabilityMap,
    containability_test,
    heightmap,
    supportability_test,
)
from .arithmetic import (
    ClassEssence,
    CombineRequest,
    ImportanceVector,
    class_essence,
    combine,
    gaussian_kl,
    importance_mask,
    importance_vector,
    nearest_in_dataset,
)
from .binvox import read_binvox, read_binvox_file, write_binvox, write_binvox_file
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import (
    ClassSpec,
    LabeledShape,
    augment,
    default_class_specs,
    generate_class,
    ingest_off_directory,
    load_corpus,
    save_corpus,
    split,
)
from .grids import VoxelGrid, occupancy_fraction, rotate_quarter
from .losses import kl_components, recon_loss, soft_free_bits_step
from .marching import marching_cubes, surface_statistics
from .meshes import TriMesh, parse_off, write_obj
from .model import (
    LatentCode,
    ModelConfig,
    VoxelVAE,
    build_model,
    decode,
    encode,
    encode_batch,
    reparameterize,
)
from .solids import InertiaResult, export_sdf, inertia_of, sdf_document
from .training import TrainConfig, grad_check, train
from .voxelize import triangle_box_overlap, voxelize

__version__ = "0.1.0"
