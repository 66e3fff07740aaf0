"""Self-describing model checkpoint container.

Layout: magic line, 8-byte big-endian JSON header length, JSON header
(sorted keys; model config, metadata, tensor index), then the raw
little-endian tensor payload.  Writing is fully deterministic, so a
save/load/save cycle is byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import torch

from .model import ModelConfig, VoxelVAE

MAGIC = b"FORMFUNC-CKPT-1\n"


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: VoxelVAE, path, metadata: dict | None = None) -> None:
    state = model.state_dict()
    index = []
    payload = bytearray()
    for name, tensor in state.items():
        arr = tensor.detach().cpu().numpy()
        raw = np.ascontiguousarray(arr).tobytes()
        index.append(
            {
                "name": name,
                "dtype": arr.dtype.name,
                "shape": list(arr.shape),
                "offset": len(payload),
                "nbytes": len(raw),
            }
        )
        payload.extend(raw)

    cfg = model.config
    header = {
        "model_config": {
            "input_dim": cfg.input_dim,
            "latent_dim": cfg.latent_dim,
            "channel_widths": list(cfg.channel_widths),
            "stack_dense": cfg.stack_dense,
        },
        "metadata": metadata or {},
        "tensors": index,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack(">Q", len(blob)))
        f.write(blob)
        f.write(payload)


def load_checkpoint(path) -> tuple[VoxelVAE, dict]:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"bad checkpoint magic: {magic!r}")
        (blob_len,) = struct.unpack(">Q", f.read(8))
        header = json.loads(f.read(blob_len).decode("utf-8"))
        payload = f.read()

    cfg = header["model_config"]
    config = ModelConfig(
        input_dim=cfg["input_dim"],
        latent_dim=cfg["latent_dim"],
        channel_widths=tuple(cfg["channel_widths"]),
        stack_dense=cfg["stack_dense"],
    )
    model = VoxelVAE(config)
    state = {}
    for entry in header["tensors"]:
        start, n = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(payload[start : start + n], dtype=entry["dtype"]).reshape(
            entry["shape"]
        )
        state[entry["name"]] = torch.as_tensor(arr.copy())
    missing = model.load_state_dict(state, strict=True)
    if missing.missing_keys or missing.unexpected_keys:
        raise CheckpointError(f"state mismatch: {missing}")
    model.eval()
    return model, header["metadata"]
