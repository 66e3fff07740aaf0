"""HTTP JSON service exposing the trained model and latent arithmetic.

Endpoints: GET /health, GET /classes, GET /essence/{label}, POST /combine,
POST /afford-test.  Grids travel as binvox-style RLE pairs inside JSON;
every response carries schema_version.  The model is read-only; essences
and dataset features are cached write-once.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .afford import CubeProbe, containability_test, supportability_test
from .arithmetic import (
    ClassEssence,
    CombineRequest,
    class_essence,
    combine,
    importance_vector,
)
from .checkpoint import load_checkpoint
from .dataset import load_corpus
from .grids import VoxelGrid, unflatten
from .model import LatentCode, decode, decode_features, encode, encode_batch

SCHEMA_VERSION = 1


def rle_encode(grid: VoxelGrid, threshold: float = 0.5) -> list[list[int]]:
    """Canonical-order run-length pairs [[value, count], ...] (no count cap)."""
    flat = (np.asarray(grid.flat()) > threshold).astype(int)
    pairs: list[list[int]] = []
    i = 0
    n = flat.size
    while i < n:
        v = int(flat[i])
        run = 1
        while i + run < n and int(flat[i + run]) == v:
            run += 1
        pairs.append([v, run])
        i += run
    return pairs


def rle_decode(pairs: list[list[int]], dim: int) -> VoxelGrid:
    counts = [int(c) for _, c in pairs]
    if sum(counts) != dim**3:
        raise ValueError(f"RLE totals {sum(counts)} != dim^3 = {dim ** 3}")
    flat = np.repeat([int(v) for v, _ in pairs], counts).astype(np.uint8)
    return VoxelGrid(dim, unflatten(flat, dim))


@dataclass
class SessionState:
    checkpoint_path: str
    corpus_path: str
    model: object | None = None
    shapes: list | None = None
    manifest: dict | None = None
    essences: dict[str, ClassEssence] = field(default_factory=dict)
    void_code: LatentCode | None = None
    dataset_codes: list[LatentCode] | None = None
    dataset_features: np.ndarray | None = None
    dataset_labels: list[str] | None = None
    request_log: list[dict] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def try_load(self) -> bool:
        with self._lock:
            if self.model is not None:
                return True
            if not (os.path.exists(self.checkpoint_path) and os.path.isdir(self.corpus_path)):
                return False
            self.model, _ = load_checkpoint(self.checkpoint_path)
            self.shapes, self.manifest = load_corpus(self.corpus_path)
            self.void_code = encode(self.model, VoxelGrid.empty(self.model.config.input_dim))
            return True

    def essence(self, label: str) -> ClassEssence:
        with self._lock:
            cached = self.essences.get(label)
        if cached is not None:
            return cached
        member = [s.grid for s in self.shapes if s.class_label == label]
        if not member:
            raise KeyError(label)
        essence = class_essence(encode_batch(self.model, member), label)
        with self._lock:
            self.essences.setdefault(label, essence)
        return essence

    def features(self) -> tuple[np.ndarray, list[str]]:
        with self._lock:
            if self.dataset_features is not None:
                return self.dataset_features, self.dataset_labels
        codes = encode_batch(self.model, [s.grid for s in self.shapes])
        feats = np.stack([decode_features(self.model, c.means) for c in codes])
        labels = [s.class_label for s in self.shapes]
        with self._lock:
            if self.dataset_features is None:
                self.dataset_codes = codes
                self.dataset_features = feats
                self.dataset_labels = labels
        return self.dataset_features, self.dataset_labels


class CombineBody(BaseModel):
    base: str
    top: str
    base_percent: float = 0.5
    top_percent: float = 0.5


class AffordTestBody(BaseModel):
    mode: str
    dim: int
    grid: list[list[int]]
    probe_side: float | None = None
    flatness_tol: int = 1
    sphere_radius: float | None = None


def create_app(checkpoint_path: str, corpus_path: str) -> FastAPI:
    app = FastAPI(title="formfunc design server")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    state = SessionState(str(checkpoint_path), str(corpus_path))
    app.state.session = state

    def require_loaded():
        if not state.try_load():
            raise HTTPException(status_code=503, detail="model or corpus not loaded")

    def check_percent(p: float, name: str):
        if not 0.0 <= p <= 1.0:
            raise HTTPException(status_code=422, detail=f"{name} outside [0, 1]")

    @app.get("/health")
    def health():
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "ok",
            "loaded": state.model is not None or state.try_load(),
        }

    @app.get("/classes")
    def classes():
        require_loaded()
        state.request_log.append({"endpoint": "classes"})
        counts: dict[str, int] = {}
        for s in state.shapes:
            counts[s.class_label] = counts.get(s.class_label, 0) + 1
        out = []
        for label in sorted(state.manifest.get("classes", {})):
            info = state.manifest["classes"][label]
            out.append(
                {
                    "label": label,
                    "affordances": info["affordances"],
                    "sample_count": counts.get(label, 0),
                }
            )
        return {"schema_version": SCHEMA_VERSION, "classes": out}

    @app.get("/essence/{label}")
    def essence(label: str, raw: bool = Query(default=False)):
        require_loaded()
        state.request_log.append({"endpoint": "essence", "label": label})
        try:
            ess = state.essence(label)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown class {label!r}")
        probs = decode(state.model, ess.code.means)
        iv = importance_vector(ess.code, state.void_code)
        counts, edges = np.histogram(iv.scores, bins=10)
        body = {
            "schema_version": SCHEMA_VERSION,
            "label": label,
            "sample_count": ess.sample_count,
            "dim": probs.dim,
            "grid": rle_encode(probs),
            "importance_histogram": {
                "bin_edges": [float(e) for e in edges],
                "counts": [int(c) for c in counts],
            },
        }
        if raw:
            body["probabilities"] = [round(float(p), 5) for p in probs.flat()]
        return body

    @app.post("/combine")
    def combine_codes(req: CombineBody):
        require_loaded()
        state.request_log.append({"endpoint": "combine", "base": req.base, "top": req.top})
        check_percent(req.base_percent, "base_percent")
        check_percent(req.top_percent, "top_percent")
        try:
            base = state.essence(req.base)
            top = state.essence(req.top)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=f"unknown class {exc.args[0]!r}")
        try:
            combined = combine(
                CombineRequest(base.code, top.code, req.base_percent, req.top_percent),
                importance_vector(base.code, state.void_code),
                importance_vector(top.code, state.void_code),
            )
            probs = decode(state.model, combined.means)
        except Exception as exc:  # decode failures surface as 500 + diagnostic
            raise HTTPException(status_code=500, detail=f"decode failed: {exc}")
        grid = probs.with_occupancy(probs.binary())

        probe = CubeProbe()
        smap = supportability_test(grid, probe)
        contain = containability_test(grid)

        feats, labels = state.features()
        query = decode_features(state.model, combined.means)
        dists = np.linalg.norm(feats - query, axis=1)
        order = np.argsort(dists, kind="stable")[:2]
        nearest = [
            {"index": int(i), "class_label": labels[i], "distance": float(dists[i])}
            for i in order
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "dim": grid.dim,
            "grid": rle_encode(grid),
            "affordance_report": {
                "supportability": {
                    "supported_positions": int(smap.supported.sum()),
                    "lattice": list(smap.supported.shape),
                    "map": smap.supported.ravel().astype(int).tolist(),
                },
                "containability": contain.to_json_dict(),
            },
            "nearest": nearest,
        }

    @app.post("/afford-test")
    def afford_test(req: AffordTestBody):
        state.request_log.append({"endpoint": "afford-test", "mode": req.mode})
        try:
            grid = rle_decode(req.grid, req.dim)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if req.mode == "support":
            probe = CubeProbe(
                side=req.probe_side if req.probe_side else 3 * grid.voxel_size(),
                flatness_tol=req.flatness_tol,
            )
            smap = supportability_test(grid, probe)
            return {
                "schema_version": SCHEMA_VERSION,
                "mode": "support",
                **smap.to_json_dict(),
            }
        if req.mode == "contain":
            result = containability_test(grid, req.sphere_radius)
            return {
                "schema_version": SCHEMA_VERSION,
                "mode": "contain",
                **result.to_json_dict(),
            }
        raise HTTPException(status_code=422, detail=f"unknown mode {req.mode!r}")

    return app
