#!/usr/bin/env python3
"""Sweep the top-percent blend between two class essences.

For each percentage the combined code is decoded, written as binvox and
scored with both affordance tests, tracing how the shape morphs from the
base class toward the blend.
"""

import argparse
import json
from pathlib import Path

from formfunc.afford import CubeProbe, containability_test, supportability_test
from formfunc.arithmetic import CombineRequest, class_essence, combine, importance_vector
from formfunc.binvox import write_binvox_file
from formfunc.checkpoint import load_checkpoint
from formfunc.dataset import load_corpus
from formfunc.grids import VoxelGrid
from formfunc.model import decode, encode, encode_batch


def essence_for(model, shapes, label):
    member = [s.grid for s in shapes if s.class_label == label]
    if not member:
        raise SystemExit(f"class {label!r} not in corpus")
    return class_essence(encode_batch(model, member), label)


def run(args):
    model, _ = load_checkpoint(args.model)
    shapes, _ = load_corpus(args.corpus)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    void = encode(model, VoxelGrid.empty(model.config.input_dim))
    base = essence_for(model, shapes, args.base)
    top = essence_for(model, shapes, args.top)
    base_iv = importance_vector(base.code, void)
    top_iv = importance_vector(top.code, void)

    rows = []
    for pct in [p / 100 for p in range(50, 100, 5)]:
        code = combine(CombineRequest(base.code, top.code, 1.0, pct), base_iv, top_iv)
        probs = decode(model, code.means)
        grid = probs.with_occupancy(probs.binary())
        write_binvox_file(grid, out / f"blend_{int(pct * 100):02d}.binvox")
        smap = supportability_test(grid, CubeProbe())
        contain = containability_test(grid)
        rows.append(
            {
                "top_percent": pct,
                "occupied": grid.occupied_count(),
                "supported_positions": int(smap.supported.sum()),
                "containability_ratio": contain.ratio,
            }
        )
        print(rows[-1])
    (out / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--model", default="model.ckpt")
    p.add_argument("--corpus", default="corpus")
    p.add_argument("--base", default="tub")
    p.add_argument("--top", default="table")
    p.add_argument("--out", default="blend_sweep")
    raise SystemExit(run(p.parse_args()))
