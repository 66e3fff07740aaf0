"""Command-line surface for the whole pipeline.

Subcommands cover dataset generation/ingestion, training, encoding,
essence and importance extraction, combination, reconstruction, affordance
tests, mesh export, the one-shot `request` flow and the HTTP server.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

from .afford import (
    CubeProbe,
    containability_test,
    contain_report_json,
    support_report_json,
    supportability_test,
)
from .arithmetic import CombineRequest, class_essence, combine, importance_vector
from .binvox import read_binvox_file, write_binvox_file
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import (
    augment,
    class_for_affordance,
    default_class_specs,
    generate_class,
    ingest_off_directory,
    load_corpus,
    save_corpus,
)
from .grids import VoxelGrid
from .marching import marching_cubes
from .model import LatentCode, ModelConfig, build_model, decode, encode, encode_batch
from .solids import export_sdf, inertia_of
from .training import TrainConfig, train

CONFIG_ENV = "FORMFUNC_CONFIG"


@dataclass
class RunConfig:
    """File-overridable defaults; every field has a matching CLI flag."""

    corpus: str = "corpus"
    checkpoint: str = "model.ckpt"
    out: str = "out"
    dim: int = 32
    latent: int = 64
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 2e-3
    alpha: float = 10.0
    gamma_init: float = 0.01
    lambda_bits: float = 0.1
    seed: int = 0
    probe_side: float = 0.1 ** (1.0 / 3.0)
    sphere_radius: float = 0.0  # 0 -> containability default
    port: int = 8008


def load_config(path: str | None) -> RunConfig:
    """KEY = VALUE lines; '#' comments; unknown keys rejected."""
    cfg = RunConfig()
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return cfg
    valid = {f.name: f.type for f in fields(RunConfig)}
    with open(path) as f:
        for i, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{i}: expected KEY = VALUE")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in valid:
                raise ValueError(f"{path}:{i}: unknown config key {key!r}")
            current = getattr(cfg, key)
            setattr(cfg, key, type(current)(value))
    return cfg


class DomainError(Exception):
    pass


def _load_code(path) -> LatentCode:
    with open(path) as f:
        return LatentCode.from_json_dict(json.load(f))


def _dump_json(payload: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _void_code(model) -> LatentCode:
    return encode(model, VoxelGrid.empty(model.config.input_dim))


def _class_codes(model, shapes, label):
    member = [s.grid for s in shapes if s.class_label == label]
    if not member:
        raise DomainError(f"class {label!r} has no samples in the corpus")
    return encode_batch(model, member)


def _essence_code(model, shapes, label):
    return class_essence(_class_codes(model, shapes, label), label)


def cmd_dataset_gen(args, cfg):
    specs = default_class_specs(args.dim)
    labels = args.classes.split(",") if args.classes else sorted(specs)
    shapes = []
    for i, label in enumerate(sorted(labels)):
        if label not in specs:
            raise DomainError(f"unknown class {label!r}; known: {sorted(specs)}")
        shapes.extend(generate_class(specs[label], args.per_class, rng_seed=args.seed + i))
    if args.augment:
        shapes = augment(shapes)
    save_corpus(shapes, args.out, seed=args.seed)
    print(f"wrote {len(shapes)} shapes to {args.out}")
    return 0


def cmd_dataset_ingest(args, cfg):
    shapes, skipped = ingest_off_directory(args.src, args.dim)
    if args.augment:
        shapes = augment(shapes)
    save_corpus(shapes, args.out)
    print(f"ingested {len(shapes)} shapes ({skipped} skipped) to {args.out}")
    return 0


def cmd_train(args, cfg):
    shapes, manifest = load_corpus(args.corpus)
    if not shapes:
        raise DomainError(f"corpus {args.corpus} is empty")
    dim = shapes[0].grid.dim
    model = build_model(
        ModelConfig(input_dim=dim, latent_dim=args.latent), gamma_init=args.gamma_init, seed=args.seed
    )
    tc = TrainConfig(
        alpha=args.alpha,
        gamma_init=args.gamma_init,
        lambda_bits=args.lambda_bits,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        rng_seed=args.seed,
    )
    model, history = train(model, [s.grid for s in shapes], tc)
    save_checkpoint(
        model,
        args.out,
        metadata={"rng_seed": args.seed, "corpus": str(args.corpus), "final_loss": history[-1]},
    )
    print(f"trained {args.epochs} epochs; loss {history[0]:.1f} -> {history[-1]:.1f}")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_encode(args, cfg):
    model, _ = load_checkpoint(args.model)
    grid = read_binvox_file(args.input)
    code = encode(model, grid)
    _dump_json(code.to_json_dict(), args.out)
    print(f"encoded {args.input} -> {args.out}")
    return 0


def cmd_essence(args, cfg):
    model, _ = load_checkpoint(args.model)
    shapes, _ = load_corpus(args.corpus)
    essence = _essence_code(model, shapes, args.class_label)
    _dump_json(
        {**essence.code.to_json_dict(), "class_label": essence.class_label,
         "sample_count": essence.sample_count},
        args.out,
    )
    if args.grid:
        probs = decode(model, essence.code.means)
        write_binvox_file(probs.with_occupancy(probs.binary(args.threshold)), args.grid)
    print(f"essence of {args.class_label} ({essence.sample_count} samples) -> {args.out}")
    return 0


def cmd_importance(args, cfg):
    model, _ = load_checkpoint(args.model)
    code = _load_code(args.code)
    iv = importance_vector(code, _void_code(model))
    _dump_json(iv.to_json_dict(), args.out)
    print(f"importance scores -> {args.out}")
    return 0


def cmd_combine(args, cfg):
    model, _ = load_checkpoint(args.model)
    shapes, _ = load_corpus(args.corpus)
    void = _void_code(model)
    base = _essence_code(model, shapes, args.base)
    top = _essence_code(model, shapes, args.top)
    request = CombineRequest(base.code, top.code, args.base_percent, args.top_percent)
    combined = combine(
        request,
        importance_vector(base.code, void),
        importance_vector(top.code, void),
    )
    _dump_json(
        {**combined.to_json_dict(), "base": args.base, "top": args.top,
         "base_percent": args.base_percent, "top_percent": args.top_percent},
        args.out,
    )
    if args.decode:
        probs = decode(model, combined.means)
        write_binvox_file(probs.with_occupancy(probs.binary(args.threshold)), args.decode)
    print(f"combined {args.base}+{args.top} -> {args.out}")
    return 0


def cmd_reconstruct(args, cfg):
    model, _ = load_checkpoint(args.model)
    grid = read_binvox_file(args.input)
    code = encode(model, grid)
    probs = decode(model, code.means)
    out_grid = probs.with_occupancy(probs.binary(args.threshold))
    write_binvox_file(out_grid, args.out)
    print(f"reconstructed {args.input} -> {args.out}")
    return 0


def cmd_afford_test(args, cfg):
    grid = read_binvox_file(args.input)
    if args.mode == "support":
        probe = CubeProbe(side=args.probe_side, flatness_tol=args.flatness_tol)
        smap = supportability_test(grid, probe)
        report = support_report_json(smap)
        if args.pgm:
            with open(args.pgm, "w") as f:
                f.write(smap.to_pgm())
    else:
        radius = args.sphere_radius if args.sphere_radius > 0 else None
        report = contain_report_json(containability_test(grid, radius))
    with open(args.out, "w") as f:
        f.write(report + "\n")
    print(f"{args.mode} report -> {args.out}")
    return 0


def cmd_export_mesh(args, cfg):
    grid = read_binvox_file(args.input)
    mesh = marching_cubes(grid, iso=args.iso)
    if mesh.is_empty():
        raise DomainError("grid decodes to an empty surface; nothing to export")
    inertia = inertia_of(grid, mass=args.mass)
    export_sdf(mesh, inertia, args.name, args.out)
    print(f"wrote {args.name}.obj and {args.name}.sdf to {args.out}")
    return 0


def cmd_request(args, cfg):
    model, _ = load_checkpoint(args.model)
    shapes, manifest = load_corpus(args.corpus)
    specs = default_class_specs(model.config.input_dim)

    wanted = [a.strip() for a in args.affordances.split(",") if a.strip()]
    if len(wanted) != 2:
        raise DomainError("request needs exactly two affordances (base,top)")
    labels = []
    for aff in wanted:
        candidates = class_for_affordance(aff, specs)
        if not candidates:
            raise DomainError(f"no class provides {aff!r}")
        if len(candidates) > 1 and not (args.base and args.top):
            raise DomainError(
                f"affordance {aff!r} is ambiguous across classes {candidates}; "
                "disambiguate with --base/--top"
            )
        labels.append(candidates[0])
    base_label = args.base or labels[0]
    top_label = args.top or labels[1]

    void = _void_code(model)
    base = _essence_code(model, shapes, base_label)
    top = _essence_code(model, shapes, top_label)
    combined = combine(
        CombineRequest(base.code, top.code, args.base_percent, args.top_percent),
        importance_vector(base.code, void),
        importance_vector(top.code, void),
    )
    probs = decode(model, combined.means)
    grid = probs.with_occupancy(probs.binary(args.threshold))

    os.makedirs(args.out, exist_ok=True)
    write_binvox_file(grid, os.path.join(args.out, "combined.binvox"))
    mesh = marching_cubes(probs, iso=args.threshold)
    if not mesh.is_empty():
        export_sdf(mesh, inertia_of(grid, mass=1.0), "combined", args.out)

    probe = CubeProbe(side=args.probe_side)
    smap = supportability_test(grid, probe)
    contain = containability_test(grid)
    report = {
        "schema_version": 1,
        "affordances": wanted,
        "base": base_label,
        "top": top_label,
        "base_percent": args.base_percent,
        "top_percent": args.top_percent,
        "supportability": json.loads(support_report_json(smap)),
        "containability": json.loads(contain_report_json(contain)),
    }
    _dump_json(report, os.path.join(args.out, "report.json"))
    ok = smap.any_supported() and contain.ratio > 0
    print(
        f"request {','.join(wanted)}: base={base_label} top={top_label} "
        f"supported_positions={int(smap.supported.sum())} "
        f"containability_ratio={contain.ratio:.4f}"
    )
    print(f"artifacts in {args.out}")
    return 0 if ok else 1


def cmd_serve(args, cfg):
    import uvicorn

    from .server import create_app

    app = create_app(args.model, args.corpus)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser(cfg: RunConfig) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="formfunc", description=__doc__)
    p.add_argument("--config", help=f"config file (or ${CONFIG_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    ds = sub.add_parser("dataset", help="generate or ingest a labeled corpus")
    ds_sub = ds.add_subparsers(dest="dataset_command", required=True)
    gen = ds_sub.add_parser("gen", help="procedural corpus")
    gen.add_argument("--out", default=cfg.corpus)
    gen.add_argument("--dim", type=int, default=cfg.dim)
    gen.add_argument("--per-class", type=int, default=50)
    gen.add_argument("--seed", type=int, default=cfg.seed)
    gen.add_argument("--classes", default="", help="comma list; default all")
    gen.add_argument("--augment", action="store_true", help="add quarter rotations")
    gen.set_defaults(func=cmd_dataset_gen)
    ing = ds_sub.add_parser("ingest", help="voxelize OFF files by class directory")
    ing.add_argument("--src", required=True)
    ing.add_argument("--out", default=cfg.corpus)
    ing.add_argument("--dim", type=int, default=cfg.dim)
    ing.add_argument("--augment", action="store_true")
    ing.set_defaults(func=cmd_dataset_ingest)

    tr = sub.add_parser("train", help="fit the VAE on a corpus")
    tr.add_argument("--corpus", default=cfg.corpus)
    tr.add_argument("--out", default=cfg.checkpoint)
    tr.add_argument("--latent", type=int, default=cfg.latent)
    tr.add_argument("--epochs", type=int, default=cfg.epochs)
    tr.add_argument("--batch-size", type=int, default=cfg.batch_size)
    tr.add_argument("--learning-rate", type=float, default=cfg.learning_rate)
    tr.add_argument("--alpha", type=float, default=cfg.alpha)
    tr.add_argument("--gamma-init", type=float, default=cfg.gamma_init)
    tr.add_argument("--lambda-bits", type=float, default=cfg.lambda_bits)
    tr.add_argument("--seed", type=int, default=cfg.seed)
    tr.set_defaults(func=cmd_train)

    en = sub.add_parser("encode", help="grid -> latent code JSON")
    en.add_argument("--model", default=cfg.checkpoint)
    en.add_argument("--input", required=True)
    en.add_argument("--out", required=True)
    en.set_defaults(func=cmd_encode)

    es = sub.add_parser("essence", help="average a class into its essence")
    es.add_argument("class_label")
    es.add_argument("--model", default=cfg.checkpoint)
    es.add_argument("--corpus", default=cfg.corpus)
    es.add_argument("--out", required=True)
    es.add_argument("--grid", help="also decode to this binvox path")
    es.add_argument("--threshold", type=float, default=0.5)
    es.set_defaults(func=cmd_essence)

    im = sub.add_parser("importance", help="score latent variables of a code")
    im.add_argument("--model", default=cfg.checkpoint)
    im.add_argument("--code", required=True)
    im.add_argument("--out", required=True)
    im.set_defaults(func=cmd_importance)

    co = sub.add_parser("combine", help="blend two class essences")
    co.add_argument("--model", default=cfg.checkpoint)
    co.add_argument("--corpus", default=cfg.corpus)
    co.add_argument("--base", required=True)
    co.add_argument("--top", required=True)
    co.add_argument("--base-percent", type=float, default=0.5)
    co.add_argument("--top-percent", type=float, default=0.5)
    co.add_argument("--out", required=True)
    co.add_argument("--decode", help="also decode to this binvox path")
    co.add_argument("--threshold", type=float, default=0.5)
    co.set_defaults(func=cmd_combine)

    re = sub.add_parser("reconstruct", help="encode then mean-decode a grid")
    re.add_argument("--model", default=cfg.checkpoint)
    re.add_argument("--input", required=True)
    re.add_argument("--out", required=True)
    re.add_argument("--threshold", type=float, default=0.5)
    re.set_defaults(func=cmd_reconstruct)

    at = sub.add_parser("afford-test", help="run a scripted affordance test")
    at.add_argument("mode", choices=["support", "contain"])
    at.add_argument("--input", required=True)
    at.add_argument("--out", required=True)
    at.add_argument("--pgm", help="write the support map as PGM")
    at.add_argument("--probe-side", type=float, default=cfg.probe_side)
    at.add_argument("--flatness-tol", type=int, default=1)
    at.add_argument("--sphere-radius", type=float, default=cfg.sphere_radius)
    at.set_defaults(func=cmd_afford_test)

    ex = sub.add_parser("export-mesh", help="marching cubes + OBJ/SDF export")
    ex.add_argument("--input", required=True)
    ex.add_argument("--out", default=cfg.out)
    ex.add_argument("--name", default="shape")
    ex.add_argument("--iso", type=float, default=0.5)
    ex.add_argument("--mass", type=float, default=1.0)
    ex.set_defaults(func=cmd_export_mesh)

    rq = sub.add_parser("request", help="affordances -> combined shape + tests")
    rq.add_argument("--affordances", required=True, help="comma pair, base then top")
    rq.add_argument("--model", default=cfg.checkpoint)
    rq.add_argument("--corpus", default=cfg.corpus)
    rq.add_argument("--out", default=cfg.out)
    rq.add_argument("--base", help="override base class")
    rq.add_argument("--top", help="override top class")
    rq.add_argument("--base-percent", type=float, default=0.5)
    rq.add_argument("--top-percent", type=float, default=0.5)
    rq.add_argument("--threshold", type=float, default=0.5)
    rq.add_argument("--probe-side", type=float, default=cfg.probe_side)
    rq.set_defaults(func=cmd_request)

    sv = sub.add_parser("serve", help="HTTP design service")
    sv.add_argument("--model", default=cfg.checkpoint)
    sv.add_argument("--corpus", default=cfg.corpus)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument(
        "--port", type=int, default=int(os.environ.get("FORMFUNC_PORT", cfg.port))
    )
    sv.set_defaults(func=cmd_serve)

    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config_path = None
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 < len(argv):
            config_path = argv[i + 1]
    try:
        cfg = load_config(config_path)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser = build_parser(cfg)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
