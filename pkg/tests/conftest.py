"""Shared fixtures: a small trained pipeline reused across CLI/server tests."""

import pytest

from formfunc.checkpoint import save_checkpoint
from formfunc.dataset import default_class_specs, generate_class, save_corpus
from formfunc.model import ModelConfig, build_model
from formfunc.training import TrainConfig, train

PIPELINE_DIM = 16
PIPELINE_LATENT = 16


@pytest.fixture(scope="session")
def small_pipeline(tmp_path_factory):
    """Tiny corpus + briefly trained checkpoint for contract-level tests."""
    root = tmp_path_factory.mktemp("pipeline")
    specs = default_class_specs(PIPELINE_DIM)
    shapes = []
    for i, label in enumerate(sorted(specs)):
        shapes.extend(generate_class(specs[label], 4, rng_seed=50 + i))
    corpus_dir = root / "corpus"
    save_corpus(shapes, corpus_dir, seed=50)

    model = build_model(
        ModelConfig(PIPELINE_DIM, PIPELINE_LATENT, (4, 8)), gamma_init=0.01, seed=0
    )
    cfg = TrainConfig(epochs=8, batch_size=8, learning_rate=2e-3, rng_seed=0)
    model, history = train(model, [s.grid for s in shapes], cfg)
    ckpt = root / "model.ckpt"
    save_checkpoint(model, ckpt, metadata={"rng_seed": 0, "corpus": str(corpus_dir)})
    return {
        "root": root,
        "corpus": corpus_dir,
        "checkpoint": ckpt,
        "model": model,
        "shapes": shapes,
        "history": history,
    }
