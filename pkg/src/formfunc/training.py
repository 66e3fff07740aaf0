"""Training loop and finite-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .grids import VoxelGrid
from .losses import kl_from_moments, recon_loss, soft_free_bits_step
from .model import VoxelVAE, _grid_tensor


@dataclass
class TrainConfig:
    alpha: float = 10.0
    gamma_init: float = 0.01
    lambda_bits: float = 0.1
    gamma_rate: float = 0.05
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 16
    rng_seed: int = 0
    optimizer: str = "adam"  # or "sgd"

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if not 0 < self.gamma_init <= 1:
            raise ValueError("gamma_init must be in (0, 1]")
        if self.lambda_bits <= 0:
            raise ValueError("lambda_bits must be > 0")


def _objective(model: VoxelVAE, x: torch.Tensor, noise: torch.Tensor, alpha: float):
    """Per-batch loss: mean reconstruction + gamma-weighted mean KL."""
    probs, mean, log_var = model(x, noise)
    rec = recon_loss(x, probs, alpha) / x.shape[0]
    kl_mean = kl_from_moments(mean, log_var).mean(dim=0)
    reg = (model.gamma.to(kl_mean.dtype) * kl_mean).sum()
    return rec + reg, kl_mean


def train(
    model: VoxelVAE, dataset: list[VoxelGrid], config: TrainConfig
) -> tuple[VoxelVAE, list[float]]:
    """Fit the VAE on a list of grids; returns the model and per-epoch loss.

    Deterministic given config.rng_seed: batching, noise and the gamma
    schedule all derive from it.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    d = model.config.input_dim
    for g in dataset:
        if g.dim != d:
            raise ValueError(f"dataset grid dim {g.dim} != model input_dim {d}")

    dtype = next(model.parameters()).dtype
    data = torch.stack([_grid_tensor(model, g)[0] for g in dataset])

    torch.manual_seed(config.rng_seed)
    shuffler = np.random.default_rng(config.rng_seed)
    if config.optimizer == "adam":
        opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    elif config.optimizer == "sgd":
        opt = torch.optim.SGD(model.parameters(), lr=config.learning_rate)
    else:
        raise ValueError(f"unknown optimizer {config.optimizer!r}")

    model.gamma.fill_(config.gamma_init)
    model.train()
    history: list[float] = []
    n = len(dataset)
    for epoch in range(config.epochs):
        order = shuffler.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            x = data[idx]
            noise = torch.randn(len(idx), model.config.latent_dim, dtype=dtype)
            opt.zero_grad()
            loss, kl_mean = _objective(model, x, noise, config.alpha)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: non-finite loss at epoch {epoch} "
                    f"(batch starting {start})"
                )
            loss.backward()
            opt.step()
            _, new_gamma = soft_free_bits_step(
                kl_mean.detach().double().numpy(),
                model.gamma.double().numpy(),
                config.lambda_bits,
                rate=config.gamma_rate,
                gamma_floor=config.gamma_init,
            )
            model.gamma.copy_(torch.as_tensor(new_gamma, dtype=model.gamma.dtype))
            epoch_loss += float(loss.detach()) * len(idx)
        history.append(epoch_loss / n)
    model.eval()
    return model, history


def grad_check(
    model: VoxelVAE,
    sample: VoxelGrid,
    epsilon: float = 1e-4,
    n_params: int = 120,
    rng_seed: int = 0,
    alpha: float = 10.0,
) -> float:
    """Max relative error between autograd and central finite differences.

    Runs in float64 and inference-mode batch norm so the objective is a
    pure deterministic function of the parameters; samples ``n_params``
    scalar parameters across all tensors.
    """
    model = model.double()
    model.eval()
    x = _grid_tensor(model, sample)
    torch.manual_seed(rng_seed)
    noise = torch.randn(1, model.config.latent_dim, dtype=torch.float64)

    def loss_value() -> torch.Tensor:
        loss, _ = _objective(model, x, noise, alpha)
        return loss

    for p in model.parameters():
        p.grad = None
    loss_value().backward()

    params = [p for p in model.parameters() if p.requires_grad]
    sizes = np.array([p.numel() for p in params])
    rng = np.random.default_rng(rng_seed)
    picks = rng.choice(int(sizes.sum()), size=min(n_params, int(sizes.sum())), replace=False)

    worst = 0.0
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    with torch.no_grad():
        for flat_index in picks:
            t = int(np.searchsorted(offsets, flat_index, side="right") - 1)
            i = int(flat_index - offsets[t])
            p = params[t]
            analytic = float(p.grad.view(-1)[i])
            original = float(p.view(-1)[i])
            p.view(-1)[i] = original + epsilon
            hi = float(loss_value())
            p.view(-1)[i] = original - epsilon
            lo = float(loss_value())
            p.view(-1)[i] = original
            fd = (hi - lo) / (2 * epsilon)
            err = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-3)
            worst = max(worst, err)
    return worst
