"""Training objective pieces: weighted reconstruction, KL, soft free bits."""

from __future__ import annotations

import numpy as np
import torch

from .model import LatentCode

PROB_EPS = 1e-7  # clip for decoder probabilities before the logarithm


def recon_loss(x, x_prob, alpha: float = 1.0):
    """Weighted binary cross-entropy summed over the volume.

    ``sum(-(alpha * x * log(x') + (1 - x) * log(1 - x')))`` with x' clipped
    to [eps, 1-eps].  alpha=1 is the unweighted form; larger alpha
    penalizes missed filled voxels harder.  Accepts numpy arrays (returns a
    float) or torch tensors (returns a tensor, differentiable).
    """
    tensor_in = isinstance(x, torch.Tensor) or isinstance(x_prob, torch.Tensor)
    xt = torch.as_tensor(x) if not isinstance(x, torch.Tensor) else x
    pt = torch.as_tensor(x_prob) if not isinstance(x_prob, torch.Tensor) else x_prob
    if xt.shape != pt.shape:
        raise ValueError(f"shape mismatch: {tuple(xt.shape)} vs {tuple(pt.shape)}")
    if not tensor_in:
        xt, pt = xt.double(), pt.double()
    pt = torch.clamp(pt, PROB_EPS, 1.0 - PROB_EPS)
    loss = -(alpha * xt * torch.log(pt) + (1.0 - xt) * torch.log(1.0 - pt)).sum()
    return loss if tensor_in else float(loss)


def kl_from_moments(mean, log_var):
    """Per-component KL of N(mean, var) against the unit Gaussian prior.

    ``0.5 * (mean^2 + var - 1 - log(var))`` per component; nonnegative,
    zero exactly at the prior.
    """
    tensor_in = isinstance(mean, torch.Tensor)
    m = mean if tensor_in else torch.as_tensor(np.asarray(mean, dtype=np.float64))
    lv = log_var if isinstance(log_var, torch.Tensor) else torch.as_tensor(
        np.asarray(log_var, dtype=np.float64)
    )
    kl = 0.5 * (m**2 + torch.exp(lv) - 1.0 - lv)
    return kl if tensor_in else kl.numpy()


def kl_components(code: LatentCode) -> np.ndarray:
    """KL of each posterior component against the prior, length J."""
    return kl_from_moments(code.means, code.log_variances)


def soft_free_bits_step(
    kl: np.ndarray,
    gamma: np.ndarray,
    lambda_bits: float,
    rate: float = 0.05,
    gamma_floor: float = 0.01,
):
    """One soft-free-bits update.

    Returns (regularizer value Sum(gamma_j * kl_j) under the incoming
    gamma, updated gamma).  Components holding less than ``lambda_bits``
    of information get their weight multiplied by (1 - rate) down to the
    floor, the rest by (1 + rate) up to 1.
    """
    if lambda_bits <= 0:
        raise ValueError("lambda_bits must be > 0")
    kl = np.asarray(kl, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if kl.shape != gamma.shape:
        raise ValueError("kl and gamma must have equal length")
    term = float((gamma * kl).sum())
    starved = kl < lambda_bits
    updated = np.where(starved, gamma * (1.0 - rate), gamma * (1.0 + rate))
    updated = np.clip(updated, gamma_floor, 1.0)
    return term, updated
