"""3D convolutional VAE over voxel volumes.

Both halves are convolution + ReLU + batch-norm stacks with dense-style
activation stacking: every layer sees all earlier activations, aligned by
max-pooling on the way down and by channel-to-space reshaping on the way
up.  The encoder ends in a spatial reduce-max that produces the per-latent
Gaussian moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .grids import VoxelGrid

LOG_VAR_RANGE = 8.0  # clamp for numerical stability of exp()


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int = 32
    latent_dim: int = 64
    channel_widths: tuple[int, ...] = (8, 16, 32)
    stack_dense: bool = True

    def __post_init__(self):
        d = self.input_dim
        if d < 2 or d & (d - 1):
            raise ValueError(f"input_dim must be a power of 2 >= 2, got {d}")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if not self.channel_widths:
            raise ValueError("channel_widths must be non-empty")
        object.__setattr__(self, "channel_widths", tuple(int(w) for w in self.channel_widths))
        if d >> len(self.channel_widths) < 1:
            raise ValueError("too many layers for input_dim")

    @property
    def core_dim(self) -> int:
        """Spatial edge at the bottleneck."""
        return self.input_dim >> len(self.channel_widths)


@dataclass
class LatentCode:
    """Per-dimension Gaussian posterior parameters."""

    means: np.ndarray
    log_variances: np.ndarray

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64).reshape(-1)
        self.log_variances = np.asarray(self.log_variances, dtype=np.float64).reshape(-1)
        if self.means.shape != self.log_variances.shape:
            raise ValueError("means and log_variances must have equal length")
        if not (np.isfinite(self.means).all() and np.isfinite(self.log_variances).all()):
            raise ValueError("latent code entries must be finite")

    def __len__(self) -> int:
        return len(self.means)

    @property
    def variances(self) -> np.ndarray:
        return np.exp(self.log_variances)

    def to_json_dict(self) -> dict:
        return {
            "latent_dim": len(self),
            "means": self.means.tolist(),
            "log_variances": self.log_variances.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LatentCode":
        return cls(np.array(d["means"]), np.array(d["log_variances"]))


def _pool_to(a: torch.Tensor, size: int) -> torch.Tensor:
    """Max-pool a (B,C,S,S,S) activation down to spatial edge `size`."""
    s = a.shape[-1]
    if s == size:
        return a
    k = s // size
    return F.max_pool3d(a, kernel_size=k, stride=k)


def _shuffle_to(a: torch.Tensor, size: int) -> torch.Tensor | None:
    """Reshape channels into space (C -> C/8 per doubling) up to `size`.

    Returns None when the channel count cannot honor the reshape.
    """
    while a.shape[-1] < size:
        b, c, s = a.shape[0], a.shape[1], a.shape[-1]
        if c % 8:
            return None
        a = (
            a.view(b, c // 8, 2, 2, 2, s, s, s)
            .permute(0, 1, 5, 2, 6, 3, 7, 4)
            .reshape(b, c // 8, 2 * s, 2 * s, 2 * s)
        )
    return a


class VoxelVAE(nn.Module):
    def __init__(self, config: ModelConfig, gamma_init: float = 0.01):
        super().__init__()
        self.config = config
        widths = config.channel_widths
        L = len(widths)

        # encoder: stride-2 conv blocks, input stack grows by earlier widths
        self.enc_convs = nn.ModuleList()
        self.enc_norms = nn.ModuleList()
        chans = [1]
        for w in widths:
            in_c = sum(chans) if config.stack_dense else chans[-1]
            self.enc_convs.append(nn.Conv3d(in_c, w, kernel_size=4, stride=2, padding=1))
            self.enc_norms.append(nn.BatchNorm3d(w))
            chans.append(w)
        head_in = sum(chans) if config.stack_dense else widths[-1]
        self.enc_head = nn.Conv3d(head_in, 2 * config.latent_dim, kernel_size=3, padding=1)

        # decoder: mirrored stride-2 transposed convs
        core = config.core_dim
        self.dec_fc = nn.Linear(config.latent_dim, widths[-1] * core**3)
        self.dec_norm0 = nn.BatchNorm3d(widths[-1])
        up_widths = list(reversed(widths))[1:] + [widths[0]]
        self.dec_convs = nn.ModuleList()
        self.dec_norms = nn.ModuleList()
        dchans = [widths[-1]]
        for w in up_widths:
            in_c = self._stack_width(dchans) if config.stack_dense else dchans[-1]
            self.dec_convs.append(
                nn.ConvTranspose3d(in_c, w, kernel_size=4, stride=2, padding=1)
            )
            self.dec_norms.append(nn.BatchNorm3d(w))
            dchans.append(w)
        out_in = self._stack_width(dchans) if config.stack_dense else dchans[-1]
        self.dec_out = nn.Conv3d(out_in, 1, kernel_size=3, padding=1)

        # per-component regularizer weights, scheduled outside autograd
        self.register_buffer("gamma", torch.full((config.latent_dim,), float(gamma_init)))

    @staticmethod
    def _stack_width(chans: list[int]) -> int:
        """Channels after reshaping each earlier activation up to now."""
        total = chans[-1]
        for depth, c in enumerate(reversed(chans[:-1]), start=1):
            if c % (8**depth) == 0:
                total += c // 8**depth
        return total

    def encoder_moments(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        acts = [x]
        for conv, norm in zip(self.enc_convs, self.enc_norms):
            size = acts[-1].shape[-1] // 2
            if self.config.stack_dense:
                inp = torch.cat([_pool_to(a, size * 2) for a in acts], dim=1)
            else:
                inp = acts[-1]
            acts.append(norm(F.relu(conv(inp))))
        size = acts[-1].shape[-1]
        head_in = (
            torch.cat([_pool_to(a, size) for a in acts], dim=1)
            if self.config.stack_dense
            else acts[-1]
        )
        moments = self.enc_head(head_in).amax(dim=(2, 3, 4))
        mean, log_var = moments.chunk(2, dim=1)
        return mean, torch.clamp(log_var, -LOG_VAR_RANGE, LOG_VAR_RANGE)

    def decoder_stack(self, z: torch.Tensor) -> list[torch.Tensor]:
        """All decoder activations, ending with the (B,1,D,D,D) probabilities."""
        core = self.config.core_dim
        a = self.dec_fc(z).view(-1, self.config.channel_widths[-1], core, core, core)
        acts = [self.dec_norm0(F.relu(a))]
        for conv, norm in zip(self.dec_convs, self.dec_norms):
            inp = self._stack_up(acts)
            acts.append(norm(F.relu(conv(inp))))
        pre = self._stack_up(acts)
        acts.append(torch.sigmoid(self.dec_out(pre)))
        return acts

    def _stack_up(self, acts: list[torch.Tensor]) -> torch.Tensor:
        if not self.config.stack_dense:
            return acts[-1]
        size = acts[-1].shape[-1]
        parts = [acts[-1]]
        for a in reversed(acts[:-1]):
            shuffled = _shuffle_to(a, size)
            if shuffled is not None:
                parts.append(shuffled)
        return torch.cat(parts, dim=1)

    def forward(self, x: torch.Tensor, noise: torch.Tensor):
        mean, log_var = self.encoder_moments(x)
        z = mean + torch.exp(0.5 * log_var) * noise
        probs = self.decoder_stack(z)[-1]
        return probs, mean, log_var


def build_model(config: ModelConfig, gamma_init: float = 0.01, seed: int = 0) -> VoxelVAE:
    """Construct a VoxelVAE with seeded parameter initialization."""
    torch.manual_seed(seed)
    return VoxelVAE(config, gamma_init=gamma_init)


def _grid_tensor(model: VoxelVAE, grid: VoxelGrid) -> torch.Tensor:
    if grid.dim != model.config.input_dim:
        raise ValueError(
            f"grid dim {grid.dim} does not match model input_dim {model.config.input_dim}"
        )
    dtype = next(model.parameters()).dtype
    occ = np.asarray(grid.occupancy, dtype=np.float64)
    return torch.as_tensor(occ, dtype=dtype).view(1, 1, *occ.shape)


def encode(model: VoxelVAE, grid: VoxelGrid) -> LatentCode:
    """Posterior moments for one grid (deterministic, inference mode)."""
    model.eval()
    with torch.no_grad():
        mean, log_var = model.encoder_moments(_grid_tensor(model, grid))
    return LatentCode(mean[0].double().numpy(), log_var[0].double().numpy())


def encode_batch(model: VoxelVAE, grids: list[VoxelGrid]) -> list[LatentCode]:
    model.eval()
    codes = []
    with torch.no_grad():
        for grid in grids:
            mean, log_var = model.encoder_moments(_grid_tensor(model, grid))
            codes.append(LatentCode(mean[0].double().numpy(), log_var[0].double().numpy()))
    return codes


def reparameterize(code: LatentCode, noise: np.ndarray) -> np.ndarray:
    """Sample z = mean + sigma * noise."""
    noise = np.asarray(noise, dtype=np.float64).reshape(-1)
    if noise.shape != code.means.shape:
        raise ValueError(f"noise length {noise.size} != latent length {len(code)}")
    return code.means + np.exp(0.5 * code.log_variances) * noise


def decode(model: VoxelVAE, z: np.ndarray) -> VoxelGrid:
    """Decode a latent sample to a probability grid in (0, 1)."""
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if z.shape[0] != model.config.latent_dim:
        raise ValueError(f"z length {z.size} != latent_dim {model.config.latent_dim}")
    model.eval()
    dtype = next(model.parameters()).dtype
    with torch.no_grad():
        probs = model.decoder_stack(torch.as_tensor(z, dtype=dtype).view(1, -1))[-1]
    return VoxelGrid(model.config.input_dim, probs[0, 0].double().numpy())


def decode_features(model: VoxelVAE, z: np.ndarray) -> np.ndarray:
    """Activation vector of the decoder's one-before-last layer.

    Used as the similarity space for nearest-dataset lookups.
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    model.eval()
    dtype = next(model.parameters()).dtype
    with torch.no_grad():
        acts = model.decoder_stack(torch.as_tensor(z, dtype=dtype).view(1, -1))
    return acts[-2][0].double().numpy().ravel()
