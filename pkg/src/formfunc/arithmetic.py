"""Latent-space functionality arithmetic.

Class essences are per-component averages of member codes; importance
vectors rank latent variables by normalized KL against a void-volume code
and against the prior; the combination operator merges a base and a top
code per-component by their importance masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LatentCode, VoxelVAE, decode_features

W_VOID_DEFAULT = 2.0 / 3.0
W_PRIOR_DEFAULT = 1.0 / 3.0


@dataclass
class ClassEssence:
    code: LatentCode
    class_label: str
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")


@dataclass
class ImportanceVector:
    scores: np.ndarray
    w_void: float = W_VOID_DEFAULT
    w_prior: float = W_PRIOR_DEFAULT

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if np.any(self.scores < 0):
            raise ValueError("importance scores must be nonnegative")
        if not math.isclose(self.w_void + self.w_prior, 1.0, rel_tol=1e-9):
            raise ValueError("w_void + w_prior must equal 1")

    def __len__(self) -> int:
        return len(self.scores)

    def to_json_dict(self) -> dict:
        return {
            "latent_dim": len(self),
            "scores": self.scores.tolist(),
            "w_void": self.w_void,
            "w_prior": self.w_prior,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ImportanceVector":
        return cls(np.array(d["scores"]), d.get("w_void", W_VOID_DEFAULT), d.get("w_prior", W_PRIOR_DEFAULT))


@dataclass
class CombineRequest:
    base: LatentCode
    top: LatentCode
    base_percent: float = 0.5
    top_percent: float = 0.5

    def __post_init__(self):
        for p in (self.base_percent, self.top_percent):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"percent {p} outside [0, 1]")


def class_essence(codes: list[LatentCode], class_label: str = "") -> ClassEssence:
    """Average member codes into one; variances averaged in variance space."""
    if not codes:
        raise ValueError("cannot average an empty list of codes")
    j = len(codes[0])
    if any(len(c) != j for c in codes):
        raise ValueError("codes have mixed lengths")
    means = np.mean([c.means for c in codes], axis=0)
    variances = np.mean([c.variances for c in codes], axis=0)
    code = LatentCode(means, np.log(variances))
    return ClassEssence(code=code, class_label=class_label, sample_count=len(codes))


def gaussian_kl(p: tuple[float, float], q: tuple[float, float]) -> float:
    """KL(N(mu_p, var_p) || N(mu_q, var_q)) for scalar Gaussians."""
    mu_p, var_p = p
    mu_q, var_q = q
    if var_p <= 0 or var_q <= 0:
        raise ValueError("variances must be positive")
    return (
        0.5 * math.log(var_q / var_p)
        + (var_p + (mu_p - mu_q) ** 2) / (2.0 * var_q)
        - 0.5
    )


def _componentwise_kl(code: LatentCode, ref_means, ref_vars) -> np.ndarray:
    var_p = code.variances
    return (
        0.5 * np.log(ref_vars / var_p)
        + (var_p + (code.means - ref_means) ** 2) / (2.0 * ref_vars)
        - 0.5
    )


def _unit_norm(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v / n if n > 0 else v


def importance_vector(
    code: LatentCode,
    void_code: LatentCode,
    w_void: float = W_VOID_DEFAULT,
    w_prior: float = W_PRIOR_DEFAULT,
) -> ImportanceVector:
    """Score each latent variable by its divergence from void and prior.

    Both KL vectors are scaled to unit L2 norm before the weighted sum, so
    the two terms contribute on the same scale.
    """
    if len(code) != len(void_code):
        raise ValueError("code and void_code lengths differ")
    d_void = _componentwise_kl(code, void_code.means, void_code.variances)
    d_prior = _componentwise_kl(code, np.zeros(len(code)), np.ones(len(code)))
    scores = w_void * _unit_norm(d_void) + w_prior * _unit_norm(d_prior)
    # self-KL can go epsilon-negative in floating point
    return ImportanceVector(np.maximum(scores, 0.0), w_void, w_prior)


def importance_mask(iv: ImportanceVector, percent: float) -> np.ndarray:
    """Boolean mask of the ceil(percent * J) highest-scoring components.

    Ties break toward the lower index.
    """
    if not 0.0 <= percent <= 1.0:
        raise ValueError(f"percent {percent} outside [0, 1]")
    j = len(iv)
    k = math.ceil(percent * j)
    mask = np.zeros(j, dtype=bool)
    if k:
        order = np.argsort(-iv.scores, kind="stable")
        mask[order[:k]] = True
    return mask


def combine(
    request: CombineRequest,
    base_iv: ImportanceVector,
    top_iv: ImportanceVector,
) -> LatentCode:
    """Merge two codes under their importance masks.

    Per component: neither important or only base important -> base value;
    only top important -> top value; both important -> average of means and
    of variances.
    """
    base, top = request.base, request.top
    if not (len(base) == len(top) == len(base_iv) == len(top_iv)):
        raise ValueError("codes and importance vectors must share one length")
    base_mask = importance_mask(base_iv, request.base_percent)
    top_mask = importance_mask(top_iv, request.top_percent)

    take_top = ~base_mask & top_mask
    take_avg = base_mask & top_mask

    means = base.means.copy()
    variances = base.variances.copy()
    means[take_top] = top.means[take_top]
    variances[take_top] = top.variances[take_top]
    means[take_avg] = (base.means[take_avg] + top.means[take_avg]) / 2.0
    variances[take_avg] = (base.variances[take_avg] + top.variances[take_avg]) / 2.0
    return LatentCode(means, np.log(variances))


def nearest_in_dataset(
    generated_code: LatentCode,
    dataset_codes: list[LatentCode],
    model: VoxelVAE,
    k: int = 2,
) -> list[tuple[int, float]]:
    """k nearest dataset entries in decoder penultimate-activation space.

    Codes are compared through the mean decode path; distances are
    Euclidean, ascending, ties toward the lower index.
    """
    if not dataset_codes:
        raise ValueError("dataset_codes is empty")
    if k > len(dataset_codes):
        raise ValueError(f"k={k} exceeds dataset size {len(dataset_codes)}")
    query = decode_features(model, generated_code.means)
    dists = np.array(
        [float(np.linalg.norm(decode_features(model, c.means) - query)) for c in dataset_codes]
    )
    order = np.argsort(dists, kind="stable")[:k]
    return [(int(i), float(dists[i])) for i in order]
