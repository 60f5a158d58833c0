"""Formula-level generative metrics over externally supplied features:
Frechet distance between fitted Gaussians, Inception Score over class
probability rows, and scaled pairwise cosine similarity.

Feature extraction (Inception/CLIP forward passes) is out of scope; the
inputs are .feat matrices produced elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import sqrt_psd
from .errors import DimensionMismatch, EmptySet, TooFewSamples, ZeroVector


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray  # (d,)
    cov: np.ndarray  # (d, d)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"mean shape {mean.shape} inconsistent with cov shape {cov.shape}"
            )
        if not np.allclose(cov, cov.T, atol=1e-10 * max(1.0, float(np.abs(cov).max(initial=0.0)))):
            raise ValueError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def gaussian_stats(features: np.ndarray) -> GaussianStats:
    """Column means and unbiased (n-1) sample covariance of an (n, d) matrix."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionMismatch(f"features must be (n, d), got shape {f.shape}")
    if f.shape[0] < 2:
        raise TooFewSamples("covariance estimation needs at least 2 samples")
    if not np.all(np.isfinite(f)):
        raise ValueError("features contain non-finite entries")
    mean = f.mean(axis=0)
    centered = f - mean
    cov = centered.T @ centered / (f.shape[0] - 1)
    return GaussianStats(mean=mean, cov=0.5 * (cov + cov.T))


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(Ca + Cb - 2 (Ca^1/2 Cb Ca^1/2)^1/2).

    The symmetric-product form keeps the inner matrix PSD, so its square
    root is well defined via the Jacobi eigensolver with negative-noise
    eigenvalues clamped to zero.
    """
    if a.mean.shape != b.mean.shape:
        raise DimensionMismatch(
            f"dimensions differ: {a.mean.size} vs {b.mean.size}"
        )
    diff = a.mean - b.mean
    root_a = sqrt_psd(a.cov)
    inner = root_a @ b.cov @ root_a
    cross = sqrt_psd(0.5 * (inner + inner.T))
    fd = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross))
    return max(fd, 0.0)


def inception_score(probs: np.ndarray, splits: int = 10) -> tuple[float, float]:
    """exp(mean KL(p(y|x) || marginal)) per split; returns (mean, std) over splits.

    Split sizes are n // splits with the last split absorbing the
    remainder; splits is capped at n so no split is empty.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.size == 0:
        raise EmptySet(f"probability rows must be a non-empty (n, k) matrix, got {p.shape}")
    if splits < 1:
        raise ValueError("splits must be >= 1")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    row_sums = p.sum(axis=1)
    if not np.allclose(row_sums, 1.0, atol=1e-9):
        raise ValueError("each probability row must sum to 1 within 1e-9")

    n = p.shape[0]
    splits = min(splits, n)
    base = n // splits
    scores = []
    for i in range(splits):
        start = i * base
        stop = (i + 1) * base if i < splits - 1 else n
        part = p[start:stop]
        # baseline-shifted mean: exact (bitwise) when all rows coincide,
        # so KL against the own marginal is exactly zero
        marginal = part[0] + (part - part[0]).mean(axis=0)
        # 0 * log 0 = 0; marginal is zero only where every row is zero
        logs = np.zeros_like(part)
        nz = part > 0
        logs[nz] = np.log(part[nz]) - np.log(marginal[np.nonzero(nz)[1]])
        kl = (part * logs).sum(axis=1)
        scores.append(float(np.exp(kl.mean())))
    scores = np.asarray(scores)
    return float(scores.mean()), float(scores.std())


def clip_similarity(img: np.ndarray, txt: np.ndarray) -> tuple[float, float]:
    """100 x cosine similarity per (image, text) row pair; (mean, std) over pairs."""
    a = np.asarray(img, dtype=np.float64)
    b = np.asarray(txt, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionMismatch(
            f"feature sets must share (n, d) shape, got {a.shape} and {b.shape}"
        )
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ZeroVector("cosine similarity undefined for zero-norm rows")
    cos = np.einsum("ij,ij->i", a, b) / (na * nb)
    scores = 100.0 * cos
    return float(scores.mean()), float(scores.std())
