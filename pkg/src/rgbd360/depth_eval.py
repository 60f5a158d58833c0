"""Depth evaluation in disparity space: validity masks, seeded fit-point
sampling, global least-squares scale/shift alignment, inversion to metric
depth, and AbsRel/RMSE.

Estimated disparity is aligned to the reference by minimizing
sum((s*est + t - ref)^2) over sampled valid pixels, both maps are
inverted to metric depth, and errors are computed over the pixels valid
in every stage. NaN/Inf count as invalid, stricter than plain
non-negativity, since corrupt files occur in practice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFit,
    DimensionMismatch,
    EmptyIntersection,
    NoValidPixels,
)

DEFAULT_FIT_POINTS = 10_000
DEFAULT_DISPARITY_FLOOR = 1e-6
_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class ScaleShift:
    """Per-sample affine alignment in disparity space."""

    scale: float
    shift: float


@dataclass(frozen=True)
class DepthMetrics:
    abs_rel: float
    rmse: float
    n_valid: int


def compute_validity_mask(d: np.ndarray) -> np.ndarray:
    """True where disparity is finite and non-negative."""
    d = np.asarray(d, dtype=np.float64)
    return np.isfinite(d) & (d >= 0)


def sample_fit_points(
    mask_est: np.ndarray,
    mask_ref: np.ndarray,
    n: int = DEFAULT_FIT_POINTS,
    seed: int | None = None,
) -> np.ndarray:
    """Draw up to n flat pixel indices uniformly without replacement from
    the intersection of the two masks. Deterministic for a given seed."""
    mask_est = np.asarray(mask_est, dtype=bool)
    mask_ref = np.asarray(mask_ref, dtype=bool)
    if mask_est.shape != mask_ref.shape:
        raise DimensionMismatch(
            f"mask shapes differ: {mask_est.shape} vs {mask_ref.shape}"
        )
    if seed is None:
        raise ValueError("seed is required for reproducible sampling")
    both = (mask_est & mask_ref).ravel()
    candidates = np.flatnonzero(both)
    if candidates.size == 0:
        raise EmptyIntersection("no pixel is valid in both masks")
    rng = np.random.default_rng(seed)
    k = min(int(n), candidates.size)
    return rng.choice(candidates, size=k, replace=False)


def fit_scale_shift(
    est: np.ndarray, ref: np.ndarray, points: np.ndarray
) -> ScaleShift:
    """Closed-form least-squares fit of ref ~ s*est + t over the sampled points.

    Solves the 2x2 normal equations: s = cov(est, ref) / var(est) and
    t = mean(ref) - s * mean(est).
    """
    est = np.asarray(est, dtype=np.float64).ravel()[points]
    ref = np.asarray(ref, dtype=np.float64).ravel()[points]
    if est.size < 2:
        raise DegenerateFit("need at least 2 fit points")
    me = est.mean()
    mr = ref.mean()
    de = est - me
    dr = ref - mr
    ss_est = float(de @ de)
    if ss_est / est.size < _VAR_FLOOR:
        raise DegenerateFit("estimate is constant over the sampled points")
    s = float(de @ dr) / ss_est
    t = mr - s * me
    return ScaleShift(scale=s, shift=float(t))


def align_and_invert(
    d: np.ndarray, st: ScaleShift, eps: float = DEFAULT_DISPARITY_FLOOR
) -> tuple[np.ndarray, np.ndarray]:
    """Apply the scale/shift in disparity space and invert to metric depth.

    Returns (depth, valid) where depth = 1 / max(s*d + t, eps) and valid
    marks pixels whose aligned disparity was strictly positive before the
    floor kicked in.
    """
    d = np.asarray(d, dtype=np.float64)
    aligned = st.scale * d + st.shift
    valid = np.isfinite(aligned) & (aligned > 0)
    depth = 1.0 / np.maximum(aligned, eps)
    return depth, valid


def depth_metrics(
    pred: np.ndarray, ref: np.ndarray, mask: np.ndarray
) -> DepthMetrics:
    """AbsRel = mean |pred-ref|/ref and RMSE = sqrt(mean (pred-ref)^2),
    both over the masked pixels only."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if pred.shape != ref.shape or pred.shape != mask.shape:
        raise DimensionMismatch(
            f"shapes differ: pred {pred.shape}, ref {ref.shape}, mask {mask.shape}"
        )
    p = pred[mask]
    r = ref[mask]
    if p.size == 0:
        raise NoValidPixels("mask selects no pixels")
    diff = p - r
    abs_rel = float(np.mean(np.abs(diff) / r))
    rmse = float(np.sqrt(np.mean(diff * diff)))
    return DepthMetrics(abs_rel=abs_rel, rmse=rmse, n_valid=int(p.size))


@dataclass(frozen=True)
class AlignmentResult:
    scale: float
    shift: float
    abs_rel: float
    rmse: float
    n_valid: int

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "shift": self.shift,
            "abs_rel": self.abs_rel,
            "rmse": self.rmse,
            "n_valid": self.n_valid,
        }


def evaluate_pair(
    est: np.ndarray,
    ref: np.ndarray,
    seed: int,
    n_points: int = DEFAULT_FIT_POINTS,
    eps: float = DEFAULT_DISPARITY_FLOOR,
) -> AlignmentResult:
    """Full per-image protocol: mask both disparity maps, sample fit
    points, align est to ref, invert both to metric depth, and score."""
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.shape != ref.shape:
        raise DimensionMismatch(f"shapes differ: {est.shape} vs {ref.shape}")
    mask_est = compute_validity_mask(est)
    mask_ref = compute_validity_mask(ref)
    points = sample_fit_points(mask_est, mask_ref, n=n_points, seed=seed)
    st = fit_scale_shift(est, ref, points)
    pred_depth, pred_ok = align_and_invert(est, st, eps=eps)
    ref_depth, ref_ok = align_and_invert(ref, ScaleShift(1.0, 0.0), eps=eps)
    mask = mask_est & mask_ref & pred_ok & ref_ok
    m = depth_metrics(pred_depth, ref_depth, mask)
    return AlignmentResult(
        scale=st.scale,
        shift=st.shift,
        abs_rel=m.abs_rel,
        rmse=m.rmse,
        n_valid=m.n_valid,
    )


def summarize(results: dict[str, AlignmentResult]) -> dict:
    """Dataset aggregation: unweighted mean of per-image metrics, reduced
    in sorted filename order for determinism."""
    names = sorted(results)
    if not names:
        raise NoValidPixels("no per-image results to summarize")
    abs_rel = float(np.mean([results[n].abs_rel for n in names]))
    rmse = float(np.mean([results[n].rmse for n in names]))
    return {"n_images": len(names), "abs_rel": abs_rel, "rmse": rmse}
