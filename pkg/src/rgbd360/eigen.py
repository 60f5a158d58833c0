"""Cyclic Jacobi eigensolver for symmetric matrices and the PSD matrix
square root built on it.

Jacobi rotations zero one off-diagonal pair at a time; a full sweep
visits every (p, q) pair. Convergence is quadratic once the off-diagonal
mass is small, so a handful of sweeps reaches machine precision for the
matrix sizes this package works with (feature dims up to a few hundred).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

_MAX_SWEEPS = 60


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    eigenvectors in the matching columns, like numpy.linalg.eigh.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-10 * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy(), np.ones((1, 1))

    m = 0.5 * (a + a.T)  # exact symmetry for the rotations
    v = np.eye(n)
    scale = float(np.abs(m).max(initial=0.0))
    if scale == 0.0:
        return np.zeros(n), v

    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(m, -1) ** 2) * 2.0)
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= tol * scale:
                    continue
                # rotation angle from the 2x2 subproblem
                theta = 0.5 * (m[q, q] - m[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                row_p = m[p, :].copy()
                row_q = m[q, :].copy()
                m[p, :] = c * row_p - s * row_q
                m[q, :] = s * row_p + c * row_q
                col_p = m[:, p].copy()
                col_q = m[:, q].copy()
                m[:, p] = c * col_p - s * col_q
                m[:, q] = s * col_p + c * col_q
                m[p, q] = 0.0
                m[q, p] = 0.0

                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * vcol_q
                v[:, q] = s * vcol_p + c * vcol_q

    w = np.diag(m).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sqrt_psd(m: np.ndarray, clamp_rel: float = 1e-8) -> np.ndarray:
    """Symmetric square root of a PSD matrix via Jacobi eigendecomposition.

    Eigenvalues down to -clamp_rel times the largest eigenvalue count as
    numerical noise and are clamped to zero before the square root; more
    negative spectra mean the input is genuinely indefinite.
    """
    w, v = jacobi_eigh(m)
    top = float(w.max(initial=0.0))
    if top > 0 and float(w.min()) < -clamp_rel * top:
        raise ValueError(
            f"matrix is not PSD: min eigenvalue {w.min():.3e} vs max {top:.3e}"
        )
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.T
    return 0.5 * (root + root.T)
