"""Dense symmetric linear algebra and random-matrix sampling.

Wishart convention used throughout: ``Wishart(d) = (1/d) G G^T`` with G a
d x d matrix of i.i.d. standard normals.  Under this normalization the bulk
edge of the spectrum sits near 4, the smallest eigenvalue lives at the
x/d^2 scale, and E tr(W) = d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EigenConvergenceError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
)
from .rng import as_generator

_SYM_RTOL = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix with validated symmetry."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("dimension must be >= 1")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
        asym = float(np.max(np.abs(m - m.T)))
        if asym > _SYM_RTOL * scale:
            raise ValueError(f"matrix not symmetric: max asymmetry {asym:g}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v


def symmetrize(m: np.ndarray) -> SymMatrix:
    """Force exact symmetry by averaging, then wrap."""
    m = np.asarray(m, dtype=np.float64)
    return SymMatrix((m + m.T) / 2.0)


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""

    eigvals: np.ndarray
    eigvecs: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T

    def apply_function(self, f, v: np.ndarray) -> np.ndarray:
        """f(A) v through the decomposition."""
        return self.eigvecs @ (f(self.eigvals) * (self.eigvecs.T @ v))


def sym_eigen(a: SymMatrix) -> EigenDecomposition:
    """Full eigendecomposition, used as the exact oracle for f(A).

    Raises EigenConvergenceError if LAPACK fails or the reconstruction
    residual exceeds the 1e-8 * ||A||_max * d contract.
    """
    d = a.dim
    try:
        vals, vecs = np.linalg.eigh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(np.inf, f"eigensolver did not converge: {exc}")
    residual = float(np.max(np.abs(a.entries @ vecs - vecs * vals)))
    tol = 1e-8 * max(1e-12, a.max_norm()) * d
    if residual > tol:
        raise EigenConvergenceError(residual)
    return EigenDecomposition(vals, vecs)


def sample_gaussian_matrix(rows: int, cols: int, rng) -> np.ndarray:
    """rows x cols matrix of i.i.d. N(0,1) entries."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return as_generator(rng).standard_normal((rows, cols))


def sample_wishart(d: int, rng) -> SymMatrix:
    """Draw W = (1/d) G G^T with G a d x d standard Gaussian matrix."""
    g = sample_gaussian_matrix(d, d, rng)
    return symmetrize(g @ g.T / d)


def sample_spd_with_spectrum(d: int, kappa: float, rng) -> SymMatrix:
    """Random SPD matrix with eigenvalues spread over [1, kappa].

    Endpoints are pinned so the declared interval is tight.
    """
    if d < 2:
        raise ValueError("need d >= 2 to pin both spectrum endpoints")
    g = as_generator(rng)
    q, _ = np.linalg.qr(g.standard_normal((d, d)))
    lam = np.exp(g.uniform(0.0, np.log(kappa), size=d))
    lam[0], lam[-1] = 1.0, float(kappa)
    return symmetrize((q * lam) @ q.T)


def cholesky(s: SymMatrix) -> np.ndarray:
    """Lower-triangular L with L L^T = S and nonnegative diagonal.

    Raises NotPositiveDefiniteError (with the 1-based pivot index) when a
    pivot falls below 1e-12 * max(1, ||S||_max).
    """
    a = s.entries
    d = s.dim
    tol = 1e-12 * max(1.0, s.max_norm())
    low = np.zeros((d, d))
    for j in range(d):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot <= tol:
            raise NotPositiveDefiniteError(j + 1, float(pivot))
        low[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def qr_columns(m: np.ndarray):
    """Thin QR with nonnegative R diagonal.

    Returns (Q, R) with Q d x n orthonormal columns, R n x n upper
    triangular.  Raises RankDeficiencyError (1-based column) when
    |R_kk| <= 1e-10 * max(1, ||M||_max).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-d array")
    d, n = m.shape
    if n > d:
        raise ValueError(f"need n <= d, got {m.shape}")
    q, r = np.linalg.qr(m)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = r * signs[:, None]
    tol = 1e-10 * max(1.0, float(np.max(np.abs(m))))
    small = np.abs(np.diag(r)) <= tol
    if np.any(small):
        raise RankDeficiencyError(int(np.argmax(small)) + 1)
    return q, r


def orthonormal_complement(q: np.ndarray, d: int) -> np.ndarray:
    """d x (d-n) matrix whose columns complete q to an orthonormal basis."""
    n = q.shape[1] if q.ndim == 2 else 0
    if n == 0:
        return np.eye(d)
    # Project the identity out of span(q) and orthonormalize what survives.
    full, _ = np.linalg.qr(np.hstack([q, np.eye(d)]))
    comp = full[:, n:d]
    return comp
