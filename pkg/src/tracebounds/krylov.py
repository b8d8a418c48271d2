"""Krylov subspace actions f(A) z and explicit polynomial actions p(A) z.

m Lanczos steps span the same polynomial space as an explicit degree-(m-1)
polynomial applied to the start vector, so both paths report their cost in
the common currency of matrix-vector products (MVPs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chebyshev import ChebPoly
from .errors import SpectrumError
from .linalg import SymMatrix, sym_eigen, symmetrize

_BREAKDOWN_RTOL = 1e-12


@dataclass(frozen=True)
class LanczosFactorization:
    """Orthonormal basis and tridiagonal projection from Lanczos.

    basis is d x m with orthonormal columns (full reorthogonalization),
    alpha/beta are the diagonal and off-diagonal of T_m, and
    next_residual_norm is ||r|| in A Q = Q T_m + r e_m^T.  truncated marks
    early termination at an invariant subspace.
    """

    basis: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    next_residual_norm: float
    truncated: bool = False

    @property
    def steps(self) -> int:
        return len(self.alpha)

    def tridiagonal(self) -> np.ndarray:
        t = np.diag(self.alpha)
        if len(self.beta):
            t += np.diag(self.beta, 1) + np.diag(self.beta, -1)
        return t


def _lanczos_matvec(matvec, d: int, z: np.ndarray, m: int, breakdown_tol: float):
    """Core Lanczos loop against an opaque matvec."""
    znorm = np.linalg.norm(z)
    if znorm == 0.0:
        raise ValueError("Lanczos start vector must be nonzero")
    q = np.zeros((d, m))
    q[:, 0] = z / znorm
    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    resid = np.zeros(d)
    resid_norm = 0.0
    truncated = False
    realized = m
    for j in range(m):
        w = matvec(q[:, j])
        alpha[j] = q[:, j] @ w
        w = w - alpha[j] * q[:, j]
        if j > 0:
            w = w - beta[j - 1] * q[:, j - 1]
        # Full reorthogonalization, twice, to hold the 1e-8 basis invariant.
        for _ in range(2):
            w = w - q[:, : j + 1] @ (q[:, : j + 1].T @ w)
        wnorm = float(np.linalg.norm(w))
        if j + 1 < m:
            if wnorm <= breakdown_tol:
                realized = j + 1
                truncated = True
                break
            beta[j] = wnorm
            q[:, j + 1] = w / wnorm
        else:
            resid = w
            resid_norm = wnorm
    q = q[:, :realized]
    alpha = alpha[:realized]
    beta = beta[: max(realized - 1, 0)]
    if truncated:
        resid_norm = 0.0
    return LanczosFactorization(q, alpha, beta, resid_norm, truncated), znorm


def lanczos(a: SymMatrix, z: np.ndarray, m: int) -> LanczosFactorization:
    """m-step Lanczos factorization of A started at z.

    Residual below 1e-12 * ||A||_max ends the iteration early; callers see
    the realized step count via the factorization's shape.
    """
    if not 1 <= m <= a.dim:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={a.dim}")
    tol = _BREAKDOWN_RTOL * max(1.0, a.max_norm())
    fact, _ = _lanczos_matvec(a.matvec, a.dim, np.asarray(z, dtype=np.float64), m, tol)
    return fact


def apply_scalar_function(f, values: np.ndarray) -> np.ndarray:
    """Apply a scalar function tag (or callable) to an eigenvalue array.

    Tags: "identity", "inv", "inv_sqrt", "exp", ("monomial", s).  The
    inverse tags require strictly positive input and raise SpectrumError
    naming the offending value otherwise.
    """
    if callable(f):
        return f(values)
    if isinstance(f, tuple) and f[0] == "monomial":
        return values ** int(f[1])
    if f == "identity":
        return values.copy()
    if f == "exp":
        return np.exp(values)
    if f in ("inv", "inv_sqrt"):
        smallest = float(np.min(values))
        if smallest <= 0.0:
            raise SpectrumError(
                smallest, f"nonpositive Ritz/eigen value {smallest:g} for f={f}"
            )
        return 1.0 / values if f == "inv" else values ** -0.5
    raise ValueError(f"unknown scalar function tag {f!r}")


def fa_times_vec_lanczos(a: SymMatrix, z: np.ndarray, m: int, f):
    """Approximate f(A) z by ||z|| Q f(T_m) e_1.

    Returns (vector, mvp_count) with mvp_count equal to the realized
    number of Lanczos steps (one A-apply per step).
    """
    fact = lanczos(a, z, m)
    znorm = float(np.linalg.norm(np.asarray(z, dtype=np.float64)))
    t_eig = sym_eigen(symmetrize(fact.tridiagonal()))
    e1 = np.zeros(fact.steps)
    e1[0] = 1.0
    core = t_eig.eigvecs @ (
        apply_scalar_function(f, t_eig.eigvals) * (t_eig.eigvecs.T @ e1)
    )
    return znorm * (fact.basis @ core), fact.steps


def fa_times_vec_oracle(matvec, d: int, z: np.ndarray, m: int, f):
    """Same as fa_times_vec_lanczos but against an opaque matvec.

    Used by metered-oracle experiments where the matrix itself is hidden;
    the breakdown tolerance falls back to an absolute 1e-12 scale.
    """
    z = np.asarray(z, dtype=np.float64)
    fact, znorm = _lanczos_matvec(matvec, d, z, m, _BREAKDOWN_RTOL)
    t_eig = sym_eigen(symmetrize(fact.tridiagonal()))
    e1 = np.zeros(fact.steps)
    e1[0] = 1.0
    core = t_eig.eigvecs @ (
        apply_scalar_function(f, t_eig.eigvals) * (t_eig.eigvecs.T @ e1)
    )
    return znorm * (fact.basis @ core), fact.steps


def poly_times_vec(a: SymMatrix, p: ChebPoly, z: np.ndarray):
    """Exact polynomial action p(A) z via matrix Clenshaw.

    The caller asserts spec(A) is inside p's interval; violations are
    permitted but void any accuracy certificate.  Returns
    (vector, mvp_count) with mvp_count = degree(p).
    """
    z = np.asarray(z, dtype=np.float64)
    lo, hi = p.interval
    c = p.coeffs
    n = p.degree()
    if n == 0:
        return c[0] * z, 0

    def atil(v):
        # u(A) = (2A - (a+b) I) / (b-a), one A-apply per call
        return (2.0 * (a.entries @ v) - (lo + hi) * v) / (hi - lo)

    b1 = c[n] * z  # b_n; b_{n+1} = b_{n+2} = 0 so no apply needed
    b2 = np.zeros_like(z)
    for k in range(n - 1, 0, -1):
        b1, b2 = c[k] * z + 2.0 * atil(b1) - b2, b1
    return c[0] * z + atil(b1) - b2, n


def poly_times_block(a: SymMatrix, p: ChebPoly, zblock: np.ndarray):
    """poly_times_vec applied to a d x k block in one Clenshaw sweep.

    mvp_count is degree(p) per column, i.e. degree * k in total.
    """
    zblock = np.asarray(zblock, dtype=np.float64)
    lo, hi = p.interval
    c = p.coeffs
    n = p.degree()
    k = zblock.shape[1]
    if n == 0:
        return c[0] * zblock, 0

    def atil(v):
        return (2.0 * (a.entries @ v) - (lo + hi) * v) / (hi - lo)

    b1 = c[n] * zblock
    b2 = np.zeros_like(zblock)
    for j in range(n - 1, 0, -1):
        b1, b2 = c[j] * zblock + 2.0 * atil(b1) - b2, b1
    return c[0] * zblock + atil(b1) - b2, n * k


@dataclass(frozen=True)
class BlockKrylovBasis:
    """Orthonormal basis of span{V, AV, ..., A^{m-1} V} with deflation log."""

    basis: np.ndarray
    block_size: int
    steps: int
    deflations: list = field(default_factory=list)

    def apply_function(self, a: SymMatrix, v: np.ndarray, f) -> np.ndarray:
        """Projection approximation Q f(Q^T A Q) Q^T V."""
        q = self.basis
        core = symmetrize(q.T @ a.entries @ q)
        eig = sym_eigen(core)
        rhs = q.T @ np.asarray(v, dtype=np.float64)
        return q @ (eig.eigvecs @ (
            apply_scalar_function(f, eig.eigvals)[:, None] * (eig.eigvecs.T @ rhs)
        ))


def _orthogonalize_block(basis_cols, w: np.ndarray, tol: float):
    """Orthogonalize w's columns against basis_cols and each other.

    Returns (kept columns, number dropped).
    """
    kept = []
    dropped = 0
    for i in range(w.shape[1]):
        v = w[:, i].copy()
        for _ in range(2):
            if basis_cols:
                q = np.column_stack(basis_cols + kept)
            elif kept:
                q = np.column_stack(kept)
            else:
                q = None
            if q is not None:
                v = v - q @ (q.T @ v)
        norm = float(np.linalg.norm(v))
        if norm <= tol:
            dropped += 1
            continue
        kept.append(v / norm)
    return kept, dropped


def block_krylov_basis(a: SymMatrix, v: np.ndarray, m: int) -> BlockKrylovBasis:
    """Orthonormal basis of the order-m block Krylov space of (A, V).

    Rank-deficient directions are deflated and logged as (step, count)
    pairs rather than treated as errors.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    if v.ndim != 2 or v.shape[0] != a.dim:
        raise ValueError("V must be a d x b matrix")
    b = v.shape[1]
    if not 1 <= m * b <= a.dim:
        raise ValueError(f"need 1 <= m*b <= d, got m={m}, b={b}, d={a.dim}")
    if np.linalg.norm(v) == 0.0:
        raise ValueError("V must be nonzero")
    tol = 1e-10 * max(1.0, float(np.max(np.abs(v))), a.max_norm())

    cols: list[np.ndarray] = []
    deflations: list[tuple[int, int]] = []
    block, dropped = _orthogonalize_block([], v, tol)
    if dropped:
        deflations.append((0, dropped))
    cols.extend(block)
    for step in range(1, m):
        if not block:
            break
        w = a.entries @ np.column_stack(block)
        block, dropped = _orthogonalize_block(cols, w, tol)
        if dropped:
            deflations.append((step, dropped))
        cols.extend(block)
    return BlockKrylovBasis(np.column_stack(cols), b, m, deflations)
