"""Hutchinson's stochastic trace estimator over pluggable f(A) z backends.

Every estimate carries its per-probe quadratic forms and an exact ledger of
matrix-vector products consumed, the cost currency of the estimator:
total cost = N_v * (MVPs per probe).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .approx import ApproxTarget, inv_poly, inv_sqrt_poly
from .chebyshev import ChebPoly
from .krylov import (
    apply_scalar_function,
    fa_times_vec_lanczos,
    poly_times_block,
    poly_times_vec,
)
from .linalg import SymMatrix, sym_eigen
from .rng import RngState, rademacher


@dataclass(frozen=True)
class ProbeSpec:
    """Probe distribution, count and RNG for a Hutchinson run.

    Probe s draws from rng.child(s), so results are order-independent and
    probes may be evaluated in parallel.
    """

    kind: str
    count: int
    rng: RngState

    def __post_init__(self):
        if self.kind not in ("rademacher", "gaussian"):
            raise ValueError(f"unknown probe kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def draw(self, s: int, dim: int) -> np.ndarray:
        g = self.rng.child(s)
        if self.kind == "rademacher":
            return rademacher(g, dim)
        return g.standard_normal(dim)


@dataclass(frozen=True)
class TraceEstimate:
    """Hutchinson output: mean of quadratic forms plus the MVP ledger."""

    value: float
    quadratic_forms: np.ndarray
    mvp_count: int
    backend: str
    sample_stddev: float

    def standard_error(self) -> float:
        """Sample stddev of the mean, the 1/sqrt(N_v) statistical scale."""
        return self.sample_stddev / math.sqrt(len(self.quadratic_forms))

    def to_dict(self, include_quadratic_forms: bool = True) -> dict:
        out = {
            "value": self.value,
            "mvp_count": self.mvp_count,
            "backend": self.backend,
            "sample_stddev": self.sample_stddev,
            "n_probes": len(self.quadratic_forms),
        }
        if include_quadratic_forms:
            out["quadratic_forms"] = self.quadratic_forms.tolist()
        return out

    def to_json(self, include_quadratic_forms: bool = True) -> str:
        return json.dumps(self.to_dict(include_quadratic_forms))


class ExactBackend:
    """g(A) z through a full eigendecomposition; consumes no metered MVPs."""

    def __init__(self, f):
        self.f = f

    def describe(self) -> str:
        return f"exact({_func_name(self.f)})"

    def apply(self, a: SymMatrix, z: np.ndarray):
        eig = sym_eigen(a)
        return eig.apply_function(lambda v: apply_scalar_function(self.f, v), z), 0

    def apply_block(self, a: SymMatrix, zblock: np.ndarray):
        eig = sym_eigen(a)
        vals = apply_scalar_function(self.f, eig.eigvals)
        return eig.eigvecs @ (vals[:, None] * (eig.eigvecs.T @ zblock)), 0

    def matrix(self, a: SymMatrix) -> np.ndarray:
        """Dense g(A), the exact-trace oracle for tests."""
        eig = sym_eigen(a)
        vals = apply_scalar_function(self.f, eig.eigvals)
        return (eig.eigvecs * vals) @ eig.eigvecs.T


class LanczosBackend:
    """g(A) z = m-step Lanczos approximation of f(A) z; m MVPs per probe."""

    def __init__(self, f, m: int):
        self.f = f
        self.m = m

    def describe(self) -> str:
        return f"lanczos({_func_name(self.f)}, m={self.m})"

    def apply(self, a: SymMatrix, z: np.ndarray):
        return fa_times_vec_lanczos(a, z, self.m, self.f)


class ChebBackend:
    """g(A) z = p(A) z for an explicit ChebPoly; degree(p) MVPs per probe."""

    def __init__(self, poly: ChebPoly, label: str = "cheb"):
        self.poly = poly
        self.label = label

    def describe(self) -> str:
        a, b = self.poly.interval
        return f"{self.label}(degree={self.poly.degree()}, interval=[{a:g},{b:g}])"

    def apply(self, a: SymMatrix, z: np.ndarray):
        return poly_times_vec(a, self.poly, z)

    def apply_block(self, a: SymMatrix, zblock: np.ndarray):
        return poly_times_block(a, self.poly, zblock)

    def matrix(self, a: SymMatrix) -> np.ndarray:
        eig = sym_eigen(a)
        vals = self.poly.evaluate(eig.eigvals)
        return (eig.eigvecs * vals) @ eig.eigvecs.T


def _func_name(f) -> str:
    if callable(f):
        return getattr(f, "__name__", "callable")
    if isinstance(f, tuple):
        return f"{f[0]}({f[1]})"
    return str(f)


def hutchinson(a: SymMatrix, backend, probes: ProbeSpec) -> TraceEstimate:
    """Average of z^T g(A) z over the probe spec.

    The estimator is unbiased for tr(g(A)); when g approximates f the
    systematic part is bounded separately by bias_bound.
    """
    d = a.dim
    if hasattr(backend, "apply_block"):
        # Linear backends act on all probes in one Clenshaw/eigen sweep;
        # apply_block reports the total MVP cost for the block.
        zblock = np.column_stack([probes.draw(s, d) for s in range(probes.count)])
        wblock, total_mvps = backend.apply_block(a, zblock)
        qforms = np.einsum("ij,ij->j", zblock, wblock)
    else:
        qforms = np.empty(probes.count)
        total_mvps = 0
        for s in range(probes.count):
            z = probes.draw(s, d)
            w, mvps = backend.apply(a, z)
            qforms[s] = z @ w
            total_mvps += mvps
    value = float(np.mean(qforms))
    stddev = float(np.std(qforms, ddof=1)) if probes.count > 1 else 0.0
    return TraceEstimate(value, qforms, int(total_mvps), backend.describe(), stddev)


def bias_bound(target: ApproxTarget, d: int) -> float:
    """Certified bound on |tr(p(A)) - tr(f(A))| for spectrum in [1, kappa].

    Sums the scalar certificate over d eigenvalues: d * delta / sqrt(kappa)
    for inv_sqrt, d * delta / kappa for inv.  Monomial targets have no
    per-eigenvalue bound in the trace context and are rejected.
    """
    if target.kind == "monomial":
        raise ValueError("no trace bias bound is defined for monomial targets")
    if target.delta is None:
        raise ValueError("target must carry a delta")
    if target.kind == "inv_sqrt":
        return d * target.delta / math.sqrt(target.kappa)
    return d * target.delta / target.kappa


def build_target_poly(target: ApproxTarget) -> ChebPoly:
    if target.kind == "inv_sqrt":
        return inv_sqrt_poly(target.kappa, target.delta)
    if target.kind == "inv":
        return inv_poly(target.kappa, target.delta)
    raise ValueError(f"no certified trace polynomial for kind {target.kind!r}")


def estimate_tr_f(
    a: SymMatrix, target: ApproxTarget, n_probes: int, rng: RngState,
    probe_kind: str = "rademacher",
) -> TraceEstimate:
    """End-to-end pipeline: build the certified polynomial, run Hutchinson.

    The caller asserts spec(A) is inside [1, target.kappa].  mvp_count is
    exactly n_probes * degree(p).
    """
    poly = build_target_poly(target)
    label = f"cheb[{target.kind}, kappa={target.kappa:g}, delta={target.delta:g}]"
    backend = ChebBackend(poly, label=label)
    probes = ProbeSpec(probe_kind, n_probes, rng)
    return hutchinson(a, backend, probes)
