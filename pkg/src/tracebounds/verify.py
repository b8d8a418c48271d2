"""Fast invariant battery behind the `tracebounds verify` subcommand.

Each check returns silently on success and raises AssertionError (or any
library error) on failure; the CLI prints one PASS/FAIL line per check.
"""

from __future__ import annotations

import math

import numpy as np

from .approx import (
    ApproxTarget,
    inv_poly,
    inv_sqrt_poly,
    monomial_cheb_approx,
    sup_error,
)
from .hutchinson import ExactBackend, ChebBackend, LanczosBackend, ProbeSpec, hutchinson
from .krylov import fa_times_vec_lanczos, poly_times_vec
from .linalg import (
    SymMatrix,
    cholesky,
    sample_spd_with_spectrum,
    sample_wishart,
    sym_eigen,
)
from .rng import RngState
from .wishart import make_transcript, posterior_decompose


def check_eigen_reconstruction():
    rng = RngState(101)
    for i, d in enumerate((3, 8, 17)):
        g = rng.child(i).standard_normal((d, d))
        a = SymMatrix((g + g.T) / 2.0)
        eig = sym_eigen(a)
        resid = np.max(np.abs(a.entries - eig.reconstruct()))
        assert resid <= 1e-8 * max(1.0, a.max_norm()) * d, f"residual {resid:g}"


def check_cholesky_round_trip():
    rng = RngState(102)
    for i in range(5):
        g = rng.child(i)
        d = 6
        low = np.tril(g.standard_normal((d, d)))
        np.fill_diagonal(low, np.abs(np.diag(low)) + 0.5)
        s = SymMatrix(low @ low.T)
        low2 = cholesky(s)
        assert np.max(np.abs(low2 - low)) <= 1e-10 * max(1.0, s.max_norm())


def check_wishart_psd():
    rng = RngState(103)
    for i in range(10):
        w = sample_wishart(6, rng.child(i))
        assert np.linalg.eigvalsh(w.entries)[0] >= -1e-10


def check_monomial_certificates():
    for s in (1, 3, 7, 25):
        for delta in (0.1, 0.01):
            p = monomial_cheb_approx(s, delta)
            err = sup_error(p, ApproxTarget("monomial", s=s), 4096)
            assert err <= delta, f"s={s} delta={delta} err={err:g}"


def check_inverse_certificates():
    for kappa in (2.0, 16.0):
        for delta in (0.4, 0.01):
            q = inv_sqrt_poly(kappa, delta)
            err = sup_error(q, ApproxTarget("inv_sqrt", kappa=kappa, delta=delta), 4096)
            assert err <= delta / math.sqrt(kappa)
            r = inv_poly(kappa, delta)
            err = sup_error(r, ApproxTarget("inv", kappa=kappa, delta=delta), 4096)
            assert err <= delta / kappa


def check_lanczos_saturation():
    rng = RngState(104)
    a = sample_spd_with_spectrum(10, 8.0, rng.child(0))
    z = rng.child(1).standard_normal(10)
    eig = sym_eigen(a)
    exact = eig.apply_function(lambda v: 1.0 / v, z)
    approx, mvps = fa_times_vec_lanczos(a, z, 10, "inv")
    assert mvps == 10
    assert np.linalg.norm(approx - exact) <= 1e-6 * np.linalg.norm(exact)


def check_mvp_ledger():
    rng = RngState(105)
    a = sample_spd_with_spectrum(12, 4.0, rng.child(0))
    p = inv_poly(4.0, 0.1)
    _, mvps = poly_times_vec(a, p, rng.child(1).standard_normal(12))
    assert mvps == p.degree()
    est = hutchinson(a, ChebBackend(p), ProbeSpec("rademacher", 7, RngState(105, 1)))
    assert est.mvp_count == 7 * p.degree()
    est = hutchinson(a, LanczosBackend("inv", 5), ProbeSpec("rademacher", 3, RngState(105, 2)))
    assert est.mvp_count == 3 * 5


def check_hutchinson_exhaustive():
    rng = RngState(106)
    d = 3
    a = sample_spd_with_spectrum(d, 4.0, rng.child(0))
    backend = ExactBackend("inv")
    tr_exact = float(np.trace(backend.matrix(a)))
    total = 0.0
    for bits in range(2 ** d):
        z = np.array([1.0 if bits >> j & 1 else -1.0 for j in range(d)])
        w, _ = backend.apply(a, z)
        total += z @ w
    assert abs(total / 2 ** d - tr_exact) <= 1e-10


def check_posterior_identity():
    rng = RngState(107)
    for i in range(20):
        w = sample_wishart(10, rng.child(0, i))
        q = rng.child(1, i).standard_normal((10, 3))
        dec = posterior_decompose(w, make_transcript(w, q))
        assert dec.block_residual(w) <= 1e-8 * w.max_norm()
        lmin_w = np.linalg.eigvalsh(w.entries)[0]
        lmin_wt = np.linalg.eigvalsh(dec.wtilde.entries)[0]
        assert lmin_w <= lmin_wt + 1e-10


ALL_CHECKS = [
    ("eigen_reconstruction", check_eigen_reconstruction),
    ("cholesky_round_trip", check_cholesky_round_trip),
    ("wishart_psd", check_wishart_psd),
    ("monomial_certificates", check_monomial_certificates),
    ("inverse_certificates", check_inverse_certificates),
    ("lanczos_saturation", check_lanczos_saturation),
    ("mvp_ledger", check_mvp_ledger),
    ("hutchinson_exhaustive", check_hutchinson_exhaustive),
    ("posterior_identity", check_posterior_identity),
]


def run_all(report=print) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, fn in ALL_CHECKS:
        try:
            fn()
        except Exception as exc:  # report and keep going
            failures += 1
            report(f"FAIL {name}: {exc}")
        else:
            report(f"PASS {name}")
    return failures
