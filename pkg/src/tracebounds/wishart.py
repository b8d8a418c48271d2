"""Empirical laboratory for Wishart query-complexity experiments.

Covers the posterior block decomposition of a Wishart matrix after
matrix-vector queries, eigenvalue-law experiments (lambda_min CDF at the
x/d^2 scale, lambda_max exponential tail), inverse-power trace scaling,
and the metered query game for tr(W^{-p}) estimation.

Normalization note: this library uses Wishart(d) = (1/d) G G^T.  Under
that convention the posterior block W~ after n queries equals (1/d) H H^T
with H of size (d-n), i.e. Wishart(d-n) scaled by (d-n)/d.  The
distributional test therefore rescales W~ by d/(d-n) before comparing
against fresh Wishart(d-n) draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ks_2samp

from .errors import (
    BudgetExceededError,
    ConditioningError,
    NotPositiveDefiniteError,
    SpectrumError,
)
from .krylov import fa_times_vec_oracle
from .linalg import (
    SymMatrix,
    cholesky,
    orthonormal_complement,
    qr_columns,
    sample_wishart,
    sym_eigen,
    symmetrize,
)
from .rng import RngState, rademacher

#: Reference constant for the lambda_max tail test: the bulk edge of
#: (1/d) G G^T is 4 (Marchenko-Pastur), so tails are measured from 4(1+t).
LAMBDA_MAX_REFERENCE = 4.0


@dataclass(frozen=True)
class QueryTranscript:
    """Query vectors v_1..v_n and responses w_i = W v_i, with n < d."""

    dim: int
    queries: np.ndarray   # d x n
    responses: np.ndarray  # d x n

    def __post_init__(self):
        q = np.asarray(self.queries, dtype=np.float64).reshape(self.dim, -1)
        w = np.asarray(self.responses, dtype=np.float64).reshape(self.dim, -1)
        if q.shape != w.shape:
            raise ValueError("queries and responses must have matching shapes")
        n = q.shape[1]
        if n >= self.dim:
            raise ValueError(f"need n < d, got n={n}, d={self.dim}")
        if n > 0:
            qr_columns(q)  # raises RankDeficiencyError on dependent queries
        object.__setattr__(self, "queries", q)
        object.__setattr__(self, "responses", w)

    @property
    def n_queries(self) -> int:
        return self.queries.shape[1]


def make_transcript(w: SymMatrix, queries: np.ndarray) -> QueryTranscript:
    """Build a transcript by querying W directly."""
    q = np.asarray(queries, dtype=np.float64).reshape(w.dim, -1)
    return QueryTranscript(w.dim, q, w.entries @ q)


@dataclass(frozen=True)
class PosteriorDecomposition:
    """Orthogonal V and blocks (Y1, Y2, W~) with
    V W V^T = [[Y1 Y1^T, Y1 Y2^T], [Y2 Y1^T, Y2 Y2^T + W~]].
    """

    v: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    wtilde: SymMatrix

    def block_matrix(self) -> np.ndarray:
        n = self.y1.shape[0]
        d = self.v.shape[0]
        out = np.zeros((d, d))
        if n:
            out[:n, :n] = self.y1 @ self.y1.T
            out[:n, n:] = self.y1 @ self.y2.T
            out[n:, :n] = self.y2 @ self.y1.T
        out[n:, n:] = self.y2 @ self.y2.T + self.wtilde.entries if n else self.wtilde.entries
        return out

    def block_residual(self, w: SymMatrix) -> float:
        """max-norm residual of the block identity against V W V^T."""
        return float(np.max(np.abs(self.v @ w.entries @ self.v.T - self.block_matrix())))


def revealed_blocks(t: QueryTranscript):
    """(V, Y1, Y2) computed from the transcript alone, never touching W.

    V stacks the orthonormalized queries over an orthonormal complement;
    Y1 is the Cholesky factor of the revealed quadratic block and Y2 the
    cross block.  Raises ConditioningError if the revealed block is not
    numerically positive definite.
    """
    d, n = t.dim, t.n_queries
    if n == 0:
        return np.eye(d), np.zeros((0, 0)), np.zeros((d, 0))
    qc, r = qr_columns(t.queries)
    comp = orthonormal_complement(qc, d)
    v = np.vstack([qc.T, comp.T])
    rinv_w = np.linalg.solve(r.T, t.responses.T).T  # [w_1..w_n] R^{-1}
    s = symmetrize(qc.T @ rinv_w)
    try:
        y1 = cholesky(s)
    except NotPositiveDefiniteError as exc:
        raise ConditioningError(
            f"revealed block not positive definite: {exc}"
        ) from exc
    y2 = np.linalg.solve(y1, (comp.T @ rinv_w).T).T  # (comp^T [w] R^{-1}) Y1^{-T}
    return v, y1, y2


def posterior_decompose(w: SymMatrix, t: QueryTranscript) -> PosteriorDecomposition:
    """Full decomposition: transcript-only (V, Y1, Y2) plus W~ from W."""
    v, y1, y2 = revealed_blocks(t)
    n = t.n_queries
    comp_t = v[n:, :]
    wtilde = symmetrize(comp_t @ w.entries @ comp_t.T - y2 @ y2.T)
    return PosteriorDecomposition(v, y1, y2, wtilde)


# ---------------------------------------------------------------------------
# Distribution experiments


@dataclass(frozen=True)
class PosteriorTestReport:
    d: int
    n: int
    trials: int
    ks_trace: tuple[float, float]        # (statistic, p-value)
    ks_lambda_min: tuple[float, float]
    ks_trace_uncorrected: tuple[float, float]  # negative control

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "trials": self.trials,
            "ks_trace": {"statistic": self.ks_trace[0], "p_value": self.ks_trace[1]},
            "ks_lambda_min": {
                "statistic": self.ks_lambda_min[0],
                "p_value": self.ks_lambda_min[1],
            },
            "ks_trace_uncorrected": {
                "statistic": self.ks_trace_uncorrected[0],
                "p_value": self.ks_trace_uncorrected[1],
            },
        }


def posterior_distribution_test(
    d: int, n: int, trials: int, rng: RngState
) -> PosteriorTestReport:
    """Two-sample KS comparison of the posterior block against Wishart(d-n).

    Queries are the fixed canonical directions e_1..e_n.  Samples of
    (d/(d-n)) W~ (see module normalization note) are compared against fresh
    Wishart(d-n) draws on tr and on lambda_min * (d-n)^2.  A negative
    control omits the Y2 Y2^T correction, which shifts the trace and must
    be rejected by the same test.
    """
    if not 0 <= n < d:
        raise ValueError("need 0 <= n < d")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dn = d - n
    scale = d / dn
    queries = np.eye(d)[:, :n]
    tr_post = np.empty(trials)
    lmin_post = np.empty(trials)
    tr_uncorrected = np.empty(trials)
    tr_ref = np.empty(trials)
    lmin_ref = np.empty(trials)
    for i in range(trials):
        w = sample_wishart(d, rng.child(0, i))
        dec = posterior_decompose(w, make_transcript(w, queries))
        wt = scale * dec.wtilde.entries
        tr_post[i] = np.trace(wt)
        lmin_post[i] = np.linalg.eigvalsh(wt)[0] * dn * dn
        comp_t = dec.v[n:, :]
        tr_uncorrected[i] = scale * np.trace(comp_t @ w.entries @ comp_t.T)
        ref = sample_wishart(dn, rng.child(1, i))
        tr_ref[i] = np.trace(ref.entries)
        lmin_ref[i] = np.linalg.eigvalsh(ref.entries)[0] * dn * dn
    ks_tr = ks_2samp(tr_post, tr_ref)
    ks_lmin = ks_2samp(lmin_post, lmin_ref)
    ks_neg = ks_2samp(tr_uncorrected, tr_ref)
    return PosteriorTestReport(
        d, n, trials,
        (float(ks_tr.statistic), float(ks_tr.pvalue)),
        (float(ks_lmin.statistic), float(ks_lmin.pvalue)),
        (float(ks_neg.statistic), float(ks_neg.pvalue)),
    )


@dataclass(frozen=True)
class CdfRow:
    x: float
    count: int
    probability: float
    stderr: float


def _binomial_rows(values: np.ndarray, thresholds, transform) -> list[CdfRow]:
    trials = len(values)
    rows = []
    for x in thresholds:
        count = int(np.sum(transform(values, x)))
        p = count / trials
        se = math.sqrt(max(p * (1 - p), 1.0 / trials) / trials)
        rows.append(CdfRow(float(x), count, p, se))
    return rows


def eig_cdf_experiment(d: int, trials: int, x_values, rng: RngState) -> list[CdfRow]:
    """Empirical Pr{lambda_min(W) <= x/d^2} with binomial standard errors."""
    xs = np.asarray(list(x_values), dtype=np.float64)
    if np.any(xs < 0) or np.any(xs > 1):
        raise ValueError("x values must lie in [0, 1]")
    lmins = np.empty(trials)
    for i in range(trials):
        w = sample_wishart(d, rng.child(i))
        lmins[i] = np.linalg.eigvalsh(w.entries)[0]
    return _binomial_rows(lmins, xs, lambda v, x: v <= x / (d * d))


def lambda_max_tail_experiment(
    d: int, trials: int, t_values, rng: RngState
) -> list[CdfRow]:
    """Empirical Pr{lambda_max(W) >= 4 (1+t)}; predicted tail 2 exp(-d t)."""
    ts = np.asarray(list(t_values), dtype=np.float64)
    lmaxs = np.empty(trials)
    for i in range(trials):
        w = sample_wishart(d, rng.child(i))
        lmaxs[i] = np.linalg.eigvalsh(w.entries)[-1]
    return _binomial_rows(
        lmaxs, ts, lambda v, t: v >= LAMBDA_MAX_REFERENCE * (1.0 + t)
    )


@dataclass(frozen=True)
class InvTraceReport:
    d: int
    p: float
    trials: int
    dropped: int
    quantiles: dict          # {0.5: ..., 0.9: ..., 0.99: ...} of tr(W^-p)/d^{2p}
    per_index_q99: np.ndarray  # 0.99-quantile of (1/lambda_j) j^2/d^2, j=1..d
    samples: np.ndarray      # normalized trace samples, one per kept trial

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "d": self.d,
            "p": self.p,
            "trials": self.trials,
            "dropped": self.dropped,
            "quantiles": {str(k): v for k, v in self.quantiles.items()},
            "per_index_q99": self.per_index_q99.tolist(),
        }
        if include_samples:
            out["samples"] = self.samples.tolist()
        return out


def inv_trace_tail_experiment(
    d: int, trials: int, p: float, rng: RngState
) -> InvTraceReport:
    """Quantiles of tr(W^{-p}) / d^{2p} plus per-eigenvalue diagnostics.

    The per-index table records the 0.99-quantile of (1/lambda_j) j^2/d^2
    for each ascending eigenvalue index j, exhibiting the j^{-2} profile
    behind the d^{2p} trace scale.  Numerically singular draws
    (lambda_min < 1e-300) are dropped and counted, never silently skipped.
    """
    if p <= 0.5:
        raise ValueError("need p > 1/2")
    if d < 2:
        raise ValueError("need d >= 2")
    samples = []
    inv_scaled = []
    dropped = 0
    j2 = (np.arange(1, d + 1) ** 2) / (d * d)
    for i in range(trials):
        w = sample_wishart(d, rng.child(i))
        lam = np.linalg.eigvalsh(w.entries)
        if lam[0] < 1e-300:
            dropped += 1
            continue
        samples.append(float(np.sum(lam ** (-p))) / d ** (2 * p))
        inv_scaled.append(j2 / lam)
    samples = np.asarray(samples)
    inv_scaled = np.asarray(inv_scaled)
    quantiles = {
        q: float(np.quantile(samples, q)) for q in (0.5, 0.9, 0.99)
    }
    per_index = np.quantile(inv_scaled, 0.99, axis=0)
    return InvTraceReport(d, float(p), trials, dropped, quantiles, per_index, samples)


# ---------------------------------------------------------------------------
# Query game


class MeteredOracle:
    """The only window an algorithm has onto W: counted products v -> W v."""

    def __init__(self, w: SymMatrix, budget: int):
        self._entries = w.entries
        self.budget = budget
        self.count = 0

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.count + 1 > self.budget:
            raise BudgetExceededError(self.budget)
        self.count += 1
        return self._entries @ v


@dataclass(frozen=True)
class ExactRecovery:
    """Query e_1..e_d, rebuild W, answer exactly.  Needs budget >= d."""

    def run(self, oracle: MeteredOracle, p: float, g: np.random.Generator) -> float:
        d = oracle.dim
        cols = [oracle.matvec(np.eye(d)[:, j]) for j in range(d)]
        w = symmetrize(np.column_stack(cols))
        lam = sym_eigen(w).eigvals
        if lam[0] <= 0:
            raise SpectrumError(float(lam[0]))
        return float(np.sum(lam ** (-p)))

    def describe(self) -> str:
        return "exact_recovery"


@dataclass(frozen=True)
class ConstantGuess:
    """Ignore the oracle and always answer the same constant."""

    value: float

    def run(self, oracle: MeteredOracle, p: float, g: np.random.Generator) -> float:
        return self.value

    def describe(self) -> str:
        return f"constant_guess({self.value:g})"


@dataclass(frozen=True)
class HutchinsonKrylov:
    """Hutchinson with Lanczos f(W) z applications; costs n_probes * m."""

    n_probes: int
    m: int

    def run(self, oracle: MeteredOracle, p: float, g: np.random.Generator) -> float:
        d = oracle.dim

        def f(vals):
            smallest = float(np.min(vals))
            if smallest <= 0:
                raise SpectrumError(smallest)
            return vals ** (-p)

        qforms = np.empty(self.n_probes)
        for s in range(self.n_probes):
            z = rademacher(g, d)
            y, _ = fa_times_vec_oracle(oracle.matvec, d, z, self.m, f)
            qforms[s] = z @ y
        return float(np.mean(qforms))

    def describe(self) -> str:
        return f"hutchinson_krylov(N_v={self.n_probes}, m={self.m})"


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    estimate: float
    true_trace: float
    queries_used: int
    success: bool
    budget_violation: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "estimate": self.estimate,
            "true_trace": self.true_trace,
            "queries_used": self.queries_used,
            "success": self.success,
            "budget_violation": self.budget_violation,
            "error": self.error,
        }


@dataclass(frozen=True)
class GameResult:
    d: int
    p: float
    approx_factor: float
    budget: int
    trials: int
    algorithm: str
    success_count: int
    budget_violations: int
    records: list = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.success_count / self.trials

    def to_dict(self, include_records: bool = True) -> dict:
        out = {
            "d": self.d,
            "p": self.p,
            "approx_factor": self.approx_factor,
            "budget": self.budget,
            "trials": self.trials,
            "algorithm": self.algorithm,
            "success_count": self.success_count,
            "success_rate": self.success_rate,
            "budget_violations": self.budget_violations,
        }
        if include_records:
            out["records"] = [r.to_dict() for r in self.records]
        return out


def query_game(
    d: int, p: float, approx_factor: float, algorithm, budget: int,
    trials: int, rng: RngState,
) -> GameResult:
    """Run the metered trace-estimation game.

    Per trial: draw W ~ Wishart(d), let the algorithm query v -> W v at
    most ``budget`` times, and score success iff the estimate lands in
    [tr(W^{-p})/C, C tr(W^{-p})] with C = approx_factor.  The true trace
    comes from a full eigendecomposition that the algorithm never sees.
    """
    if p <= 0.5:
        raise ValueError("need p > 1/2")
    if approx_factor <= 1.0:
        raise ValueError("need approximation factor C > 1")
    if isinstance(algorithm, ExactRecovery) and budget < d:
        raise ValueError("exact_recovery requires budget >= d")
    if isinstance(algorithm, HutchinsonKrylov) and algorithm.n_probes * algorithm.m > budget:
        raise ValueError("hutchinson_krylov needs n_probes * m <= budget")
    records = []
    successes = 0
    violations = 0
    for i in range(trials):
        w = sample_wishart(d, rng.child(0, i))
        lam = sym_eigen(w).eigvals
        true_tr = float(np.sum(np.maximum(lam, 1e-300) ** (-p)))
        oracle = MeteredOracle(w, budget)
        error = None
        violation = False
        estimate = math.nan
        try:
            estimate = algorithm.run(oracle, p, rng.child(1, i))
        except BudgetExceededError:
            violation = True
            violations += 1
        except SpectrumError as exc:
            error = str(exc)
        success = (
            not violation
            and error is None
            and true_tr / approx_factor <= estimate <= approx_factor * true_tr
        )
        if success:
            successes += 1
        records.append(
            TrialRecord(i, estimate, true_tr, oracle.count, success, violation, error)
        )
    return GameResult(
        d, float(p), float(approx_factor), budget, trials,
        algorithm.describe(), successes, violations, records,
    )
