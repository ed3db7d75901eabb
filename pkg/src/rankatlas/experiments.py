"""Monte-Carlo validation harness: random tensors, an alternating-least-
squares cross-check, the tangent-space generic-rank probe, and frequency
reports for the certifier."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .certify import CertifyBudget, NotInVError, RankP, certify
from .classify import classify
from .pencil import Tensor3

__all__ = [
    "AlsBudget",
    "ExperimentConfig",
    "ExperimentReport",
    "SampleRow",
    "sample_gaussian_tensor",
    "als_fit",
    "terracini_generic_rank",
    "run_experiment",
    "extend_with_random_column",
]

CSV_COLUMNS = ("sample_id", "verdict", "cert_residual", "als_p", "als_p1",
               "points_found", "span_dim", "wall_ms")


def sample_gaussian_tensor(dims: tuple[int, int, int],
                           rng: np.random.Generator,
                           require_v: bool = False,
                           max_tries: int = 64) -> Tensor3:
    """iid standard normal d1 x d2 x d3 tensor.

    With ``require_v`` the leading d2 x d2 block of the mode-2 flattening is
    required to be well-conditioned (resampling on the measure-zero-ish
    failures).
    """
    d1, d2, d3 = dims
    for _ in range(max_tries):
        T = Tensor3(rng.standard_normal((d3, d1, d2)))
        if not require_v:
            return T
        F = np.vstack(T.slices)
        if F.shape[0] >= d2 and np.linalg.cond(F[:d2, :]) < 1e12:
            return T
    raise RuntimeError("could not draw a tensor with invertible leading block")


@dataclass(frozen=True)
class AlsBudget:
    restarts: int = 5
    sweeps: int = 500
    stall_tol: float = 1e-12
    polish_iters: int = 200


def _khatri_rao(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # columnwise Kronecker product
    r = A.shape[1]
    return (A[:, None, :] * B[None, :, :]).reshape(-1, r)


def _cp_lm_polish(X: np.ndarray, A, B, C, iters: int):
    """Levenberg-Marquardt on all factor entries; ALS alone crawls through
    swamps near tight decompositions, LM converges quadratically."""
    d1, d2, d3 = X.shape
    r = A.shape[1]
    x = np.concatenate([A.ravel(), B.ravel(), C.ravel()])
    target = X.ravel()

    def split(x):
        A = x[: d1 * r].reshape(d1, r)
        B = x[d1 * r: d1 * r + d2 * r].reshape(d2, r)
        C = x[d1 * r + d2 * r:].reshape(d3, r)
        return A, B, C

    def model(x):
        A, B, C = split(x)
        return np.einsum("ij,aj,kj->iak", A, B, C).ravel()

    def jacobian(x):
        # columns in the same packed (row-major per factor) order as x
        A, B, C = split(x)
        eye1, eye2, eye3 = np.eye(d1), np.eye(d2), np.eye(d3)
        cols = []
        for i in range(d1):
            for j in range(r):
                cols.append(np.einsum(
                    "i,a,k->iak", eye1[i], B[:, j], C[:, j]).ravel())
        for a in range(d2):
            for j in range(r):
                cols.append(np.einsum(
                    "i,a,k->iak", A[:, j], eye2[a], C[:, j]).ravel())
        for k in range(d3):
            for j in range(r):
                cols.append(np.einsum(
                    "i,a,k->iak", A[:, j], B[:, j], eye3[k]).ravel())
        return np.column_stack(cols)

    res = target - model(x)
    cost = np.linalg.norm(res)
    lam = 1e-4
    for _ in range(iters):
        J = jacobian(x)
        g = J.T @ res
        if np.linalg.norm(g) < 1e-14:
            break
        try:
            step = np.linalg.solve(J.T @ J + lam * np.eye(x.size), g)
        except np.linalg.LinAlgError:
            break
        xn = x + step
        resn = target - model(xn)
        costn = np.linalg.norm(resn)
        if costn < cost:
            x, res, cost = xn, resn, costn
            lam = max(lam / 3, 1e-14)
            if cost < 1e-14 * max(1.0, np.linalg.norm(target)):
                break
        else:
            lam *= 10
            if lam > 1e10:
                break
    return split(x)


def als_fit(T: Tensor3, r: int, budget: AlsBudget | None = None,
            seed: int | np.random.Generator = 0) -> float:
    """Best relative residual of a rank-r CP model over multistart ALS.

    A cheap independent oracle for rank estimates; local minima are real, so
    only the best-over-restarts value is meaningful.
    """
    if r < 1:
        raise ValueError("rank must be positive")
    budget = budget or AlsBudget()
    rng = np.random.default_rng(seed) if not isinstance(
        seed, np.random.Generator) else seed
    X = np.transpose(T.data, (1, 2, 0))  # (d1, d2, d3)
    d1, d2, d3 = X.shape
    X1 = X.reshape(d1, d2 * d3)                      # = A (B kr C)^T
    X2 = np.transpose(X, (1, 0, 2)).reshape(d2, -1)  # = B (A kr C)^T
    X3 = np.transpose(X, (2, 0, 1)).reshape(d3, -1)  # = C (A kr B)^T
    norm = np.linalg.norm(X)
    if norm == 0:
        return 0.0
    def svd_init(unfolding, dim):
        U = np.linalg.svd(unfolding, full_matrices=False)[0][:, :r]
        if U.shape[1] < r:
            U = np.hstack([U, rng.standard_normal((dim, r - U.shape[1]))])
        return U

    def residual(A, B, C):
        return np.linalg.norm(X1 - A @ _khatri_rao(B, C).T) / norm

    best = np.inf
    for restart in range(budget.restarts):
        if restart == 0:  # singular-vector warm start, then random restarts
            A, B, C = svd_init(X1, d1), svd_init(X2, d2), svd_init(X3, d3)
        else:
            A = rng.standard_normal((d1, r))
            B = rng.standard_normal((d2, r))
            C = rng.standard_normal((d3, r))
        start = (A, B, C)
        prev = np.inf
        for sweep in range(budget.sweeps):
            Ao, Bo, Co = A, B, C
            A = np.linalg.lstsq(_khatri_rao(B, C), X1.T, rcond=None)[0].T
            B = np.linalg.lstsq(_khatri_rao(A, C), X2.T, rcond=None)[0].T
            C = np.linalg.lstsq(_khatri_rao(A, B), X3.T, rcond=None)[0].T
            res = residual(A, B, C)
            if sweep >= 2:
                # extrapolation along the sweep direction breaks ALS swamps
                step = (sweep + 1) ** (1.0 / 3.0)
                Ae = Ao + step * (A - Ao)
                Be = Bo + step * (B - Bo)
                Ce = Co + step * (C - Co)
                res_e = residual(Ae, Be, Ce)
                if res_e < res:
                    A, B, C, res = Ae, Be, Ce, res_e
            if prev - res < budget.stall_tol:
                break
            prev = res
        if budget.polish_iters:
            Ap, Bp, Cp = _cp_lm_polish(X, A, B, C, budget.polish_iters)
            res = min(res, residual(Ap, Bp, Cp))
            if res > 1e-8 and restart > 0:
                # the sweep basin was bad; polish the raw start as well
                Ap, Bp, Cp = _cp_lm_polish(X, *start, budget.polish_iters)
                res = min(res, residual(Ap, Bp, Cp))
        best = min(best, res)
        if best < 1e-14:
            break
    return float(best)


def terracini_generic_rank(m: int, n: int, p: int,
                           seed: int | np.random.Generator = 0,
                           rtol: float = 1e-8) -> int:
    """Smallest r whose rank-r tangent space at a random point fills the
    whole m*n*p space (numerical rank with relative threshold ``rtol``)."""
    if min(m, n, p) < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed) if not isinstance(
        seed, np.random.Generator) else seed
    full = m * n * p
    eye_m, eye_n, eye_p = np.eye(m), np.eye(n), np.eye(p)
    for r in range(1, full + 1):
        cols = []
        for _ in range(r):
            a = rng.standard_normal(m)
            b = rng.standard_normal(n)
            c = rng.standard_normal(p)
            for s in range(m):
                cols.append(np.einsum("i,j,k->ijk", eye_m[s], b, c).ravel())
            for s in range(n):
                cols.append(np.einsum("i,j,k->ijk", a, eye_n[s], c).ravel())
            for s in range(p):
                cols.append(np.einsum("i,j,k->ijk", a, b, eye_p[s]).ravel())
        J = np.column_stack(cols)
        sv = np.linalg.svd(J, compute_uv=False)
        rank = int(np.sum(sv > rtol * sv[0]))
        if rank == full:
            return r
    return full


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo run: shape in certifier orientation (n, p, m)."""

    n: int
    p: int
    m: int
    samples: int
    seed: int = 0
    run_als: bool = False
    als_restarts: int = 3
    als_sweeps: int = 250
    certify_budget: CertifyBudget = field(default_factory=CertifyBudget)
    csv_path: str | None = None
    json_path: str | None = None
    threads: int = 1
    include_timings: bool = True

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sample count must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        payload = json.loads(text)
        budget = payload.pop("certify_budget", None)
        cfg = cls(**payload) if budget is None else cls(
            certify_budget=CertifyBudget(**budget), **payload)
        return cfg

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, indent=1)


@dataclass(frozen=True)
class SampleRow:
    sample_id: int
    verdict: str
    cert_residual: float | None
    als_p: float | None
    als_p1: float | None
    points_found: int | None
    span_dim: int | None
    wall_ms: float


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: list[SampleRow]
    frequencies: dict[str, float]
    prediction: str

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for row in self.rows:
            cells = []
            for col in CSV_COLUMNS:
                val = getattr(row, col)
                cells.append("" if val is None else repr(val)
                             if isinstance(val, float) else str(val))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "config": json.loads(self.config.to_json()),
            "frequencies": self.frequencies,
            "prediction": self.prediction,
            "samples": len(self.rows),
        }
        return json.dumps(payload, indent=1)


def _run_one(cfg: ExperimentConfig, idx: int) -> SampleRow:
    rng = np.random.default_rng([cfg.seed, idx])
    t0 = time.perf_counter()
    T = sample_gaussian_tensor((cfg.n, cfg.p, cfg.m), rng, require_v=True)
    try:
        verdict = certify(T, cfg.certify_budget, seed=rng)
    except NotInVError:
        verdict = None
    als_p = als_p1 = None
    if cfg.run_als:
        als_budget = AlsBudget(restarts=cfg.als_restarts,
                               sweeps=cfg.als_sweeps)
        als_p = als_fit(T, cfg.p, als_budget, seed=rng)
        als_p1 = als_fit(T, cfg.p + 1, als_budget, seed=rng)
    wall_ms = (time.perf_counter() - t0) * 1000.0 if cfg.include_timings else 0.0
    if verdict is None:
        return SampleRow(idx, "NotInV", None, als_p, als_p1, None, None, wall_ms)
    name = verdict.kind
    residual = None
    points = span = None
    if isinstance(verdict, RankP):
        residual = verdict.certificate.residual
        points = verdict.diagnostics.get("points_found",
                                         len(verdict.certificate.points))
        span = verdict.diagnostics.get("span_dim",
                                       verdict.certificate.dims.p)
    elif name == "Inconclusive":
        points = verdict.diagnostics.get("points_found")
        span = verdict.diagnostics.get("span_dim")
    return SampleRow(idx, name, residual, als_p, als_p1, points, span, wall_ms)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Certify ``cfg.samples`` random tensors and aggregate verdict
    frequencies; deterministic for a fixed (config, seed) regardless of the
    thread count."""
    threads = cfg.threads
    env_cap = os.environ.get("RANKATLAS_THREADS")
    if env_cap:
        threads = max(1, min(threads, int(env_cap)))
    indices = range(cfg.samples)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda i: _run_one(cfg, i), indices))
    else:
        rows = [_run_one(cfg, i) for i in indices]
    rows.sort(key=lambda r: r.sample_id)
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.verdict] = counts.get(row.verdict, 0) + 1
    freqs = {k: v / cfg.samples for k, v in sorted(counts.items())}
    prediction = classify(cfg.m, cfg.n, cfg.p).describe()
    report = ExperimentReport(config=cfg, rows=rows, frequencies=freqs,
                              prediction=prediction)
    if cfg.csv_path:
        with open(cfg.csv_path, "w") as fh:
            fh.write(report.to_csv())
    if cfg.json_path:
        with open(cfg.json_path, "w") as fh:
            fh.write(report.to_json())
    return report


def extend_with_random_column(T: Tensor3, rng: np.random.Generator) -> Tensor3:
    """Append one random column to every slice: n x p x m -> n x (p+1) x m.

    Dropping that column projects back onto T, so rank(T) <= rank of the
    extension; a rank-(p+1) certificate for the extension caps rank(T).
    """
    cols = rng.standard_normal((T.d3, T.d1, 1))
    return Tensor3(np.concatenate([T.data, cols], axis=2))
