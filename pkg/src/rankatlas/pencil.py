"""Dense 3-way tensors, slice pencils and their rank-drop geometry.

A tensor ``Y`` of size u x n x m is viewed through the pencil
``M(a, Y) = sum_k a_k Y_k`` of its u x n slices.  The questions this module
answers numerically: does some nonzero real ``a`` drop the pencil's column
rank below n (and where), or is the column rank full on the whole sphere
(and by what margin)?
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
import scipy.optimize

__all__ = [
    "Tensor3",
    "ProblemDims",
    "MarginBudget",
    "SearchBudget",
    "RankDropPoint",
    "PointRegularity",
    "flatten",
    "contract_pencil",
    "minor",
    "pluecker_residual",
    "kernel_vector_psi",
    "afcr_margin",
    "afcr_margin_info",
    "is_afcr",
    "rank_drop_search",
    "point_regularity",
    "corner_minors",
    "corner_minor_jacobian",
]


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Dense real 3-way array, stored slice-major: slice k is the d1 x d2
    matrix ``T_k`` and the tensor is (T_1; ...; T_d3)."""

    data: np.ndarray  # shape (d3, d1, d2), read-only

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=float))
        if arr.ndim != 3:
            raise ValueError(f"Tensor3 needs a 3-way array, got ndim={arr.ndim}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def d1(self) -> int:
        return self.data.shape[1]

    @property
    def d2(self) -> int:
        return self.data.shape[2]

    @property
    def d3(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.d3)

    @classmethod
    def from_slices(cls, slices) -> "Tensor3":
        return cls(np.stack([np.asarray(s, dtype=float) for s in slices]))

    @classmethod
    def from_flat(cls, d1: int, d2: int, d3: int, flat) -> "Tensor3":
        arr = np.asarray(flat, dtype=float)
        if arr.size != d1 * d2 * d3:
            raise ValueError(
                f"flat data has {arr.size} entries, expected {d1 * d2 * d3}")
        return cls(arr.reshape(d3, d1, d2))

    def slice(self, k: int) -> np.ndarray:
        """Slice T_k, 0-based."""
        return self.data[k]

    @property
    def slices(self) -> list[np.ndarray]:
        return [self.data[k] for k in range(self.d3)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def scaled(self, c: float) -> "Tensor3":
        return Tensor3(self.data * c)

    def __eq__(self, other) -> bool:
        return isinstance(other, Tensor3) and self.dims == other.dims and bool(
            np.array_equal(self.data, other.data))

    def to_json(self) -> str:
        return json.dumps({
            "dims": [self.d1, self.d2, self.d3],
            "layout": "slice-major",
            "data": self.data.ravel().tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "Tensor3":
        payload = json.loads(text)
        d1, d2, d3 = (int(x) for x in payload["dims"])
        if payload.get("layout", "slice-major") != "slice-major":
            raise ValueError(f"unsupported layout {payload.get('layout')!r}")
        return cls.from_flat(d1, d2, d3, payload["data"])

    def to_text(self) -> str:
        lines = [f"{self.d1} {self.d2} {self.d3}"]
        for k in range(self.d3):
            lines.append("")
            for row in self.data[k]:
                lines.append(" ".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Tensor3":
        tokens = text.split()
        if len(tokens) < 3:
            raise ValueError("text tensor needs a 'd1 d2 d3' header")
        d1, d2, d3 = int(tokens[0]), int(tokens[1]), int(tokens[2])
        values = [float(t) for t in tokens[3:]]
        return cls.from_flat(d1, d2, d3, values)


@dataclass(frozen=True)
class ProblemDims:
    """Integer frame for the rank-p problem on n x p x m tensors.

    Derived quantities: u = mn - p (pencil height), l = (m-1)n - p,
    v = l + 1 (codimension of the rank-drop locus), t = n.
    """

    m: int
    n: int
    p: int

    def __post_init__(self):
        if not 3 <= self.m <= self.n:
            raise ValueError(f"need 3 <= m <= n, got m={self.m}, n={self.n}")
        lo, hi = (self.m - 1) * (self.n - 1) + 1, (self.m - 1) * self.n
        if not lo <= self.p <= hi:
            raise ValueError(
                f"p={self.p} outside the certifiable window [{lo}, {hi}] "
                f"for m={self.m}, n={self.n}")

    @property
    def u(self) -> int:
        return self.m * self.n - self.p

    @property
    def l(self) -> int:
        return (self.m - 1) * self.n - self.p

    @property
    def v(self) -> int:
        return self.l + 1

    @property
    def t(self) -> int:
        return self.n


def flatten(T: Tensor3, mode: int) -> np.ndarray:
    """Mode-1: slices side by side (d1 x d2*d3); mode-2: slices stacked
    vertically (d1*d3 x d2)."""
    if mode == 1:
        return np.hstack(T.slices)
    if mode == 2:
        return np.vstack(T.slices)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def contract_pencil(a, Y: Tensor3) -> np.ndarray:
    """M(a, Y) = sum_k a_k Y_k."""
    a = np.asarray(a, dtype=float)
    if a.shape != (Y.d3,):
        raise ValueError(f"coefficient vector has shape {a.shape}, "
                         f"expected ({Y.d3},)")
    return np.einsum("k,kij->ij", a, Y.data)


def _bareiss_det(M: list[list[Fraction]]) -> Fraction:
    # fraction-free Gaussian elimination; exact for rational entries
    n = len(M)
    M = [row[:] for row in M]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[-1][-1]


def minor(M, rows, cols):
    """Determinant of the submatrix picked by 1-based row/column index lists.

    Indices may repeat (the determinant is then zero).  Integer and Fraction
    matrices are evaluated exactly; floats via LAPACK.
    """
    rows, cols = list(rows), list(cols)
    if len(rows) != len(cols):
        raise ValueError(
            f"ragged index lists: {len(rows)} rows vs {len(cols)} cols")
    arr = np.asarray(M)
    u, n = arr.shape
    for r in rows:
        if not 1 <= r <= u:
            raise IndexError(f"row index {r} out of range 1..{u}")
    for c in cols:
        if not 1 <= c <= n:
            raise IndexError(f"column index {c} out of range 1..{n}")
    sub = arr[np.ix_([r - 1 for r in rows], [c - 1 for c in cols])]
    if arr.dtype == object or np.issubdtype(arr.dtype, np.integer):
        entries = [[Fraction(x) for x in row] for row in sub.tolist()]
        if not entries:
            return Fraction(1)
        val = _bareiss_det(entries)
        return int(val) if val.denominator == 1 else val
    if sub.size == 0:
        return 1.0
    return float(np.linalg.det(sub.astype(float)))


def _shuffle_sign(chosen: tuple[int, ...], s: int) -> int:
    # sign of the permutation (chosen..., rest...) of 0..s-1, both halves sorted
    inversions = sum(c - i for i, c in enumerate(chosen))
    return -1 if inversions % 2 else 1


def pluecker_residual(M, a_rows, b_rows, c_rows):
    """Signed sum of products of maximal minors over all shuffles of the
    c-indices; identically zero for every matrix.

    ``a_rows`` (length k), ``b_rows`` (length n-l+1) and ``c_rows``
    (length s) are 1-based row indices subject to s = n-k+l-1 > n and
    t = n-k > 0.  Returns |sum|, exact on integer matrices.
    """
    arr = np.asarray(M)
    u, n = arr.shape
    if u < n:
        raise ValueError("matrix must have at least as many rows as columns")
    a_rows, b_rows, c_rows = list(a_rows), list(b_rows), list(c_rows)
    k = len(a_rows)
    t = n - k
    if t <= 0:
        raise ValueError(f"need t = n - k > 0, got k={k} for n={n}")
    l = n - len(b_rows) + 1
    s = n - k + l - 1
    if s <= n:
        raise ValueError(
            f"index constraint s = n-k+l-1 > n violated: s={s}, n={n}")
    if len(c_rows) != s:
        raise ValueError(f"need {s} c-indices, got {len(c_rows)}")
    cols = list(range(1, n + 1))
    total = None
    for chosen in itertools.combinations(range(s), t):
        rest = [i for i in range(s) if i not in chosen]
        sign = _shuffle_sign(chosen, s)
        first = minor(arr, a_rows + [c_rows[i] for i in chosen], cols)
        second = minor(arr, [c_rows[i] for i in rest] + b_rows, cols)
        term = sign * first * second
        total = term if total is None else total + term
    return abs(total)


def kernel_vector_psi(a, Y: Tensor3, rows) -> np.ndarray:
    """Signed-cofactor kernel candidate for the pencil at ``a``.

    ``rows`` are n-1 distinct 1-based row indices.  Entry j of the result is
    (-1)^(n+j) times the minor on those rows and all columns except j; the
    k-th entry of M(a,Y) @ psi equals the n-minor on rows (rows..., k).
    """
    M = contract_pencil(a, Y)
    u, n = M.shape
    rows = list(rows)
    if len(rows) != n - 1:
        raise ValueError(f"need {n - 1} row indices, got {len(rows)}")
    if len(set(rows)) != len(rows):
        raise ValueError("row indices must be distinct")
    psi = np.empty(n)
    for j in range(1, n + 1):
        cols = [c for c in range(1, n + 1) if c != j]
        psi[j - 1] = (-1) ** (n + j) * minor(M, rows, cols)
    return psi


# -- rank-drop search ---------------------------------------------------------


@dataclass(frozen=True)
class MarginBudget:
    restarts: int = 60
    iters: int = 80
    probe_lines: int = 30

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("margin budget needs at least one restart")


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 300      # multistart path (m > 3, u > n)
    lines: int = 20          # square-pencil probe lines
    tol: float = 1e-8        # sigma_n/sigma_1 declaring rank deficiency
    dedup_tol: float = 1e-6  # projective identification threshold


@dataclass(frozen=True)
class RankDropPoint:
    a: np.ndarray        # unit pencil coefficients
    b: np.ndarray        # unit kernel vector of M(a, Y)
    quality: float       # sigma_n / sigma_1 at a


@dataclass(frozen=True)
class MarginInfo:
    value: float
    minimizer: np.ndarray
    restarts: int


@dataclass(frozen=True)
class PointRegularity:
    corner: float
    jacobian_ok: bool
    jacobian: np.ndarray = field(repr=False, default=None)


def _unit(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def _canonical_sign(a: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(a)))
    return -a if a[i] < 0 else a


def _sigma_ratio(M: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(M, compute_uv=False)
    n = M.shape[1]
    top = s[0] if s[0] > 0 else 1.0
    return float(s[n - 1]), float(s[n - 1] / top)


def _square_line_roots(Y: Tensor3, rng, lines: int, tol: float):
    """Real zeros of det M(a, Y) on random lines, via generalized eigenvalues."""
    m = Y.d3
    out = []
    for _ in range(lines):
        a0 = _unit(rng.standard_normal(m))
        a1 = _unit(rng.standard_normal(m))
        A0, A1 = contract_pencil(a0, Y), contract_pencil(a1, Y)
        try:
            w = sla.eig(A0, -A1, right=False, homogeneous_eigvals=True)
        except (ValueError, sla.LinAlgError):
            continue
        for al, be in zip(w[0], w[1]):
            scale = max(abs(al), abs(be))
            if not np.isfinite(scale) or scale < 1e-12:
                continue
            al, be = al / scale, be / scale
            if abs(al.imag) > 1e-9 or abs(be.imag) > 1e-9:
                continue
            a = be.real * a0 + al.real * a1
            norm = np.linalg.norm(a)
            if norm < 1e-10:
                continue
            a = a / norm
            _, ratio = _sigma_ratio(contract_pencil(a, Y))
            if ratio < tol:
                out.append(a)
    return out


def _two_param_roots(Y: Tensor3, rng, tol: float):
    """All isolated rank-drop points of a 3-slice rectangular pencil.

    (Z1 + x Z2 + y Z3) b = 0 is compressed by two random n x u projections
    into a pair of square two-parameter eigenproblems sharing (x, y), solved
    through their Kronecker operator determinants.  Spurious compression
    roots fail the sigma_n filter and drop out.
    """
    m, u, n = Y.d3, Y.d1, Y.d2
    if m != 3 or u <= n or u > 2 * n:
        raise ValueError("two-parameter path needs m == 3 and n < u <= 2n")
    R = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    Z = np.einsum("kl,lij->kij", R, Y.data)
    P1 = rng.standard_normal((n, u))
    P2 = rng.standard_normal((n, u))
    A1, B1, C1 = P1 @ Z[0], P1 @ Z[1], P1 @ Z[2]
    A2, B2, C2 = P2 @ Z[0], P2 @ Z[1], P2 @ Z[2]
    D0 = np.kron(B1, C2) - np.kron(C1, B2)
    D1 = np.kron(C1, A2) - np.kron(A1, C2)
    out = []
    try:
        w = sla.eig(D1, D0, right=False, homogeneous_eigvals=True)
    except (ValueError, sla.LinAlgError):
        return out
    for al, be in zip(w[0], w[1]):
        if abs(be) < 1e-10 * max(1.0, abs(al)):
            continue
        x = al / be
        if abs(x.imag) > 1e-7 * (1.0 + abs(x.real)):
            continue  # (1, x, y) can only be real with real x
        x = complex(x.real)
        try:
            w2 = sla.eig(A1 + x * B1, -C1, right=False, homogeneous_eigvals=True)
        except (ValueError, sla.LinAlgError):
            continue
        for al2, be2 in zip(w2[0], w2[1]):
            if abs(be2) < 1e-10 * max(1.0, abs(al2)):
                continue
            y = al2 / be2
            a_rot = np.array([1.0 + 0j, x, y])
            if np.max(np.abs(a_rot.imag)) > 1e-7 * np.max(np.abs(a_rot.real)):
                continue
            a = _unit(R.T @ a_rot.real)
            _, ratio = _sigma_ratio(contract_pencil(a, Y))
            if ratio < tol:
                out.append(a)
    return out


def _multistart_roots(Y: Tensor3, rng, restarts: int, tol: float,
                      seeds=()):
    """Nelder-Mead on a sphere chart plus Gauss-Newton polish on the maximal
    minors; heuristic, used when no structured solver applies.  ``seeds``
    (e.g. margin minimizers) are used as the first start points."""
    m, u, n = Y.d3, Y.d1, Y.d2
    rowsets = list(itertools.combinations(range(u), n))

    def minors(a):
        M = contract_pencil(a, Y)
        return np.array([np.linalg.det(M[list(r), :]) for r in rowsets])

    def minors_jac(a):
        M = contract_pencil(a, Y)
        J = np.zeros((len(rowsets), m))
        for ri, r in enumerate(rowsets):
            sub = M[list(r), :]
            for k in range(m):
                Wk = Y.data[k][list(r), :]
                for rr in range(n):
                    tmp = sub.copy()
                    tmp[rr, :] = Wk[rr, :]
                    J[ri, k] += np.linalg.det(tmp)
        return J

    starts = [np.asarray(s, dtype=float) for s in seeds]
    out = []
    for i in range(restarts):
        a0 = _unit(starts[i]) if i < len(starts) else _unit(
            rng.standard_normal(m))
        basis = sla.null_space(a0[None, :])  # tangent chart at a0

        def obj(xi):
            a = _unit(a0 + basis @ xi)
            s = np.linalg.svd(contract_pencil(a, Y), compute_uv=False)
            return s[n - 1]

        res = scipy.optimize.minimize(
            obj, np.zeros(m - 1), method="Nelder-Mead",
            options={"maxiter": 120, "xatol": 1e-9, "fatol": 1e-12})
        a = _unit(a0 + basis @ res.x)
        lam = 1e-3
        for _ in range(40):  # Gauss-Newton / Levenberg-Marquardt polish
            F = minors(a)
            if np.linalg.norm(F) < 1e-15:
                break
            J = minors_jac(a)
            try:
                step = np.linalg.solve(J.T @ J + lam * np.eye(m), -J.T @ F)
            except np.linalg.LinAlgError:
                break
            an = _unit(a + step)
            if np.linalg.norm(minors(an)) < np.linalg.norm(F):
                a, lam = an, max(lam / 3, 1e-12)
            else:
                lam *= 10
                if lam > 1e8:
                    break
        _, ratio = _sigma_ratio(contract_pencil(a, Y))
        if ratio < tol:
            out.append(a)
    return out


def _dedup_points(points, dedup_tol):
    uniq = []
    for a in points:
        a = _canonical_sign(a)
        if not any(np.linalg.norm(a - b) < dedup_tol for b in uniq):
            uniq.append(a)
    uniq.sort(key=lambda a: tuple(np.round(a, 9)))
    return uniq


def rank_drop_search(Y: Tensor3, dims: ProblemDims | None = None,
                     budget: SearchBudget | None = None,
                     seed: int | np.random.Generator = 0,
                     start_points=()) -> list[RankDropPoint]:
    """Hunt for unit vectors a with sigma_n(M(a, Y)) below tolerance.

    Square pencils (u == n) are handled by real generalized eigenvalues on
    random lines; 3-slice rectangular pencils by the complete two-parameter
    eigenvalue reduction; anything else by budgeted multistart minimization
    (seeded from ``start_points``, e.g. margin minimizers).  One point is
    returned per kernel basis vector.  An empty result means the search
    failed, not that no points exist.
    """
    budget = budget or SearchBudget()
    rng = np.random.default_rng(seed) if not isinstance(
        seed, np.random.Generator) else seed
    u, n, m = Y.d1, Y.d2, Y.d3
    if u < n:
        raise ValueError(f"pencil must be tall: u={u} < n={n}")
    if dims is not None and (dims.u, dims.n, dims.m) != (u, n, m):
        raise ValueError(f"dims {dims} do not match tensor of size {u}x{n}x{m}")
    if u == n:
        raw = _square_line_roots(Y, rng, budget.lines, budget.tol)
    elif m == 3 and u <= 2 * n:
        raw = _two_param_roots(Y, rng, budget.tol)
    else:
        raw = _multistart_roots(Y, rng, budget.restarts, budget.tol,
                                seeds=start_points)
    points = []
    for a in _dedup_points(raw, budget.dedup_tol):
        M = contract_pencil(a, Y)
        _, s, Vt = np.linalg.svd(M)
        top = s[0] if s[0] > 0 else 1.0
        for i in range(n - 1, -1, -1):
            if s[i] / top < budget.tol:
                points.append(RankDropPoint(
                    a=a, b=_canonical_sign(Vt[i]), quality=float(s[i] / top)))
            else:
                break
    return points


def afcr_margin_info(Y: Tensor3, budget: MarginBudget | None = None,
                     seed: int | np.random.Generator = 0) -> MarginInfo:
    """Best-found minimum of sigma_n(M(a, Y)) over unit a.

    Multistart projected-gradient descent, with structured zero candidates
    (line roots / two-parameter roots) evaluated first so that genuinely
    singular pencils report an essentially zero margin.  The result is an
    upper estimate of the true margin: strictly positive values are evidence
    of full column rank everywhere, not proof.
    """
    budget = budget or MarginBudget()
    rng = np.random.default_rng(seed) if not isinstance(
        seed, np.random.Generator) else seed
    u, n, m = Y.d1, Y.d2, Y.d3
    if u < n:
        raise ValueError(f"pencil must be tall: u={u} < n={n}")

    def value(a):
        return np.linalg.svd(contract_pencil(a, Y), compute_uv=False)[n - 1]

    best_val, best_a = np.inf, None
    candidates = [np.eye(m)[k] for k in range(m)]
    if u == n:
        candidates += _square_line_roots(Y, rng, budget.probe_lines, tol=np.inf)
    elif m == 3 and u <= 2 * n:
        candidates += _two_param_roots(Y, rng, tol=np.inf)
    for a in candidates:
        v = value(a)
        if v < best_val:
            best_val, best_a = v, a
    restarts = 0
    for r in range(budget.restarts):
        restarts += 1
        a = _unit(rng.standard_normal(m))
        if r == 0 and best_a is not None:
            a = best_a
        f = value(a)
        for _ in range(budget.iters):
            U_, s_, Vt_ = np.linalg.svd(contract_pencil(a, Y))
            g = np.array([U_[:, n - 1] @ Y.data[k] @ Vt_[n - 1]
                          for k in range(m)])
            g -= (g @ a) * a  # tangent projection
            ng = np.linalg.norm(g)
            if ng < 1e-14:
                break
            step, moved = 0.3, False
            while step > 1e-12:
                an = _unit(a - step * g / ng)
                fn = value(an)
                if fn < f:
                    a, f, moved = an, fn, True
                    break
                step /= 2
            if not moved or f < 1e-15:
                break
        if f < best_val:
            best_val, best_a = f, a
        if best_val < 1e-15:
            break
    return MarginInfo(value=float(best_val), minimizer=_canonical_sign(best_a),
                      restarts=restarts)


def afcr_margin(Y: Tensor3, budget: MarginBudget | None = None,
                seed: int | np.random.Generator = 0) -> float:
    return afcr_margin_info(Y, budget, seed).value


def is_afcr(Y: Tensor3, tol: float = 1e-6,
            budget: MarginBudget | None = None,
            seed: int | np.random.Generator = 0) -> tuple[bool, float]:
    """Classify Y by the margin of its Frobenius-normalized copy.

    Returns (classification, normalized margin); margin above ``tol`` counts
    as full column rank on the whole sphere.
    """
    norm = Y.norm()
    if norm == 0:
        return False, 0.0
    margin = afcr_margin(Y.scaled(1.0 / norm), budget, seed)
    return margin > tol, margin


def corner_minors(a, Y: Tensor3, dims: ProblemDims | None = None) -> np.ndarray:
    """The v corner minors mu_k: rows (1..n-1, k) x all columns, k = n..u."""
    M = contract_pencil(a, Y)
    u, n = M.shape
    base = list(range(1, n))
    return np.array([minor(M, base + [k], list(range(1, n + 1)))
                     for k in range(n, u + 1)])


def _det_grad_rows(sub: np.ndarray, repl: np.ndarray) -> float:
    # d/dt det(sub + t*repl) at t=0 via row replacements
    total = 0.0
    for r in range(sub.shape[0]):
        tmp = sub.copy()
        tmp[r, :] = repl[r, :]
        total += np.linalg.det(tmp)
    return total


def corner_minor_jacobian(a, Y: Tensor3, dims: ProblemDims) -> np.ndarray:
    """Jacobian of the corner minors with respect to the last v pencil
    coordinates, evaluated at ``a`` (a v x v matrix)."""
    a = np.asarray(a, dtype=float)
    M = contract_pencil(a, Y)
    u, n, m, v = Y.d1, Y.d2, Y.d3, dims.v
    rows_base = list(range(n - 1))
    J = np.zeros((u - n + 1, v))
    for ki, k in enumerate(range(n - 1, u)):
        rows = rows_base + [k]
        sub = M[rows, :]
        for si, s in enumerate(range(m - v, m)):
            J[ki, si] = _det_grad_rows(sub, Y.data[s][rows, :])
    return J


def point_regularity(a, Y: Tensor3, dims: ProblemDims) -> PointRegularity:
    """Smoothness diagnostics at a candidate rank-drop point.

    ``corner`` is |det| of the leading (n-1) x (n-1) block of the pencil;
    ``jacobian_ok`` reports whether the corner-minor Jacobian in the last v
    coordinates has full numerical rank.  Degenerate points are reported,
    never rejected.
    """
    M = contract_pencil(a, Y)
    n = Y.d2
    corner = abs(np.linalg.det(M[: n - 1, : n - 1]))
    J = corner_minor_jacobian(a, Y, dims)
    s = np.linalg.svd(J, compute_uv=False)
    ok = bool(s.size and s[0] > 0 and s[-1] > 1e-8 * s[0])
    return PointRegularity(corner=float(corner), jacobian_ok=ok, jacobian=J)
