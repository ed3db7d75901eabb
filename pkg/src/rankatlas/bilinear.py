"""Explicit nonsingular bilinear maps and their tensor form.

A map f: R^a x R^b -> R^c is carried by a coefficient array indexed
(k, i, j) with f(x, y)_k = sum coeffs[k, i, j] x_i y_j.  Under the slice
correspondence (slice j of the c x a x b tensor acts as x |-> A_j x) the
nonsingular maps are exactly the tensors whose slice pencil keeps full
column rank on the whole sphere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pencil import Tensor3

__all__ = [
    "BilinearMap",
    "OptBudget",
    "hypercomplex_mult",
    "convolve",
    "restrict",
    "as_tensor",
    "from_tensor",
    "nonsingularity_margin",
]


@dataclass(frozen=True, eq=False)
class BilinearMap:
    coeffs: np.ndarray  # shape (c, a, b)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.coeffs, dtype=float))
        if arr.ndim != 3:
            raise ValueError("coeffs must be a c x a x b array")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def a(self) -> int:
        return self.coeffs.shape[1]

    @property
    def b(self) -> int:
        return self.coeffs.shape[2]

    @property
    def c(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (self.a,) or y.shape != (self.b,):
            raise ValueError(
                f"expected inputs of shapes ({self.a},), ({self.b},), "
                f"got {x.shape}, {y.shape}")
        return np.einsum("kij,i,j->k", self.coeffs, x, y)

    def __eq__(self, other) -> bool:
        return isinstance(other, BilinearMap) and bool(
            np.array_equal(self.coeffs, other.coeffs))

    def to_json(self) -> str:
        return json.dumps({
            "a": self.a, "b": self.b, "c": self.c,
            "coeffs": self.coeffs.ravel().tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "BilinearMap":
        payload = json.loads(text)
        a, b, c = int(payload["a"]), int(payload["b"]), int(payload["c"])
        arr = np.asarray(payload["coeffs"], dtype=float)
        if arr.size != a * b * c:
            raise ValueError("coeffs length does not match a*b*c")
        return cls(arr.reshape(c, a, b))


def _cd_conj(z: np.ndarray) -> np.ndarray:
    out = -z
    out[0] = z[0]
    return out


def _cd_mult(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Cayley-Dickson doubling: (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))
    n = len(x)
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[:h], x[h:]
    c, d = y[:h], y[h:]
    return np.concatenate([
        _cd_mult(a, c) - _cd_mult(_cd_conj(d), b),
        _cd_mult(d, a) + _cd_mult(b, _cd_conj(c)),
    ])


def hypercomplex_mult(d: int) -> BilinearMap:
    """Multiplication of R, C, the quaternions or the octonions on R^d.

    Satisfies |f(x, y)| = |x| |y|, hence is nonsingular.
    """
    if d not in (1, 2, 4, 8):
        raise ValueError(f"d must be one of 1, 2, 4, 8; got {d}")
    coeffs = np.zeros((d, d, d))
    eye = np.eye(d)
    for i in range(d):
        for j in range(d):
            coeffs[:, i, j] = _cd_mult(eye[i], eye[j])
    return BilinearMap(coeffs)


def convolve(g: BilinearMap, m: int, n: int) -> BilinearMap:
    """Convolution composite: block k of the output is the sum of
    g(a_i, b_j) over i + j = k.

    Maps R^(m u) x R^(n v) -> R^((m+n-1) w) for g of type (u, v, w), and is
    nonsingular whenever g is.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    u, v, w = g.a, g.b, g.c
    coeffs = np.zeros(((m + n - 1) * w, m * u, n * v))
    for i in range(m):
        for j in range(n):
            k = i + j
            coeffs[k * w:(k + 1) * w, i * u:(i + 1) * u, j * v:(j + 1) * v] \
                += g.coeffs
    return BilinearMap(coeffs)


def restrict(f: BilinearMap, a_dim: int, b_dim: int) -> BilinearMap:
    """Restriction to the leading input coordinates; output dimension kept.
    Preserves nonsingularity."""
    if not (1 <= a_dim <= f.a and 1 <= b_dim <= f.b):
        raise ValueError(
            f"restriction dims ({a_dim}, {b_dim}) out of range "
            f"({f.a}, {f.b})")
    return BilinearMap(f.coeffs[:, :a_dim, :b_dim].copy())


def as_tensor(f: BilinearMap) -> Tensor3:
    """The c x a x b tensor whose slice j is the matrix x |-> f(x, e_j)."""
    return Tensor3(np.stack([f.coeffs[:, :, j] for j in range(f.b)]))


def from_tensor(T: Tensor3) -> BilinearMap:
    """Inverse of :func:`as_tensor` (exact round trip)."""
    return BilinearMap(np.stack(T.slices, axis=2))


@dataclass(frozen=True)
class OptBudget:
    restarts: int = 200
    iters: int = 500

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("optimizer budget needs at least one restart")


def nonsingularity_margin(f: BilinearMap, budget: OptBudget | None = None,
                          seed: int | np.random.Generator = 0) -> float:
    """Best-found minimum of |f(x, y)| over the product of unit spheres.

    Multistart projected gradient with step halving.  A clearly positive
    value is strong evidence of nonsingularity; a tiny one is evidence of a
    zero (neither is a proof).
    """
    budget = budget or OptBudget()
    rng = np.random.default_rng(seed) if not isinstance(
        seed, np.random.Generator) else seed
    C = f.coeffs

    def val_and_grads(x, y):
        fx = np.einsum("kij,i,j->k", C, x, y)
        v = np.linalg.norm(fx)
        gx = np.einsum("kij,k,j->i", C, fx, y)
        gy = np.einsum("kij,k,i->j", C, fx, x)
        return v, gx, gy  # gradients of |f|^2 / 2

    best = np.inf
    for _ in range(budget.restarts):
        x = rng.standard_normal(f.a)
        x /= np.linalg.norm(x)
        y = rng.standard_normal(f.b)
        y /= np.linalg.norm(y)
        v, gx, gy = val_and_grads(x, y)
        for _ in range(budget.iters):
            gx = gx - (gx @ x) * x
            gy = gy - (gy @ y) * y
            gnorm = np.hypot(np.linalg.norm(gx), np.linalg.norm(gy))
            if gnorm < 1e-15 or v < 1e-15:
                break
            step, moved = 0.5, False
            while step > 1e-12:
                xn = x - step * gx / gnorm
                xn /= np.linalg.norm(xn)
                yn = y - step * gy / gnorm
                yn /= np.linalg.norm(yn)
                vn, gxn, gyn = val_and_grads(xn, yn)
                if vn < v:
                    x, y, v, gx, gy = xn, yn, vn, gxn, gyn
                    moved = True
                    break
                step /= 2
            if not moved:
                break
        best = min(best, v)
        if best < 1e-15:
            break
    return float(best)
