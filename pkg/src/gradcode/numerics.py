"""Dense linear-algebra and sampling kernels shared by the code builders.

All routines are pure functions over immutable inputs and are safe to call
concurrently.  Dense LAPACK paths only: every workload here stays at desk
scale (matrices of a few hundred rows at most).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:  # avoid import cycle; WeightedGraph is duck-typed below
    from .sparsifier import WeightedGraph

# Relative singular-value cutoff for rank decisions (least squares and
# truncated projections).  Minimum-norm solutions make results deterministic
# when the restricted column block is rank deficient.
SVD_CUTOFF = 1e-10

# Absolute slack for positive-semidefiniteness checks on covariance params.
_PSD_TOL = 1e-12


def solve_least_squares(
    A: np.ndarray, b: np.ndarray, support: Iterable[int]
) -> np.ndarray:
    """Minimum-norm least-squares solution constrained to a column support.

    Returns the full-length vector ``v`` with zeros off `support` minimizing
    ``||A @ v - b||_2``.  QR on the restricted columns when they have full
    rank; truncated-SVD fallback (cutoff ``SVD_CUTOFF * sigma_1``) otherwise,
    which picks the minimum-norm minimizer.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    cols = sorted(set(int(i) for i in support))
    if not cols:
        raise ValueError("no non-stragglers: support set is empty")
    if cols[0] < 0 or cols[-1] >= A.shape[1]:
        raise ValueError(f"support index out of range for {A.shape[1]} columns")
    As = A[:, cols]
    q, r = np.linalg.qr(As)
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() > SVD_CUTOFF * max(diag.max(), 1e-300):
        x = np.linalg.solve(r, q.T @ b)
    else:
        x, *_ = np.linalg.lstsq(As, b, rcond=SVD_CUTOFF)
    v = np.zeros(A.shape[1])
    v[cols] = x
    return v


def residual_norm_squared(A: np.ndarray, b: np.ndarray, support: Iterable[int]) -> float:
    """Squared residual of the support-restricted least-squares fit."""
    v = solve_least_squares(A, b, support)
    r = np.asarray(A, dtype=float) @ v - np.asarray(b, dtype=float)
    return float(r @ r)


def symmetric_eigen(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.

    Raises ValueError when the input is not square or departs from symmetry
    by more than 1e-10 (scaled by the largest entry magnitude).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max()) if A.size else 1.0)
    if A.size and float(np.abs(A - A.T).max()) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric within tolerance 1e-10")
    w, v = np.linalg.eigh(A)
    return w[::-1].copy(), v[:, ::-1].copy()


def singular_values(A: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k singular triplets ``(sigma, U, V)`` with ``A @ V = U @ diag(sigma)``."""
    A = np.asarray(A, dtype=float)
    if k < 0 or k > min(A.shape):
        raise ValueError(f"k={k} exceeds min(rows, cols)={min(A.shape)}")
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    return s[:k].copy(), u[:, :k].copy(), vt[:k].T.copy()


def spectral_norm(A: np.ndarray) -> float:
    """Operator 2-norm.  Symmetric inputs go through eigvalsh, others SVD."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == A.shape[1] and np.array_equal(A, A.T):
        if A.size == 0:
            return 0.0
        return float(np.abs(np.linalg.eigvalsh(A)).max())
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True)
class ExchangeableGaussianParams:
    """Common mean / variance / covariance of one exchangeable Gaussian row.

    The covariance matrix has `b` on the diagonal and `c` everywhere else;
    it is PSD iff ``b >= c`` and ``b + (n-1) c >= 0``, which are exactly the
    two eigenvalues of the exchangeable form (on the all-ones direction and
    its orthogonal complement).
    """

    a: float
    b: float
    c: float
    n: int

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if self.b < self.c - _PSD_TOL or self.b + (self.n - 1) * self.c < -_PSD_TOL:
            raise ValueError(
                "infeasible covariance: exchangeable matrix with "
                f"b={self.b:.6g}, c={self.c:.6g}, n={self.n} is not PSD"
            )

    @property
    def is_psd(self) -> bool:
        return (
            self.b >= self.c - _PSD_TOL
            and self.b + (self.n - 1) * self.c >= -_PSD_TOL
        )


def sample_exchangeable_gaussian(
    params: ExchangeableGaussianParams,
    count: int,
    gen: np.random.Generator,
) -> np.ndarray:
    """Draw `count` i.i.d. rows from N(a*1, (b-c) I + c 11^T).

    Uses the two-eigenvalue spectral form of the exchangeable covariance:
    scale the mean-zero part of a standard normal vector by sqrt(b-c) and its
    all-ones component by sqrt(b+(n-1)c).  O(n) per row, and valid for c < 0
    where a shared-common-factor trick would fail.
    """
    params.validate()
    n = params.n
    z = gen.standard_normal((count, n))
    zbar = z.mean(axis=1, keepdims=True)
    # Clip tiny negative eigenvalues caused by float roundoff at PSD boundary.
    lam_ones = math.sqrt(max(params.b + (n - 1) * params.c, 0.0))
    lam_perp = math.sqrt(max(params.b - params.c, 0.0))
    return params.a + lam_perp * (z - zbar) + lam_ones * zbar


def sample_exchangeable_gaussian_row(
    params: ExchangeableGaussianParams, rng
) -> np.ndarray:
    """Single row drawn from the exchangeable Gaussian distribution."""
    gen = rng.generator() if hasattr(rng, "generator") else rng
    return sample_exchangeable_gaussian(params, 1, gen)[0]


def gaussian_quadratic_expectation(
    alpha: float, theta: float, mu: float, sigma2: float
) -> float:
    """E[exp(alpha G^2 + theta G)] for G ~ N(mu, sigma2), in closed form.

    Completing the square in the Gaussian integral gives

        exp((alpha mu^2 + theta mu + theta^2 sigma2 / 2) / (1 - 2 alpha sigma2))
        / sqrt(1 - 2 alpha sigma2),

    valid for alpha < 1/(2 sigma2); the expectation diverges otherwise.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if alpha >= 1.0 / (2.0 * sigma2):
        raise ValueError(
            f"divergent expectation: alpha={alpha:.6g} >= 1/(2*sigma2)={1/(2*sigma2):.6g}"
        )
    den = 1.0 - 2.0 * alpha * sigma2
    num = alpha * mu * mu + theta * mu + 0.5 * theta * theta * sigma2
    return math.exp(num / den) / math.sqrt(den)


def _connected(n: int, pairs: Sequence[tuple[int, int]]) -> bool:
    """Union-find connectivity over `n` vertices and undirected `pairs`."""
    if n <= 1:
        return True
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    root = find(0)
    return all(find(v) == root for v in range(n))


def effective_resistances(graph: "WeightedGraph") -> np.ndarray:
    """Exact per-edge effective resistances via the Laplacian pseudoinverse.

    ``r_e = (chi_u - chi_v)^T  L^+  (chi_u - chi_v)``, one value per edge in
    the graph's edge order (parallel edges share the value of their vertex
    pair).  Exact values trivially satisfy any constant-factor approximation
    requirement.  The graph must be connected.
    """
    n = graph.n
    edges = list(graph.edges)
    if not _connected(n, [(e.u, e.v) for e in edges]):
        raise ValueError("graph is disconnected; effective resistances undefined")
    L = np.zeros((n, n))
    for e in edges:
        w = float(e.w)
        L[e.u, e.u] += w
        L[e.v, e.v] += w
        L[e.u, e.v] -= w
        L[e.v, e.u] -= w
    lp = np.linalg.pinv(L, hermitian=True)
    out = np.empty(len(edges))
    for i, e in enumerate(edges):
        out[i] = lp[e.u, e.u] + lp[e.v, e.v] - 2.0 * lp[e.u, e.v]
    return out
