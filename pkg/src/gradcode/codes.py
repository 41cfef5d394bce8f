"""Encoding-matrix constructions for the six gradient-code families.

Families: fractional repetition (FRC), Bernoulli and its column-regularized
variant (BGC / rBGC), bipartite-expander biadjacency (BEG), block-design
incidence (BIBD), moment-matched sparse Gaussian (SG), and the
expansion-preserving construction (EP) built on the degree-preserving
sparsifier.  Alongside the builders live the closed-form errors, spectral
bounds, and feasibility checks each family admits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import numerics
from .rng import (
    STREAM_BGC,
    STREAM_EP,
    STREAM_RBGC,
    STREAM_SG,
    STREAM_SPARSIFY,
    SeededRng,
)
from .sparsifier import (
    SparsifyResult,
    bipartite_lift,
    degree_preserving_sparsify,
    lift_inverse,
)

DENSITY_THRESHOLD = 1e-12


class InfeasibleParameters(ValueError):
    """Requested parameters admit no construction; message names the bound."""


class Family(str, Enum):
    FRC = "frc"
    BGC = "bgc"
    RBGC = "rbgc"
    BEG = "beg"
    BIBD = "bibd"
    SG = "sg"
    EP = "ep"


@dataclass(frozen=True)
class CodeSpec:
    """Per-family parameter record; `validate` enforces the family's arithmetic
    constraints (divisibility for FRC, the design identities for BIBD, ...).
    """

    family: Family
    N: int
    K: int
    L: Optional[int] = None
    R: Optional[int] = None
    lam: Optional[float] = None
    gamma: Optional[float] = None
    d: Optional[float] = None
    c: Optional[float] = None
    epsilon: Optional[float] = None
    seed: int = 0

    def validate(self) -> None:
        if self.N < 1 or self.K < 1:
            raise InfeasibleParameters("N and K must be positive")
        f = self.family
        if f == Family.FRC:
            self._need("L", "R")
            if self.N % self.R:
                raise InfeasibleParameters(f"replication R={self.R} must divide N={self.N}")
            if self.K % self.L:
                raise InfeasibleParameters(f"load L={self.L} must divide K={self.K}")
            if self.K // self.L != self.N // self.R:
                raise InfeasibleParameters(
                    f"block counts disagree: K/L={self.K // self.L} != N/R={self.N // self.R}"
                )
        elif f in (Family.BGC, Family.RBGC):
            self._need("L")
            if not 0 < self.L <= self.K:
                raise InfeasibleParameters(f"need 0 < L <= K, got L={self.L}, K={self.K}")
        elif f == Family.BIBD:
            self._need("L", "R", "lam")
            if self.N * self.L != self.K * self.R:
                raise InfeasibleParameters(
                    f"design identity N*L == K*R violated: {self.N * self.L} != {self.K * self.R}"
                )
            if self.R * (self.L - 1) != self.lam * (self.K - 1):
                raise InfeasibleParameters(
                    "design identity R*(L-1) == lambda*(K-1) violated: "
                    f"{self.R * (self.L - 1)} != {self.lam * (self.K - 1)}"
                )
        elif f == Family.BEG:
            self._need("d")
            if self.d <= 0:
                raise InfeasibleParameters("degree d must be positive")
        elif f == Family.SG:
            self._need("L", "lam", "gamma")
            if not 0 < self.gamma <= 1:
                raise InfeasibleParameters(f"gamma must lie in (0, 1], got {self.gamma}")
            if self.L > self.K:
                raise InfeasibleParameters(f"need L <= K, got L={self.L}, K={self.K}")
        elif f == Family.EP:
            self._need("d", "c", "epsilon")
            if self.N < 3:
                raise InfeasibleParameters("expansion-preserving codes need N >= 3")
            if self.c < 0:
                raise InfeasibleParameters("weight shift c must be >= 0")
            if self.d <= 0:
                raise InfeasibleParameters("degree d must be positive")
            if not 0 < self.epsilon <= 1:
                raise InfeasibleParameters(f"epsilon must lie in (0, 1], got {self.epsilon}")

    def _need(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise InfeasibleParameters(f"{self.family.value} spec requires parameter {name}")


@dataclass(frozen=True)
class EncodingMatrix:
    """A K x N encoding matrix together with the spec that produced it."""

    matrix: np.ndarray
    spec: CodeSpec

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.spec.K, self.spec.N):
            raise ValueError(f"matrix shape {m.shape} does not match spec (K={self.spec.K}, N={self.spec.N})")
        if not np.isfinite(m).all():
            raise ValueError("matrix entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def density(self) -> float:
        """Realized fraction of entries with magnitude above 1e-12."""
        return float((np.abs(self.matrix) > DENSITY_THRESHOLD).mean())


# ---------------------------------------------------------------------------
# Fractional repetition codes


def build_frc(spec: CodeSpec) -> EncodingMatrix:
    """Block-diagonal matrix of K/L all-ones L x R blocks."""
    spec.validate()
    blocks = spec.K // spec.L
    m = np.kron(np.eye(blocks), np.ones((spec.L, spec.R)))
    return EncodingMatrix(m, spec)


def frc_exact_error(spec: CodeSpec, S: int) -> float:
    """Worst-case normalized error of an FRC: (L/K) * floor(S/R).

    Adversarial stragglers knock out whole blocks; each fully lost block
    contributes L/K to the error.
    """
    _check_straggler_count(spec.N, S)
    return (spec.L / spec.K) * (S // spec.R)


# ---------------------------------------------------------------------------
# Bernoulli codes


def build_bgc(spec: CodeSpec, rng: SeededRng | None = None) -> EncodingMatrix:
    """Each entry i.i.d. Bernoulli(L/K)."""
    spec.validate()
    if rng is None:
        rng = SeededRng(spec.seed, STREAM_BGC)
    gen = rng.generator()
    m = (gen.random((spec.K, spec.N)) < spec.L / spec.K).astype(float)
    return EncodingMatrix(m, spec)


def build_rbgc(spec: CodeSpec, rng: SeededRng | None = None) -> EncodingMatrix:
    """Bernoulli matrix with overloaded columns trimmed back to L non-zeros.

    Columns holding more than 2L non-zeros have uniformly chosen non-zeros
    cleared until exactly L remain; lighter columns are left untouched, so no
    column ends up above the 2L cap.
    """
    spec.validate()
    if rng is None:
        rng = SeededRng(spec.seed, STREAM_RBGC)
    gen = rng.generator()
    m = (gen.random((spec.K, spec.N)) < spec.L / spec.K).astype(float)
    for j in range(spec.N):
        nz = np.flatnonzero(m[:, j])
        if nz.size > 2 * spec.L:
            drop = gen.choice(nz, size=nz.size - spec.L, replace=False)
            m[drop, j] = 0.0
    return EncodingMatrix(m, spec)


# ---------------------------------------------------------------------------
# Block-design incidence codes


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    i = 2
    while i * i <= q:
        if q % i == 0:
            return False
        i += 1
    return True


def known_difference_set(q: int) -> list[int]:
    """Difference set modulo q used to generate an incidence matrix.

    Primes q = 3 (mod 4) use the quadratic residues, giving a symmetric
    (q, (q-1)/2, (q-3)/4) design.  q = 37 additionally ships the biquadratic
    residues, a (37, 9, 2) difference set; every generated design is still
    run through the full validator.
    """
    if not _is_prime(q):
        raise InfeasibleParameters(f"q={q} is not prime")
    if q % 4 == 3:
        return sorted({(x * x) % q for x in range(1, q)})
    if q == 37:
        return sorted({pow(x, 4, q) for x in range(1, q)})
    raise InfeasibleParameters(
        f"no difference set shipped for q={q}; need a prime congruent to 3 mod 4 (or 37)"
    )


def build_bibd_from_difference_set(q: int, seed: int = 0) -> EncodingMatrix:
    """Cyclic incidence matrix developed from a difference set modulo q."""
    base = known_difference_set(q)
    m = np.zeros((q, q))
    for j in range(q):
        for d in base:
            m[(d + j) % q, j] = 1.0
    N, K, L, R, lam = validate_bibd(m)
    spec = CodeSpec(Family.BIBD, N=N, K=K, L=L, R=R, lam=lam, seed=seed)
    spec.validate()
    return EncodingMatrix(m, spec)


def validate_bibd(matrix: np.ndarray) -> tuple[int, int, int, int, int]:
    """Check a 0/1 matrix is a block-design incidence matrix.

    Requires constant column sums L, constant row sums R, and every pair of
    distinct columns intersecting in the same positive count lambda.  Raises
    with the first violated condition; returns (N, K, L, R, lambda).
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("not a BIBD: expected a 2-d matrix")
    if not np.isin(m, (0.0, 1.0)).all():
        raise ValueError("not a BIBD: entries must be 0 or 1")
    K, N = m.shape
    col = m.sum(axis=0)
    if not (col == col[0]).all():
        raise ValueError(f"not a BIBD: column sums are not constant (saw {sorted(set(col.tolist()))})")
    row = m.sum(axis=1)
    if not (row == row[0]).all():
        raise ValueError(f"not a BIBD: row sums are not constant (saw {sorted(set(row.tolist()))})")
    gram = m.T @ m
    off = gram[~np.eye(N, dtype=bool)]
    lam = off[0] if off.size else 0.0
    if off.size and not (off == lam).all():
        raise ValueError(
            f"not a BIBD: pairwise column intersections are not constant (saw {sorted(set(off.tolist()))})"
        )
    if lam < 1:
        raise ValueError(f"not a BIBD: pairwise column intersection is {int(lam)}, expected >= 1")
    return N, K, int(col[0]), int(row[0]), int(lam)


def encoding_from_incidence(matrix: np.ndarray, seed: int = 0) -> EncodingMatrix:
    """Wrap a validated incidence matrix as a BIBD encoding matrix."""
    N, K, L, R, lam = validate_bibd(matrix)
    spec = CodeSpec(Family.BIBD, N=N, K=K, L=L, R=R, lam=lam, seed=seed)
    spec.validate()
    return EncodingMatrix(np.asarray(matrix, dtype=float), spec)


def bibd_exact_error(spec: CodeSpec, S: int) -> float:
    """Worst-case normalized error of a block-design code.

    err = 1 - L^2 (N-S) / (K (L + lambda (N-S-1))); identical across all
    straggler patterns of the same size.
    """
    _check_straggler_count(spec.N, S)
    ns = spec.N - S
    return 1.0 - (spec.L**2 * ns) / (spec.K * (spec.L + spec.lam * (ns - 1)))


# ---------------------------------------------------------------------------
# Bipartite-expander biadjacency codes


def build_beg(biadjacency: np.ndarray, d: int | None = None, seed: int = 0) -> EncodingMatrix:
    """Encoding matrix biadjacency/d of a d-biregular bipartite graph."""
    m = np.asarray(biadjacency, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InfeasibleParameters("biadjacency must be square (equal worker and partition counts)")
    if not np.isin(m, (0.0, 1.0)).all():
        raise InfeasibleParameters("biadjacency entries must be 0 or 1")
    row = m.sum(axis=1)
    col = m.sum(axis=0)
    if not ((row == row[0]).all() and (col == row[0]).all()):
        raise InfeasibleParameters(
            f"graph is not biregular: row sums {sorted(set(row.tolist()))}, column sums {sorted(set(col.tolist()))}"
        )
    degree = int(row[0])
    if d is not None and d != degree:
        raise InfeasibleParameters(f"declared degree d={d} does not match graph degree {degree}")
    if degree < 1:
        raise InfeasibleParameters("graph has isolated vertices")
    N = m.shape[1]
    spec = CodeSpec(Family.BEG, N=N, K=N, d=float(degree), seed=seed)
    spec.validate()
    return EncodingMatrix(m / degree, spec)


def beg_error_bound(sigma2: float, d: float, N: int, S: int) -> float:
    """Spectral error bound (1/N) (sigma2/d)^2 * N S / (N - S).

    `sigma2` is the second singular value of the unnormalized 0/1 biadjacency
    matrix; dividing by the degree d normalizes it.
    """
    _check_straggler_count(N, S)
    if S == 0:
        return 0.0
    return (sigma2 / d) ** 2 * S / (N - S)


# ---------------------------------------------------------------------------
# Sparse Gaussian codes


def rho_decoding_scalar(L: float, lam: float, N: int, S: int) -> float:
    """Constant decoder value L / (L + lambda (N - S - 1))."""
    return L / (L + lam * (N - S - 1))


@dataclass(frozen=True)
class SgDerivedParams:
    """Row-distribution parameters solving the moment-matching system.

    a = L/(K gamma), b = (L gamma/K - L^2/K^2)/gamma^2,
    c = (lambda/K - L^2/K^2)/gamma^2, so that an entry X*B with
    X ~ exchangeable Gaussian and B ~ Bern(gamma) has mean L/K, second
    moment L/K, and cross moment lambda/K.
    """

    a: float
    b: float
    c: float
    spec: CodeSpec

    def rho(self, S: int) -> float:
        return rho_decoding_scalar(self.spec.L, self.spec.lam, self.spec.N, S)

    def exchangeable(self) -> numerics.ExchangeableGaussianParams:
        return numerics.ExchangeableGaussianParams(self.a, self.b, self.c, self.spec.N)


def sg_solve_params(spec: CodeSpec) -> SgDerivedParams:
    """Solve the moment system for (a, b, c) and verify it algebraically."""
    spec.validate()
    K, L, lam, g = spec.K, spec.L, spec.lam, spec.gamma
    if g == 0:
        raise InfeasibleParameters("gamma must be non-zero")
    a = L / (K * g)
    b = (L * g / K - L**2 / K**2) / g**2
    c = (lam / K - L**2 / K**2) / g**2
    checks = (
        (a * g, L / K),
        ((c + a * a) * g * g, lam / K),
        ((b + a * a) * g, L / K),
    )
    for got, want in checks:
        if abs(got - want) > 1e-12 * max(1.0, abs(want)):
            raise AssertionError(f"moment system inconsistent: {got} != {want}")
    return SgDerivedParams(a=a, b=b, c=c, spec=spec)


@dataclass(frozen=True)
class SgFeasibility:
    """Feasible sparsity interval [gamma_min, 1], or infeasible."""

    feasible: bool
    gamma_min: float
    psd_at_gamma_min: bool
    psd_at_one: bool

    @property
    def interval(self) -> tuple[float, float] | None:
        return (self.gamma_min, 1.0) if self.feasible else None


def sg_feasible(N: int, K: int, L: int, lam: float) -> SgFeasibility:
    """Sparsity range admitting a moment-matched sparse Gaussian code.

    gamma must be at least max(lambda/L, ((N-1)(L^2 - K lambda) + L^2)/(K L))
    and at most 1, with L <= K; the lower bound is exactly what keeps the
    exchangeable row covariance positive semidefinite.
    """
    gamma_min = max(lam / L, ((N - 1) * (L * L - K * lam) + L * L) / (K * L))

    def psd_at(g: float) -> bool:
        if not 0 < g <= 1:
            return False
        a = L / (K * g)
        b = (L * g / K - L * L / K**2) / g**2
        c = (lam / K - L * L / K**2) / g**2
        return numerics.ExchangeableGaussianParams(a, b, c, N).is_psd

    feasible = L <= K and gamma_min <= 1.0
    return SgFeasibility(
        feasible=feasible,
        gamma_min=gamma_min,
        psd_at_gamma_min=feasible and psd_at(max(gamma_min, 1e-300)),
        psd_at_one=psd_at(1.0),
    )


def build_sg(spec: CodeSpec, rng: SeededRng | None = None) -> EncodingMatrix:
    """Exchangeable-Gaussian rows masked entrywise by i.i.d. Bernoulli(gamma)."""
    spec.validate()
    feas = sg_feasible(spec.N, spec.K, spec.L, spec.lam)
    if not feas.feasible or spec.gamma < feas.gamma_min - 1e-12:
        raise InfeasibleParameters(
            f"gamma={spec.gamma:.6g} outside feasible range "
            f"[gamma_min={feas.gamma_min:.6g}, 1] for (N={spec.N}, K={spec.K}, "
            f"L={spec.L}, lambda={spec.lam:g})"
            if feas.feasible
            else f"no feasible gamma: gamma_min={feas.gamma_min:.6g} exceeds 1 for "
            f"(N={spec.N}, K={spec.K}, L={spec.L}, lambda={spec.lam:g})"
        )
    if rng is None:
        rng = SeededRng(spec.seed, STREAM_SG)
    gen = rng.generator()
    params = sg_solve_params(spec)
    x = numerics.sample_exchangeable_gaussian(params.exchangeable(), spec.K, gen)
    mask = gen.random((spec.K, spec.N)) < spec.gamma
    return EncodingMatrix(x * mask, spec)


@dataclass(frozen=True)
class SgReference:
    """Design-baseline comparison data for a sparse Gaussian spec.

    The concentration statement behind it carries unspecified constants, so
    the probability is reported as a note, never as a number.
    """

    bibd_error: float
    slack: float
    rho: float
    hypothesis_value: float  # rho^2 (N-S) (b + (N-S-1) c), must be < 2
    hypothesis_ok: bool
    c_nonnegative: bool
    probability_note: str = "asymptotic, not evaluated"


def sg_theoretical_reference(spec: CodeSpec, S: int, delta: float) -> SgReference:
    """Baseline error, concentration slack 1/K^(1/2-delta), hypothesis flags."""
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    _check_straggler_count(spec.N, S)
    params = sg_solve_params(spec)
    r = params.rho(S)
    ns = spec.N - S
    hyp = r * r * ns * (params.b + (ns - 1) * params.c)
    return SgReference(
        bibd_error=bibd_exact_error(spec, S),
        slack=spec.K ** (delta - 0.5),
        rho=r,
        hypothesis_value=hyp,
        hypothesis_ok=hyp < 2.0 and params.c >= 0,
        c_nonnegative=params.c >= 0,
    )


# ---------------------------------------------------------------------------
# Expansion-preserving codes

HalfNormalSampler = Callable[[np.random.Generator, tuple[int, ...]], np.ndarray]


def _halfnormal(gen: np.random.Generator, size: tuple[int, ...]) -> np.ndarray:
    return np.abs(gen.standard_normal(size))


def build_ep_initial(
    N: int,
    c: float,
    rng: SeededRng | np.random.Generator,
    halfnormal: HalfNormalSampler = _halfnormal,
) -> np.ndarray:
    """Symmetric (N-1) x (N-1) seed matrix with entries |N(0,1)| + c.

    The upper triangle (diagonal included) is drawn i.i.d. and mirrored.
    `halfnormal` is an injection point for tests that force degenerate draws.
    """
    if N < 3:
        raise InfeasibleParameters("expansion-preserving codes need N >= 3")
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    n = N - 1
    e0 = np.zeros((n, n))
    iu = np.triu_indices(n)
    e0[iu] = halfnormal(gen, (iu[0].size,))
    e0 = e0 + np.triu(e0, 1).T
    return e0 + c


def ep_feasible_d_range(E0: np.ndarray) -> tuple[float, float]:
    """Open interval of degrees d admitting an all-positive extension.

    Lower end: the largest row sum of the seed matrix (the appended entries
    must stay positive).  Upper end: total seed weight / (N-2) (the corner
    entry must stay positive).
    """
    E0 = np.asarray(E0, dtype=float)
    n = E0.shape[0]
    d_l = float(E0.sum(axis=1).max())
    d_u = float(E0.sum() / (n - 1))  # n - 1 == N - 2
    return d_l, d_u


def ep_corollary_c_min(X: np.ndarray) -> float:
    """Smallest shift making the degree interval non-empty for a given draw.

    For seed entries |X| + c the interval (d_l, d_u) is non-empty exactly
    when c exceeds ((N-2) max-row-sum(|X|) - total(|X|)) / (N-1).
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]  # n == N - 1
    return float(((n - 1) * X.sum(axis=1).max() - X.sum()) / n)


def ep_extend(E0: np.ndarray, d: float) -> np.ndarray:
    """Append one row/column making every row and column sum equal d.

    m_i = d - (row sum i), corner = (2-N) d + (total seed weight); requires d
    strictly inside the feasible interval so all appended entries stay
    positive.
    """
    E0 = np.asarray(E0, dtype=float)
    n = E0.shape[0]
    N = n + 1
    d_l, d_u = ep_feasible_d_range(E0)
    if not d_l < d < d_u:
        raise InfeasibleParameters(
            f"infeasible degree: d={d:.6g} outside open interval ({d_l:.6g}, {d_u:.6g})"
        )
    m = d - E0.sum(axis=1)
    alpha = (2 - N) * d + E0.sum()
    out = np.zeros((N, N))
    out[:n, :n] = E0
    out[:n, n] = m
    out[n, :n] = m
    out[n, n] = alpha
    return out


@dataclass(frozen=True)
class EpBuild:
    """Full record of one expansion-preserving build."""

    encoding: EncodingMatrix
    dense: np.ndarray  # pre-sparsification N x N matrix with exact sums d
    initial: np.ndarray  # the seed matrix that was accepted
    d_range: tuple[float, float]
    attempts: int
    sparsify: SparsifyResult


def build_ep(
    spec: CodeSpec,
    rng: SeededRng | None = None,
    k: int = 16,
    retry_cap: int = 64,
) -> EpBuild:
    """Draw seed matrices until the requested degree d is feasible, then
    extend to exact row/column sums and sparsify the bipartite lift.

    Fresh seeds are drawn rather than adjusting d, because d is a user-facing
    design parameter.  On exhaustion the error reports the empirical
    percentiles of the feasible intervals seen.
    """
    spec.validate()
    if rng is None:
        rng = SeededRng(spec.seed, STREAM_EP)
    lows: list[float] = []
    highs: list[float] = []
    for attempt in range(retry_cap):
        e0 = build_ep_initial(spec.N, spec.c, rng.generator(attempt))
        d_l, d_u = ep_feasible_d_range(e0)
        lows.append(d_l)
        highs.append(d_u)
        if d_l < spec.d < d_u:
            dense = ep_extend(e0, spec.d)
            lam2_dense = np.linalg.eigvalsh(dense)[-2]
            lam1_seed = np.linalg.eigvalsh(e0)[-1]
            if lam2_dense > lam1_seed + 1e-8 * max(1.0, abs(lam1_seed)):
                raise AssertionError(
                    "eigenvalue interlacing violated: "
                    f"lambda2(extended)={lam2_dense:.6g} > lambda1(seed)={lam1_seed:.6g}"
                )
            result = degree_preserving_sparsify(
                bipartite_lift(dense), spec.epsilon, k=k, rng=rng.child(STREAM_SPARSIFY)
            )
            encoding = EncodingMatrix(lift_inverse(result.graph), spec)
            return EpBuild(
                encoding=encoding,
                dense=dense,
                initial=e0,
                d_range=(d_l, d_u),
                attempts=attempt + 1,
                sparsify=result,
            )
    pct = lambda a, q: float(np.percentile(np.asarray(a), q))  # noqa: E731
    raise InfeasibleParameters(
        f"infeasible degree: d={spec.d:.6g} never fell inside the feasible interval over "
        f"{retry_cap} draws; empirical d_l percentiles (5/50/95) = "
        f"({pct(lows, 5):.6g}, {pct(lows, 50):.6g}, {pct(lows, 95):.6g}), "
        f"d_u percentiles = ({pct(highs, 5):.6g}, {pct(highs, 50):.6g}, {pct(highs, 95):.6g})"
    )


def ep_error_bound_variants(
    epsilon: float, lambda2: float, d: float, N: int, S: int
) -> tuple[float, float]:
    """Both printed coefficients of the sparsification term of the bound.

    The stated form uses 2*eps; the derivation behind it actually yields
    2*(e^eps - 1).  Returns (stated, derived); the derived value dominates
    for eps >= 0.
    """
    if not 0 < S < N:
        raise ValueError(f"need 0 < S < N, got S={S}, N={N}")
    if d <= 0:
        raise ValueError("degree d must be positive")
    spectral = (lambda2 / d) * math.sqrt(N * S / (N - S))

    def value(coeff: float) -> float:
        return (coeff * math.sqrt(N - S) * (N / (N - S)) + spectral) ** 2 / N

    return value(2.0 * epsilon), value(2.0 * (math.exp(epsilon) - 1.0))


def ep_error_bound(epsilon: float, lambda2: float, d: float, N: int, S: int) -> float:
    """Conservative (larger) variant of the sparsified-code error bound."""
    return max(ep_error_bound_variants(epsilon, lambda2, d, N, S))


def ep_lambda2_bound(N: int, c: float, t: float, C1: float) -> tuple[float, float]:
    """High-probability bound on the second eigenvalue of the dense matrix.

    bound = |mu + c| (N-1) + C1 (sqrt(N-1) + t) with mu = sqrt(2/pi), holding
    with probability at least 1 - 4 e^(-t^2).  The absolute constant C1 is
    caller-supplied; calibrate it empirically.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if C1 <= 0:
        raise ValueError("C1 must be positive")
    mu = math.sqrt(2.0 / math.pi)
    bound = abs(mu + c) * (N - 1) + C1 * (math.sqrt(N - 1) + t)
    return bound, 1.0 - 4.0 * math.exp(-t * t)


def _check_straggler_count(N: int, S: int) -> None:
    if not 0 <= S < N:
        raise ValueError(f"straggler count S={S} must satisfy 0 <= S < N={N}")


def spec_with_seed(spec: CodeSpec, seed: int) -> CodeSpec:
    """Copy of a spec with a different construction seed."""
    return replace(spec, seed=seed)
