"""Worst-case decoding error over adversarial straggler patterns.

The figure of merit for an encoding matrix E is
``(1/K) max_F ||E v(F) - 1||^2`` over all non-straggler sets F of size N-S,
with v supported on F.  Exact mode enumerates every pattern (capped); greedy
mode removes the locally worst worker S times and reports a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, islice
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import numerics
from .codes import CodeSpec, EncodingMatrix, rho_decoding_scalar, sg_solve_params
from .rng import STREAM_MONTE_CARLO, SeededRng

ENUMERATION_CAP = 2_000_000
_CHUNK = 2048


class Decoder(str, Enum):
    OPTIMAL = "optimal"
    CONSTANT_RHO = "constant_rho"
    BEG_VECTOR = "beg_vector"


class Mode(str, Enum):
    EXACT = "exact"
    GREEDY = "greedy"


@dataclass(frozen=True)
class StragglerPattern:
    """A non-straggler set F as sorted worker indices out of [0, N)."""

    N: int
    non_stragglers: tuple[int, ...]

    def __post_init__(self) -> None:
        f = tuple(sorted(int(i) for i in self.non_stragglers))
        if len(set(f)) != len(f):
            raise ValueError("pattern indices must be unique")
        if f and (f[0] < 0 or f[-1] >= self.N):
            raise ValueError(f"pattern indices out of range for N={self.N}")
        object.__setattr__(self, "non_stragglers", f)

    @property
    def S(self) -> int:
        return self.N - len(self.non_stragglers)

    def stragglers(self) -> tuple[int, ...]:
        present = set(self.non_stragglers)
        return tuple(i for i in range(self.N) if i not in present)

    @classmethod
    def from_stragglers(cls, N: int, stragglers: Iterable[int]) -> "StragglerPattern":
        bad = set(int(i) for i in stragglers)
        return cls(N, tuple(i for i in range(N) if i not in bad))


@dataclass(frozen=True)
class Reference:
    """A closed-form value or bound attached to a report, with its source tag."""

    source: str
    value: float


@dataclass(frozen=True)
class ErrorReport:
    S: int
    error: float
    argmax_pattern: StragglerPattern
    decoder: Decoder
    mode: Mode
    reference: Optional[Reference] = None


def _as_matrix_and_spec(
    E: EncodingMatrix | np.ndarray, spec: CodeSpec | None
) -> tuple[np.ndarray, CodeSpec | None]:
    if isinstance(E, EncodingMatrix):
        return E.matrix, E.spec
    return np.asarray(E, dtype=float), spec


def _constant_rho_coeff(spec: CodeSpec | None, N: int, S: int) -> float:
    if spec is None or spec.L is None or spec.lam is None:
        raise ValueError(
            "decoder/family mismatch: constant_rho needs a spec carrying L and lambda"
        )
    return rho_decoding_scalar(spec.L, spec.lam, N, S)


def _beg_vector_coeff(matrix: np.ndarray, N: int, S: int) -> float:
    row = matrix.sum(axis=1)
    d = float(row.mean())
    if d <= 0 or np.abs(row - d).max() > 1e-8 * max(1.0, abs(d)):
        raise ValueError(
            "decoder/family mismatch: beg_vector needs constant row sums, "
            f"saw spread {row.min():.6g}..{row.max():.6g}"
        )
    return (1.0 + S / (N - S)) / d


def decoding_vector(
    E: EncodingMatrix | np.ndarray,
    pattern: StragglerPattern | Sequence[int],
    decoder: Decoder | str = Decoder.OPTIMAL,
    spec: CodeSpec | None = None,
) -> np.ndarray:
    """The length-N decoding vector a given decoder assigns to a pattern."""
    matrix, spec = _as_matrix_and_spec(E, spec)
    decoder = Decoder(decoder)
    K, N = matrix.shape
    f = pattern.non_stragglers if isinstance(pattern, StragglerPattern) else tuple(pattern)
    S = N - len(f)
    if decoder == Decoder.OPTIMAL:
        return numerics.solve_least_squares(matrix, np.ones(K), f)
    if decoder == Decoder.CONSTANT_RHO:
        coeff = _constant_rho_coeff(spec, N, S)
    else:
        coeff = _beg_vector_coeff(matrix, N, S)
    v = np.zeros(N)
    v[list(f)] = coeff
    return v


def pattern_error(
    E: EncodingMatrix | np.ndarray,
    pattern: StragglerPattern | Sequence[int],
    decoder: Decoder | str = Decoder.OPTIMAL,
    spec: CodeSpec | None = None,
) -> float:
    """Normalized squared residual (1/K) ||E v - 1||^2 for one pattern."""
    matrix, spec = _as_matrix_and_spec(E, spec)
    K = matrix.shape[0]
    v = decoding_vector(matrix, pattern, decoder, spec)
    r = matrix @ v - np.ones(K)
    return float(r @ r) / K


def _optimal_errors_batch(matrix: np.ndarray, combos: np.ndarray) -> np.ndarray:
    """Errors of the optimal decoder for a (B, m) batch of support sets."""
    K = matrix.shape[0]
    sub = np.moveaxis(matrix[:, combos], 0, 1)  # (B, K, m)
    u, s, _ = np.linalg.svd(sub, full_matrices=False)
    coef = u.sum(axis=1)  # u^T 1 for every pattern
    keep = s > numerics.SVD_CUTOFF * s[:, :1]
    resid = K - (coef * coef * keep).sum(axis=1)
    return np.maximum(resid, 0.0) / K


def _fixed_errors_batch(matrix: np.ndarray, combos: np.ndarray, coeff: float) -> np.ndarray:
    K = matrix.shape[0]
    sums = matrix[:, combos].sum(axis=2)  # (K, B)
    r = coeff * sums - 1.0
    return (r * r).sum(axis=0) / K


def _errors_for_supports(
    matrix: np.ndarray,
    combos: np.ndarray,
    decoder: Decoder,
    spec: CodeSpec | None,
) -> np.ndarray:
    N = matrix.shape[1]
    S = N - combos.shape[1]
    if decoder == Decoder.OPTIMAL:
        return _optimal_errors_batch(matrix, combos)
    if decoder == Decoder.CONSTANT_RHO:
        coeff = _constant_rho_coeff(spec, N, S)
    else:
        coeff = _beg_vector_coeff(matrix, N, S)
    return _fixed_errors_batch(matrix, combos, coeff)


def _chunked_combinations(N: int, m: int, chunk: int) -> Iterator[np.ndarray]:
    it = combinations(range(N), m)
    while True:
        block = list(islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def worst_case_error_exact(
    E: EncodingMatrix | np.ndarray,
    S: int,
    decoder: Decoder | str = Decoder.OPTIMAL,
    spec: CodeSpec | None = None,
    cap: int = ENUMERATION_CAP,
    reference: Reference | None = None,
) -> ErrorReport:
    """Exact maximum over all C(N, S) straggler patterns.

    Patterns are enumerated in lexicographic order of the non-straggler set
    and evaluated in chunks; the merge keeps the first strict maximum, so the
    reported argmax is the lexicographically smallest maximizer regardless of
    chunking.
    """
    matrix, spec = _as_matrix_and_spec(E, spec)
    decoder = Decoder(decoder)
    K, N = matrix.shape
    if not 0 <= S < N:
        raise ValueError(f"straggler count S={S} must satisfy 0 <= S < N={N}")
    total = math.comb(N, S)
    if total > cap:
        raise ValueError(
            f"C({N},{S}) = {total} patterns exceeds the enumeration cap {cap}; "
            "use worst_case_error_greedy for a flagged lower bound"
        )
    best = -np.inf
    best_pattern: tuple[int, ...] = ()
    for combos in _chunked_combinations(N, N - S, _CHUNK):
        errs = _errors_for_supports(matrix, combos, decoder, spec)
        i = int(np.argmax(errs))
        if errs[i] > best:
            best = float(errs[i])
            best_pattern = tuple(int(x) for x in combos[i])
    return ErrorReport(
        S=S,
        error=best,
        argmax_pattern=StragglerPattern(N, best_pattern),
        decoder=decoder,
        mode=Mode.EXACT,
        reference=reference,
    )


def worst_case_error_greedy(
    E: EncodingMatrix | np.ndarray,
    S: int,
    decoder: Decoder | str = Decoder.OPTIMAL,
    spec: CodeSpec | None = None,
    reference: Reference | None = None,
) -> ErrorReport:
    """Greedy straggler selection: S rounds of locally-worst removal.

    Returns a LOWER bound on the true worst case (mode is flagged greedy);
    ties break toward the smallest worker index.
    """
    matrix, spec = _as_matrix_and_spec(E, spec)
    decoder = Decoder(decoder)
    K, N = matrix.shape
    if not 0 <= S < N:
        raise ValueError(f"straggler count S={S} must satisfy 0 <= S < N={N}")
    remaining = list(range(N))
    for _ in range(S):
        candidates = np.array(
            [[w for w in remaining if w != drop] for drop in remaining], dtype=np.intp
        )
        errs = _errors_for_supports(matrix, candidates, decoder, spec)
        pick = int(np.argmax(errs))  # first occurrence = smallest dropped index
        remaining.pop(pick)
    pattern = StragglerPattern(N, tuple(remaining))
    return ErrorReport(
        S=S,
        error=pattern_error(matrix, pattern, decoder, spec),
        argmax_pattern=pattern,
        decoder=decoder,
        mode=Mode.GREEDY,
        reference=reference,
    )


def worst_case_error(
    E: EncodingMatrix | np.ndarray,
    S: int,
    decoder: Decoder | str = Decoder.OPTIMAL,
    spec: CodeSpec | None = None,
    cap: int = ENUMERATION_CAP,
    reference: Reference | None = None,
) -> ErrorReport:
    """Exact mode when C(N, S) fits under the cap, greedy otherwise."""
    matrix, spec = _as_matrix_and_spec(E, spec)
    N = matrix.shape[1]
    if math.comb(N, S) <= cap:
        return worst_case_error_exact(matrix, S, decoder, spec, cap, reference)
    return worst_case_error_greedy(matrix, S, decoder, spec, reference)


def decoding_vector_norms(N: int, S: int) -> tuple[float, float]:
    """Closed-form norms of the fixed decoding direction and its perturbation.

    Returns (||1 + a_F||, ||a_F||) = (sqrt(N-S) (1 + S/(N-S)), sqrt(NS/(N-S)))
    where a_F is -1 off the pattern and S/(N-S) on it; a_F is orthogonal to
    the all-ones vector.
    """
    if not 0 <= S < N:
        raise ValueError(f"need 0 <= S < N, got S={S}, N={N}")
    full = math.sqrt(N - S) * (1.0 + S / (N - S))
    af = math.sqrt(N * S / (N - S))
    return full, af


def ones_in_column_span(matrix: np.ndarray, support: Sequence[int], tol: float = 1e-9) -> bool:
    """Whether the all-ones target lies in the span of the restricted columns."""
    sub = np.asarray(matrix, dtype=float)[:, list(support)]
    ones = np.ones((sub.shape[0], 1))
    return np.linalg.matrix_rank(sub, tol=tol) == np.linalg.matrix_rank(
        np.hstack([sub, ones]), tol=tol
    )


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    std_error: float
    trials: int


def monte_carlo_expected_error(
    spec: CodeSpec,
    S: int,
    trials: int,
    rng: SeededRng | None = None,
    rho: float | None = None,
    chunk: int = 2048,
) -> MonteCarloResult:
    """Mean constant-decoder error over fresh sparse Gaussian draws.

    Evaluates (1/K) ||rho E 1_F - 1||^2 on `trials` independent encoding
    matrices with the fixed pattern F = {0, ..., N-S-1}; the expectation does
    not depend on the pattern because rows are i.i.d. and the row law is
    exchangeable across columns.  Trials draw from chunked sub-streams.
    """
    spec.validate()
    params = sg_solve_params(spec)
    if rho is None:
        rho = params.rho(S)
    if rng is None:
        rng = SeededRng(spec.seed, STREAM_MONTE_CARLO)
    K, N = spec.K, spec.N
    keep = N - S
    ex = params.exchangeable()
    errs = np.empty(trials)
    done = 0
    block_index = 0
    while done < trials:
        b = min(chunk, trials - done)
        gen = rng.generator(block_index)
        x = numerics.sample_exchangeable_gaussian(ex, b * K, gen).reshape(b, K, N)
        mask = gen.random((b, K, N)) < spec.gamma
        r = rho * (x * mask)[:, :, :keep].sum(axis=2) - 1.0
        errs[done : done + b] = (r * r).sum(axis=1) / K
        done += b
        block_index += 1
    se = float(errs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return MonteCarloResult(mean=float(errs.mean()), std_error=se, trials=trials)
