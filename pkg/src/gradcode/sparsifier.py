"""Degree-preserving spectral sparsification of weighted bipartite graphs.

Pipeline: fixed-point quantization -> power-of-two edge decomposition ->
repeated leverage-filtered cycle-alternation rounds under a spectral budget
-> merge parallel edges -> dequantize.  Each round preserves every weighted
degree exactly in the quantized integer domain; the accepted rounds keep the
Laplacian within ``(e^eps - 1) * ||L||_2`` of the input graph's Laplacian.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .numerics import _connected, effective_resistances
from .rng import STREAM_SPARSIFY, SeededRng


class Edge(NamedTuple):
    u: int
    v: int
    w: float  # positive; integer-valued in the quantized domain

    def pair(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


@dataclass
class WeightedGraph:
    """Undirected weighted multigraph; no self-loops, weights > 0.

    When `sides` is set the graph is a bipartite lift: vertices
    ``0..sides[0]-1`` form the left side, the rest the right side, and every
    edge crosses sides.
    """

    n: int
    edges: list[Edge] = field(default_factory=list)
    sides: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        self.edges = [Edge(int(e[0]), int(e[1]), e[2]) for e in self.edges]
        for e in self.edges:
            if e.u == e.v:
                raise ValueError(f"self-loop at vertex {e.u}")
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise ValueError(f"edge {e} out of range for n={self.n}")
            if not e.w > 0:
                raise ValueError(f"non-positive weight on edge {e}")
        if self.sides is not None:
            left, right = self.sides
            if left + right != self.n:
                raise ValueError("bipartite sides must sum to vertex count")
            for e in self.edges:
                if (e.u < left) == (e.v < left):
                    raise ValueError(f"edge {e} does not cross bipartition")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree_vector(self) -> np.ndarray:
        deg = np.zeros(self.n)
        for e in self.edges:
            deg[e.u] += e.w
            deg[e.v] += e.w
        return deg

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for e in self.edges:
            a[e.u, e.v] += e.w
            a[e.v, e.u] += e.w
        return a

    def laplacian(self) -> np.ndarray:
        a = self.adjacency_matrix()
        return np.diag(a.sum(axis=1)) - a

    def is_connected(self) -> bool:
        return _connected(self.n, [(e.u, e.v) for e in self.edges])


@dataclass(frozen=True)
class QuantizedWeights:
    """Fixed-point representation bookkeeping for one quantize() call."""

    k: int
    kappa: int
    weights: tuple[int, ...]
    dropped_edges: int  # edges whose weight rounded to zero


@dataclass
class CycleDecomposition:
    """Partition of a multigraph's edges into closed walks plus leftovers."""

    cycles: list[list[Edge]]
    extra_edges: list[Edge]

    @property
    def cycle_edge_count(self) -> int:
        return sum(len(c) for c in self.cycles)


def bipartite_lift(E: np.ndarray) -> WeightedGraph:
    """Lift a non-negative matrix to its bipartite graph.

    Row ``i`` becomes left vertex ``i``, column ``j`` becomes right vertex
    ``rows + j``; each non-zero entry contributes one edge of that weight.
    The lift's adjacency matrix has `E` as its off-diagonal block, so the
    eigenvalues of the lift are plus/minus the singular values of `E`.
    """
    E = np.asarray(E, dtype=float)
    if E.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if (E < 0).any():
        raise ValueError("negative entry; bipartite lift requires E >= 0")
    rows, cols = E.shape
    edges = [
        Edge(i, rows + j, float(E[i, j]))
        for i in range(rows)
        for j in range(cols)
        if E[i, j] != 0.0
    ]
    return WeightedGraph(rows + cols, edges, sides=(rows, cols))


def lift_inverse(G: WeightedGraph) -> np.ndarray:
    """Recover the matrix whose bipartite lift is `G` (parallel edges sum)."""
    if G.sides is None:
        raise ValueError("graph has no bipartite side metadata")
    rows, cols = G.sides
    E = np.zeros((rows, cols))
    for e in G.edges:
        i, j = (e.u, e.v) if e.u < rows else (e.v, e.u)
        E[i, j - rows] += e.w
    return E


def quantize(G: WeightedGraph, k: int) -> tuple[WeightedGraph, QuantizedWeights]:
    """Round weights to integer multiples of 2^-k (nearest, half away from zero).

    Per-edge error is at most 1/(2 kappa) with kappa = 2^k.  Edges rounding
    to zero are dropped; the count is reported in the bookkeeping record.
    """
    if k < 0:
        raise ValueError("precision exponent k must be >= 0")
    kappa = 2**k
    kept: list[Edge] = []
    weights: list[int] = []
    dropped = 0
    for e in G.edges:
        w = int(math.floor(kappa * float(e.w) + 0.5))
        if w == 0:
            dropped += 1
            continue
        kept.append(Edge(e.u, e.v, w))
        weights.append(w)
    return (
        WeightedGraph(G.n, kept, sides=G.sides),
        QuantizedWeights(k=k, kappa=kappa, weights=tuple(weights), dropped_edges=dropped),
    )


def dequantize(G: WeightedGraph, k: int) -> WeightedGraph:
    """Rescale integer weights back by 2^-k."""
    kappa = float(2**k)
    return WeightedGraph(
        G.n, [Edge(e.u, e.v, e.w / kappa) for e in G.edges], sides=G.sides
    )


def power_of_two_decompose(G: WeightedGraph) -> WeightedGraph:
    """Split every integer weight into parallel edges of its set bits.

    Total weight per vertex pair (hence every weighted degree) is preserved
    exactly; afterwards each edge weight is a power of two.
    """
    out: list[Edge] = []
    for e in G.edges:
        w = int(e.w)
        if w != e.w or w <= 0:
            raise ValueError(f"power-of-two decomposition needs positive integer weights, got {e.w}")
        bit = 1
        while w:
            if w & 1:
                out.append(Edge(e.u, e.v, bit))
            w >>= 1
            bit <<= 1
    return WeightedGraph(G.n, out, sides=G.sides)


def merge_parallel_edges(G: WeightedGraph) -> WeightedGraph:
    """Combine parallel edges by summing weights (deterministic pair order)."""
    acc: dict[tuple[int, int], float] = {}
    order: list[tuple[int, int]] = []
    for e in G.edges:
        p = e.pair()
        if p not in acc:
            acc[p] = 0
            order.append(p)
        acc[p] += e.w
    return WeightedGraph(G.n, [Edge(u, v, acc[(u, v)]) for u, v in order], sides=G.sides)


class _Chain:
    """A path of original edges, tracked by its two endpoints.

    Peeling contracts degree-2 vertices by concatenating chains; the original
    edges ride along in walk order so emitted cycles are genuine closed walks.
    """

    __slots__ = ("a", "b", "edges")

    def __init__(self, a: int, b: int, edges: list[Edge]):
        self.a = a
        self.b = b
        self.edges = edges

    def oriented_from(self, v: int) -> list[Edge]:
        return self.edges if self.a == v else self.edges[::-1]

    def other(self, v: int) -> int:
        return self.b if self.a == v else self.a


def naive_cycle_decomp(G: WeightedGraph) -> CycleDecomposition:
    """Peel a multigraph into edge-disjoint closed walks plus leftover edges.

    Vertices of degree <= 2 are processed first: a pendant chain moves to the
    leftovers, a degree-2 vertex contracts its two chains into one (emitting
    a cycle whenever the contraction closes up).  Any remainder has minimum
    degree >= 3; a deterministic walk finds a cycle, removes it, and peeling
    resumes.  Cycles plus leftovers partition the input edge multiset exactly.
    """
    chains: dict[int, _Chain] = {}
    adj: dict[int, set[int]] = defaultdict(set)
    for idx, e in enumerate(G.edges):
        chains[idx] = _Chain(e.u, e.v, [e])
        adj[e.u].add(idx)
        adj[e.v].add(idx)
    next_id = len(G.edges)
    cycles: list[list[Edge]] = []
    extra: list[Edge] = []

    queue: deque[int] = deque(sorted(v for v in adj if len(adj[v]) <= 2))

    def enqueue(v: int) -> None:
        if v in adj and len(adj[v]) <= 2:
            queue.append(v)

    def peel_low_degree() -> None:
        nonlocal next_id
        while queue:
            u = queue.popleft()
            if u not in adj:
                continue
            deg = len(adj[u])
            if deg == 0:
                del adj[u]
            elif deg == 1:
                cid = next(iter(adj[u]))
                ch = chains.pop(cid)
                extra.extend(ch.edges)
                other = ch.other(u)
                adj[u].discard(cid)
                adj[other].discard(cid)
                del adj[u]
                enqueue(other)
            elif deg == 2:
                c1, c2 = sorted(adj[u])
                ch1, ch2 = chains.pop(c1), chains.pop(c2)
                a, b = ch1.other(u), ch2.other(u)
                merged_edges = ch1.oriented_from(a) + ch2.oriented_from(u)
                for cid, end in ((c1, a), (c2, b)):
                    adj[u].discard(cid)
                    adj[end].discard(cid)
                del adj[u]
                if a == b:
                    cycles.append(merged_edges)
                    enqueue(a)
                else:
                    chains[next_id] = _Chain(a, b, merged_edges)
                    adj[a].add(next_id)
                    adj[b].add(next_id)
                    next_id += 1

    def remove_one_cycle() -> None:
        start = min(v for v in adj if adj[v])
        path_vertices = [start]
        position = {start: 0}
        path_chains: list[int] = []
        v = start
        came_by = -1
        while True:
            cid = min(c for c in adj[v] if c != came_by)
            w = chains[cid].other(v)
            if w in position:
                j = position[w]
                cycle_chain_ids = path_chains[j:] + [cid]
                walk: list[Edge] = []
                at = w
                for c in cycle_chain_ids:
                    walk.extend(chains[c].oriented_from(at))
                    at = chains[c].other(at)
                cycles.append(walk)
                touched = set()
                for c in cycle_chain_ids:
                    ch = chains.pop(c)
                    adj[ch.a].discard(c)
                    adj[ch.b].discard(c)
                    touched.update((ch.a, ch.b))
                for t in sorted(touched):
                    enqueue(t)
                return
            position[w] = len(path_vertices)
            path_vertices.append(w)
            path_chains.append(cid)
            came_by = cid
            v = w

    peel_low_degree()
    while chains:
        remove_one_cycle()
        peel_low_degree()
    return CycleDecomposition(cycles=cycles, extra_edges=extra)


def sparsify_once(
    G: WeightedGraph,
    resistances: dict[tuple[int, int], float],
    gen: np.random.Generator,
    quantile: float = 0.5,
) -> WeightedGraph:
    """One cycle-alternation round over low-leverage edges, per weight class.

    Within each weight class, edges whose leverage score ``w * r`` is at or
    below the class quantile are candidates (ties included so uniform-
    leverage classes still sparsify).  The candidate subgraph is decomposed
    into closed walks; for each even walk a fair coin keeps one alternating
    half at doubled weight and deletes the other half, which preserves every
    weighted degree exactly.  Odd walks (impossible when `G` is bipartite)
    pass through unchanged.  No-op when no cycles exist.
    """
    by_weight: dict[float, list[Edge]] = defaultdict(list)
    for e in G.edges:
        by_weight[e.w].append(e)
    out: list[Edge] = []
    for w in sorted(by_weight):
        group = by_weight[w]
        lev = np.array([e.w * resistances[e.pair()] for e in group])
        thr = float(np.quantile(lev, quantile))
        cand = [e for e, l in zip(group, lev) if l <= thr]
        out.extend(e for e, l in zip(group, lev) if l > thr)
        if len(cand) < 2:
            out.extend(cand)
            continue
        dec = naive_cycle_decomp(WeightedGraph(G.n, cand, sides=G.sides))
        out.extend(dec.extra_edges)
        for walk in dec.cycles:
            if len(walk) % 2:
                out.extend(walk)
                continue
            offset = int(gen.integers(2))
            out.extend(Edge(e.u, e.v, e.w * 2) for e in walk[offset::2])
    return WeightedGraph(G.n, out, sides=G.sides)


@dataclass(frozen=True)
class SparsifyResult:
    """Sparsified graph plus the audit trail of the run."""

    graph: WeightedGraph
    epsilon: float
    k: int
    edges_before: int
    edges_after: int
    rounds_accepted: int
    laplacian_deviation: float  # ||L - L_eps||_2 against the input graph
    budget: float  # (e^eps - 1) * ||L||_2 of the input graph
    quantization_dropped: int
    quantization_deviation: float  # deviation of the zero-round output


def degree_preserving_sparsify(
    G: WeightedGraph,
    epsilon: float,
    k: int = 16,
    rng: SeededRng | None = None,
) -> SparsifyResult:
    """Sparsify `G` while preserving weighted degrees and spectral structure.

    Rounds of :func:`sparsify_once` are trial-applied; a round is kept only
    while ``||L - L_cand||_2 <= (e^eps - 1) ||L||_2`` measured against the
    input graph's Laplacian, and the loop stops at the first rejection or
    when no cycle remains.  Degrees are preserved exactly in the quantized
    domain, hence within ``n/(2 kappa)`` of the originals after dequantizing
    (the initial rounding is the only degree error).  As epsilon -> 0 no
    round is accepted and the output is the quantized input.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not G.is_connected():
        raise ValueError("graph is disconnected; sparsification requires a connected graph")
    if rng is None:
        rng = SeededRng(0, STREAM_SPARSIFY)
    kappa = float(2**k)

    L_orig = G.laplacian()
    norm_orig = float(np.abs(np.linalg.eigvalsh(L_orig)).max()) if G.n else 0.0
    budget = (math.exp(epsilon) - 1.0) * norm_orig

    quantized, qinfo = quantize(G, k)
    if not quantized.is_connected():
        raise ValueError("quantization dropped edges and disconnected the graph; increase k")
    current = power_of_two_decompose(quantized)
    base_degrees = current.degree_vector()

    pair_res: dict[tuple[int, int], float] = {}
    res = effective_resistances(current)
    for e, r in zip(current.edges, res):
        pair_res[e.pair()] = float(r)

    def deviation(g: WeightedGraph) -> float:
        diff = L_orig - g.laplacian() / kappa
        return float(np.abs(np.linalg.eigvalsh(diff)).max())

    gen = rng.generator()
    rounds = 0
    quant_dev = deviation(current)
    dev = quant_dev
    while True:
        candidate = sparsify_once(current, pair_res, gen)
        if candidate.edge_count >= current.edge_count:
            break
        cand_dev = deviation(candidate)
        if cand_dev <= budget:
            current, dev = candidate, cand_dev
            rounds += 1
        else:
            break

    final_deg = current.degree_vector()
    if not np.array_equal(final_deg, base_degrees):
        raise AssertionError("internal error: quantized degrees changed during sparsification")

    merged = merge_parallel_edges(current)
    out = dequantize(merged, k)
    return SparsifyResult(
        graph=out,
        epsilon=epsilon,
        k=k,
        edges_before=G.edge_count,
        edges_after=out.edge_count,
        rounds_accepted=rounds,
        laplacian_deviation=dev,
        budget=budget,
        quantization_dropped=qinfo.dropped_edges,
        quantization_deviation=quant_dev,
    )
