"""Deterministic random-stream plumbing.

Every stochastic construction draws through a :class:`SeededRng`, so any
matrix or sparsified graph is reproducible from (family, parameters, seed)
alone.  Distinct construction sites use distinct stream ids; parallel or
repeated work forks sub-paths instead of sharing a generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# One stream id per construction site.  Identically seeded specs still draw
# independent sequences for different families.
STREAM_BGC = 1
STREAM_RBGC = 2
STREAM_SG = 3
STREAM_EP = 4
STREAM_SPARSIFY = 5
STREAM_MONTE_CARLO = 6


@dataclass(frozen=True)
class SeededRng:
    """A (seed, stream) pair; identical pairs yield identical sequences.

    Instances are single-owner: never share a generator across threads.
    Fork independent work with ``generator(*path)`` sub-paths.
    """

    seed: int
    stream: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        """Fresh generator for this stream, optionally forked by `path` ids."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "SeededRng":
        """Same seed, different stream id."""
        return SeededRng(self.seed, stream)
