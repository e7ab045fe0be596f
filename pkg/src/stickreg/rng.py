"""Hierarchical, reproducible random number streams.

Every run owns a root stream derived from a user seed.  Substreams are
derived by integer paths (run -> stick -> observation), so any unit of
work can be given its own independent generator.  Two substreams with
different paths are statistically independent, and the assignment of
paths does not depend on execution order: serial and parallel schedules
consume identical randomness.
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """A seeded random stream addressable by an integer path.

    Wraps ``numpy.random.Generator`` (PCG64) keyed by
    ``SeedSequence(entropy=seed, spawn_key=path)``.  The same
    (seed, path) pair always yields the same draws, on any platform.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, *indices: int) -> "RngStream":
        """Derive the substream at ``path + indices``.

        Children are independent of the parent and of each other, and
        creating a child does not advance the parent's state.
        """
        return RngStream(self.seed, self.path + tuple(int(i) for i in indices))

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, path={self.path})"
