"""Counter-based random streams.

Every stochastic routine in this package draws from a Philox counter-based
generator.  A run is identified by (master_seed, run_index); the pair is
packed into the 128-bit Philox key as

    key = (master_seed mod 2**64)  |  (run_index << 64)

so streams for distinct run indices are statistically independent and the
result of a run never depends on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(master_seed: int, run_index: int = 0) -> np.random.Generator:
    """Deterministic per-run generator derived from a master seed."""
    if run_index < 0:
        raise ValueError("run_index must be nonnegative")
    key = (int(master_seed) & _MASK64) | (int(run_index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


class ChunkedSteps:
    """Supplies uniform steps in {0,1,2,3} in fixed-size chunks.

    Numba kernels cannot hold a Generator, so walk drivers pull chunks of
    pre-generated step directions and feed them to the kernel.  Consumption
    order is sequential within the stream, which keeps replay exact.
    """

    def __init__(self, rng: np.random.Generator, chunk: int = 1 << 20):
        self.rng = rng
        self.chunk = chunk

    def next(self) -> np.ndarray:
        return self.rng.integers(0, 4, size=self.chunk, dtype=np.uint8)


class ChunkedNormals:
    """Supplies standard-normal planar increments in fixed-size chunks."""

    def __init__(self, rng: np.random.Generator, chunk: int = 1 << 18):
        self.rng = rng
        self.chunk = chunk

    def next(self) -> np.ndarray:
        return self.rng.standard_normal(size=(self.chunk, 2))
