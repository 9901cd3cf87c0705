"""Counter-based random streams for reproducible trials.

All randomness in the library flows through Philox (a counter-based
generator), so a stream is fully determined by its 128-bit key and trial
results are reproducible across machines and thread counts.  Keys are
derived, never drawn: trial j of sweep entry k under master seed m gets
key (m, k << 32 | j), which is collision-free for k, j < 2**32.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

#: Generator recorded in experiment manifests.
GENERATOR_NAME = "philox4x64"

#: Uniforms are drawn in blocks of this size; the block boundary does not
#: affect the values consumed, only amortizes generator overhead.
BLOCK_SIZE = 4096


def philox_key(seed) -> tuple[int, int]:
    """Normalize a seed spec into a 2-word Philox key.

    Accepts a plain int (second word 0) or a pair of ints.
    """
    if isinstance(seed, (tuple, list)):
        if len(seed) != 2:
            raise ValueError(f"philox key needs 1 or 2 words, got {len(seed)}")
        k0, k1 = seed
    else:
        k0, k1 = seed, 0
    return (int(k0) & _MASK64, int(k1) & _MASK64)


def trial_key(master_seed: int, sweep_index: int, trial_index: int) -> tuple[int, int]:
    """Disjoint per-trial stream key for (sweep entry, trial) pairs."""
    if not (0 <= sweep_index < (1 << 32) and 0 <= trial_index < (1 << 32)):
        raise ValueError("sweep/trial indices must fit in 32 bits")
    return (int(master_seed) & _MASK64, ((sweep_index << 32) | trial_index) & _MASK64)


class UniformStream:
    """Buffered stream of uniform [0, 1) draws from one Philox stream.

    Both simulation engines consume uniforms strictly in order through
    this class, so their draw sequences are identical by construction.
    """

    __slots__ = ("key", "_gen", "_buf", "_idx")

    def __init__(self, seed):
        self.key = philox_key(seed)
        self._gen = np.random.Generator(np.random.Philox(key=self.key))
        self._buf: list[float] = []
        self._idx = 0

    def block(self) -> list[float]:
        """Next block of uniforms (for inlined consumers)."""
        return self._gen.random(BLOCK_SIZE).tolist()

    def next(self) -> float:
        if self._idx == len(self._buf):
            self._buf = self.block()
            self._idx = 0
        u = self._buf[self._idx]
        self._idx += 1
        return u
