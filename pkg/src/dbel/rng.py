"""Counter-based random streams addressed by integer keys.

A stream is identified by a root seed and a tuple of integer keys such
as ``(replicate, arm, component)``.  Its generator is a Philox bit
generator seeded through ``SeedSequence(seed, spawn_key=keys)``, so any
replicate can be regenerated on its own, in any order, by any worker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARM_X = 0
ARM_Y = 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    key: tuple[int, ...] = ()

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.Philox(seq))


def replicate_stream(seed: int, replicate: int) -> RngStream:
    return RngStream(int(seed), (int(replicate),))
