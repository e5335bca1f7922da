"""Counter-based random streams.

A stream is the pair (master_seed, stream_index) and is realized as a numpy Philox
generator whose 128-bit key packs both words. Equal pairs give identical sequences; child
streams are derived with a SeedSequence hash, so each Monte Carlo trial or row chunk can
own its substream regardless of how work is scheduled.

"""

from dataclasses import dataclass
from typing import List

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Value object naming one substream of a counter-based generator."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if int(self.master_seed) < 0 or int(self.stream_index) < 0:
            raise ValueError(
                "master_seed and stream_index must be non-negative, got (%i, %i)"
                % (self.master_seed, self.stream_index)
            )
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "stream_index", int(self.stream_index) & _MASK64)

    @property
    def key(self) -> int:
        return (self.master_seed << 64) | self.stream_index

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=self.key))

    def spawn(self, index: int) -> "RngStream":
        """Child stream number `index`; a pure function of (self, index)."""
        if index < 0:
            raise ValueError("substream index must be non-negative, got %i" % index)
        seq = np.random.SeedSequence([self.master_seed, self.stream_index, int(index)])
        child = int(seq.generate_state(1, dtype=np.uint64)[0])
        return RngStream(self.master_seed, child)

    def spawn_many(self, count: int) -> List["RngStream"]:
        return [self.spawn(i) for i in range(count)]


def fresh_seed() -> int:
    """64-bit seed drawn from OS entropy, for runs that did not pin one."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
