"""
Seeded random generator built on splitmix64.

The stream is defined by the integer recurrence below, evaluated with
wrapping uint64 arithmetic, so the same seed yields the same numbers on
every platform:

    state_n = seed + n * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (state_n ^ (state_n >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out_n = z ^ (z >> 31)

Floats take the top 53 bits: ``(out >> 11) * 2**-53`` in [0, 1).
"""
from typing import Sequence, Tuple, Union

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

Shape = Union[int, Tuple[int, ...]]


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


class SeededRng:
    """Deterministic generator; all draws advance a single 64-bit counter."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.state = self.seed

    def get_state(self) -> int:
        return self.state

    def set_state(self, state: int) -> None:
        self.state = int(state) & MASK64

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = steps * np.uint64(GAMMA) + np.uint64(self.state)
        self.state = (self.state + n * GAMMA) & MASK64
        return _mix(z)

    def random(self, shape: Shape = ()) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        bits = self.next_u64(n) >> np.uint64(11)
        values = bits.astype(np.float64) * (2.0 ** -53)
        return values.reshape(shape) if shape else values[0]

    def uniform(self, low: float, high: float, shape: Shape = ()) -> np.ndarray:
        return low + (high - low) * self.random(shape)

    def randint(self, high: int) -> int:
        """Uniform integer in [0, high)."""
        if high < 1:
            raise ValueError(f"randint needs a positive bound, got {high}")
        return min(int(self.random() * high), high - 1)

    def choice(self, items: Sequence):
        return items[self.randint(len(items))]

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.random(n), kind="stable")

    def sample(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), in draw order."""
        return self.permutation(n)[:k]

    def fork(self, tag: int) -> "SeededRng":
        """Independent child stream derived from the current state and a tag."""
        mixed = _mix(np.array([(self.state ^ (int(tag) * GAMMA)) & MASK64], dtype=np.uint64))
        return SeededRng(int(mixed[0]))
