"""
Splittable random streams.

Every draw in a simulation comes from a stream identified by a root seed
and a tuple of integer keys, typically ``(cycle, purpose)``. Two streams
with the same identity reproduce the same sequence; distinct keys give
independent sequences through numpy's SeedSequence spawning.
"""

from enum import IntEnum
from typing import Optional, Tuple

import numpy as np


class Purpose(IntEnum):
    """What a per-cycle stream is used for."""
    DIRECTION = 0
    ARRIVALS = 1
    JOBS = 2


class RngStream:
    """
    A reproducible random stream keyed by ``(seed, stream_id)``.

    Args:
        seed: Root seed (non-negative, up to 64 bits)
        stream_id: Integer or tuple of integers naming the stream
    """

    def __init__(self, seed: int, stream_id: Tuple[int, ...] | int = ()):
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        if seed < 0 or any(k < 0 for k in stream_id):
            raise ValueError("Seeds and stream keys must be non-negative integers")

        self.seed = int(seed)
        self.stream_id: Tuple[int, ...] = tuple(int(k) for k in stream_id)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *keys: int) -> "RngStream":
        """Derive an independent stream by appending keys to this stream's id."""
        return RngStream(self.seed, self.stream_id + tuple(int(k) for k in keys))

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def cycle_stream(seed: int, cycle: int, purpose: Optional[Purpose] = None) -> RngStream:
    """
    Stream for one ``(replication seed, cycle, purpose)`` triple.

    Without a purpose this is the cycle's parent stream, whose
    ``child(purpose)`` equals ``cycle_stream(seed, cycle, purpose)``.
    """
    if purpose is None:
        return RngStream(seed, (cycle,))
    return RngStream(seed, (cycle, int(purpose)))
