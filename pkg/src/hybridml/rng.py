"""Seeded, splittable random streams.

A stream is identified by ``(seed, stream_index)``. Child streams are derived
through ``numpy.random.SeedSequence`` spawn keys, so replications can run in
any order or in parallel without sharing state.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RngStream:
    seed: int
    stream_index: int = 0
    path: tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_index < 0:
            raise ValueError("seed and stream_index must be non-negative")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index, *self.path))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, key: int) -> "RngStream":
        """Independent sub-stream, a pure function of ``(seed, stream_index, path, key)``."""
        return RngStream(self.seed, self.stream_index, (*self.path, int(key)))

    # thin forwards used throughout the samplers
    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def chisquare(self, df, size=None):
        return self.generator.chisquare(df, size)

    def gamma(self, shape, scale=1.0, size=None):
        return self.generator.gamma(shape, scale, size)

    def exponential(self, scale=1.0, size=None):
        return self.generator.exponential(scale, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"expected RngStream or int seed, got {type(rng).__name__}")
