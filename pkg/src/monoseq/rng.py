"""Replicate-indexed random streams.

Each replicate owns a Philox counter-based generator keyed on
``(master_seed, replicate_index)``; the counter plays the role of the draw
index. Streams therefore do not depend on how replicates are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "uniform_block", "column_blocks"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if not 0 <= self.replicate_index <= _MASK64:
            raise ValueError("replicate_index must fit in 64 unsigned bits")

    @property
    def key(self) -> int:
        return (self.master_seed << 64) | self.replicate_index

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key))

    def uniforms(self, size: int) -> np.ndarray:
        return self.generator().random(size)

    def side_generator(self) -> np.random.Generator:
        """A second stream for the same replicate, 2**128 counter steps ahead."""
        return np.random.Generator(np.random.Philox(key=self.key).jumped())


def uniform_block(master_seed: int, start: int, stop: int, size: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the replicate-by-draw uniform matrix."""
    out = np.empty((stop - start, size))
    for row, r in enumerate(range(start, stop)):
        out[row] = RngStream(master_seed, r).uniforms(size)
    return out


def column_blocks(master_seed: int, start: int, stop: int, size: int, width: int):
    """Yield ``(first_column, block)`` pieces of rows ``start..stop-1`` of the
    uniform matrix, ``block`` transposed to shape ``(columns, rows)``.

    Each row's generator is read sequentially, so the values equal
    ``uniform_block`` whatever the width.
    """
    gens = [RngStream(master_seed, r).generator() for r in range(start, stop)]
    rows = np.empty((len(gens), width))
    for first in range(0, size, width):
        w = min(width, size - first)
        part = rows[:, :w]
        for j, gen in enumerate(gens):
            gen.random(out=part[j])
        yield first, np.ascontiguousarray(part.T)
