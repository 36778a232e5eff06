"""Block partitions of R^n and the trace data model shared by the algorithms.

Blocks are 1-indexed contiguous ranges, so block ``i`` of a partition with
sizes ``(n_1, ..., n_P)`` covers ``v[offsets[i-1] : offsets[i-1] + n_i]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

FULL = "all"


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class BlockPartition:
    n: int
    sizes: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if len(self.sizes) == 0:
            raise PartitionError("a partition needs at least one block")
        if any(int(s) < 1 for s in self.sizes):
            raise PartitionError(f"block sizes must be positive, got {list(self.sizes)}")
        if sum(self.sizes) != self.n:
            raise PartitionError(
                f"block sizes sum to {sum(self.sizes)} but the dimension is {self.n}"
            )
        offsets = np.concatenate(([0], np.cumsum(self.sizes)[:-1])).astype(int)
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "offsets", tuple(int(o) for o in offsets))

    @property
    def P(self) -> int:
        return len(self.sizes)

    def slice(self, i: int) -> slice:
        if not 1 <= i <= self.P:
            raise IndexError(f"block index {i} outside 1..{self.P}")
        start = self.offsets[i - 1]
        return slice(start, start + self.sizes[i - 1])

    def block_sq_norms(self, v: np.ndarray) -> np.ndarray:
        """Squared Euclidean norm of every block of ``v`` (length P)."""
        return np.add.reduceat(np.square(v), np.asarray(self.offsets))


def make_partition(n: int, sizes: Sequence[int]) -> BlockPartition:
    return BlockPartition(int(n), tuple(int(s) for s in sizes))


def uniform_partition(n: int, P: int) -> BlockPartition:
    """Split ``n`` into ``P`` contiguous blocks whose sizes differ by at most one."""
    if not 1 <= P <= n:
        raise PartitionError(f"cannot split dimension {n} into {P} nonempty blocks")
    base, extra = divmod(n, P)
    return make_partition(n, [base + 1] * extra + [base] * (P - extra))


def extract_block(p: BlockPartition, i: int, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (p.n,):
        raise PartitionError(f"expected a vector of length {p.n}, got shape {v.shape}")
    return v[p.slice(i)].copy()


def embed_block(p: BlockPartition, i: int, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    sl = p.slice(i)
    if u.shape != (sl.stop - sl.start,):
        raise PartitionError(
            f"block {i} has size {sl.stop - sl.start}, got vector of shape {u.shape}"
        )
    out = np.zeros(p.n)
    out[sl] = u
    return out


@dataclass(frozen=True)
class TraceRecord:
    t: int
    x: np.ndarray
    block: Union[int, str]
    stepsize: float
    cost: float


@dataclass
class Trace:
    """Per-step history of one online run.

    ``xs[t-1]`` is the iterate held when ``f_t`` is revealed, ``costs[t-1]`` is
    ``f_t(xs[t-1])``. ``blocks`` uses 0 for the full-gradient baseline; for the
    multi-step drivers it stores the last inner selection, and ``inner_blocks``
    keeps all of them.
    """

    xs: np.ndarray
    blocks: np.ndarray
    stepsizes: np.ndarray
    costs: np.ndarray
    final_x: np.ndarray
    seed: Optional[int] = None
    rule: str = ""
    inner_blocks: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return len(self.costs)

    @property
    def records(self) -> list[TraceRecord]:
        return [
            TraceRecord(
                t=t + 1,
                x=self.xs[t],
                block=int(self.blocks[t]) if self.blocks[t] > 0 else FULL,
                stepsize=float(self.stepsizes[t]),
                cost=float(self.costs[t]),
            )
            for t in range(self.T)
        ]

    def iterates(self) -> np.ndarray:
        """x_1, ..., x_{T+1} stacked row-wise."""
        return np.vstack([self.xs, self.final_x[None, :]])
