"""Selection rules and the online block coordinate descent drivers.

``run_online`` covers the single-step algorithms (random, cyclic and
Gauss-Southwell selection, plus the full-gradient baseline ``rule="full"``);
``run_online_multistep`` performs ``k`` inner block updates on the same
``f_t`` before time advances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import BlockPartition, Trace, make_partition
from .problems import ProblemSequence, replication_rng
from .schedules import Schedule

RULES = ("random", "cyclic", "gauss_southwell", "full")


def select_random(P: int, rng: np.random.Generator) -> int:
    return int(rng.integers(1, P + 1))


def select_cyclic(i_prev: int, P: int) -> int:
    return (i_prev % P) + 1


def select_gauss_southwell(gradient: np.ndarray, p: BlockPartition) -> int:
    """Block with the largest gradient norm; ties go to the lowest index."""
    return int(np.argmax(p.block_sq_norms(np.asarray(gradient, dtype=float)))) + 1


def cd_step(x: np.ndarray, gradient: np.ndarray, i: int, alpha: float, p: BlockPartition) -> np.ndarray:
    """x - alpha * H_i H_i^T gradient; only block i moves."""
    if alpha < 0:
        raise ValueError("stepsize must be nonnegative")
    sl = p.slice(i)
    out = np.array(x, dtype=float)
    out[sl] = out[sl] - alpha * np.asarray(gradient, dtype=float)[sl]
    return out


@dataclass
class SelectionRule:
    """Stateful block selector.

    ``seed`` drives the random rule (one draw per selection); ``start`` is
    i_0 for the cyclic rule, so the first selected block is ``start % P + 1``.
    """

    kind: str
    P: int
    seed: Optional[int] = None
    start: Optional[int] = None
    _rng: Optional[np.random.Generator] = field(default=None, init=False, repr=False)
    _prev: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in RULES:
            raise ValueError(f"unknown selection rule {self.kind!r}, expected one of {RULES}")
        if self.kind == "random":
            if self.seed is None:
                raise ValueError("the random rule needs an explicit seed")
            self._rng = replication_rng(self.seed)
        self._prev = self.P if self.start is None else int(self.start)

    @property
    def needs_gradient(self) -> bool:
        return self.kind in ("gauss_southwell", "full")

    def select(self, gradient: Optional[np.ndarray], p: BlockPartition) -> int:
        if self.kind == "random":
            return select_random(self.P, self._rng)
        if self.kind == "cyclic":
            self._prev = select_cyclic(self._prev, self.P)
            return self._prev
        if self.kind == "gauss_southwell":
            return select_gauss_southwell(gradient, p)
        return 0


def _prepare(seq, T, x0, partition):
    if T > seq.T:
        raise ValueError(f"requested {T} steps but the sequence horizon is {seq.T}")
    x = np.array(x0, dtype=float)
    if x.shape != (seq.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({seq.n},)")
    if partition is None:
        partition = make_partition(seq.n, [1] * seq.n)
    elif partition.n != seq.n:
        raise ValueError(f"partition dimension {partition.n} != problem dimension {seq.n}")
    return x, partition


def run_online(
    seq: ProblemSequence,
    rule: SelectionRule | str,
    sched: Schedule,
    T: int,
    x0,
    partition: Optional[BlockPartition] = None,
    seed: Optional[int] = None,
) -> Trace:
    """One online pass: at each t record f_t(x_t), select i_t, then update.

    ``rule`` may be a SelectionRule or a rule name (with ``seed`` for the
    random rule). ``partition`` defaults to scalar blocks.
    """
    x, partition = _prepare(seq, T, x0, partition)
    if isinstance(rule, str):
        rule = SelectionRule(rule, partition.P, seed=seed)
    xs = np.empty((T, seq.n))
    blocks = np.empty(T, dtype=int)
    steps = np.empty(T)
    costs = np.empty(T)
    for t in range(1, T + 1):
        xs[t - 1] = x
        alpha = sched(t)
        cost, g = seq.value_and_gradient(t, x)
        i = rule.select(g, partition)
        if i == 0:
            x = x - alpha * g
        else:
            x = cd_step(x, g, i, alpha, partition)
        blocks[t - 1], steps[t - 1], costs[t - 1] = i, alpha, cost
    return Trace(xs, blocks, steps, costs, x, seed=rule.seed, rule=rule.kind)


def run_online_multistep(
    seq: ProblemSequence,
    rule: SelectionRule | str,
    sched: Schedule,
    T: int,
    k: int,
    x0,
    partition: Optional[BlockPartition] = None,
) -> Trace:
    """k inner block updates against f_t per time step (cyclic or Gauss-Southwell).

    The cyclic pointer carries over between time steps; Gauss-Southwell
    re-evaluates the gradient at every inner iterate.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    x, partition = _prepare(seq, T, x0, partition)
    if isinstance(rule, str):
        rule = SelectionRule(rule, partition.P)
    if rule.kind not in ("cyclic", "gauss_southwell"):
        raise ValueError("multi-step updates are defined for the cyclic and gauss_southwell rules")
    xs = np.empty((T, seq.n))
    blocks = np.empty(T, dtype=int)
    inner = np.empty((T, k), dtype=int)
    steps = np.empty(T)
    costs = np.empty(T)
    for t in range(1, T + 1):
        xs[t - 1] = x
        alpha = sched(t)
        cost, g = seq.value_and_gradient(t, x)
        for kappa in range(k):
            if kappa > 0:
                g = seq.gradient(t, x)
            i = rule.select(g, partition)
            x = cd_step(x, g, i, alpha, partition)
            inner[t - 1, kappa] = i
        blocks[t - 1], steps[t - 1], costs[t - 1] = inner[t - 1, -1], alpha, cost
    return Trace(xs, blocks, steps, costs, x, rule=rule.kind, inner_blocks=inner)
