"""Time-varying objective sequences.

The main family is ``f_t(x) = 1/2 x^T Q_t x - b^T x`` with

    Q_t = w_t (s/n) A_t^T A_t + ((1 - w_t) s + eps + ridge) I,   w_t = t^(-1/2),

where ``A_t`` is an n x n standard normal matrix drawn independently for
every t, ``s = 20`` fixes the curvature scale independently of n and
``eps = 0.1`` keeps every ``Q_t`` positive definite. The random part fades
like t^(-1/2), so the minimizers drift with a sublinear path length while
neighbouring ``Q_t`` always differ.

Random streams are numpy PCG64 generators keyed by a
:class:`numpy.random.SeedSequence`:

* ``SeedSequence(seed, spawn_key=(0,))`` draws ``b`` (uniform on [-1, 1]),
* ``SeedSequence(seed, spawn_key=(1, t))`` draws ``A_t``,
* ``SeedSequence(seed, spawn_key=(2,))`` drives the random selection rule
  of the replication seeded ``seed``.

Each ``Q_t`` depends only on ``(seed, t)``, so sequences can be regenerated
lazily and in any order with bit-identical results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .core import BlockPartition, extract_block

EPS_SHIFT = 0.1
CURVATURE = 20.0
SLOW_RIDGE = 500.0
COND_LIMIT = 1e12
# stacked Q_t above this many bytes are regenerated on demand instead of cached
CACHE_BYTES = 256 * 2**20

PROBLEM_STREAM = 0
MATRIX_STREAM = 1
REPLICATION_STREAM = 2


class HorizonError(IndexError):
    pass


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def replication_rng(seed: int) -> np.random.Generator:
    """Generator driving the random selection rule for one replication."""
    return stream(seed, REPLICATION_STREAM)


class ProblemSequence:
    """Oracle interface for a horizon-indexed family ``f_1, ..., f_T``.

    Subclasses provide ``value`` and ``gradient``; the remaining oracles have
    generic defaults. ``mu``, ``L`` and ``L_blocks`` are optional known
    constants (None when unknown).
    """

    T: int
    n: int
    mu: Optional[float] = None
    L: Optional[float] = None

    def _check_t(self, t: int) -> None:
        if not 1 <= t <= self.T:
            raise HorizonError(f"time index {t} outside the horizon 1..{self.T}")

    def value(self, t: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, t: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value_and_gradient(self, t: int, x: np.ndarray) -> tuple[float, np.ndarray]:
        return self.value(t, x), self.gradient(t, x)

    def block_gradient(self, t: int, x: np.ndarray, p: BlockPartition, i: int) -> np.ndarray:
        return extract_block(p, i, self.gradient(t, x))

    def minimizer(self, t: int) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no minimizer oracle")

    @property
    def has_minimizer(self) -> bool:
        return type(self).minimizer is not ProblemSequence.minimizer


@dataclass
class CallableSequence(ProblemSequence):
    """Wraps user callables ``value(t, x)`` / ``gradient(t, x)``."""

    T: int
    n: int
    value_fn: Callable[[int, np.ndarray], float]
    gradient_fn: Callable[[int, np.ndarray], np.ndarray]
    minimizer_fn: Optional[Callable[[int], np.ndarray]] = None
    mu: Optional[float] = None
    L: Optional[float] = None

    def value(self, t, x):
        self._check_t(t)
        return float(self.value_fn(t, np.asarray(x, dtype=float)))

    def gradient(self, t, x):
        self._check_t(t)
        return np.asarray(self.gradient_fn(t, np.asarray(x, dtype=float)), dtype=float)

    def minimizer(self, t):
        self._check_t(t)
        if self.minimizer_fn is None:
            raise NotImplementedError("no minimizer oracle supplied")
        return np.asarray(self.minimizer_fn(t), dtype=float)

    @property
    def has_minimizer(self) -> bool:
        return self.minimizer_fn is not None


@dataclass
class QuadraticSequence(ProblemSequence):
    """``f_t(x) = 1/2 x^T Q_t x - b^T x`` for t = 1..T.

    ``Q`` is either a stacked array of shape (T, n, n) or a callable ``t -> Q_t``.
    Generated sequences also carry their ``params`` so they can be rebuilt
    from a text description.
    """

    T: int
    Q: object
    b: np.ndarray
    params: Optional[dict] = None
    _stack: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _last: tuple = field(default=(None, None), init=False, repr=False)
    _minimizers: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if isinstance(self.Q, np.ndarray):
            Q = np.asarray(self.Q, dtype=float)
            if Q.ndim == 2:
                Q = np.broadcast_to(Q, (self.T,) + Q.shape)
            if Q.shape != (self.T, self.b.size, self.b.size):
                raise ValueError(f"Q has shape {Q.shape}, expected {(self.T, self.b.size, self.b.size)}")
            self._stack = Q

    @property
    def n(self) -> int:
        return self.b.size

    def matrix(self, t: int) -> np.ndarray:
        self._check_t(t)
        if self._stack is not None:
            return self._stack[t - 1]
        if self._last[0] == t:
            return self._last[1]
        Qt = self.Q(t)
        self._last = (t, Qt)
        return Qt

    def materialize(self) -> "QuadraticSequence":
        """Cache every Q_t in memory (no-op if already stacked)."""
        if self._stack is None:
            self._stack = np.stack([self.Q(t) for t in range(1, self.T + 1)])
        return self

    def value(self, t, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.matrix(t) @ x) - self.b @ x)

    def gradient(self, t, x):
        return self.matrix(t) @ np.asarray(x, dtype=float) - self.b

    def value_and_gradient(self, t, x):
        x = np.asarray(x, dtype=float)
        Qx = self.matrix(t) @ x
        return float(0.5 * x @ Qx - self.b @ x), Qx - self.b

    def block_gradient(self, t, x, p, i):
        sl = p.slice(i)
        return self.matrix(t)[sl] @ np.asarray(x, dtype=float) - self.b[sl]

    def minimizer(self, t):
        if t not in self._minimizers:
            self._minimizers[t] = spd_solve(self.matrix(t), self.b)
        return self._minimizers[t].copy()

    def __getstate__(self):
        state = self.__dict__.copy()
        # generated sequences are rebuilt lazily in worker processes
        if self.params is not None:
            state["_stack"] = None
        state["_last"] = (None, None)
        state["_minimizers"] = {}
        return state


def quad_value(seq: QuadraticSequence, t: int, x) -> float:
    return seq.value(t, x)


def quad_gradient(seq: QuadraticSequence, t: int, x) -> np.ndarray:
    return seq.gradient(t, x)


def quad_minimizer(seq: QuadraticSequence, t: int) -> np.ndarray:
    return seq.minimizer(t)


def spd_solve(M: np.ndarray, rhs: np.ndarray, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Solve ``M x = rhs`` for symmetric positive definite ``M`` via Cholesky.

    Raises SingularMatrixError if ``M`` is not positive definite or its
    estimated 1-norm condition number exceeds ``cond_limit``.
    """
    M = np.asarray(M, dtype=float)
    c, info = lapack.dpotrf(M, lower=0)
    if info != 0:
        raise SingularMatrixError("matrix is not positive definite")
    anorm = np.abs(M).sum(axis=0).max()
    rcond, info = lapack.dpocon(c, anorm)
    if info != 0 or rcond * cond_limit < 1.0:
        raise SingularMatrixError(f"condition estimate {1 / max(rcond, 1e-300):.3g} exceeds {cond_limit:.0e}")
    x, info = lapack.dpotrs(c, np.asarray(rhs, dtype=float))
    return x


class _GeneratedQ:
    """Picklable ``t -> Q_t`` for the seeded generator."""

    def __init__(self, n: int, seed: int, ridge: float):
        self.n, self.seed, self.ridge = n, seed, ridge

    def __call__(self, t: int) -> np.ndarray:
        A = stream(self.seed, MATRIX_STREAM, t).standard_normal((self.n, self.n))
        w = 1.0 / math.sqrt(t)
        Q = (w * CURVATURE / self.n) * (A.T @ A)
        Q[np.diag_indices(self.n)] += (1.0 - w) * CURVATURE + EPS_SHIFT + self.ridge
        return Q


def gen_quadratic_sequence(
    n: int,
    T: int,
    seed: int,
    variation: str = "fast",
    ridge: Optional[float] = None,
) -> QuadraticSequence:
    """Seeded quadratic sequence; ``variation="slow"`` defaults the ridge to 500."""
    if n < 1 or T < 1:
        raise ValueError(f"need n >= 1 and T >= 1, got n={n}, T={T}")
    if variation not in ("fast", "slow"):
        raise ValueError(f"variation must be 'fast' or 'slow', got {variation!r}")
    if ridge is None:
        ridge = SLOW_RIDGE if variation == "slow" else 0.0
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    b = stream(seed, PROBLEM_STREAM).uniform(-1.0, 1.0, size=n)
    params = dict(n=int(n), T=int(T), seed=int(seed), variation=variation, ridge=float(ridge))
    seq = QuadraticSequence(T=T, Q=_GeneratedQ(n, seed, ridge), b=b, params=params)
    if n * n * T * 8 <= CACHE_BYTES:
        seq.materialize()
    return seq


def sequence_to_text(seq: QuadraticSequence) -> str:
    """Key-value description from which ``sequence_from_text`` rebuilds ``seq``."""
    if seq.params is None:
        raise ValueError("only generated sequences can be serialized")
    p = seq.params
    return "".join(f"{k} = {p[k]!r}\n" if isinstance(p[k], float) else f"{k} = {p[k]}\n"
                   for k in ("n", "T", "seed", "variation", "ridge"))


def sequence_from_text(text: str) -> QuadraticSequence:
    fields = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    missing = {"n", "T", "seed", "variation", "ridge"} - fields.keys()
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")
    return gen_quadratic_sequence(
        int(fields["n"]), int(fields["T"]), int(fields["seed"]),
        fields["variation"], float(fields["ridge"]),
    )


def fd_check_gradient(seq: ProblemSequence, t: int, x, h: float = 1e-5) -> float:
    """Max componentwise relative error of the gradient oracle vs central differences.

    The denominator is floored at 1 so components near zero are compared in
    absolute terms.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = np.asarray(x, dtype=float)
    g = seq.gradient(t, x)
    fd = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        fd[j] = (seq.value(t, x + e) - seq.value(t, x - e)) / (2 * h)
    return float(np.max(np.abs(fd - g) / np.maximum(1.0, np.abs(g))))


@dataclass(frozen=True)
class Constants:
    mu: float
    L: float
    L_blocks: tuple[float, ...]
    G_hint: float

    @property
    def L_max(self) -> float:
        return max(self.L_blocks)


def estimate_constants(
    seq: QuadraticSequence,
    partition: BlockPartition,
    sample_ts: Optional[Sequence[int]] = None,
) -> Constants:
    """Curvature constants from eigenvalues of the sampled ``Q_t`` (all t by default).

    ``G_hint`` is the largest gradient norm at the origin, ``max_t |b|`` for
    this family, a cheap scale for the gradient bound.
    """
    ts = list(range(1, seq.T + 1) if sample_ts is None else sample_ts)
    mu, L, G0 = math.inf, 0.0, 0.0
    L_blocks = np.zeros(partition.P)
    for start in range(0, len(ts), 512):
        chunk = ts[start:start + 512]
        Qs = np.stack([seq.matrix(t) for t in chunk])
        ev = np.linalg.eigvalsh(Qs)
        mu, L = min(mu, ev[:, 0].min()), max(L, ev[:, -1].max())
        for i in range(1, partition.P + 1):
            sl = partition.slice(i)
            top = np.linalg.eigvalsh(Qs[:, sl, sl])[:, -1].max()
            L_blocks[i - 1] = max(L_blocks[i - 1], top)
        zero = np.zeros(seq.n)
        G0 = max(G0, max(float(np.linalg.norm(seq.gradient(t, zero))) for t in chunk))
    return Constants(float(mu), float(L), tuple(float(v) for v in L_blocks), G0)
