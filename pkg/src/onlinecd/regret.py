"""Exact static and dynamic regret, path length and Monte-Carlo expectations."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .core import BlockPartition, Trace
from .engine import run_online
from .problems import ProblemSequence, QuadraticSequence, spd_solve
from .schedules import Schedule


class ConvergenceError(RuntimeError):
    pass


@dataclass
class RegretReport:
    static_series: np.ndarray
    dynamic_series: np.ndarray
    C_T: float
    x_star: np.ndarray
    minimizers: np.ndarray

    @property
    def T(self) -> int:
        return len(self.static_series)

    @property
    def time_avg_static(self) -> np.ndarray:
        return self.static_series / np.arange(1, self.T + 1)

    @property
    def time_avg_dynamic(self) -> np.ndarray:
        return self.dynamic_series / np.arange(1, self.T + 1)


@dataclass
class McRegretReport:
    replications: int
    mean_static: np.ndarray
    mean_dynamic: np.ndarray
    stderr_static: np.ndarray
    stderr_dynamic: np.ndarray
    seeds: list
    reports: list
    traces: list


def offline_static_optimum(seq: ProblemSequence, T: Optional[int] = None,
                           tol: float = 1e-9) -> np.ndarray:
    """argmin_x sum_{t<=T} f_t(x).

    Quadratics are solved in closed form from (sum Q_t) x = T b. Other
    sequences are minimized with BFGS; ConvergenceError is raised if the
    gradient of the sum stays above ``tol`` relative to its value at 0.
    """
    T = seq.T if T is None else T
    if T > seq.T:
        raise ValueError(f"T={T} exceeds the horizon {seq.T}")
    if isinstance(seq, QuadraticSequence):
        M = np.zeros((seq.n, seq.n))
        for t in range(1, T + 1):
            M += seq.matrix(t)
        return spd_solve(M, T * seq.b)

    def fun(x):
        vals, grads = zip(*(seq.value_and_gradient(t, x) for t in range(1, T + 1)))
        return math.fsum(vals), np.sum(grads, axis=0)

    x0 = np.zeros(seq.n)
    scale = max(1.0, float(np.linalg.norm(fun(x0)[1])))
    res = optimize.minimize(fun, x0, jac=True, method="BFGS",
                            options={"gtol": tol * scale, "maxiter": 100_000})
    gnorm = float(np.linalg.norm(fun(res.x)[1]))
    if gnorm > tol * scale * math.sqrt(seq.n):
        raise ConvergenceError(f"gradient norm {gnorm:.3g} above tolerance: {res.message}")
    return res.x


def comparator_costs(seq: ProblemSequence, x: np.ndarray, T: int) -> np.ndarray:
    return np.array([seq.value(t, x) for t in range(1, T + 1)])


def static_regret(trace: Trace, seq: ProblemSequence, x_star: np.ndarray) -> np.ndarray:
    """Cumulative sum of f_t(x_t) - f_t(x*)."""
    return np.cumsum(trace.costs - comparator_costs(seq, x_star, trace.T))


def minimizer_costs(seq: ProblemSequence, minimizers: np.ndarray) -> np.ndarray:
    return np.array([seq.value(t, m) for t, m in enumerate(minimizers, start=1)])


def dynamic_regret(trace: Trace, seq: ProblemSequence, minimizers: np.ndarray,
                   opt_costs: Optional[np.ndarray] = None) -> np.ndarray:
    """Cumulative sum of f_t(x_t) - f_t(x_t*)."""
    if opt_costs is None:
        opt_costs = minimizer_costs(seq, minimizers[: trace.T])
    return np.cumsum(trace.costs - opt_costs[: trace.T])


def all_minimizers(seq: ProblemSequence, T: Optional[int] = None) -> np.ndarray:
    T = seq.T if T is None else T
    return np.array([seq.minimizer(t) for t in range(1, T + 1)])


def path_length(minimizers: np.ndarray, x0_star: Optional[np.ndarray] = None) -> float:
    """sum_t |x_t* - x_{t-1}*| with x_0* := x_1* unless given."""
    minimizers = np.asarray(minimizers, dtype=float)
    first = minimizers[0] if x0_star is None else np.asarray(x0_star, dtype=float)
    steps = np.diff(np.vstack([first[None, :], minimizers]), axis=0)
    return math.fsum(np.linalg.norm(steps, axis=1))


@dataclass
class Comparators:
    """Trace-independent quantities shared by every run on one problem."""

    x_star: np.ndarray
    minimizers: np.ndarray
    static_costs: np.ndarray
    opt_costs: np.ndarray
    C_T: float

    @classmethod
    def compute(cls, seq: ProblemSequence, T: Optional[int] = None) -> "Comparators":
        T = seq.T if T is None else T
        x_star = offline_static_optimum(seq, T)
        mins = all_minimizers(seq, T)
        return cls(x_star, mins, comparator_costs(seq, x_star, T), minimizer_costs(seq, mins),
                   path_length(mins))


def regret_report(trace: Trace, seq: ProblemSequence, comp: Optional[Comparators] = None) -> RegretReport:
    if comp is None:
        comp = Comparators.compute(seq, trace.T)
    T = trace.T
    return RegretReport(
        static_series=np.cumsum(trace.costs - comp.static_costs[:T]),
        dynamic_series=np.cumsum(trace.costs - comp.opt_costs[:T]),
        C_T=comp.C_T,
        x_star=comp.x_star,
        minimizers=comp.minimizers,
    )


def _replicate(args):
    seq, rule, sched, T, x0, partition, seed = args
    return run_online(seq, rule, sched, T, x0, partition, seed=seed)


def run_replications(seq, rule, sched, T, x0, partition, seeds, workers: int = 1) -> list:
    """Independent traces, one per seed, returned in seed order."""
    jobs = [(seq, rule, sched, T, x0, partition, s) for s in seeds]
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) == 1:
        return [_replicate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_replicate, jobs))


def centered_mean(rows: np.ndarray) -> np.ndarray:
    # shifting by the first row keeps the mean of identical rows exact
    return rows[0] + (rows - rows[0]).mean(axis=0)


def centered_stderr(rows: np.ndarray) -> np.ndarray:
    """Standard error of the column means (ddof=1); exactly 0 for identical rows."""
    dev = rows - rows[0]
    return dev.std(axis=0, ddof=1) / math.sqrt(len(rows))


def expected_regret_mc(
    seq: ProblemSequence,
    sched: Schedule,
    T: int,
    x0,
    replications: int,
    base_seed: int,
    rule: str = "random",
    partition: Optional[BlockPartition] = None,
    comp: Optional[Comparators] = None,
    workers: int = 1,
) -> McRegretReport:
    """Pointwise mean and standard error of both regret series over
    replications seeded ``base_seed + r``."""
    if replications < 2:
        raise ValueError("a Monte-Carlo estimate needs at least 2 replications")
    if comp is None:
        comp = Comparators.compute(seq, T)
    seeds = [base_seed + r for r in range(replications)]
    traces = run_replications(seq, rule, sched, T, x0, partition, seeds, workers)
    reports = [regret_report(tr, seq, comp) for tr in traces]
    S = np.array([r.static_series for r in reports])
    D = np.array([r.dynamic_series for r in reports])
    return McRegretReport(
        replications=replications,
        mean_static=centered_mean(S),
        mean_dynamic=centered_mean(D),
        stderr_static=centered_stderr(S),
        stderr_dynamic=centered_stderr(D),
        seeds=seeds,
        reports=reports,
        traces=traces,
    )
