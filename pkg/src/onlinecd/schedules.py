"""Stepsize schedules alpha_t.

All schedules are pure functions of ``t`` and their parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

KINDS = ("doubling", "inv_sqrt", "strongly_convex", "path_length", "constant")


class ZeroStepsizeError(ValueError):
    pass


def _check_t(t: int) -> None:
    if t < 1:
        raise ValueError(f"stepsizes are defined for t >= 1, got {t}")


def doubling_stepsize(t: int) -> float:
    """1/sqrt(2^q) on the epoch 2^q <= t <= 2^(q+1) - 1."""
    _check_t(t)
    q = int(t).bit_length() - 1
    return 1.0 / math.sqrt(2.0**q)


def inv_sqrt_stepsize(t: int) -> float:
    _check_t(t)
    return 1.0 / math.sqrt(t)


def strongly_convex_stepsize(t: int, mu: float, scale: float = 1.0) -> float:
    _check_t(t)
    if mu <= 0 or scale <= 0:
        raise ValueError("mu and scale must be positive")
    return scale / (mu * t)


def path_length_stepsize(C_T: float, T: int) -> float:
    if T < 1:
        raise ValueError("T must be >= 1")
    if C_T < 0:
        raise ValueError("path length must be nonnegative")
    if C_T == 0:
        raise ZeroStepsizeError("path length is zero, sqrt(C_T/T) would be a zero stepsize")
    return math.sqrt(C_T / T)


def constant_stepsize(alpha: float) -> float:
    if not alpha > 0:
        raise ValueError(f"constant stepsize must be positive, got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class Schedule:
    """A stepsize rule ``t -> alpha_t``.

    Build with the classmethods. ``scale`` distinguishes alpha_t = P/(mu t)
    (random rule) from alpha_t = 1/(mu t) (deterministic rules).
    """

    kind: str
    alpha: Optional[float] = None
    mu: Optional[float] = None
    scale: float = 1.0
    C_T: Optional[float] = None
    T: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        # validate parameters eagerly
        self(1)

    @classmethod
    def doubling(cls) -> "Schedule":
        return cls("doubling")

    @classmethod
    def inv_sqrt(cls) -> "Schedule":
        return cls("inv_sqrt")

    @classmethod
    def strongly_convex(cls, mu: float, scale: float = 1.0) -> "Schedule":
        return cls("strongly_convex", mu=float(mu), scale=float(scale))

    @classmethod
    def path_length(cls, C_T: float, T: int, surrogate: bool = False) -> "Schedule":
        """sqrt(C_T / T); in surrogate mode a zero estimate is floored at 1/T."""
        if surrogate and C_T == 0:
            C_T = 1.0 / T
        return cls("path_length", C_T=float(C_T), T=int(T))

    @classmethod
    def constant(cls, alpha: float) -> "Schedule":
        return cls("constant", alpha=float(alpha))

    def __call__(self, t: int) -> float:
        if self.kind == "doubling":
            return doubling_stepsize(t)
        if self.kind == "inv_sqrt":
            return inv_sqrt_stepsize(t)
        if self.kind == "strongly_convex":
            return strongly_convex_stepsize(t, self.mu, self.scale)
        _check_t(t)
        if self.kind == "path_length":
            return path_length_stepsize(self.C_T, self.T)
        return constant_stepsize(self.alpha)

    def values(self, T: int) -> np.ndarray:
        return np.array([self(t) for t in range(1, T + 1)])

    def total(self, T: int) -> float:
        """Exact sum of alpha_1..alpha_T (fsum)."""
        return math.fsum(self(t) for t in range(1, T + 1))
