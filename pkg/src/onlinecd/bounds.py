"""Evaluators for the regret bounds of online coordinate descent.

Every evaluator returns a :class:`BoundReport`. Hypotheses are checked
explicitly; an infeasible report lists the failed conditions and carries
no value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .problems import ProblemSequence
from .schedules import Schedule

SQRT2 = math.sqrt(2.0)


@dataclass
class BoundReport:
    name: str
    value: Optional[float]
    constants: dict = field(default_factory=dict)
    hypothesis_violations: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.hypothesis_violations

    def holds(self, regret: float) -> Optional[bool]:
        return None if self.value is None else bool(regret <= self.value)


def _report(name, value, constants, violations):
    if violations:
        return BoundReport(name, None, constants, violations)
    if not math.isfinite(value):
        return BoundReport(name, None, constants, [f"bound evaluates to {value}"])
    return BoundReport(name, float(value), constants, [])


def _positive(violations, **kw):
    for k, v in kw.items():
        if not v > 0:
            violations.append(f"{k} must be positive, got {v}")


def bound_static_convex_random(G: float, R: float, P: int, T: int) -> BoundReport:
    """(B1 + B2) sqrt(T) for the random rule with the doubling schedule."""
    bad = []
    _positive(bad, P=P, T=T)
    B1 = P * R**2 / 2
    B2 = SQRT2 * G**2 / (2 * (SQRT2 - 1) * P)
    return _report("static_convex_random", (B1 + B2) * math.sqrt(T), {"B1": B1, "B2": B2}, bad)


def bound_static_sc(G: float, mu: float, T: int, factor: int = 1) -> BoundReport:
    """factor * G^2/(2 mu) (1 + log T): factor 1 for the random rule with
    alpha_t = P/(mu t), factor 3 for the deterministic rules with 1/(mu t)."""
    bad = []
    _positive(bad, mu=mu, T=T)
    if factor not in (1, 3):
        bad.append(f"factor must be 1 or 3, got {factor}")
    value = factor * G**2 / (2 * mu) * (1 + math.log(T)) if not bad else math.nan
    return _report(f"static_sc_x{factor}", value, {}, bad)


def bound_static_ogd_convex(G: float, R: float, T: int) -> BoundReport:
    """Full-gradient baseline with alpha_t = 1/sqrt(t): R^2 sqrt(T)/2 + (sqrt(T) - 1/2) G^2."""
    bad = []
    _positive(bad, T=T)
    rt = math.sqrt(T)
    return _report("static_ogd_convex", R**2 * rt / 2 + (rt - 0.5) * G**2, {}, bad)


def bound_static_convex_det(G: float, R: float, T: int) -> BoundReport:
    """Cyclic / Gauss-Southwell with alpha_t = 1/sqrt(t): baseline plus 2 G^2 sqrt(T)."""
    base = bound_static_ogd_convex(G, R, T)
    if not base.feasible:
        return BoundReport("static_convex_det", None, {}, base.hypothesis_violations)
    return _report("static_convex_det", base.value + 2 * G**2 * math.sqrt(T), {}, [])


def bound_dynamic_convex(G: float, R: float, P: int, C_T: float, T: int,
                         deterministic: bool = False) -> BoundReport:
    """Dynamic regret bound for convex costs with alpha = sqrt(C_T/T).

    The random form divides by sqrt(C_T); the deterministic form is the
    full-gradient bound lifted by G^2 sqrt(C_T T).
    """
    bad = []
    _positive(bad, P=P, T=T)
    rt = math.sqrt(T)
    if deterministic:
        if C_T < 0:
            bad.append(f"C_T must be nonnegative, got {C_T}")
        value = R**2 * rt / 2 + (rt - 0.5) * G**2 + 2 * G**2 * math.sqrt(max(C_T, 0) * T)
        return _report("dynamic_convex_det", value, {}, bad)
    if not C_T > 0:
        bad.append(f"C_T must be positive for the random form, got {C_T}")
        return _report("dynamic_convex_random", math.nan, {}, bad)
    rc = math.sqrt(C_T)
    value = (5 * R**2 / (2 * rc) + R * P * rc) * rt + rc * G**2 / (2 * P) * rt
    return _report("dynamic_convex_random", value, {}, bad)


def bound_dynamic_convex_ogd(G: float, R: float, C_T: float, T: int) -> BoundReport:
    """Full-gradient baseline with alpha = sqrt(C_T/T)."""
    bad = []
    if not C_T > 0:
        bad.append(f"C_T must be positive, got {C_T}")
        return _report("dynamic_convex_ogd", math.nan, {}, bad)
    rc, rt = math.sqrt(C_T), math.sqrt(T)
    return _report("dynamic_convex_ogd", (5 * R**2 / (2 * rc) + R * rc) * rt + rc * G**2 / 2 * rt, {}, bad)


def bound_dynamic_sc_random(G: float, mu: float, L: float, P: int, alpha: float,
                            C_T: float, C1: float) -> BoundReport:
    """G/(alpha mu - e) (C_T + C1) for the random rule with a constant stepsize."""
    bad = []
    _positive(bad, mu=mu, L=L, P=P, alpha=alpha)
    if bad:
        return _report("dynamic_sc_random", math.nan, {}, bad)
    limit = 2 / (P * (mu + L))
    if alpha > limit:
        bad.append(f"alpha={alpha} exceeds 2/(P(mu+L))={limit}")
    radicand = 1 - 2 * alpha * mu / P + (alpha * mu) ** 2
    e = math.sqrt(max(radicand, 0.0)) - 1 + alpha * mu
    margin = alpha * mu - e
    if not margin > 0:
        bad.append(f"alpha*mu - e = {margin} is not positive")
    value = G / margin * (C_T + C1) if not bad else math.nan
    return _report("dynamic_sc_random", value, {"e": e, "alpha_mu_minus_e": margin}, bad)


def bound_dynamic_sc_gs(G: float, mu: float, L: float, L_max: float, P: int, alpha: float,
                        C_T: float, C1: float) -> BoundReport:
    """(G/B4)(C_T + C1) for single-step Gauss-Southwell with a constant stepsize."""
    bad = []
    _positive(bad, mu=mu, L=L, L_max=L_max, P=P, alpha=alpha)
    if bad:
        return _report("dynamic_sc_gs", math.nan, {}, bad)
    B3 = 1 / mu - 1 / L
    consts = {"B3": B3}
    if mu == L:
        if not alpha < 2 / L_max:
            bad.append(f"alpha={alpha} must be below 2/L_max={2 / L_max}")
    else:
        disc = 1 - 4 * B3 * P * L_max
        if not P < 1 / (4 * B3 * L_max):
            bad.append(f"P={P} must be below 1/(4 B3 L_max)={1 / (4 * B3 * L_max)}")
        else:
            lo, hi = (1 - math.sqrt(disc)) / L_max, (1 + math.sqrt(disc)) / L_max
            consts.update(alpha_low=lo, alpha_high=hi)
            if not lo < alpha < hi:
                bad.append(f"alpha={alpha} outside the open interval ({lo}, {hi})")
    radicand = L * (1 / mu - (2 * alpha - alpha**2 * L_max) / (2 * P))
    consts["radicand"] = radicand
    if radicand < 0:
        bad.append(f"radicand {radicand} under the square root of B4 is negative")
        return _report("dynamic_sc_gs", math.nan, consts, bad)
    B4 = 1 - math.sqrt(radicand)
    consts["B4"] = B4
    if not B4 > 0:
        bad.append(f"B4={B4} is not positive")
    value = G / B4 * (C_T + C1) if not bad else math.nan
    return _report("dynamic_sc_gs", value, consts, bad)


def descent_coefficient(alpha: float, L: float, L_max: float, P: int, variant: str) -> float:
    """A (cyclic) or A-bar (Gauss-Southwell) of the multi-step contraction."""
    gain = alpha - alpha**2 * L_max / 2
    if variant == "cyclic":
        return gain / (2 * (1 + alpha**2 * L**2 * P))
    if variant == "gs":
        return gain / P
    raise ValueError(f"variant must be 'cyclic' or 'gs', got {variant!r}")


def contraction_factor(mu: float, L: float, L_max: float, P: int, alpha: float, k: int,
                       variant: str) -> float:
    """B5 (cyclic) or B6 (Gauss-Southwell), evaluated in the log domain.

    Returns inf when the base 1 - 2 mu A is nonpositive with a negative
    exponent, and 0 when the base is 0 with a positive exponent.
    """
    A = descent_coefficient(alpha, L, L_max, P, variant)
    base = 1 - 2 * mu * A
    expo = (k + 1 - P) / (2 * P)
    log_pre = 0.5 * math.log(L / mu) + (P - 1) * math.log1p(alpha * L_max)
    if base <= 0:
        if expo > 0:
            return 0.0
        if expo == 0:
            return math.exp(log_pre)
        return math.inf
    log_b = log_pre + expo * math.log(base)
    return 0.0 if log_b < -745 else math.exp(min(log_b, 709.0))


def _multistep_checks(mu, L, L_max, P, alpha, variant):
    bad = []
    _positive(bad, mu=mu, L=L, L_max=L_max, P=P, alpha=alpha)
    if bad:
        return bad, math.nan
    if not alpha < 2 / L_max:
        bad.append(f"alpha={alpha} must be below 2/L_max={2 / L_max}")
    base = 1 - 2 * mu * descent_coefficient(alpha, L, L_max, P, variant)
    # base == 0 is the exact-minimization boundary and still contracts
    if not 0 <= base < 1:
        bad.append(f"1 - 2 mu A = {base} is outside [0, 1)")
    return bad, base


def smallest_k(mu: float, L: float, L_max: float, P: int, alpha: float, variant: str,
               k_max: int = 10**9) -> int:
    """Least k >= 1 with contraction factor below 1 (monotone bisection)."""
    bad, _ = _multistep_checks(mu, L, L_max, P, alpha, variant)
    if bad:
        raise ValueError("; ".join(bad))

    def ok(k):
        return contraction_factor(mu, L, L_max, P, alpha, k, variant) < 1

    if ok(1):
        return 1
    hi = 2
    while not ok(hi):
        hi *= 2
        if hi > k_max:
            raise ValueError(f"no k <= {k_max} makes the contraction factor below 1")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def bound_dynamic_multistep(G: float, mu: float, L: float, L_max: float, P: int, alpha: float,
                            k: int, C_T: float, C1: float, variant: str = "cyclic") -> BoundReport:
    """G/(1 - B)(C_T + C1) with B = B5 (cyclic) or B6 (Gauss-Southwell), k inner steps."""
    name = f"dynamic_multistep_{variant}"
    bad, base = _multistep_checks(mu, L, L_max, P, alpha, variant)
    if k < 1:
        bad.append(f"k must be >= 1, got {k}")
    if bad:
        return _report(name, math.nan, {"base": base}, bad)
    A = descent_coefficient(alpha, L, L_max, P, variant)
    B = contraction_factor(mu, L, L_max, P, alpha, k, variant)
    label = "B5" if variant == "cyclic" else "B6"
    consts = {"A" if variant == "cyclic" else "A_bar": A, label: B, "base": base}
    if not B < 1:
        bad.append(f"{label}={B} is not below 1 for k={k}")
    value = G / (1 - B) * (C_T + C1) if not bad else math.nan
    return _report(name, value, consts, bad)


def prop51_lift(base_bound: float, G: float, schedule: Schedule, T: int,
                name: str = "lifted") -> BoundReport:
    """Deterministic-rule bound from a full-gradient bound: base + G^2 sum_t alpha_t."""
    total = schedule.total(T)
    return _report(name, base_bound + G**2 * total, {"stepsize_sum": total}, [])


def initial_gap(x1: np.ndarray, x1_star: np.ndarray) -> float:
    """C1 = |x_1 - x_1*| - |x_1* - x_0*| under the convention x_0* = x_1*."""
    return float(np.linalg.norm(np.asarray(x1) - np.asarray(x1_star)))


def empirical_constants_from_traces(traces: Iterable, seq: ProblemSequence,
                                    comparator: np.ndarray) -> tuple[float, float]:
    """(max_t |grad f_t(x_t)|, max_t |x_t - x*|) over all traces."""
    G = R = 0.0
    comparator = np.asarray(comparator, dtype=float)
    for tr in traces:
        for t in range(1, tr.T + 1):
            G = max(G, float(np.linalg.norm(seq.gradient(t, tr.xs[t - 1]))))
        R = max(R, float(np.linalg.norm(tr.xs - comparator, axis=1).max()))
    return G, R
