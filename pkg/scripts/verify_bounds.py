"""Compare empirical regret with the theoretical bounds.

    python scripts/verify_bounds.py [--T 1024] [--replications 10] [--slack 1.1]

Each row reports the bound, the measured (mean) regret and whether the
bound's hypotheses hold. G and R are trajectory maxima times the slack.
The unit-scale convex schedules start at alpha = 1, which exceeds 2/L on
these problems, so their iterates can overflow; such rows come out
infeasible or hold only because the empirical G blows up as well.
"""
import argparse

import numpy as np

from onlinecd.bounds import (
    bound_dynamic_convex,
    bound_dynamic_multistep,
    bound_dynamic_sc_gs,
    bound_dynamic_sc_random,
    bound_static_convex_det,
    bound_static_convex_random,
    bound_static_sc,
    empirical_constants_from_traces,
    initial_gap,
    smallest_k,
)
from onlinecd.core import uniform_partition
from onlinecd.engine import run_online, run_online_multistep
from onlinecd.problems import estimate_constants, gen_quadratic_sequence
from onlinecd.regret import Comparators, expected_regret_mc, regret_report
from onlinecd.schedules import Schedule


def row(label, rep, regret):
    if not rep.feasible:
        print(f"{label:42s} infeasible: {'; '.join(rep.hypothesis_violations)}")
        return
    verdict = "holds" if regret <= rep.value else "VIOLATED"
    print(f"{label:42s} regret {regret:11.4g}  bound {rep.value:11.4g}  {verdict}")


def main():
    ap = argparse.ArgumentParser(description="empirical check of the regret bounds")
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--T", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--slack", type=float, default=1.1)
    args = ap.parse_args()
    n, T, P, k = args.n, args.T, args.n, args.slack
    x0 = np.zeros(n)
    p = uniform_partition(n, P)

    fast = gen_quadratic_sequence(n, T, args.seed)
    comp = Comparators.compute(fast)
    mc = expected_regret_mc(fast, Schedule.doubling(), T, x0, args.replications, args.seed, partition=p, comp=comp)
    G, R = empirical_constants_from_traces(mc.traces, fast, comp.x_star)
    row("random, doubling, static", bound_static_convex_random(k * G, k * R, P, T), mc.mean_static[-1])
    for rule in ("cyclic", "gauss_southwell"):
        tr = run_online(fast, rule, Schedule.inv_sqrt(), T, x0, p)
        G, R = empirical_constants_from_traces([tr], fast, comp.x_star)
        row(f"{rule}, 1/sqrt(t), static", bound_static_convex_det(k * G, k * R, T),
            regret_report(tr, fast, comp).static_series[-1])
    sched = Schedule.path_length(comp.C_T, T)
    for rule in ("cyclic", "gauss_southwell"):
        tr = run_online(fast, rule, sched, T, x0, p)
        G, R = empirical_constants_from_traces([tr], fast, comp.x_star)
        R = max(R, float(np.max(np.linalg.norm(tr.xs - comp.minimizers, axis=1))))
        row(f"{rule}, sqrt(C_T/T), dynamic", bound_dynamic_convex(k * G, k * R, P, comp.C_T, T, deterministic=True),
            regret_report(tr, fast, comp).dynamic_series[-1])

    slow = gen_quadratic_sequence(n, T, args.seed, variation="slow")
    c = estimate_constants(slow, p)
    comp = Comparators.compute(slow)
    C1 = initial_gap(x0, comp.minimizers[0])
    mc = expected_regret_mc(slow, Schedule.strongly_convex(c.mu, P), T, x0, args.replications, args.seed,
                            partition=p, comp=comp)
    G, _ = empirical_constants_from_traces(mc.traces, slow, comp.x_star)
    row("random, P/(mu t), static", bound_static_sc(k * G, c.mu, T, 1), mc.mean_static[-1])
    for rule in ("cyclic", "gauss_southwell"):
        tr = run_online(slow, rule, Schedule.strongly_convex(c.mu), T, x0, p)
        G, _ = empirical_constants_from_traces([tr], slow, comp.x_star)
        row(f"{rule}, 1/(mu t), static", bound_static_sc(k * G, c.mu, T, 3),
            regret_report(tr, slow, comp).static_series[-1])
    alpha = 2 / (P * (c.mu + c.L))
    mc = expected_regret_mc(slow, Schedule.constant(alpha), T, x0, args.replications, args.seed,
                            partition=p, comp=comp)
    G, _ = empirical_constants_from_traces(mc.traces, slow, comp.x_star)
    row("random, constant, dynamic", bound_dynamic_sc_random(k * G, c.mu, c.L, P, alpha, comp.C_T, C1),
        mc.mean_dynamic[-1])
    tr = run_online(slow, "gauss_southwell", Schedule.constant(alpha), T, x0, p)
    G, _ = empirical_constants_from_traces([tr], slow, comp.x_star)
    row("gauss_southwell, constant, dynamic", bound_dynamic_sc_gs(k * G, c.mu, c.L, c.L_max, P, alpha, comp.C_T, C1),
        regret_report(tr, slow, comp).dynamic_series[-1])
    alpha = 1 / c.L_max
    for rule, variant in (("cyclic", "cyclic"), ("gauss_southwell", "gs")):
        steps = smallest_k(c.mu, c.L, c.L_max, P, alpha, variant)
        Tm = min(T, 200)
        tr = run_online_multistep(slow, rule, Schedule.constant(alpha), Tm, steps, x0, p)
        G, _ = empirical_constants_from_traces([tr], slow, comp.x_star)
        cm = Comparators.compute(slow, Tm)
        row(f"{rule}, {steps} inner steps, dynamic (T={Tm})",
            bound_dynamic_multistep(k * G, c.mu, c.L, c.L_max, P, alpha, steps, cm.C_T, C1, variant),
            regret_report(tr, slow, cm).dynamic_series[-1])


if __name__ == "__main__":
    with np.errstate(over="ignore", invalid="ignore"):
        main()
