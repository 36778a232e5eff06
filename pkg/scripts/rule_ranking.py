"""Rank the three selection rules over many problem seeds.

    python scripts/rule_ranking.py [--seeds 20] [--replications 20]

Prints per-seed final regrets and the median per rule; the rule with the
lowest median is ranked first.
"""
import argparse
from pathlib import Path

import numpy as np

from onlinecd.config import load_config
from onlinecd.experiment import COMPARED_RULES, competition_rank, compare_rules

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "fig1_baseline.ini"


def main():
    ap = argparse.ArgumentParser(description="median ranking of selection rules")
    ap.add_argument("--config", default=str(CONFIG))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--replications", type=int, default=20)
    args = ap.parse_args()

    static = {r: [] for r in COMPARED_RULES}
    dynamic = {r: [] for r in COMPARED_RULES}
    for seed in range(args.seeds):
        cfg = load_config(args.config)
        cfg.problem.seed = cfg.run.seed = 1000 * seed
        cfg.run.replications = args.replications
        rk = compare_rules(cfg)
        for r in COMPARED_RULES:
            static[r].append(rk.final_static[r])
            dynamic[r].append(rk.final_dynamic[r])
        print(f"seed {cfg.problem.seed:6d}  first (static): {', '.join(rk.first('static'))}")
    for label, table in (("static", static), ("dynamic", dynamic)):
        med = {r: float(np.median(v)) for r, v in table.items()}
        ranks = competition_rank(med)
        print(f"median final {label} regret:")
        for r in sorted(med, key=med.get):
            print(f"  {ranks[r]}. {r:16s} {med[r]:.4g}")


if __name__ == "__main__":
    main()
