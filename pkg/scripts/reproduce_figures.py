"""Run the three figure configs, write artifacts and plot series, and print
the qualitative comparisons (sublinear growth, ridge effect, block count).

    python scripts/reproduce_figures.py [--out results] [--replications 20]
"""
import argparse
from pathlib import Path

from onlinecd.config import load_config
from onlinecd.experiment import emit_plot_data, run_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
FIGURES = {"fig1": "fig1_baseline.ini", "fig2": "fig2_ridge.ini", "fig3": "fig3_blocks.ini"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--replications", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    finals = {}
    for fig, name in FIGURES.items():
        cfg = load_config(CONFIGS / name)
        if args.replications is not None:
            cfg.run.replications = args.replications
        if args.seed is not None:
            cfg.problem.seed = cfg.run.seed = args.seed
        arts = run_experiment(cfg, Path(args.out) / fig)
        emit_plot_data(arts)
        finals[fig] = arts.result.results
        print(f"{fig}: {arts.out_dir}")
        for rule, rr in arts.result.results.items():
            s, d = rr.mean_static, rr.mean_dynamic
            print(f"  {rule:16s} static {s[-1]:10.4g} (avg {s[499] / 500:.4g} -> {s[-1] / len(s):.4g})"
                  f"  dynamic {d[-1]:10.4g} (avg {d[499] / 500:.4g} -> {d[-1] / len(d):.4g})")

    print("ridge 500 vs baseline, final dynamic regret:")
    for rule in finals["fig1"]:
        print(f"  {rule:16s} {finals['fig2'][rule].final_dynamic:.4g} vs {finals['fig1'][rule].final_dynamic:.4g}")
    print("100 vs 20 blocks, final static regret:")
    for rule in finals["fig1"]:
        print(f"  {rule:16s} {finals['fig3'][rule].final_static:.4g} vs {finals['fig1'][rule].final_static:.4g}")


if __name__ == "__main__":
    main()
