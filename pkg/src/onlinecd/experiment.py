"""Experiment runner: config in, trace CSVs, summary, manifest and plot data out.

Every output byte is a function of the config alone. Floats are written
with 17 significant digits so the files round-trip exactly.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    bound_dynamic_convex,
    bound_dynamic_multistep,
    bound_dynamic_sc_gs,
    bound_dynamic_sc_random,
    bound_static_convex_det,
    bound_static_convex_random,
    bound_static_sc,
    initial_gap,
)
from .config import BOUND_EVALUATORS, ExperimentConfig, serialize_config, validate
from .core import FULL, BlockPartition, Trace
from .engine import SelectionRule, run_online, run_online_multistep
from .problems import Constants, QuadraticSequence, estimate_constants, gen_quadratic_sequence
from .regret import Comparators, RegretReport, centered_mean, centered_stderr, regret_report, run_replications
from .schedules import Schedule

CSV_COLUMNS = ("t", "block", "stepsize", "cost", "static_regret", "dynamic_regret",
               "avg_static", "avg_dynamic")
PANELS = {"static": "static_regret", "avg_static": "avg_static",
          "dynamic": "dynamic_regret", "avg_dynamic": "avg_dynamic"}
COMPARED_RULES = ("random", "cyclic", "gauss_southwell")


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class RuleResult:
    rule: str
    seeds: list
    traces: list
    reports: list
    mean_static: np.ndarray
    mean_dynamic: np.ndarray
    G: float
    R_static: float
    R_dynamic: float

    @property
    def final_static(self) -> float:
        return float(self.mean_static[-1])

    @property
    def final_dynamic(self) -> float:
        return float(self.mean_dynamic[-1])


@dataclass
class BoundCheck:
    evaluator: str
    rule: str
    report: BoundReport
    regret: float

    @property
    def holds(self) -> Optional[bool]:
        return self.report.holds(self.regret)

    @property
    def ok(self) -> bool:
        return self.report.feasible and bool(self.holds)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seq: QuadraticSequence
    partition: BlockPartition
    schedule: Schedule
    comparators: Comparators
    C1: float
    results: dict
    checks: list = field(default_factory=list)
    constants: Optional[Constants] = None


@dataclass
class ArtifactSet:
    out_dir: Path
    csv_paths: dict
    summary_path: Path
    manifest_path: Path
    result: ExperimentResult


def initial_point(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.run.x0 == "zero":
        return np.zeros(cfg.problem.n)
    return np.array(cfg.run.x0, dtype=float)


def build_problem(cfg: ExperimentConfig) -> QuadraticSequence:
    p = cfg.problem
    return gen_quadratic_sequence(p.n, p.T, p.seed, p.variation, p.ridge)


class _LazyConstants:
    def __init__(self, seq, partition):
        self.seq, self.partition, self.value = seq, partition, None

    def get(self) -> Constants:
        if self.value is None:
            self.value = estimate_constants(self.seq, self.partition)
        return self.value


def build_schedule(cfg: ExperimentConfig, comp: Comparators, consts: _LazyConstants) -> Schedule:
    s, T = cfg.schedule, cfg.problem.T
    if s.kind == "doubling":
        return Schedule.doubling()
    if s.kind == "inv_sqrt":
        return Schedule.inv_sqrt()
    if s.kind == "strongly_convex":
        mu = consts.get().mu if s.mu == "estimate" else s.mu
        return Schedule.strongly_convex(mu, s.scale)
    if s.kind == "path_length":
        C_T = comp.C_T if s.C_T == "oracle" else s.C_T
        return Schedule.path_length(C_T, T, surrogate=s.surrogate)
    return Schedule.constant(s.alpha)


def _run_rule(cfg, rule, seq, sched, x0, partition) -> list:
    T, a = cfg.problem.T, cfg.algorithm
    if rule == "random":
        return run_replications(seq, "random", sched, T, x0, partition,
                                cfg.replication_seeds("random"), cfg.run.workers)
    start = None if a.start_block is None else a.start_block - 1
    selector = SelectionRule(rule, partition.P, start=start)
    if a.k > 1:
        return [run_online_multistep(seq, selector, sched, T, a.k, x0, partition)]
    return [run_online(seq, selector, sched, T, x0, partition)]


def _empirical(traces, seq, comp) -> tuple[float, float, float]:
    G = Rs = Rd = 0.0
    for tr in traces:
        for t in range(1, tr.T + 1):
            G = max(G, float(np.linalg.norm(seq.gradient(t, tr.xs[t - 1]))))
        Rs = max(Rs, float(np.linalg.norm(tr.xs - comp.x_star, axis=1).max()))
        Rd = max(Rd, float(np.linalg.norm(tr.xs - comp.minimizers[: tr.T], axis=1).max()))
    return G, Rs, Rd


def _evaluate(name, rule, res: ExperimentResult, consts: _LazyConstants) -> BoundReport:
    cfg = res.config
    b, s = cfg.bounds, res.schedule
    _, wanted_kind, regret_kind = BOUND_EVALUATORS[name]
    rr = res.results[rule]
    if b.source == "analytic":
        G, R = b.G, b.R
    else:
        G = rr.G * b.slack
        R = (rr.R_static if regret_kind == "static" else max(rr.R_static, rr.R_dynamic)) * b.slack
    P, T = res.partition.P, cfg.problem.T
    C_T, C1 = res.comparators.C_T, res.C1
    if name == "static_convex_random":
        rep = bound_static_convex_random(G, R, P, T)
    elif name in ("static_sc", "static_sc_det"):
        rep = bound_static_sc(G, s.mu if s.mu is not None else consts.get().mu, T,
                              1 if name == "static_sc" else 3)
    elif name == "static_convex_det":
        rep = bound_static_convex_det(G, R, T)
    elif name in ("dynamic_convex_random", "dynamic_convex_det"):
        rep = bound_dynamic_convex(G, R, P, C_T, T, deterministic=name.endswith("det"))
    else:
        c = consts.get()
        alpha = s.alpha if s.alpha is not None else math.nan
        if name == "dynamic_sc_random":
            rep = bound_dynamic_sc_random(G, c.mu, c.L, P, alpha, C_T, C1)
        elif name == "dynamic_sc_gs":
            rep = bound_dynamic_sc_gs(G, c.mu, c.L, c.L_max, P, alpha, C_T, C1)
        else:
            variant = "cyclic" if name.endswith("cyclic") else "gs"
            rep = bound_dynamic_multistep(G, c.mu, c.L, c.L_max, P, alpha, cfg.algorithm.k,
                                          C_T, C1, variant)
    rep.name = name
    rep.constants = dict(rep.constants, G=G, R=R)
    # the bound only speaks about runs that use the schedule it assumes
    if s.kind != wanted_kind:
        rep.hypothesis_violations.append(f"schedule kind {s.kind} but the bound assumes {wanted_kind}")
    if name == "static_sc" and s.scale != P:
        rep.hypothesis_violations.append(f"schedule scale {s.scale} but the bound assumes scale P={P}")
    if name == "static_sc_det" and s.scale != 1:
        rep.hypothesis_violations.append(f"schedule scale {s.scale} but the bound assumes scale 1")
    if rep.hypothesis_violations:
        rep.value = None
    return rep


def execute(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every configured rule and evaluate the requested bounds (no I/O)."""
    validate(cfg)
    seq = build_problem(cfg)
    partition = cfg.partition.build(cfg.problem.n)
    comp = Comparators.compute(seq, cfg.problem.T)
    consts = _LazyConstants(seq, partition)
    sched = build_schedule(cfg, comp, consts)
    x0 = initial_point(cfg)
    results = {}
    for rule in cfg.algorithm.rules:
        traces = _run_rule(cfg, rule, seq, sched, x0, partition)
        reports = [regret_report(tr, seq, comp) for tr in traces]
        G, Rs, Rd = _empirical(traces, seq, comp)
        results[rule] = RuleResult(
            rule=rule,
            seeds=cfg.replication_seeds(rule),
            traces=traces,
            reports=reports,
            mean_static=centered_mean(np.array([r.static_series for r in reports])),
            mean_dynamic=centered_mean(np.array([r.dynamic_series for r in reports])),
            G=G, R_static=Rs, R_dynamic=Rd,
        )
    res = ExperimentResult(cfg, seq, partition, sched, comp, initial_gap(x0, comp.minimizers[0]), results)
    for name in cfg.bounds.evaluators:
        rules, _, regret_kind = BOUND_EVALUATORS[name]
        for rule in rules:
            if rule not in results:
                continue
            rr = results[rule]
            regret = rr.final_static if regret_kind == "static" else rr.final_dynamic
            res.checks.append(BoundCheck(name, rule, _evaluate(name, rule, res, consts), regret))
    res.constants = consts.value
    return res


def trace_csv(trace: Trace, report: RegretReport) -> str:
    t = np.arange(1, trace.T + 1)
    avg_s, avg_d = report.time_avg_static, report.time_avg_dynamic
    rows = [",".join(CSV_COLUMNS)]
    for j in range(trace.T):
        block = str(int(trace.blocks[j])) if trace.blocks[j] > 0 else FULL
        rows.append(",".join([str(t[j]), block] + [fmt_float(v) for v in (
            trace.stepsizes[j], trace.costs[j], report.static_series[j],
            report.dynamic_series[j], avg_s[j], avg_d[j])]))
    return "\n".join(rows) + "\n"


def csv_name(rule: str, r: int) -> str:
    return f"trace_{rule}_r{r:03d}.csv"


def summary_text(res: ExperimentResult) -> str:
    lines = [f"C_T = {fmt_float(res.comparators.C_T)}", f"C1 = {fmt_float(res.C1)}"]
    if res.constants is not None:
        c = res.constants
        lines += [f"mu = {fmt_float(c.mu)}", f"L = {fmt_float(c.L)}", f"L_max = {fmt_float(c.L_max)}"]
    for rule, rr in res.results.items():
        lines += ["", f"[rule {rule}]", f"replications = {len(rr.traces)}",
                  f"final_static_regret = {fmt_float(rr.final_static)}",
                  f"final_dynamic_regret = {fmt_float(rr.final_dynamic)}"]
        if len(rr.traces) > 1:
            S = np.array([r.static_series[-1:] for r in rr.reports])
            D = np.array([r.dynamic_series[-1:] for r in rr.reports])
            lines += [f"stderr_static_regret = {fmt_float(centered_stderr(S)[0])}",
                      f"stderr_dynamic_regret = {fmt_float(centered_stderr(D)[0])}"]
        lines += [f"G_emp = {fmt_float(rr.G)}", f"R_emp_static = {fmt_float(rr.R_static)}",
                  f"R_emp_dynamic = {fmt_float(rr.R_dynamic)}"]
    for chk in res.checks:
        rep = chk.report
        lines += ["", f"[bound {chk.evaluator} {chk.rule}]",
                  f"feasible = {str(rep.feasible).lower()}",
                  f"value = {'none' if rep.value is None else fmt_float(rep.value)}",
                  f"regret = {fmt_float(chk.regret)}",
                  f"holds = {'none' if chk.holds is None else str(chk.holds).lower()}"]
        lines += [f"constant.{k} = {fmt_float(v)}" for k, v in sorted(rep.constants.items())]
        lines += [f"violation = {v}" for v in rep.hypothesis_violations]
    return "\n".join(lines) + "\n"


def manifest_text(cfg: ExperimentConfig, files: list) -> str:
    lines = ["toolkit = onlinecd", f"version = {__version__}",
             f"seed.problem = {cfg.problem.seed}"]
    if "random" in cfg.algorithm.rules:
        lines.append("seed.replications = " + ", ".join(str(s) for s in cfg.replication_seeds("random")))
    lines.append("files = " + ", ".join(files))
    return "\n".join(lines) + "\n\n" + serialize_config(cfg, include_runtime=False)


def write_artifacts(res: ExperimentResult, out_dir: Union[str, Path]) -> ArtifactSet:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_paths, names = {}, []
    for rule, rr in res.results.items():
        csv_paths[rule] = []
        for r, (tr, rep) in enumerate(zip(rr.traces, rr.reports)):
            name = csv_name(rule, r)
            (out / name).write_text(trace_csv(tr, rep), encoding="utf-8")
            csv_paths[rule].append(out / name)
            names.append(name)
    summary = out / "summary.txt"
    summary.write_text(summary_text(res), encoding="utf-8")
    manifest = out / "manifest.txt"
    manifest.write_text(manifest_text(res.config, names), encoding="utf-8")
    return ArtifactSet(out, csv_paths, summary, manifest, res)


def run_experiment(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None) -> ArtifactSet:
    """Run the experiment and write trace CSVs, summary.txt and manifest.txt."""
    return write_artifacts(execute(cfg), cfg.run.out if out_dir is None else out_dir)


def read_trace_csv(path: Union[str, Path]) -> dict:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    cols = {name: [r[j] for r in rows] for j, name in enumerate(CSV_COLUMNS)}
    out = {"t": np.array(cols["t"], dtype=int), "block": cols["block"]}
    for name in CSV_COLUMNS[2:]:
        out[name] = np.array(cols[name], dtype=float)
    return out


def _manifest_files(out: Path) -> list:
    manifest = out / "manifest.txt"
    if not manifest.exists():
        raise FileNotFoundError(f"no manifest.txt in {out}")
    for line in manifest.read_text(encoding="utf-8").splitlines():
        if line.startswith("files = "):
            return [f.strip() for f in line[len("files = "):].split(",") if f.strip()]
    raise ValueError(f"{manifest} lists no files")


def emit_plot_data(artifacts: Union[ArtifactSet, str, Path], dest: Union[str, Path, None] = None) -> list:
    """Two-column ``t value`` series per rule and panel, averaged over replications.

    Reads the trace CSVs listed in the manifest; a missing CSV raises
    FileNotFoundError.
    """
    out = artifacts.out_dir if isinstance(artifacts, ArtifactSet) else Path(artifacts)
    dest = out / "plotdata" if dest is None else Path(dest)
    by_rule: dict = {}
    for name in _manifest_files(out):
        path = out / name
        if not path.exists():
            raise FileNotFoundError(f"missing trace CSV {path}")
        rule = name[len("trace_"):].rsplit("_r", 1)[0]
        by_rule.setdefault(rule, []).append(read_trace_csv(path))
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for rule, tables in by_rule.items():
        t = tables[0]["t"]
        for panel, column in PANELS.items():
            values = centered_mean(np.array([tab[column] for tab in tables]))
            path = dest / f"{rule}_{panel}.dat"
            path.write_text("".join(f"{ti} {fmt_float(v)}\n" for ti, v in zip(t, values)),
                            encoding="utf-8")
            written.append(path)
    return written


@dataclass
class Ranking:
    final_static: dict
    final_dynamic: dict
    static_rank: dict
    dynamic_rank: dict

    def first(self, kind: str = "static") -> list:
        ranks = self.static_rank if kind == "static" else self.dynamic_rank
        return sorted(r for r, k in ranks.items() if k == 1)

    def text(self) -> str:
        lines = []
        for rule in self.final_static:
            lines.append(f"{rule} final_static_regret = {fmt_float(self.final_static[rule])}"
                         f" rank = {self.static_rank[rule]}")
            lines.append(f"{rule} final_dynamic_regret = {fmt_float(self.final_dynamic[rule])}"
                         f" rank = {self.dynamic_rank[rule]}")
        return "\n".join(lines) + "\n"


def competition_rank(values: dict) -> dict:
    """1 + number of strictly smaller values; exact ties share a rank."""
    return {k: 1 + sum(w < v for w in values.values()) for k, v in values.items()}


def compare_rules(cfg: ExperimentConfig) -> Ranking:
    """Run random, cyclic and Gauss-Southwell on the same problem and rank them."""
    cfg = copy.deepcopy(cfg)
    cfg.algorithm.rules = list(COMPARED_RULES)
    cfg.algorithm.k = 1
    cfg.bounds.evaluators = []
    res = execute(cfg)
    fs = {r: res.results[r].final_static for r in COMPARED_RULES}
    fd = {r: res.results[r].final_dynamic for r in COMPARED_RULES}
    return Ranking(fs, fd, competition_rank(fs), competition_rank(fd))
