"""Experiment configuration: a flat, sectioned key-value text format.

Example::

    [problem]
    n = 20
    T = 5000
    seed = 1
    variation = fast

    [partition]
    blocks = 20

    [algorithm]
    rules = random, cyclic, gauss_southwell

    [schedule]
    kind = constant
    alpha = 0.001

    [run]
    replications = 20

Every key has a declared type; lists are comma-separated. Unknown keys,
missing required keys and type mismatches raise :class:`ConfigError` with
the offending section, key and line.
"""
from __future__ import annotations

import configparser
from dataclasses import MISSING, dataclass, field, fields
from typing import Optional, Union

from .core import BlockPartition, make_partition, uniform_partition
from .engine import RULES
from .schedules import KINDS

BOUND_EVALUATORS = {
    # name: (rules it applies to, schedule kind it assumes, regret kind)
    "static_convex_random": (("random",), "doubling", "static"),
    "static_sc": (("random",), "strongly_convex", "static"),
    "static_convex_det": (("cyclic", "gauss_southwell"), "inv_sqrt", "static"),
    "static_sc_det": (("cyclic", "gauss_southwell"), "strongly_convex", "static"),
    "dynamic_convex_random": (("random",), "path_length", "dynamic"),
    "dynamic_convex_det": (("cyclic", "gauss_southwell"), "path_length", "dynamic"),
    "dynamic_sc_random": (("random",), "constant", "dynamic"),
    "dynamic_sc_gs": (("gauss_southwell",), "constant", "dynamic"),
    "dynamic_multistep_cyclic": (("cyclic",), "constant", "dynamic"),
    "dynamic_multistep_gs": (("gauss_southwell",), "constant", "dynamic"),
}


class ConfigError(ValueError):
    pass


@dataclass
class ProblemConfig:
    n: int
    T: int
    seed: int
    variation: str = "fast"
    ridge: Optional[float] = None


@dataclass
class PartitionConfig:
    sizes: Optional[list] = None
    blocks: Optional[int] = None

    def build(self, n: int) -> BlockPartition:
        if self.sizes is not None:
            return make_partition(n, self.sizes)
        return uniform_partition(n, n if self.blocks is None else self.blocks)


@dataclass
class AlgorithmConfig:
    rules: list
    k: int = 1
    start_block: Optional[int] = None


@dataclass
class ScheduleConfig:
    kind: str
    alpha: Optional[float] = None
    mu: Union[float, str, None] = None
    scale: float = 1.0
    C_T: Union[float, str, None] = None
    surrogate: bool = False


@dataclass
class RunConfig:
    replications: int = 1
    seed: Optional[int] = None
    x0: Union[str, list] = "zero"
    out: str = "results"
    workers: int = 0


@dataclass
class BoundsConfig:
    evaluators: list = field(default_factory=list)
    source: str = "empirical"
    G: Optional[float] = None
    R: Optional[float] = None
    slack: float = 1.1
    strict: bool = False


@dataclass
class ExperimentConfig:
    problem: ProblemConfig
    algorithm: AlgorithmConfig
    schedule: ScheduleConfig
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    run: RunConfig = field(default_factory=RunConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)

    @property
    def random_seed(self) -> int:
        return self.problem.seed if self.run.seed is None else self.run.seed

    def replication_seeds(self, rule: str) -> list:
        if rule != "random":
            return [None]
        return [self.random_seed + r for r in range(self.run.replications)]


# value types: int, float, str, bool, "ints", "strs", "float|keyword", "zero|floats"
SCHEMA = {
    "problem": (ProblemConfig, {"n": "int", "T": "int", "seed": "int", "variation": "str", "ridge": "float"}),
    "partition": (PartitionConfig, {"sizes": "ints", "blocks": "int"}),
    "algorithm": (AlgorithmConfig, {"rules": "strs", "k": "int", "start_block": "int"}),
    "schedule": (ScheduleConfig, {"kind": "str", "alpha": "float", "mu": "float|estimate",
                                  "scale": "float", "C_T": "float|oracle", "surrogate": "bool"}),
    "run": (RunConfig, {"replications": "int", "seed": "int", "x0": "zero|floats",
                        "out": "str", "workers": "int"}),
    "bounds": (BoundsConfig, {"evaluators": "strs", "source": "str", "G": "float", "R": "float",
                              "slack": "float", "strict": "bool"}),
}
REQUIRED_SECTIONS = ("problem", "algorithm", "schedule")


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None:
            name = line.split("=", 1)[0].strip()
            if name == key:
                return lineno
    return None


def _where(text, section, key=None):
    line = _line_of(text, section, key)
    loc = f"[{section}]" + (f" {key}" if key else "")
    return f"{loc} (line {line})" if line else loc


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "str":
        if not raw:
            raise ValueError("empty string")
        return raw
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "ints":
        return [int(v) for v in raw.split(",") if v.strip()]
    if kind == "strs":
        return [v.strip() for v in raw.split(",") if v.strip()]
    if kind.startswith("float|"):
        keyword = kind.split("|", 1)[1]
        return keyword if raw == keyword else float(raw)
    if kind == "zero|floats":
        return "zero" if raw == "zero" else [float(v) for v in raw.split(",") if v.strip()]
    raise AssertionError(kind)


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    sections = {}
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section {_where(text, name)}")
        cls, types = SCHEMA[name]
        values = {}
        for key, raw in parser.items(name):
            if key not in types:
                raise ConfigError(f"unknown key {_where(text, name, key)}")
            try:
                values[key] = _convert(types[key], raw)
            except ValueError as exc:
                raise ConfigError(f"{_where(text, name, key)}: expected {types[key]}, {exc}") from exc
        required = [f.name for f in fields(cls)
                    if f.default is MISSING and f.default_factory is MISSING]
        missing = [k for k in required if k not in values]
        if missing:
            raise ConfigError(f"missing required key(s) {missing} in {_where(text, name)}")
        sections[name] = cls(**values)
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            raise ConfigError(f"missing required section [{name}]")
    cfg = ExperimentConfig(**sections)
    if cfg.run.seed is None:
        cfg.run.seed = cfg.problem.seed
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    p, a, s, r, b = cfg.problem, cfg.algorithm, cfg.schedule, cfg.run, cfg.bounds
    if p.n < 1 or p.T < 1:
        raise ConfigError("[problem] n and T must be positive")
    if p.variation not in ("fast", "slow"):
        raise ConfigError(f"[problem] variation must be fast or slow, got {p.variation!r}")
    if p.ridge is not None and p.ridge < 0:
        raise ConfigError("[problem] ridge must be nonnegative")
    if cfg.partition.sizes is not None and cfg.partition.blocks is not None:
        raise ConfigError("[partition] give either sizes or blocks, not both")
    try:
        part = cfg.partition.build(p.n)
    except ValueError as exc:
        raise ConfigError(f"[partition] {exc}") from exc
    if not a.rules:
        raise ConfigError("[algorithm] rules is empty")
    for rule in a.rules:
        if rule not in RULES:
            raise ConfigError(f"[algorithm] unknown rule {rule!r}, expected one of {RULES}")
    if len(set(a.rules)) != len(a.rules):
        raise ConfigError("[algorithm] duplicate rules")
    if a.k < 1:
        raise ConfigError("[algorithm] k must be >= 1")
    if a.k > 1 and set(a.rules) - {"cyclic", "gauss_southwell"}:
        raise ConfigError("[algorithm] k > 1 is only defined for cyclic and gauss_southwell")
    if a.start_block is not None and not 1 <= a.start_block <= part.P:
        raise ConfigError(f"[algorithm] start_block must lie in 1..{part.P}")
    if s.kind not in KINDS:
        raise ConfigError(f"[schedule] unknown kind {s.kind!r}, expected one of {KINDS}")
    needs = {"constant": "alpha", "strongly_convex": "mu", "path_length": "C_T"}
    if s.kind in needs and getattr(s, needs[s.kind]) is None:
        raise ConfigError(f"[schedule] kind {s.kind} needs {needs[s.kind]}")
    if s.kind == "constant" and not s.alpha > 0:
        raise ConfigError("[schedule] alpha must be positive")
    if isinstance(s.mu, float) and not s.mu > 0:
        raise ConfigError("[schedule] mu must be positive")
    if not s.scale > 0:
        raise ConfigError("[schedule] scale must be positive")
    if isinstance(s.C_T, float) and s.C_T < 0:
        raise ConfigError("[schedule] C_T must be nonnegative")
    if r.replications < 1:
        raise ConfigError("[run] replications must be >= 1")
    if r.replications > 1 and "random" not in a.rules:
        raise ConfigError("[run] replications > 1 requires the random rule")
    if isinstance(r.x0, list) and len(r.x0) != p.n:
        raise ConfigError(f"[run] x0 has {len(r.x0)} entries, expected {p.n}")
    if r.workers < 0:
        raise ConfigError("[run] workers must be >= 0 (0 = all cores)")
    for name in b.evaluators:
        if name not in BOUND_EVALUATORS:
            raise ConfigError(f"[bounds] unknown evaluator {name!r}, expected one of {sorted(BOUND_EVALUATORS)}")
    if b.source not in ("empirical", "analytic"):
        raise ConfigError("[bounds] source must be empirical or analytic")
    if b.source == "analytic" and b.evaluators and (b.G is None or b.R is None):
        raise ConfigError("[bounds] analytic source needs G and R")
    if not b.slack >= 1:
        raise ConfigError("[bounds] slack must be >= 1")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


RUNTIME_KEYS = (("run", "out"), ("run", "workers"))


def serialize_config(cfg: ExperimentConfig, include_runtime: bool = True) -> str:
    """Text form with every default resolved; ``parse_config`` inverts it.

    ``include_runtime=False`` drops the output directory and worker count,
    which never change the results.
    """
    out = []
    for name, (cls, types) in SCHEMA.items():
        section = getattr(cfg, name)
        lines = [f"{k} = {_fmt(getattr(section, k))}" for k in types
                 if getattr(section, k) is not None and getattr(section, k) != []
                 and (include_runtime or (name, k) not in RUNTIME_KEYS)]
        out.append(f"[{name}]\n" + "\n".join(lines) + "\n")
    return "\n".join(out)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
