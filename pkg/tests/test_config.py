import pytest
from hypothesis import given, settings, strategies as st

from onlinecd.config import ConfigError, parse_config, serialize_config

MINIMAL = """
[problem]
n = 4
T = 30
seed = 7

[algorithm]
rules = cyclic

[schedule]
kind = constant
alpha = 0.01
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.run.x0 == "zero"
    assert cfg.run.replications == 1
    assert cfg.problem.variation == "fast"
    assert cfg.random_seed == 7
    assert cfg.partition.build(4).P == 4


def test_replications_need_random_rule():
    with pytest.raises(ConfigError, match="random"):
        parse_config(MINIMAL + "\n[run]\nreplications = 8\n")


def test_roundtrip():
    text = MINIMAL.replace("rules = cyclic", "rules = random, gauss_southwell") + (
        "\n[partition]\nsizes = 1, 3\n[run]\nreplications = 3\nx0 = 1.0, 2.0, 0.5, -1e-3\n"
        "[bounds]\nevaluators = dynamic_sc_random\nslack = 1.25\n")
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert parse_config(serialize_config(again)) == again


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 30), T=st.integers(1, 10**5), seed=st.integers(0, 2**31),
       alpha=st.floats(1e-6, 10), reps=st.integers(1, 50), ridge=st.none() | st.floats(0, 1e3),
       kind=st.sampled_from(["constant", "doubling", "inv_sqrt", "strongly_convex", "path_length"]))
def test_roundtrip_property(n, T, seed, alpha, reps, ridge, kind):
    lines = ["[problem]", f"n = {n}", f"T = {T}", f"seed = {seed}"]
    if ridge is not None:
        lines.append(f"ridge = {ridge!r}")
    lines += ["[algorithm]", "rules = random, cyclic", "[schedule]", f"kind = {kind}", f"alpha = {alpha!r}",
              "mu = estimate", "C_T = oracle", "[run]", f"replications = {reps}"]
    cfg = parse_config("\n".join(lines))
    assert parse_config(serialize_config(cfg)) == cfg


def test_serialized_text_echoes_defaults():
    text = serialize_config(parse_config(MINIMAL))
    for piece in ("replications = 1", "x0 = zero", "seed = 7", "variation = fast", "slack = 1.1"):
        assert piece in text
    text = serialize_config(parse_config(MINIMAL), include_runtime=False)
    assert "out =" not in text and "workers =" not in text


@pytest.mark.parametrize("patch, needle", [
    (("seed = 7", "seed = seven"), "line 5"),
    (("rules = cyclic", "rules = cyclic\ncolour = red"), "unknown key [algorithm] colour (line 9)"),
    (("[schedule]", "[schedul]"), "unknown section [schedul]"),
    (("alpha = 0.01", ""), "needs alpha"),
    (("kind = constant", "kind = adagrad"), "unknown kind"),
    (("rules = cyclic", "rules = cyclic, sideways"), "unknown rule"),
    (("n = 4", "n = 0"), "positive"),
    (("T = 30\n", ""), "missing required key(s) ['T']"),
])
def test_diagnostics(patch, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace(*patch))
    assert needle in str(exc.value)


def test_missing_section():
    with pytest.raises(ConfigError, match=r"\[schedule\]"):
        parse_config(MINIMAL.split("[schedule]")[0])


def test_malformed_text():
    with pytest.raises(ConfigError):
        parse_config("n = 3\n")


@pytest.mark.parametrize("extra", [
    "[partition]\nsizes = 2, 3\n",
    "[partition]\nsizes = 2, 2\nblocks = 2\n",
    "[run]\nx0 = 1, 2\n",
    "[bounds]\nevaluators = magic\n",
    "[bounds]\nevaluators = static_sc\nsource = analytic\n",
    "[bounds]\nslack = 0.5\n",
    "[algorithm]\nk = 0\n",
])
def test_invalid_combinations(extra):
    text = MINIMAL
    if extra.startswith("[algorithm]"):
        text = text.replace("rules = cyclic", "rules = cyclic\nk = 0")
        extra = ""
    with pytest.raises(ConfigError):
        parse_config(text + "\n" + extra)


def test_multistep_only_for_deterministic_rules():
    text = MINIMAL.replace("rules = cyclic", "rules = random\nk = 3")
    with pytest.raises(ConfigError, match="k > 1"):
        parse_config(text)
    assert parse_config(MINIMAL.replace("rules = cyclic", "rules = cyclic, gauss_southwell\nk = 3")).algorithm.k == 3


def test_bool_and_keywords():
    cfg = parse_config(MINIMAL.replace("kind = constant", "kind = path_length\nC_T = oracle\nsurrogate = yes"))
    assert cfg.schedule.surrogate is True and cfg.schedule.C_T == "oracle"
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("kind = constant", "kind = constant\nsurrogate = maybe"))
