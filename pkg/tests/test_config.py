"""Experiment-config parsing: schema enforcement, defaults, type
coercion, and grid construction."""

import textwrap

import pytest

from mgtlab import config as cfg
from mgtlab import experiments


def _write(tmp_path, body, name="case.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body))
    return p


MINIMAL = """
    [params]
    tau = 0.1
    delta = 1.0

    [experiment]
    kind = roots
    n_xi = 11
"""


def test_minimal_config_parses_with_defaults(tmp_path):
    c = cfg.parse_config(_write(tmp_path, MINIMAL))
    assert c.kind == "roots"
    assert c.params.tau == 0.1
    assert c.experiment["n_xi"] == 11
    assert c.experiment["spacing"] == "log"       # default
    assert c.experiment["residual_tol"] == 1e-10  # default
    assert c.seed == 0
    assert c.output_dir == "case"                 # file stem


def test_kind_list_matches_runner_registry():
    assert set(cfg.KINDS) == set(experiments.KINDS)


def test_unknown_section_rejected(tmp_path):
    p = _write(tmp_path, MINIMAL + "\n[extras]\nfoo = 1\n")
    with pytest.raises(cfg.ConfigError, match="section"):
        cfg.parse_config(p)


def test_unknown_key_rejected(tmp_path):
    p = _write(tmp_path, MINIMAL + "banana = 3\n")
    with pytest.raises(cfg.ConfigError, match="banana"):
        cfg.parse_config(p)


def test_missing_kind_rejected(tmp_path):
    p = _write(tmp_path, "[experiment]\nseed = 1\n")
    with pytest.raises(cfg.ConfigError):
        cfg.parse_config(p)


def test_unknown_kind_rejected(tmp_path):
    p = _write(tmp_path, "[experiment]\nkind = smooth-jazz\n")
    with pytest.raises(cfg.ConfigError, match="kind"):
        cfg.parse_config(p)


def test_required_key_enforced(tmp_path):
    body = """
        [experiment]
        kind = limit-sweep
    """
    with pytest.raises(cfg.ConfigError, match="taus"):
        cfg.parse_config(_write(tmp_path, body))


def test_tuple_and_bool_coercion(tmp_path):
    body = """
        [experiment]
        kind = limit-sweep
        taus = 0.1, 0.05, 0.025
        require_monotone = false
        dims = 1, 2
    """
    c = cfg.parse_config(_write(tmp_path, body))
    assert c.experiment["taus"] == (0.1, 0.05, 0.025)
    assert c.experiment["require_monotone"] is False
    assert c.experiment["dims"] == (1, 2)


def test_grid_section_and_build(tmp_path):
    body = """
        [grid]
        backend = torus
        dim = 2
        points_per_dim = 16
        box_length = 6.0

        [experiment]
        kind = jmgt-run
    """
    c = cfg.parse_config(_write(tmp_path, body))
    g = c.build_grid()
    assert g.is_torus and g.dim == 2 and g.points_per_dim == 16
    # dim override for per-dimension sweeps
    body_radial = """
        [grid]
        backend = radial

        [experiment]
        kind = decay-fit
    """
    c2 = cfg.parse_config(_write(tmp_path, body_radial, "radial.ini"))
    assert c2.build_grid(dim=2).dim == 2


def test_output_dir_override(tmp_path):
    body = MINIMAL + "\n[output]\ndir = custom-name\n"
    c = cfg.parse_config(_write(tmp_path, body))
    assert c.output_dir == "custom-name"


def test_describe_schema_mentions_every_kind():
    text = cfg.describe_schema()
    for kind in cfg.KINDS:
        assert f"kind = {kind}" in text


def test_raw_preserved_for_manifest(tmp_path):
    c = cfg.parse_config(_write(tmp_path, MINIMAL))
    assert c.raw["experiment"]["kind"] == "roots"
    assert "params" in c.raw
