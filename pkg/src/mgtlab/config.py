"""Archivable experiment configs: INI files with a strict schema.

Four sections: ``[params]`` (model constants), ``[grid]`` (mode set),
``[experiment]`` (what to run and its knobs), ``[output]`` (where).
Unknown sections or keys are hard errors — silent typos are how archived
experiments rot.  Every key is documented by the schema tables below;
values are plain scalars or comma-separated lists.

Example::

    [params]
    tau = 0.1
    delta = 1.0

    [grid]
    backend = radial
    dim = 3

    [experiment]
    kind = decay-fit
    dims = 3, 1, 2
    window_min = 10
    window_max = 1000

    [output]
    dir = decay-demo
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .params import Params
from .grids import make_grid


class ConfigError(ValueError):
    """A config file violates the schema."""


# ---------------------------------------------------------------------------
# value parsers


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _str(s):
    return s.strip()


def _floats(s):
    items = [tok.strip() for tok in s.split(",") if tok.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(tok) for tok in items)


def _ints(s):
    return tuple(_int(tok) for tok in s.split(",") if tok.strip())


def _strs(s):
    items = tuple(tok.strip() for tok in s.split(",") if tok.strip())
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


def _choice(*options):
    def parse(s):
        v = s.strip()
        if v not in options:
            raise ValueError(f"expected one of {options}, got {v!r}")
        return v
    parse.options = options
    return parse


_REQUIRED = object()


# ---------------------------------------------------------------------------
# schema tables: key -> (parser, default); _REQUIRED means must be present

_PARAMS_SCHEMA = {
    "tau": (_float, 0.1),
    "delta": (_float, 1.0),
    "b_over_a": (_float, 0.0),
}

_GRID_SCHEMA = {
    "backend": (_choice("radial", "torus"), "radial"),
    "dim": (_int, 3),
    "points_per_dim": (_int, None),
    "box_length": (_float, None),
    "r_max": (_float, None),
    "nodes_per_panel": (_int, None),
    "panels": (_int, None),
    "panel_growth": (_float, None),
    "min_panel_scale": (_float, None),
}

_OUTPUT_SCHEMA = {
    "dir": (_str, None),        # default: config file stem
}

_DATA_KEYS = {
    "data": (_choice("gaussian", "band-limited-random", "compatible",
                     "incompatible"), "gaussian"),
    "width": (_float, 1.0),
    "amplitude": (_float, 1.0),
    "psi1_amplitude": (_float, 0.0),
    "defect_amplitude": (_float, 1.0),
    "defect_width": (_float, None),
    "band_limit": (_float, None),
    "normalize": (_choice("none", "peak"), "none"),
}

_EXPERIMENT_SCHEMAS = {
    "roots": {
        "xi_min": (_float, 1e-3),
        "xi_max": (_float, 1e3),
        "n_xi": (_int, 121),
        "spacing": (_choice("log", "linear"), "log"),
        "n_random": (_int, 0),
        "residual_tol": (_float, 1e-10),
        "vieta_tol": (_float, 1e-10),
        "check_asymptotics": (_bool, False),
        "asym_xi_lo": (_float, 1e-3),
        "asym_xi_hi": (_float, 1e-2),
        "asym_order_target": (_float, 3.0),
        "asym_order_tol": (_float, 0.3),
        "far_xi": (_float, 1e3),
        "far_rtol": (_float, 0.01),
    },
    "linear-run": {
        **_DATA_KEYS,
        "flow": (_choice("mgt", "kuznetsov"), "mgt"),
        "t_end": (_float, 10.0),
        "n_times": (_int, 121),
        "time_spacing": (_choice("linear", "log"), "linear"),
        "norms": (_strs, ("psi:L2", "psi_t:L2", "psi_tt:L2")),
        # reference-step rule of thumb: RK4 phase error over the run is about
        # (omega dt)^4 omega t_end / 120 with omega = sqrt((delta+tau)/tau)
        # |xi|; the defaults keep it near 1e-9 at the top of the band
        "oracle_check": (_bool, False),
        "oracle_modes": (_int, 100),
        "oracle_tol": (_float, 1e-7),
        "oracle_t_end": (_float, 10.0),
        "oracle_dt": (_float, 2.5e-4),
        "oracle_xi_min": (_float, 1e-2),
        "oracle_xi_max": (_float, 10.0),
    },
    "decay-fit": {
        **_DATA_KEYS,
        "dims": (_ints, None),          # default: the [grid] dim alone
        "t_end": (_float, 1000.0),
        "window_min": (_float, 10.0),
        "window_max": (_float, 1000.0),
        "n_times": (_int, 161),
        "rate_tol": (_float, 0.15),
        "ratio_spread_max": (_float, 10.0),
        "loghalf_tol": (_float, 0.1),
    },
    "limit-sweep": {
        "dims": (_ints, None),
        "taus": (_floats, _REQUIRED),
        "t_end": (_float, 5.0),
        "n_times": (_int, 240),
        "width": (_float, 1.0),
        "amplitude": (_float, 1.0),
        "psi1_amplitude": (_float, 0.3),
        "norms": (_strs, ("L2", "linf")),
        "order_target": (_float, 1.0),
        "l2_order_tol": (_float, 0.1),
        "linf_order_tol": (_float, 0.15),
        "energy_order_tol": (_float, 0.2),
        "require_monotone": (_bool, True),
    },
    "layer-probe": {
        **_DATA_KEYS,
        "n_window": (_int, 48),
        "rate_rtol": (_float, 0.05),
        "fast_fraction_max": (_float, 1e-10),
    },
    "energy-check": {
        "taus": (_floats, (0.1, 0.05)),
        "n_modes": (_int, 20),
        "xi_min": (_float, 0.01),
        "xi_max": (_float, 10.0),
        "t_end": (_float, 20.0),
        "margin_rtol": (_float, 1e-8),
        "plot_points": (_int, 400),
    },
    "jmgt-run": {
        "epsilon": (_float, 1e-3),
        "s": (_float, 0.6),
        "dt": (_float, None),           # default: tau/10
        "t_end": (_float, 200.0),
        "width": (_float, 6.0),
        "psi1_factor": (_float, 0.3),
        "fit_t_min": (_float, 5.0),
        "rate_tol": (_float, 0.2),
        "loghalf_tol": (_float, 0.15),
        "bounded_ratio_max": (_float, 1.1),
        "guard_factor": (_float, 1e3),
        "eps2_check": (_bool, False),
        "eps2_epsilons": (_floats, (1e-3, 5e-4)),
        "eps2_t_end": (_float, 1.0),
        "eps2_order_target": (_float, 2.0),
        "eps2_order_tol": (_float, 0.1),
    },
    "gn-check": {
        "ns": (_ints, (2, 3, 4)),
        "s_values": (_floats, (0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0,
                               1.1, 1.5, 2.0)),
        "m": (_int, 2),
        "audit_s": (_float, 0.6),
    },
    "expansion": {
        **_DATA_KEYS,
        "taus": (_floats, (0.1, 0.05)),
        "order": (_int, 2),
        "t_end": (_float, 3.0),
        "n_times": (_int, 121),
        "residual_t_min": (_float, 0.25),
        "residual_order_target": (_float, 2.0),
        "residual_order_tol": (_float, 0.2),
        "layer_check": (_bool, True),
        "n_window": (_int, 48),
        "rate_rtol": (_float, 0.05),
        "fast_fraction_max": (_float, 1e-10),
        "panel_width": (_float, 0.125),
        "nodes": (_int, 20),
    },
}

_COMMON_EXPERIMENT = {
    "kind": (_choice(*sorted(_EXPERIMENT_SCHEMAS)), _REQUIRED),
    "seed": (_int, 0),
}

KINDS = tuple(sorted(_EXPERIMENT_SCHEMAS))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully parsed and defaulted experiment description."""

    kind: str
    seed: int
    params: Params
    grid_spec: dict
    experiment: dict
    output_dir: str
    raw: dict = field(repr=False)
    path: str = ""

    def build_grid(self, dim=None):
        """Construct the configured grid, optionally overriding the
        dimension (multi-dimension experiments reuse one [grid] block)."""
        spec = dict(self.grid_spec)
        backend = spec.pop("backend", "radial")
        use_dim = int(dim if dim is not None else spec.pop("dim", 3))
        spec.pop("dim", None)
        if backend == "torus":
            return make_grid(use_dim, backend="torus",
                             points_per_dim=spec.get("points_per_dim"),
                             box_length=spec.get("box_length"))
        radial_keys = ("r_max", "nodes_per_panel", "panels",
                       "panel_growth", "min_panel_scale")
        kwargs = {k: spec[k] for k in radial_keys if spec.get(k) is not None}
        return make_grid(use_dim, backend="radial", **kwargs)


def _parse_section(cfg, name, schema, where):
    out = {}
    present = dict(cfg.items(name)) if cfg.has_section(name) else {}
    unknown = set(present) - set(schema)
    if unknown:
        raise ConfigError(
            f"{where}: unknown key(s) {sorted(unknown)} in [{name}]; "
            f"allowed: {sorted(schema)}")
    for key, (parser, default) in schema.items():
        if key in present:
            try:
                out[key] = parser(present[key])
            except ValueError as exc:
                raise ConfigError(f"{where}: [{name}] {key}: {exc}") from exc
        elif default is _REQUIRED:
            raise ConfigError(f"{where}: [{name}] is missing required "
                              f"key {key!r}")
        else:
            out[key] = default
    return out, present


def parse_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), where=str(path),
                             default_dir=path.stem)


def parse_config_text(text, *, where="<config>",
                      default_dir="experiment") -> ExperimentConfig:
    cfg = configparser.ConfigParser(interpolation=None,
                                    inline_comment_prefixes=("#", ";"))
    try:
        cfg.read_string(text, source=where)
    except configparser.Error as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    known_sections = {"params", "grid", "experiment", "output"}
    unknown = set(cfg.sections()) - known_sections
    if unknown:
        raise ConfigError(f"{where}: unknown section(s) {sorted(unknown)}; "
                          f"allowed: {sorted(known_sections)}")
    if not cfg.has_section("experiment"):
        raise ConfigError(f"{where}: missing [experiment] section")

    # two-pass on [experiment]: the kind selects the rest of the schema
    exp_raw = dict(cfg.items("experiment"))
    if "kind" not in exp_raw:
        raise ConfigError(f"{where}: [experiment] needs a 'kind' key")
    try:
        kind = _COMMON_EXPERIMENT["kind"][0](exp_raw["kind"])
    except ValueError as exc:
        raise ConfigError(f"{where}: bad kind: {exc}") from None
    schema = {**_COMMON_EXPERIMENT, **_EXPERIMENT_SCHEMAS[kind]}
    experiment, _ = _parse_section(cfg, "experiment", schema, where)
    experiment.pop("kind")
    seed = experiment.pop("seed")

    params_vals, _ = _parse_section(cfg, "params", _PARAMS_SCHEMA, where)
    grid_vals, grid_present = _parse_section(cfg, "grid", _GRID_SCHEMA, where)
    output_vals, _ = _parse_section(cfg, "output", _OUTPUT_SCHEMA, where)

    params = Params(**params_vals)

    raw = {name: dict(cfg.items(name)) for name in cfg.sections()}
    return ExperimentConfig(
        kind=kind, seed=seed, params=params, grid_spec=grid_vals,
        experiment=experiment,
        output_dir=output_vals["dir"] or default_dir,
        raw=raw, path=where)


def describe_schema(kind=None) -> str:
    """Plain-text schema listing (for --help and the README)."""
    lines = ["[params]"]
    for key, (_, default) in _PARAMS_SCHEMA.items():
        lines.append(f"  {key} (default {default})")
    lines.append("[grid]")
    for key, (_, default) in _GRID_SCHEMA.items():
        lines.append(f"  {key} (default {default})")
    lines.append("[output]")
    lines.append("  dir (default: config file stem)")
    kinds = [kind] if kind else KINDS
    for k in kinds:
        lines.append(f"[experiment] kind = {k}")
        lines.append("  seed (default 0)")
        for key, (_, default) in _EXPERIMENT_SCHEMAS[k].items():
            req = "REQUIRED" if default is _REQUIRED else f"default {default}"
            lines.append(f"  {key} ({req})")
    return "\n".join(lines)
