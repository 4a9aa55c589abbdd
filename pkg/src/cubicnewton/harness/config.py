"""Experiment configuration: a strict flat key-value grammar with sections.

Standard INI syntax (configparser), one experiment per file.  Unknown sections
or keys and out-of-range values are rejected before any computation starts.
A complete example lives in the README.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

from ..errors import ConfigError

_ALLOWED = {
    "experiment": {"method", "seeds", "T", "test_every", "out_dir"},
    "problem": {"kind", "d", "n", "cond", "gen_seed", "l2_reg", "flip_prob", "path"},
    "split": {"train_n", "test_n", "split_seed"},
    "oracle": {"kind", "r1", "r2", "with_replacement", "sigma1", "sigma2", "sigma3", "seed"},
    "schedule": {"M", "sigma1_over_R", "sigma2", "tau_mode", "tau_param",
                 "tau_over_R", "eta3", "sigma3", "tau"},
    "sgd": {"lr"},
    "restart": {"mu", "R0", "sigma1", "tau", "C_big", "max_epochs", "L_smooth", "inner"},
    "init": {"x0"},
}

_METHODS = ("ascn", "tensor", "restarted", "sgd")
_PROBLEM_KINDS = ("quadratic", "logistic", "libsvm")
_ORACLE_KINDS = ("exact", "minibatch", "noise")


def _fail(msg):
    raise ConfigError(msg)


def _get(cp, section, key, cast, default=None, required=False, minimum=None):
    if not cp.has_option(section, key):
        if required:
            _fail(f"[{section}] {key} is required")
        return default
    raw = cp.get(section, key)
    try:
        value = cast(raw)
    except ValueError:
        _fail(f"[{section}] {key} = {raw!r} is not a valid {cast.__name__}")
    if minimum is not None and value < minimum:
        _fail(f"[{section}] {key} = {value} must be >= {minimum}")
    return value


def _get_bool(cp, section, key, default=False):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip().lower()
    if raw in ("true", "yes", "1", "on"):
        return True
    if raw in ("false", "no", "0", "off"):
        return False
    _fail(f"[{section}] {key} = {raw!r} is not a boolean")


def _get_choice(cp, section, key, choices, default=None, required=False):
    value = _get(cp, section, key, str, default=default, required=required)
    if value is not None and value not in choices:
        _fail(f"[{section}] {key} = {value!r} must be one of {choices}")
    return value


@dataclass
class ExperimentConfig:
    method: str
    seeds: list
    T: int
    test_every: int
    problem: dict
    oracle: dict
    schedule: dict
    sgd: dict = field(default_factory=dict)
    restart: dict = field(default_factory=dict)
    split: dict | None = None
    x0_spec: str = "3e"
    out_dir: str | None = None


def parse_config(source) -> ExperimentConfig:
    """Parse + validate a config file (path, text, or file object)."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive
    try:
        if hasattr(source, "read"):
            cp.read_file(source)
        elif "\n" in str(source) or "=" in str(source):
            cp.read_file(io.StringIO(str(source)))
        else:
            with open(source) as fh:
                cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        _fail(f"cannot parse config: {exc}")

    for section in cp.sections():
        if section not in _ALLOWED:
            _fail(f"unknown section [{section}]")
        for key in cp.options(section):
            if key not in _ALLOWED[section]:
                _fail(f"unknown key {key!r} in [{section}]")

    method = _get_choice(cp, "experiment", "method", _METHODS, required=True)
    seeds_raw = _get(cp, "experiment", "seeds", str, default="0")
    try:
        seeds = [int(tok) for tok in seeds_raw.replace(",", " ").split()]
    except ValueError:
        _fail(f"[experiment] seeds = {seeds_raw!r} must be a comma list of ints")
    if not seeds:
        _fail("[experiment] seeds must be nonempty")
    T = _get(cp, "experiment", "T", int,
             required=(method != "restarted"), default=0, minimum=0)
    if method != "restarted" and T < 1:
        _fail("[experiment] T must be >= 1")
    default_every = 1 if T <= 500 else max(1, math.ceil(T / 500))
    test_every = _get(cp, "experiment", "test_every", int,
                      default=default_every, minimum=1)
    out_dir = _get(cp, "experiment", "out_dir", str)

    # -- problem --
    kind = _get_choice(cp, "problem", "kind", _PROBLEM_KINDS, required=True)
    problem = {"kind": kind,
               "l2_reg": _get(cp, "problem", "l2_reg", float, default=0.0, minimum=0.0),
               "gen_seed": _get(cp, "problem", "gen_seed", int, default=0)}
    if kind == "quadratic":
        problem["d"] = _get(cp, "problem", "d", int, required=True, minimum=1)
        problem["cond"] = _get(cp, "problem", "cond", float, default=10.0, minimum=1.0)
    elif kind == "logistic":
        problem["d"] = _get(cp, "problem", "d", int, required=True, minimum=1)
        problem["n"] = _get(cp, "problem", "n", int, required=True, minimum=1)
        problem["flip_prob"] = _get(cp, "problem", "flip_prob", float,
                                    default=0.05, minimum=0.0)
    else:
        problem["path"] = _get(cp, "problem", "path", str, required=True)

    split = None
    if cp.has_section("split"):
        split = {
            "train_n": _get(cp, "split", "train_n", int, required=True, minimum=1),
            "test_n": _get(cp, "split", "test_n", int, default=0, minimum=0),
            "split_seed": _get(cp, "split", "split_seed", int, default=0),
        }

    # -- oracle --
    okind = _get_choice(cp, "oracle", "kind", _ORACLE_KINDS, required=True)
    oracle = {"kind": okind, "seed": _get(cp, "oracle", "seed", int, default=0)}
    if okind == "minibatch":
        oracle["r1"] = _get(cp, "oracle", "r1", int, required=True, minimum=1)
        oracle["r2"] = _get(cp, "oracle", "r2", int, default=oracle["r1"], minimum=1)
        oracle["with_replacement"] = _get_bool(cp, "oracle", "with_replacement")
    elif okind == "noise":
        for key in ("sigma1", "sigma2", "sigma3"):
            oracle[key] = _get(cp, "oracle", key, float, default=0.0, minimum=0.0)

    # -- schedule (everything except plain sgd requires M) --
    schedule = {}
    if method in ("ascn", "tensor", "restarted"):
        schedule["M"] = _get(cp, "schedule", "M", float, required=True)
        if schedule["M"] <= 0:
            _fail("[schedule] M must be positive")
        for key, default in (("sigma1_over_R", 0.0), ("sigma2", 0.0),
                             ("tau_param", 0.0), ("tau_over_R", 0.0)):
            schedule[key] = _get(cp, "schedule", key, float, default=default,
                                 minimum=0.0)
        schedule["tau_mode"] = _get_choice(cp, "schedule", "tau_mode",
                                           ("constant", "dynamic"),
                                           default="constant")
        schedule["eta3"] = _get(cp, "schedule", "eta3", float, default=4.0, minimum=4.0)
        schedule["sigma3"] = _get(cp, "schedule", "sigma3", float, default=0.0,
                                  minimum=0.0)
        schedule["tau"] = _get(cp, "schedule", "tau", float, default=1e-9)
        if schedule["tau"] <= 0:
            _fail("[schedule] tau must be positive (tensor subsolver tolerance)")

    sgd = {}
    if method == "sgd":
        sgd["lr"] = _get(cp, "sgd", "lr", float, required=True)
        if sgd["lr"] <= 0:
            _fail("[sgd] lr must be positive")

    restart = {}
    if method == "restarted":
        restart["mu"] = _get(cp, "restart", "mu", float, required=True)
        restart["R0"] = _get(cp, "restart", "R0", float, required=True)
        if restart["mu"] <= 0 or restart["R0"] <= 0:
            _fail("[restart] mu and R0 must be positive")
        restart["sigma1"] = _get(cp, "restart", "sigma1", float, default=0.0, minimum=0.0)
        restart["tau"] = _get(cp, "restart", "tau", float, default=0.0, minimum=0.0)
        restart["C_big"] = _get(cp, "restart", "C_big", float, default=None)
        restart["max_epochs"] = _get(cp, "restart", "max_epochs", int, default=8,
                                     minimum=1)
        restart["L_smooth"] = _get(cp, "restart", "L_smooth", float, default=None)
        restart["inner"] = _get_choice(cp, "restart", "inner", ("ascn", "tensor"),
                                       default="ascn")

    x0_spec = _get(cp, "init", "x0", str, default="3e")
    _validate_x0_spec(x0_spec)

    return ExperimentConfig(
        method=method, seeds=seeds, T=T, test_every=test_every,
        problem=problem, oracle=oracle, schedule=schedule, sgd=sgd,
        restart=restart, split=split, x0_spec=x0_spec, out_dir=out_dir,
    )


def _validate_x0_spec(spec):
    spec = spec.strip()
    if spec == "zeros":
        return
    if spec.endswith("e") and spec != "e":
        try:
            float(spec[:-1])
            return
        except ValueError:
            pass
    try:
        [float(tok) for tok in spec.replace(",", " ").split()]
    except ValueError:
        _fail(f"[init] x0 = {spec!r}: expected 'zeros', '<c>e', or a float list")


def build_x0(spec, d):
    import numpy as np

    spec = spec.strip()
    if spec == "zeros":
        return np.zeros(d)
    if spec.endswith("e") and spec != "e":
        try:
            return float(spec[:-1]) * np.ones(d)
        except ValueError:
            pass
    values = [float(tok) for tok in spec.replace(",", " ").split()]
    if len(values) != d:
        _fail(f"[init] x0 has {len(values)} entries but the problem has d = {d}")
    import numpy as np

    return np.asarray(values, dtype=float)
