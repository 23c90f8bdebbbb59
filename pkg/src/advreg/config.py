"""YAML experiment configs -> ExperimentConfig, rejecting unknown keys by name.

Example::

    function: f2
    smoothness: {beta: 0.5, L: 1.0}
    d: 1
    perturbation: {kind: lp_ball, p: inf, q: 0.0625}
    estimator: {method: local_poly, c_h: 1.0}
    n_grid: [4096]
    replicates: 20
    sigma: 0.2
    seed: 0
"""
from __future__ import annotations

import yaml

from .experiments import EstimatorConfig, ExperimentConfig
from .functions import FUNCTION_LABELS

TOP_KEYS = {"function", "smoothness", "d", "witness_coord", "function_params", "perturbation",
            "estimator", "n_grid", "replicates", "sigma", "resolution", "sample_resolution",
            "seed", "q_grid", "jobs"}
SMOOTHNESS_KEYS = {"beta", "L"}
ESTIMATOR_KEYS = {"method", "c_h"}
ESTIMATOR_METHODS = {"local_poly", "aniso_kernel", "exact", "constant"}
FUNCTION_PARAM_KEYS = {"slope", "intercept", "value"}
PERTURBATION_KEYS = {
    "lp_ball": {"kind", "p", "q", "c_q", "a"},
    "sparse_lp_ball": {"kind", "p", "q", "c_q", "a", "s"},
    "box": {"kind", "a"},
    "segment": {"kind", "start", "end"},
    "finite": {"kind", "points"},
    "singleton0": {"kind"},
    "none": {"kind"},
}


class ConfigError(ValueError):
    pass


def _check_keys(section: dict, allowed: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    for key in section:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown config key {name!r}")


def parse_config(raw: dict) -> ExperimentConfig:
    _check_keys(raw, TOP_KEYS, "")
    kw = {}
    if "function" in raw:
        if raw["function"] not in FUNCTION_LABELS:
            raise ConfigError(f"unknown function {raw['function']!r}; expected one of {FUNCTION_LABELS}")
        kw["function"] = raw["function"]
    smooth = raw.get("smoothness", {})
    _check_keys(smooth, SMOOTHNESS_KEYS, "smoothness")
    for key in ("beta", "L"):
        if key in smooth:
            v = smooth[key]
            kw[key] = tuple(float(x) for x in v) if isinstance(v, list) else float(v)
    est = raw.get("estimator", {})
    _check_keys(est, ESTIMATOR_KEYS, "estimator")
    method = est.get("method", "local_poly")
    if method not in ESTIMATOR_METHODS:
        raise ConfigError(f"unknown estimator.method {method!r}")
    kw["estimator"] = EstimatorConfig(method=method, c_h=float(est.get("c_h", 1.0)))
    if "perturbation" in raw:
        pert = raw["perturbation"]
        if not isinstance(pert, dict):
            raise ConfigError("perturbation must be a mapping")
        kind = pert.get("kind", "lp_ball")
        if kind not in PERTURBATION_KEYS:
            raise ConfigError(f"unknown perturbation.kind {kind!r}")
        _check_keys(pert, PERTURBATION_KEYS[kind], "perturbation")
        kw["perturbation"] = dict(pert)
    params = raw.get("function_params", {})
    _check_keys(params, FUNCTION_PARAM_KEYS, "function_params")
    kw["function_params"] = dict(params)
    for key, conv in (("d", int), ("witness_coord", int), ("replicates", int), ("sigma", float),
                      ("resolution", int), ("sample_resolution", int), ("seed", int), ("jobs", int)):
        if raw.get(key) is not None:
            kw[key] = conv(raw[key])
    if "n_grid" in raw:
        kw["n_grid"] = tuple(int(n) for n in raw["n_grid"])
    if "q_grid" in raw:
        kw["q_grid"] = tuple(float(q) for q in raw["q_grid"])
    if "d" not in kw and isinstance(kw.get("beta"), tuple):
        kw["d"] = len(kw["beta"])
    try:
        cfg = ExperimentConfig(**kw)
        cfg.regression_function()  # validates function/smoothness pairing
        cfg.perturbation_set(cfg.n_grid[0])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return parse_config(raw)
