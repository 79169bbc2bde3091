"""Experiment configuration: JSON schema, validation, and grid helpers.

Configs are plain JSON objects with a ``schema_version`` field.  Validation
normalises them in place (e.g. breakpoint-grid shorthands become explicit
lists) and reports problems with a dotted field path so CLI users can find
the offending line.
"""
from __future__ import annotations

import hashlib
import json
import math

import numpy as np

SCHEMA_VERSION = 1

TRUTH_KINDS = ("dttdl", "cttdl", "van_der_pol", "lotka_volterra")
INPUT_KINDS = ("constant", "gaussian", "zoh_gaussian")
FEEDBACK_KINDS = ("cpl", "cpl_from_map", "scaled_tanh", "gaussian_pair")


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _need(cfg: dict, where: str, key: str, types, choices=None):
    if key not in cfg:
        raise ConfigError(f"{where}.{key}", "missing required field")
    value = cfg[key]
    if types is not None and not isinstance(value, types):
        raise ConfigError(
            f"{where}.{key}",
            f"expected {getattr(types, '__name__', types)}, got {type(value).__name__}",
        )
    if choices is not None and value not in choices:
        raise ConfigError(f"{where}.{key}", f"must be one of {choices}, got {value!r}")
    return value


def _number(cfg: dict, where: str, key: str, default=None, positive=False):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key}", "must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where}.{key}", "must be positive")
    return float(value)


def resolve_grid(spec, where: str = "grid") -> list:
    """Expand a breakpoint grid: explicit list or {start, stop, step}.

    Grid values within 1e-12 of zero are snapped to exactly zero so the
    anchor breakpoint is representable.
    """
    if isinstance(spec, dict):
        start = _number(spec, where, "start")
        stop = _number(spec, where, "stop")
        step = _number(spec, where, "step", positive=True)
        count = int(round((stop - start) / step)) + 1
        if count < 1 or abs(start + (count - 1) * step - stop) > 1e-9 * max(1.0, abs(stop)):
            raise ConfigError(where, f"step {step} does not tile [{start}, {stop}]")
        values = [start + k * step for k in range(count)]
        values[-1] = stop  # the accumulated endpoint may be off by rounding
    elif isinstance(spec, list):
        values = [float(x) for x in spec]
    else:
        raise ConfigError(where, "expected a list or {start, stop, step}")
    values = [0.0 if abs(x) <= 1e-12 else x for x in values]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(where, "breakpoints must be strictly increasing")
    return values


def _validate_feedback(spec, where: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(where, "expected an object")
    kind = _need(spec, where, "kind", str, FEEDBACK_KINDS)
    if kind == "cpl":
        c = resolve_grid(spec.get("c"), f"{where}.c")
        mu = _need(spec, where, "mu", list)
        if len(mu) != len(c) + 1:
            raise ConfigError(f"{where}.mu", f"need {len(c) + 1} slopes for {len(c)} breakpoints")
        spec["c"] = c
    elif kind == "cpl_from_map":
        spec["c"] = resolve_grid(spec.get("c"), f"{where}.c")
        r = _need(spec, where, "r", int)
        if not 1 <= r <= len(spec["c"]):
            raise ConfigError(f"{where}.r", f"anchor outside 1..{len(spec['c'])}")
        _validate_feedback(_need(spec, where, "map", dict), f"{where}.map")
    elif kind == "scaled_tanh":
        _number(spec, where, "amplitude", positive=True)
    elif kind == "gaussian_pair":
        _number(spec, where, "peak")
        _number(spec, where, "width", positive=True)
        _number(spec, where, "center")
    return spec


def _validate_truth(truth, where: str = "truth") -> dict:
    kind = _need(truth, where, "kind", str, TRUTH_KINDS)
    if kind == "dttdl":
        a = _need(truth, where, "a", list)
        b = _need(truth, where, "b", list)
        if len(a) != len(b) or not a:
            raise ConfigError(f"{where}.b", "a and b must be nonempty and equal length")
        _number(truth, where, "beta")
        d = _need(truth, where, "d", int)
        if d < 0:
            raise ConfigError(f"{where}.d", "delay must be nonnegative")
        _validate_feedback(_need(truth, where, "nonlinearity", dict), f"{where}.nonlinearity")
        init = _need(truth, where, "y_init", dict)
        _need(init, f"{where}.y_init", "kind", str, ("constant", "gaussian"))
    elif kind == "cttdl":
        A = _need(truth, where, "A", list)
        n = len(A)
        if any(not isinstance(row, list) or len(row) != n for row in A):
            raise ConfigError(f"{where}.A", "must be a square matrix")
        for key in ("B", "C"):
            if len(_need(truth, where, key, list)) != n:
                raise ConfigError(f"{where}.{key}", f"must have length {n}")
        _number(truth, where, "beta")
        _number(truth, where, "delay_time", positive=True)
        _number(truth, where, "washout_tau", positive=True)
        _number(truth, where, "step", positive=True)
        _number(truth, where, "y0", default=0.0)
        _validate_feedback(_need(truth, where, "nonlinearity", dict), f"{where}.nonlinearity")
    elif kind == "van_der_pol":
        _number(truth, where, "mu0")
        _number(truth, where, "y0")
        _number(truth, where, "ydot0", default=0.0)
    elif kind == "lotka_volterra":
        for key in ("zeta", "rho", "xi", "phi"):
            _number(truth, where, key)
        _number(truth, where, "y0", positive=True)
        _number(truth, where, "x0", positive=True)
    return truth


def _validate_input(spec, where: str = "input") -> dict:
    kind = _need(spec, where, "kind", str, INPUT_KINDS)
    if kind == "constant":
        _number(spec, where, "value")
    else:
        _number(spec, where, "mean")
        std = _number(spec, where, "std")
        if std < 0:
            raise ConfigError(f"{where}.std", "must be nonnegative")
    return spec


def validate_config(cfg: dict) -> dict:
    """Validate and normalise a full experiment config (in place)."""
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    version = _need(cfg, "config", "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError("config.schema_version", f"supported version is {SCHEMA_VERSION}")
    _need(cfg, "config", "seed", int)

    _validate_truth(_need(cfg, "config", "truth", dict))
    _validate_input(_need(cfg, "config", "input", dict))

    kind = cfg["truth"]["kind"]
    if kind != "dttdl":
        sampling = _need(cfg, "config", "sampling", dict)
        _number(sampling, "sampling", "sample_time", positive=True)
        _number(sampling, "sampling", "bias", default=0.0)
    samples = _need(cfg, "config", "samples", int)
    if samples < 2:
        raise ConfigError("config.samples", "need at least two samples")

    noise = cfg.get("noise")
    if noise is not None:
        if not isinstance(noise, dict):
            raise ConfigError("config.noise", "expected an object or null")
        if ("std" in noise) == ("target_snr_db" in noise):
            raise ConfigError("config.noise", "give exactly one of std or target_snr_db")

    ident = _need(cfg, "config", "identification", dict)
    n_hat = _need(ident, "identification", "n_hat", int)
    d_hat = _need(ident, "identification", "d_hat", int)
    if n_hat < 1 or d_hat < 0:
        raise ConfigError("identification.n_hat", "need n_hat >= 1 and d_hat >= 0")
    ident["c_hat"] = resolve_grid(ident.get("c_hat"), "identification.c_hat")
    if not any(x == 0.0 for x in ident["c_hat"]):
        raise ConfigError("identification.c_hat", "must contain the zero breakpoint")
    constant = bool(ident.get("constant_input", False))
    ident["constant_input"] = constant
    _number(ident, "identification", "beta_choice")
    if _number(ident, "identification", "beta_choice") == 0:
        raise ConfigError("identification.beta_choice", "must be nonzero")
    window = _need(ident, "identification", "window", list)
    if len(window) != 2 or not all(isinstance(x, int) for x in window):
        raise ConfigError("identification.window", "expected [l_l, l_u]")
    if not (window[1] >= window[0] >= n_hat + d_hat + 1):
        raise ConfigError(
            "identification.window",
            f"need l_u >= l_l >= n_hat + d_hat + 1 = {n_hat + d_hat + 1}",
        )
    solver = ident.get("solver", {"kind": "batch"})
    ident["solver"] = solver
    _need(solver, "identification.solver", "kind", str, ("batch", "rls"))
    if solver["kind"] == "rls":
        _number(solver, "identification.solver", "p0", positive=True)
        lam = _number(solver, "identification.solver", "forgetting", default=1.0)
        if not 0 < lam <= 1:
            raise ConfigError("identification.solver.forgetting", "must be in (0, 1]")

    val = cfg.get("validation")
    if val is not None:
        _validate_input(_need(val, "validation", "input", dict), "validation.input")
        horizon = _need(val, "validation", "horizon", int)
        if horizon <= n_hat + d_hat + 1:
            raise ConfigError("validation.horizon", "too short for the model order")
        _number(val, "validation", "model_init", default=0.0)
        if kind == "dttdl":
            _need(val, "validation", "truth_init", dict)
    return cfg


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON at line {exc.lineno}: {exc.msg}")
    return validate_config(cfg)


def dumps_config(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def grid_array(values) -> np.ndarray:
    return np.asarray(values, dtype=float)
