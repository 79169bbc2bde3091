"""Built-in experiment presets.

``example1``-``example3`` are discrete delayed Lur'e truth systems driven by
Gaussian inputs (general identification path); ``example4`` is a
continuous-time delayed loop under a constant input, ``example4zoh`` the same
plant under a zero-order-hold Gaussian input; ``example5``/``example6`` are
the Van der Pol oscillator (with output bias) and the Lotka-Volterra
predator-prey pair, both identified through the constant-input path with a
nominal unit input.

Presets are plain config dicts; dump one with ``sesid run --preset NAME
--dump-config`` and edit freely.
"""
from __future__ import annotations

import copy
import math

SQRT = math.sqrt


def _example1() -> dict:
    return {
        "schema_version": 1,
        "name": "example1",
        "seed": 1001,
        "truth": {
            "kind": "dttdl",
            "a": [-1.6, 0.8],
            "b": [1.0, -0.5],
            "beta": 7.5,
            "d": 4,
            "nonlinearity": {
                "kind": "cpl_from_map",
                "map": {"kind": "scaled_tanh", "amplitude": 2.5, "rate": 1.2},
                "c": {"start": -10.0, "stop": 10.0, "step": 1.0},
                "r": 11,
            },
            "y_init": {"kind": "gaussian", "std": 1.0},
        },
        "input": {"kind": "gaussian", "mean": 5.0, "std": SQRT(1.5)},
        "samples": 25001,
        "noise": {"std": SQRT(1.5)},
        "identification": {
            "n_hat": 2,
            "d_hat": 4,
            "c_hat": {"start": -10.0, "stop": 10.0, "step": 1.0},
            "beta_choice": 7.5,
            "constant_input": False,
            "window": [100, 25000],
            "solver": {"kind": "rls", "p0": 1e6, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 8.0},
            "truth_init": {"kind": "constant", "value": 300.0},
            "model_init": 0.0,
            "horizon": 10000,
            "discard": 2000,
            "psd_segment": 4096,
            "phase_portrait": False,
        },
    }


def _example2() -> dict:
    return {
        "schema_version": 1,
        "name": "example2",
        "seed": 1002,
        "truth": {
            "kind": "dttdl",
            "a": [-2.35, 2.0, -0.6],
            "b": [1.0, -2.3, -1.5725],
            "beta": 5.0,
            "d": 4,
            "nonlinearity": {
                "kind": "scaled_tanh",
                "amplitude": 2.5,
                "rate": 1.2,
                "center": 3.0,
                "offset": 2.2342,
            },
            "y_init": {"kind": "gaussian", "std": 1.0},
        },
        "input": {"kind": "gaussian", "mean": 4.0, "std": SQRT(2.0)},
        "samples": 25001,
        "noise": {"std": SQRT(2.65)},
        "identification": {
            "n_hat": 3,
            "d_hat": 4,
            "c_hat": {"start": -10.0, "stop": 10.0, "step": 1.0},
            "beta_choice": 5.0,
            "constant_input": False,
            "window": [100, 25000],
            "solver": {"kind": "rls", "p0": 1e6, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 8.0},
            "truth_init": {"kind": "constant", "value": 500.0},
            "model_init": 0.0,
            "horizon": 10000,
            "discard": 2000,
            "psd_segment": 4096,
            "phase_portrait": False,
        },
    }


def _example3() -> dict:
    return {
        "schema_version": 1,
        "name": "example3",
        "seed": 1003,
        "truth": {
            "kind": "dttdl",
            "a": [-3.5442, 5.21974, -3.92160, 1.5316, -0.2722, -0.02153],
            "b": [0.0, 0.0, 0.0, 1.0, 1.5, 0.8125],
            "beta": 1.0,
            "d": 0,
            "nonlinearity": {
                "kind": "gaussian_pair",
                "peak": 4.0,
                "width": 1.75,
                "center": 4.0,
            },
            "y_init": {"kind": "gaussian", "std": 1.0},
        },
        "input": {"kind": "gaussian", "mean": 3.0, "std": SQRT(5.0)},
        "samples": 100001,
        "noise": {"std": SQRT(2.5)},
        "identification": {
            "n_hat": 6,
            "d_hat": 0,
            "c_hat": {"start": -10.0, "stop": 10.0, "step": 1.0},
            "beta_choice": 1.0,
            "constant_input": False,
            "window": [100, 100000],
            "solver": {"kind": "rls", "p0": 1e6, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 2.0},
            "truth_init": {"kind": "constant", "value": 500.0},
            "model_init": 0.0,
            "horizon": 10000,
            "discard": 2000,
            "psd_segment": 4096,
            "phase_portrait": False,
        },
    }


def _cttdl_truth() -> dict:
    return {
        "kind": "cttdl",
        "A": [[-1.0, -6.5], [1.0, 0.0]],
        "B": [1.0, 0.0],
        "C": [1.0, 2.5],
        "beta": 50.0,
        "delay_time": 0.1,
        "washout_tau": 0.001,
        "step": 0.001,
        "y0": 0.0,
        "nonlinearity": {"kind": "scaled_tanh", "amplitude": 5.0, "rate": 1.0},
    }


def _example4() -> dict:
    return {
        "schema_version": 1,
        "name": "example4",
        "seed": 1004,
        "truth": _cttdl_truth(),
        "input": {"kind": "constant", "value": 2.5},
        "sampling": {"sample_time": 0.1, "bias": 0.0},
        "samples": 100001,
        "noise": None,
        "identification": {
            "n_hat": 12,
            "d_hat": 5,
            "c_hat": {"start": -6.0, "stop": 6.0, "step": 0.5},
            "beta_choice": 5.0,
            "constant_input": True,
            "window": [100, 100000],
            "solver": {"kind": "rls", "p0": 1e2, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 5.0},
            "model_init": 0.0,
            "horizon": 10000,
            "discard": 2000,
            "psd_segment": 4096,
            "phase_portrait": False,
        },
    }


def _example4zoh() -> dict:
    return {
        "schema_version": 1,
        "name": "example4zoh",
        "seed": 1014,
        "truth": _cttdl_truth(),
        "input": {"kind": "zoh_gaussian", "mean": 2.5, "std": SQRT(0.5)},
        "sampling": {"sample_time": 0.1, "bias": 0.0},
        "samples": 100001,
        "noise": {"std": SQRT(2.0)},
        "identification": {
            "n_hat": 12,
            "d_hat": 4,
            "c_hat": {"start": -12.5, "stop": 12.5, "step": 2.5},
            "beta_choice": 25.0,
            "constant_input": False,
            "window": [100, 100000],
            "solver": {"kind": "rls", "p0": 1e2, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 5.0},
            "model_init": 0.0,
            "horizon": 10000,
            "discard": 2000,
            "psd_segment": 4096,
            "phase_portrait": False,
        },
    }


def _example5() -> dict:
    return {
        "schema_version": 1,
        "name": "example5",
        "seed": 1005,
        "truth": {"kind": "van_der_pol", "mu0": 1.0, "y0": 0.1, "ydot0": 0.0},
        "input": {"kind": "constant", "value": 1.0},
        "sampling": {"sample_time": 0.1, "bias": 10.0, "steps_per_sample": 160},
        "samples": 20001,
        "noise": None,
        "identification": {
            "n_hat": 12,
            "d_hat": 19,
            "c_hat": {"start": -0.3, "stop": 0.3, "step": 0.025},
            "beta_choice": -5.0,
            "constant_input": True,
            "window": [225, 20000],
            "solver": {"kind": "rls", "p0": 1e2, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 1.0},
            "model_init": 0.0,
            "horizon": 20000,
            "discard": 4000,
            "psd_segment": 4096,
            "phase_portrait": True,
        },
    }


def _example6() -> dict:
    return {
        "schema_version": 1,
        "name": "example6",
        "seed": 1006,
        "truth": {
            "kind": "lotka_volterra",
            "zeta": 2.0 / 3.0,
            "rho": 4.0 / 3.0,
            "xi": 1.0,
            "phi": 1.0,
            "y0": 1.0,
            "x0": 1.0,
        },
        "input": {"kind": "constant", "value": 1.0},
        "sampling": {"sample_time": 0.1, "bias": 0.0, "steps_per_sample": 160},
        "samples": 10001,
        "noise": None,
        "identification": {
            "n_hat": 12,
            "d_hat": 13,
            "c_hat": {"start": -0.08, "stop": 0.06, "step": 0.01},
            "beta_choice": -5.0,
            "constant_input": True,
            "window": [500, 10000],
            "solver": {"kind": "rls", "p0": 1e2, "forgetting": 1.0},
        },
        "validation": {
            "input": {"kind": "constant", "value": 1.0},
            "model_init": 0.0,
            "horizon": 20000,
            "discard": 4000,
            "psd_segment": 4096,
            "phase_portrait": True,
        },
    }


_BUILDERS = {
    "example1": _example1,
    "example2": _example2,
    "example3": _example3,
    "example4": _example4,
    "example4zoh": _example4zoh,
    "example5": _example5,
    "example6": _example6,
}

PRESET_NAMES = tuple(sorted(_BUILDERS))


def get_preset(name: str) -> dict:
    if name not in _BUILDERS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return copy.deepcopy(_BUILDERS[name]())
