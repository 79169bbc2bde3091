"""Discrete-time, time-delayed Lur'e plant: model container and simulator.

The plant is a stable linear block ``B(q)/A(q)`` driven by
``v_b = (beta + SN(y_f)) * v``, where ``y_f,k = y_{k-d} - y_{k-d-1}`` is the
delayed first difference of the output (delay + washout realised jointly) and
``SN`` is the static feedback map.  Written out, each output sample obeys

    y_k = -a_1 y_{k-1} - ... - a_n y_{k-n}
          + b_1 (beta + SN(y_{f,k-1})) v_{k-1} + ...
          + b_n (beta + SN(y_{f,k-n})) v_{k-n}

for k >= n + d + 1, propagated from the caller-supplied initial outputs
y_0 ... y_{n+d}.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _kernels
from .cpl import CplFunction, _as_readonly
from .nonlin import feedback_from_dict, feedback_to_dict

DIVERGENCE_LIMIT = 1e12

FeedbackMap = Union[CplFunction, Callable[[float], float]]


class SimulationDiverged(RuntimeError):
    """Raised when the simulated output leaves the divergence guard."""

    def __init__(self, index: int):
        super().__init__(
            f"output magnitude exceeded {DIVERGENCE_LIMIT:g} (or went non-finite) "
            f"at step {index}"
        )
        self.index = index


@dataclass(frozen=True)
class DttdlModel:
    """Delayed discrete-time Lur'e model.

    ``a`` and ``b`` are the denominator/numerator coefficient vectors of the
    strictly proper linear block (equal length n), ``beta`` the bias gain,
    ``d`` the delay in steps, and ``nonlinearity`` the static feedback map
    (a :class:`CplFunction` or any scalar callable).
    """

    a: np.ndarray
    b: np.ndarray
    beta: float
    d: int
    nonlinearity: FeedbackMap

    def __post_init__(self):
        object.__setattr__(self, "a", _as_readonly(self.a))
        object.__setattr__(self, "b", _as_readonly(self.b))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "d", int(self.d))
        if self.a.ndim != 1 or self.a.size < 1:
            raise ValueError("a must be a nonempty 1-d vector")
        if self.b.shape != self.a.shape:
            raise ValueError("a and b must have the same length")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("coefficients must be finite")
        if self.d < 0:
            raise ValueError("delay must be nonnegative")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    @property
    def order(self) -> int:
        return self.a.size

    def is_asymptotically_stable(self) -> bool:
        """Spectral radius of the companion matrix strictly below one."""
        n = self.order
        comp = np.zeros((n, n))
        comp[0, :] = -self.a
        if n > 1:
            comp[np.arange(1, n), np.arange(0, n - 1)] = 1.0
        return bool(np.max(np.abs(np.linalg.eigvals(comp))) < 1.0)

    def dc_gain(self) -> float:
        """B(1)/A(1), the steady gain of the linear block."""
        return float(np.sum(self.b) / (1.0 + np.sum(self.a)))

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "beta": self.beta,
            "d": self.d,
            "nonlinearity": feedback_to_dict(self.nonlinearity),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DttdlModel":
        return cls(
            a=data["a"],
            b=data["b"],
            beta=data["beta"],
            d=data["d"],
            nonlinearity=feedback_from_dict(data["nonlinearity"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "DttdlModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class SignalRecord:
    """Uniformly sampled scalar input/output sequences."""

    v: np.ndarray
    y: np.ndarray
    sample_time: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v", _as_readonly(self.v))
        object.__setattr__(self, "y", _as_readonly(self.y))
        object.__setattr__(self, "sample_time", float(self.sample_time))
        if self.v.ndim != 1 or self.y.ndim != 1:
            raise ValueError("v and y must be 1-d")
        if self.v.shape != self.y.shape:
            raise ValueError("v and y must have equal length")
        if not (np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.y))):
            raise ValueError("record entries must be finite")
        if self.sample_time <= 0:
            raise ValueError("sample_time must be positive")

    def __len__(self) -> int:
        return self.v.size

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "v", "y"])
            for k in range(len(self)):
                writer.writerow([k, repr(float(self.v[k])), repr(float(self.y[k]))])

    @classmethod
    def load_csv(cls, path, sample_time: float = 1.0) -> "SignalRecord":
        v, y = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header] != ["k", "v", "y"]:
                raise ValueError(f"unexpected header {header!r}, need k,v,y")
            for row in reader:
                v.append(float(row[1]))
                y.append(float(row[2]))
        return cls(v=np.array(v), y=np.array(y), sample_time=sample_time)


def init_constant(model: DttdlModel, value: float) -> np.ndarray:
    """Initial output vector y_0..y_{n+d} filled with one value."""
    return np.full(model.order + model.d + 1, float(value))


def init_gaussian(model: DttdlModel, seed: int, std: float = 1.0) -> np.ndarray:
    """Seeded Gaussian initial outputs y_0..y_{n+d}."""
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, std, size=model.order + model.d + 1)


def simulate(model: DttdlModel, v, y_init) -> np.ndarray:
    """Propagate the plant over the input sequence ``v``.

    ``y_init`` supplies the first n + d + 1 output samples; the returned
    sequence has the same length as ``v``.  Aborts with
    :class:`SimulationDiverged` if the output magnitude passes 1e12, which for
    a bounded self-excited response signals a parameter error.
    """
    v = np.ascontiguousarray(v, dtype=float)
    y_init = np.ascontiguousarray(y_init, dtype=float)
    n, d = model.order, model.d
    if y_init.shape != (n + d + 1,):
        raise ValueError(f"y_init must have length n + d + 1 = {n + d + 1}")
    if v.size < n + d + 1:
        raise ValueError("input shorter than the initial-condition span")
    nl = model.nonlinearity
    if isinstance(nl, CplFunction):
        y, bad = _kernels.simulate_dttdl_cpl(
            model.a, model.b, model.beta, d, v, y_init,
            nl.c, nl.mu, nl.r, nl.kappa, DIVERGENCE_LIMIT,
        )
        if bad >= 0:
            raise SimulationDiverged(bad)
        return y
    return _simulate_callable(model, v, y_init, nl)


def _simulate_callable(model, v, y_init, nl) -> np.ndarray:
    # generic path for smooth truth maps; the feedback value at each index is
    # computed once and reused across the n lags it appears in
    n, d, beta = model.order, model.d, model.beta
    a = model.a.tolist()
    b = model.b.tolist()
    N = v.size
    y = np.empty(N)
    head = min(n + d + 1, N)
    y[:head] = y_init[:head]
    yl = y.tolist()
    vl = v.tolist()
    sn = [0.0] * N
    for j in range(d + 1, head):
        sn[j] = float(nl(yl[j - d] - yl[j - d - 1]))
    for k in range(n + d + 1, N):
        j = k - 1
        sn[j] = float(nl(yl[j - d] - yl[j - d - 1]))
        acc = 0.0
        for i in range(1, n + 1):
            acc += -a[i - 1] * yl[k - i] + b[i - 1] * (beta + sn[k - i]) * vl[k - i]
        yl[k] = acc
        if not (-DIVERGENCE_LIMIT <= acc <= DIVERGENCE_LIMIT):
            raise SimulationDiverged(k)
    return np.asarray(yl)


def scale_equivalence_check(
    model: DttdlModel, gamma: float, v, y_init, rel_tol: float = 1e-9
) -> bool:
    """Check response invariance under (beta, b, mu) -> (beta*g, b/g, mu*g).

    The transformed parameters describe the same closed loop, so the outputs
    must agree within ``rel_tol`` relative at every step.  Requires a CPL
    feedback map with zero anchor value.
    """
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    nl = model.nonlinearity
    if not isinstance(nl, CplFunction) or nl.kappa != 0.0:
        raise ValueError("scale equivalence requires a CPL map with kappa = 0")
    scaled = DttdlModel(
        a=model.a,
        b=model.b / gamma,
        beta=model.beta * gamma,
        d=model.d,
        nonlinearity=CplFunction(c=nl.c, mu=nl.mu * gamma, r=nl.r, kappa=0.0),
    )
    y_ref = simulate(model, v, y_init)
    y_scaled = simulate(scaled, v, y_init)
    return bool(
        np.all(np.abs(y_ref - y_scaled) <= rel_tol * np.maximum(1.0, np.abs(y_ref)))
    )
