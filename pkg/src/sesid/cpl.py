"""Continuous piecewise-linear maps in the slope/partition parameterisation.

A map is described by strictly increasing breakpoints ``c`` (length p), one
slope per partition interval ``mu`` (length p+1, intervals are
(-inf, c_1], (c_1, c_2], ..., (c_p, inf)), and an anchor: the function value
at breakpoint ``c_r`` is ``kappa``.  Evaluation goes through the regressor
vector ``eta(u)`` so that the value is the inner product ``mu @ eta(u) +
kappa`` — the form used by the least-squares identification, where the
slopes are the unknowns and ``eta`` is the data-dependent basis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels


def _as_readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CplFunction:
    """Continuous piecewise-linear function.

    Parameters
    ----------
    c : array_like
        Strictly increasing breakpoints, length p >= 1.
    mu : array_like
        Slope in each partition interval, length p + 1.
    r : int
        Anchor interval index in {1, ..., p} (1-based).
    kappa : float
        Function value at ``c[r - 1]``.
    """

    c: np.ndarray
    mu: np.ndarray
    r: int
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", _as_readonly(self.c))
        object.__setattr__(self, "mu", _as_readonly(self.mu))
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "kappa", float(self.kappa))
        if self.c.ndim != 1 or self.c.size < 1:
            raise ValueError("c must be a 1-d vector with at least one breakpoint")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(self.c) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.mu.shape != (self.c.size + 1,):
            raise ValueError(
                f"mu must have length {self.c.size + 1}, got {self.mu.size}"
            )
        if not np.all(np.isfinite(self.mu)):
            raise ValueError("slopes must be finite")
        if not 1 <= self.r <= self.c.size:
            raise ValueError(f"anchor index r={self.r} outside 1..{self.c.size}")
        if not math.isfinite(self.kappa):
            raise ValueError("kappa must be finite")

    @property
    def n_breakpoints(self) -> int:
        return self.c.size

    def __call__(self, u: float) -> float:
        return evaluate(self, u)

    def to_dict(self) -> dict:
        return {
            "c": self.c.tolist(),
            "mu": self.mu.tolist(),
            "r": self.r,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CplFunction":
        return cls(c=data["c"], mu=data["mu"], r=data["r"], kappa=data["kappa"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CplFunction":
        return cls.from_dict(json.loads(text))


def _check_point(u: float, allow_inf: bool = False) -> float:
    u = float(u)
    if math.isnan(u):
        raise ValueError("NaN is outside the domain")
    if not allow_inf and math.isinf(u):
        raise ValueError("evaluation point must be finite")
    return u


def interval_index(f: CplFunction, u: float) -> int:
    """1-based index of the partition interval containing ``u``.

    Intervals are left-open, right-closed, so ``u == c_i`` maps to interval
    ``i``; anything above the last breakpoint maps to ``p + 1``.
    """
    u = _check_point(u, allow_inf=True)
    return int(_kernels.partition_index(f.c, u))


def eta(f: CplFunction, u: float) -> np.ndarray:
    """Regressor vector of length p + 1 with ``evaluate == mu @ eta + kappa``.

    Only the entries between ``interval_index(f, u)`` and the anchor interval
    can be nonzero: the entry for the interval containing ``u`` holds the
    offset from the nearest bracketing breakpoint, the entries in between
    hold signed breakpoint gaps.
    """
    u = _check_point(u)
    return _kernels.basis_scalar(f.c, f.r, u)


def eta_many(f: CplFunction, u: Sequence[float]) -> np.ndarray:
    """Stack of ``eta`` vectors, one row per evaluation point."""
    u = np.asarray(u, dtype=float)
    if u.size and not np.all(np.isfinite(u)):
        raise ValueError("evaluation points must be finite")
    return _kernels.eta_matrix(f.c, f.r, u)


def evaluate(f: CplFunction, u: float) -> float:
    """Value of the piecewise-linear map at ``u``."""
    u = _check_point(u)
    return float(_kernels.cpl_eval_many(f.c, f.mu, f.r, f.kappa, np.array([u]))[0])


def evaluate_many(f: CplFunction, u: Sequence[float]) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.size and not np.all(np.isfinite(u)):
        raise ValueError("evaluation points must be finite")
    return _kernels.cpl_eval_many(f.c, f.mu, f.r, f.kappa, u)


def sample_from_function(
    g: Callable[[float], float], c: Sequence[float], r: int
) -> CplFunction:
    """Piecewise-linear interpolant of ``g`` on the breakpoint grid ``c``.

    Interior slopes are the divided differences of ``g`` between adjacent
    breakpoints; the two unbounded outer intervals continue the nearest
    interior slope, so there is no kink at the grid edge.  The anchor value
    is ``g(c[r - 1])``.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size < 1:
        raise ValueError("c must be a 1-d vector with at least one breakpoint")
    if np.any(np.diff(c) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    if not 1 <= int(r) <= c.size:
        raise ValueError(f"anchor index r={r} outside 1..{c.size}")
    values = np.array([float(g(x)) for x in c])
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValueError(f"g(c[{bad}]) = {values[bad]!r} is not finite")
    mu = np.zeros(c.size + 1)
    if c.size >= 2:
        mu[1:-1] = np.diff(values) / np.diff(c)
        mu[0] = mu[1]
        mu[-1] = mu[-2]
    return CplFunction(c=c, mu=mu, r=int(r), kappa=float(values[int(r) - 1]))
