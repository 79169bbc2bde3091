"""Fixed-step integration of the continuous-time truth systems.

Two solver entry points:

``integrate_dde``
    Classic RK4 for the delayed Lur'e loop (linear block, scalar washout
    state, delayed output feedback through a static map).  Delayed terms are
    re-evaluated at every stage time and read from the stored grid
    trajectory; off-node reads are interpolated (linear by default, optional
    piecewise-cubic with stencils confined to the smooth segments between
    delay-propagated kinks).

``integrate_ode``
    Classic RK4 for plain ODE systems.  The Van der Pol and Lotka-Volterra
    vector fields have dedicated kernels (compiled when the extension is
    available); anything else goes through the generic callable path.

Both keep the step fixed so runs are deterministic and self-convergence is
measurable.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .lure import SignalRecord


class IntegrationDiverged(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"state went non-finite at t = {t:.6g}")
        self.t = t


@dataclass(frozen=True)
class Trajectory:
    """Dense fixed-step solution: times, states (one row per node), output."""

    t: np.ndarray
    states: np.ndarray
    y: np.ndarray
    step: float
    state_names: tuple = ()

    def save_csv(self, path) -> None:
        names = self.state_names or tuple(
            f"x{i + 1}" for i in range(self.states.shape[1])
        )
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *names, "y"])
            for j in range(self.t.size):
                writer.writerow(
                    [repr(float(self.t[j]))]
                    + [repr(float(s)) for s in self.states[j]]
                    + [repr(float(self.y[j]))]
                )


# ---------------------------------------------------------------------------
# delayed Lur'e loop
# ---------------------------------------------------------------------------

def washout_realization(tau: float) -> tuple:
    """State-space form (Af, Bf, Cf, Df) of the washout filter p/(tau*p + 1)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return (-1.0 / tau, 1.0, -1.0 / tau**2, 1.0 / tau)


@dataclass(frozen=True)
class CttdlSystem:
    """Continuous-time delayed Lur'e loop.

    ``(A, B, C)`` realises the strictly proper linear block; the washout
    filter has the scalar realisation ``(Af, Bf, Cf, Df)`` and is driven by
    the delayed output ``y(t - delay_time)``.  The feedback value
    ``SN(y_f)`` enters through the bias mechanism ``v_b = v (beta + SN(y_f))``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Af: float
    Bf: float
    Cf: float
    Df: float
    beta: float
    delay_time: float
    nonlinearity: Callable[[float], float]

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float).reshape(-1)
        C = np.array(self.C, dtype=float).reshape(-1)
        for name, arr in (("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        n = A.shape[0]
        if B.shape != (n,) or C.shape != (n,):
            raise ValueError("B and C must be vectors of length n")
        if self.delay_time <= 0:
            raise ValueError("delay_time must be positive")

    @property
    def order(self) -> int:
        return self.A.shape[0]


def constant_history_state(sys: CttdlSystem, y0: float) -> np.ndarray:
    """Linear-block state consistent with a flat output history ``y(t) = y0``.

    Solves the observability system [C; CA; ...; CA^{n-1}] x0 = [y0; 0; ...]
    so the output and its first n - 1 derivatives are those of a constant.
    """
    n = sys.order
    obs = np.empty((n, n))
    row = sys.C.copy()
    for i in range(n):
        obs[i] = row
        row = row @ sys.A
    rhs = np.zeros(n)
    rhs[0] = y0
    return np.linalg.solve(obs, rhs)


def _read_linear(y, pos):
    j = int(math.floor(pos))
    w = pos - j
    if w == 0.0:
        return y[j]
    return (1.0 - w) * y[j] + w * y[j + 1]


def _read_cubic(y, pos, m, j_max):
    # stencil confined to [q*m, (q+1)*m]: the solution is smooth inside each
    # delay-length segment but only C^k across its endpoints
    j = int(math.floor(pos))
    w = pos - j
    if w == 0.0:
        return y[j]
    q = j // m
    lo = q * m
    hi = min((q + 1) * m, j_max)
    base = min(max(j - 1, lo), hi - 3)
    s = pos - base
    # Lagrange weights on nodes 0, 1, 2, 3
    w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
    w1 = s * (s - 2.0) * (s - 3.0) / 2.0
    w2 = -s * (s - 1.0) * (s - 3.0) / 2.0
    w3 = s * (s - 1.0) * (s - 2.0) / 6.0
    return w0 * y[base] + w1 * y[base + 1] + w2 * y[base + 2] + w3 * y[base + 3]


def integrate_dde(
    sys: CttdlSystem,
    v: Callable[[float], float],
    y0: float,
    t_end: float,
    h: float,
    interp: str = "linear",
    xf0: Optional[float] = None,
) -> Trajectory:
    """Integrate the delayed loop from a constant output history.

    The history is ``y(t) = y0`` on [0, delay_time] with the linear-block
    state held at :func:`constant_history_state`; integration starts at
    ``delay_time``.  ``h`` must divide the delay so delayed stage reads fall
    on or midway between stored nodes.  ``xf0`` overrides the washout state
    at the start (default makes the filtered output start at zero).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    Td = sys.delay_time
    m = int(round(Td / h))
    if m < 4 or abs(m * h - Td) > 1e-12 * max(1.0, Td):
        raise ValueError(f"step {h!r} must divide the delay {Td!r} (>= 4 nodes)")
    if interp not in ("linear", "cubic"):
        raise ValueError(f"interp must be 'linear' or 'cubic', got {interp!r}")
    total = int(round(t_end / h))
    if total < m:
        raise ValueError("t_end must reach past the delay")

    n = sys.order
    A, B, C = sys.A, sys.B, sys.C
    Af, Bf, Cf, Df = sys.Af, sys.Bf, sys.Cf, sys.Df
    beta, sn = sys.beta, sys.nonlinearity
    if xf0 is None:
        xf0 = -Df * y0 / Cf if Cf != 0.0 else 0.0

    x0 = constant_history_state(sys, y0)
    states = np.empty((total + 1, n + 1))
    yout = np.empty(total + 1)
    states[: m + 1, :n] = x0
    states[: m + 1, n] = xf0
    yout[: m + 1] = float(C @ x0)

    cubic = interp == "cubic"

    def rhs(t, z, pos_delay, j_max):
        if cubic:
            yd = _read_cubic(yout, pos_delay, m, j_max)
        else:
            yd = _read_linear(yout, pos_delay)
        x = z[:n]
        xf = z[n]
        yf = Cf * xf + Df * yd
        vb = v(t) * (beta + sn(yf))
        out = np.empty(n + 1)
        out[:n] = A @ x + B * vb
        out[n] = Af * xf + Bf * yd
        return out

    z = states[m].copy()
    for j in range(m, total):
        t = j * h
        k1 = rhs(t, z, float(j - m), j)
        k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1, j - m + 0.5, j)
        k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2, j - m + 0.5, j)
        k4 = rhs(t + h, z + h * k3, float(j - m + 1), j)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise IntegrationDiverged((j + 1) * h)
        states[j + 1] = z
        yout[j + 1] = float(C @ z[:n])

    t_axis = np.arange(total + 1) * h
    names = tuple(f"x{i + 1}" for i in range(n)) + ("xf",)
    return Trajectory(t=t_axis, states=states, y=yout, step=h, state_names=names)


# ---------------------------------------------------------------------------
# plain ODE systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeSystem:
    """Autonomous-or-not ODE with a scalar output map.

    ``kind``/``params`` tag well-known vector fields so the integrator can
    dispatch to a dedicated kernel; arbitrary callables integrate through the
    generic path.  ``output`` defaults to the first state component.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    output: Optional[Callable[[np.ndarray], float]] = None
    kind: str = ""
    params: dict = field(default_factory=dict)


def van_der_pol(mu0: float) -> OdeSystem:
    """Oscillator y'' + mu0 (y^2 - 1) y' + y = 0, state [y, y']."""

    def rhs(t, s):
        return np.array([s[1], -mu0 * (s[0] * s[0] - 1.0) * s[1] - s[0]])

    return OdeSystem(dimension=2, rhs=rhs, kind="van_der_pol", params={"mu0": mu0})


def lotka_volterra(zeta: float, rho: float, xi: float, phi: float) -> OdeSystem:
    """Predator-prey pair y' = zeta y - rho x y, x' = -xi x + phi x y.

    State is [prey, predator]; the output is the prey population.
    """

    def rhs(t, s):
        return np.array(
            [zeta * s[0] - rho * s[1] * s[0], -xi * s[1] + phi * s[1] * s[0]]
        )

    return OdeSystem(
        dimension=2,
        rhs=rhs,
        kind="lotka_volterra",
        params={"zeta": zeta, "rho": rho, "xi": xi, "phi": phi},
    )


def lotka_volterra_invariant(sys: OdeSystem, states: np.ndarray) -> np.ndarray:
    """Conserved quantity phi*y - xi*ln y + rho*x - zeta*ln x along states."""
    p = sys.params
    y, x = states[:, 0], states[:, 1]
    return p["phi"] * y - p["xi"] * np.log(y) + p["rho"] * x - p["zeta"] * np.log(x)


def integrate_ode(sys: OdeSystem, state0, t_end: float, h: float) -> Trajectory:
    """Classic RK4 with a fixed step from t = 0 to ``t_end``."""
    if h <= 0:
        raise ValueError("h must be positive")
    steps = int(round(t_end / h))
    state0 = np.asarray(state0, dtype=float)
    if state0.shape != (sys.dimension,):
        raise ValueError(f"state0 must have shape ({sys.dimension},)")

    if sys.kind == "van_der_pol":
        states = _kernels.integrate_van_der_pol(
            sys.params["mu0"], state0[0], state0[1], h, steps
        )
    elif sys.kind == "lotka_volterra":
        p = sys.params
        states = _kernels.integrate_lotka_volterra(
            p["zeta"], p["rho"], p["xi"], p["phi"], state0[0], state0[1], h, steps
        )
    else:
        states = _integrate_generic(sys.rhs, state0, h, steps)
    if not np.all(np.isfinite(states[-1])):
        bad = int(np.flatnonzero(~np.isfinite(states).all(axis=1))[0])
        raise IntegrationDiverged(bad * h)

    if sys.output is None:
        y = states[:, 0].copy()
    else:
        y = np.array([sys.output(s) for s in states])
    return Trajectory(t=np.arange(steps + 1) * h, states=states, y=y, step=h)


def _integrate_generic(rhs, state0, h, steps):
    states = np.empty((steps + 1, state0.size))
    states[0] = state0
    z = state0.copy()
    for j in range(steps):
        t = j * h
        k1 = rhs(t, z)
        k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2)
        k4 = rhs(t + h, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise IntegrationDiverged((j + 1) * h)
        states[j + 1] = z
    return states


# ---------------------------------------------------------------------------
# sampling and inputs
# ---------------------------------------------------------------------------

def sample(traj: Trajectory, sample_time: float, bias: float = 0.0, v=1.0) -> SignalRecord:
    """Uniformly sample the trajectory output: y_k = y(k*Ts) + bias.

    ``v`` fills the input channel of the record: a constant, an array of the
    right length, or a callable evaluated at the sample instants.
    """
    stride_f = sample_time / traj.step
    stride = int(round(stride_f))
    if stride < 1 or abs(stride * traj.step - sample_time) > 1e-12 * max(1.0, sample_time):
        raise ValueError(
            f"sample_time {sample_time!r} must be a multiple of the step {traj.step!r}"
        )
    y = traj.y[::stride] + bias
    n = y.size
    if callable(v):
        v_arr = np.array([float(v(k * sample_time)) for k in range(n)])
    else:
        v_arr = np.asarray(v, dtype=float)
        if v_arr.ndim == 0:
            v_arr = np.full(n, float(v_arr))
        elif v_arr.shape != (n,):
            raise ValueError(f"v must be scalar or length {n}")
    return SignalRecord(v=v_arr, y=y, sample_time=sample_time)


def piecewise_constant_input(
    seed: int, mean: float, std: float, sample_time: float
) -> Callable[[float], float]:
    """Zero-order-hold Gaussian input: one draw per sample interval.

    Deterministic under the seed regardless of evaluation order; the draw
    cache grows on demand and is always regenerated from the seed prefix.
    """
    if std < 0:
        raise ValueError("std must be nonnegative")
    if sample_time <= 0:
        raise ValueError("sample_time must be positive")
    cache = {"draws": np.empty(0)}

    def input_fn(t: float) -> float:
        k = int(math.floor(t / sample_time + 1e-9))
        if k < 0:
            k = 0
        draws = cache["draws"]
        if k >= draws.size:
            rng = np.random.default_rng(seed)
            cache["draws"] = rng.normal(mean, std, size=max(2 * draws.size, k + 1024))
            draws = cache["draws"]
        return float(draws[k])

    return input_fn
