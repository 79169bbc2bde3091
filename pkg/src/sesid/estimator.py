"""Two-stage least-squares identification of the delayed Lur'e model.

The output recursion is linear in the stacked parameter vector
``theta = [a; vec(mu b^T); beta b]`` except that the last two blocks are
bilinear in the unknowns.  Replacing them with free vectors
``theta_A in R^{n(p+1)}`` and ``theta_Lambda`` gives a plain linear
least-squares problem whose residual, plus ``sigma_max(Phi_eta) *
||vec^-1(theta_A) - mu b^T||_F``, upper-bounds the true fit cost.  The bound
is minimised sequentially: solve for ``theta_tilde = [a; theta_A;
theta_Lambda]``, then split ``theta_A`` into slopes and numerator
coefficients — by a fixed-numerator projection when the input varies, or by
a rank-1 SVD truncation when the input is constant (there ``theta_Lambda``
collapses to the scalar ``beta * sum(b)``).

``vec`` is column-stacking throughout: block j of ``theta_A`` multiplies the
basis rows built from lag j, so it equals ``b_j * mu`` and
``vec^-1(theta_A)`` is the (p+1) x n matrix ``mu b^T``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .cpl import CplFunction
from .lure import DttdlModel, SignalRecord

#: relative gap under which the two leading singular values are reported as
#: an ambiguous rank-1 factorisation
SVD_TIE_TOL = 1e-10


class DegenerateFit(RuntimeError):
    """The solved parameters do not determine a model (e.g. theta_Lambda = 0)."""


@dataclass(frozen=True)
class RegressionProblem:
    """Stacked regression blocks for the window k = l_l .. l_u.

    ``Phi_Y`` holds the lagged outputs (entering the full regressor with a
    minus sign), ``Phi_etaY`` the input-scaled basis rows of the measured
    delayed output differences, ``Phi_V`` the lagged inputs (or the constant
    input column).
    """

    Y: np.ndarray
    Phi_Y: np.ndarray
    Phi_etaY: np.ndarray
    Phi_V: np.ndarray
    l_l: int
    l_u: int
    n_hat: int
    d_hat: int
    c_hat: np.ndarray
    r_hat: int
    constant_input: bool
    v0: float = 0.0

    @property
    def rows(self) -> int:
        return self.Y.size

    def full_matrix(self) -> np.ndarray:
        return np.hstack([-self.Phi_Y, self.Phi_etaY, self.Phi_V])


@dataclass(frozen=True)
class ThetaTilde:
    """Linear-stage solution split into its blocks."""

    a_hat: np.ndarray
    theta_A: np.ndarray
    theta_Lambda: np.ndarray  # n-vector (general) or 1-vector (constant input)
    rank: Optional[int] = None

    def slope_matrix(self, p_plus_1: int) -> np.ndarray:
        """vec^-1(theta_A): column j is the slope block of lag j + 1."""
        n_hat = self.a_hat.size
        return self.theta_A.reshape((p_plus_1, n_hat), order="F")


@dataclass(frozen=True)
class IdentifiedModel:
    """Identified plant plus the provenance and fit diagnostics."""

    model: DttdlModel
    path: str  # "general" or "constant_input"
    beta_choice: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            **self.model.to_dict(),
            "diagnostics": {**self.diagnostics, "path": self.path,
                            "beta_choice": self.beta_choice},
        }

    def save(self, path) -> None:
        import json

        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _anchor_index(c_hat: np.ndarray) -> int:
    """1-based index of the zero breakpoint, required for identification."""
    hits = np.flatnonzero(np.abs(c_hat) <= 1e-12)
    if hits.size != 1:
        raise ValueError(
            "identification requires exactly one zero breakpoint in c_hat "
            "(the feedback map is pinned to pass through the origin)"
        )
    return int(hits[0]) + 1


def build_regression(
    record: SignalRecord,
    n_hat: int,
    d_hat: int,
    c_hat,
    l_l: int,
    l_u: int,
    constant_input: bool = False,
) -> RegressionProblem:
    """Assemble the regression blocks from a measured record.

    Regresses y_k on the n_hat lagged outputs, the basis rows of the delayed
    output differences y_{k-d_hat} - y_{k-d_hat-1} at each lag (scaled by the
    lagged input, or by the constant input value), and the lagged inputs
    (general case) or a constant column (constant-input case).
    """
    c_hat = np.ascontiguousarray(c_hat, dtype=float)
    if np.any(np.diff(c_hat) <= 0):
        raise ValueError("c_hat must be strictly increasing")
    r_hat = _anchor_index(c_hat)
    if n_hat < 1 or d_hat < 0:
        raise ValueError("need n_hat >= 1 and d_hat >= 0")
    if not (l_u >= l_l >= n_hat + d_hat + 1):
        raise ValueError(f"need l_u >= l_l >= n_hat + d_hat + 1 = {n_hat + d_hat + 1}")
    y, v = record.y, record.v
    if l_u >= len(record):
        raise IndexError(
            f"window [{l_l}, {l_u}] needs {l_u + 1} samples, record has {len(record)}"
        )

    p = c_hat.size
    rows = l_u - l_l + 1
    Y = y[l_l : l_u + 1].copy()

    # lagged outputs: column i - 1 holds y_{k-i}
    Phi_Y = np.empty((rows, n_hat))
    for i in range(1, n_hat + 1):
        Phi_Y[:, i - 1] = y[l_l - i : l_u - i + 1]

    # basis rows of the measured delayed differences, one per index that any
    # lag touches (j = k - i for k in the window, i = 1..n_hat)
    j_lo = l_l - n_hat
    j_hi = l_u - 1
    yf = y[j_lo - d_hat : j_hi - d_hat + 1] - y[j_lo - d_hat - 1 : j_hi - d_hat]
    eta_rows = _kernels.eta_matrix(c_hat, r_hat, np.ascontiguousarray(yf))

    Phi_etaY = np.empty((rows, n_hat * (p + 1)))
    v0 = 0.0
    if constant_input:
        v_used = v[j_lo : l_u + 1]
        v0 = float(v_used[0])
        if np.any(np.abs(v_used - v0) > 1e-9 * max(1.0, abs(v0))):
            raise ValueError("constant_input set but the input channel varies")
        for i in range(1, n_hat + 1):
            lo = n_hat - i
            Phi_etaY[:, (i - 1) * (p + 1) : i * (p + 1)] = v0 * eta_rows[lo : lo + rows]
        Phi_V = np.full((rows, 1), v0)
    else:
        for i in range(1, n_hat + 1):
            lo = n_hat - i
            Phi_etaY[:, (i - 1) * (p + 1) : i * (p + 1)] = (
                v[l_l - i : l_u - i + 1, None] * eta_rows[lo : lo + rows]
            )
        Phi_V = np.empty((rows, n_hat))
        for i in range(1, n_hat + 1):
            Phi_V[:, i - 1] = v[l_l - i : l_u - i + 1]

    return RegressionProblem(
        Y=Y, Phi_Y=Phi_Y, Phi_etaY=Phi_etaY, Phi_V=Phi_V,
        l_l=l_l, l_u=l_u, n_hat=n_hat, d_hat=d_hat,
        c_hat=c_hat, r_hat=r_hat, constant_input=constant_input, v0=v0,
    )


def solve_theta_tilde(
    prob: RegressionProblem,
    solver: str = "batch",
    theta0=None,
    p0: float = 1e6,
    forgetting: float = 1.0,
) -> ThetaTilde:
    """Solve the linear stage min ||Y - Phi theta_tilde||.

    ``solver="batch"`` returns the minimum-norm least-squares solution (SVD
    based; rank deficiency is reported in the result, not an error, because
    basis columns for intervals the data never visits are structurally
    zero).  ``solver="rls"`` runs the exponentially weighted recursion row by
    row with P initialised to ``p0 * I``.
    """
    phi = prob.full_matrix()
    dim = phi.shape[1]
    rank = None
    if solver == "batch":
        theta, _, rank, _ = np.linalg.lstsq(phi, prob.Y, rcond=None)
        rank = int(rank)
    elif solver == "rls":
        if forgetting <= 0 or forgetting > 1:
            raise ValueError("forgetting factor must be in (0, 1]")
        if p0 <= 0:
            raise ValueError("p0 must be positive")
        theta0 = np.zeros(dim) if theta0 is None else np.ascontiguousarray(theta0, float)
        if theta0.shape != (dim,):
            raise ValueError(f"theta0 must have length {dim}")
        theta = _kernels.rls_solve(
            np.ascontiguousarray(phi), np.ascontiguousarray(prob.Y),
            theta0, float(p0), float(forgetting),
        )
    else:
        raise ValueError(f"unknown solver {solver!r}")

    n_hat = prob.n_hat
    n_eta = prob.Phi_etaY.shape[1]
    return ThetaTilde(
        a_hat=theta[:n_hat],
        theta_A=theta[n_hat : n_hat + n_eta],
        theta_Lambda=theta[n_hat + n_eta :],
        rank=rank,
    )


def prop1_minimizer(A, r) -> np.ndarray:
    """Unique minimiser of ||A - x r^T||_F^2 over x, namely A r / (r^T r)."""
    A = np.asarray(A, dtype=float)
    r = np.asarray(r, dtype=float)
    rtr = float(r @ r)
    if rtr == 0.0:
        raise ValueError("r must be nonzero")
    return A @ r / rtr


def finalize_general(
    tt: ThetaTilde, beta_hat: float, c_hat, d_hat: int = 0
) -> IdentifiedModel:
    """Split the linear-stage estimate with a user-chosen bias gain.

    ``beta_hat`` is a free nonzero choice (the bias gain and the numerator
    are only identifiable as a product): b = theta_Lambda / beta_hat, and the
    slope vector is the best fixed-numerator fit mu = M b / (b^T b) with
    M = vec^-1(theta_A).
    """
    if beta_hat == 0:
        raise ValueError("beta_hat must be nonzero")
    c_hat = np.asarray(c_hat, dtype=float)
    r_hat = _anchor_index(c_hat)
    b_hat = tt.theta_Lambda / beta_hat
    if not np.any(b_hat):
        raise DegenerateFit("theta_Lambda is zero: numerator unidentifiable")
    M = tt.slope_matrix(c_hat.size + 1)
    mu_hat = prop1_minimizer(M, b_hat)
    model = DttdlModel(
        a=tt.a_hat, b=b_hat, beta=float(beta_hat), d=int(d_hat),
        nonlinearity=CplFunction(c=c_hat, mu=mu_hat, r=r_hat, kappa=0.0),
    )
    return IdentifiedModel(model=model, path="general", beta_choice=float(beta_hat))


def finalize_constant(
    tt: ThetaTilde, beta_ls: float, c_hat, d_hat: int = 0
) -> IdentifiedModel:
    """Split the constant-input estimate through a rank-1 SVD truncation.

    The product mu b^T is recovered as sigma_1 u_1 v_1^T of vec^-1(theta_A)
    and separated with the free nonzero scale ``beta_ls``; the bias gain then
    follows from the scalar theta_Lambda = beta * sum(b).
    """
    if beta_ls == 0:
        raise ValueError("beta_ls must be nonzero")
    c_hat = np.asarray(c_hat, dtype=float)
    r_hat = _anchor_index(c_hat)
    M = tt.slope_matrix(c_hat.size + 1)
    if not np.any(M):
        raise DegenerateFit("vec^-1(theta_A) is zero: slopes unidentifiable")
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    ambiguous = S.size > 1 and (S[0] - S[1]) <= SVD_TIE_TOL * S[0]
    if ambiguous:
        warnings.warn(
            "leading singular value is (nearly) repeated; the rank-1 "
            "factorisation is not unique",
            RuntimeWarning,
            stacklevel=2,
        )
    u1, v1 = U[:, 0], Vt[0]
    first = int(np.flatnonzero(v1)[0])
    if v1[first] < 0:  # fix the sign so results do not depend on the SVD backend
        u1, v1 = -u1, -v1
    mu_hat = beta_ls * S[0] * u1
    b_hat = v1 / beta_ls
    denom = float(np.sum(b_hat))
    theta_L = float(tt.theta_Lambda[0])
    if abs(denom) <= 1e-12 * np.abs(b_hat).sum():
        raise DegenerateFit("sum(b_hat) = 0: bias gain undefined")
    beta_hat = theta_L / denom
    model = DttdlModel(
        a=tt.a_hat, b=b_hat, beta=beta_hat, d=int(d_hat),
        nonlinearity=CplFunction(c=c_hat, mu=mu_hat, r=r_hat, kappa=0.0),
    )
    return IdentifiedModel(
        model=model,
        path="constant_input",
        beta_choice=float(beta_ls),
        diagnostics={"ambiguous_rank1": bool(ambiguous)},
    )


def _assembled_theta(ident: IdentifiedModel, constant_input: bool) -> np.ndarray:
    m = ident.model
    mu = m.nonlinearity.mu
    outer = np.outer(mu, m.b).flatten(order="F")
    last = np.array([m.beta * np.sum(m.b)]) if constant_input else m.beta * m.b
    return np.concatenate([m.a, outer, last])


def identify(
    record: SignalRecord,
    n_hat: int,
    d_hat: int,
    c_hat,
    beta_choice: float,
    constant_input: bool = False,
    l_l: Optional[int] = None,
    l_u: Optional[int] = None,
    solver: str = "batch",
    theta0=None,
    p0: float = 1e6,
    forgetting: float = 1.0,
) -> IdentifiedModel:
    """End-to-end identification: regression, linear solve, parameter split.

    ``beta_choice`` is the free scale of the split (the bias gain itself in
    the general case, the separation scale in the constant-input case).  The
    window defaults to the largest admissible one.  Diagnostics record the
    linear residual ``J_LS``, the factorisation residual ``J_A``, the basis
    block's largest singular value, the recomputed cost of the assembled
    model, and the solver rank when available.
    """
    if l_l is None:
        l_l = n_hat + d_hat + 1
    if l_u is None:
        l_u = len(record) - 1
    prob = build_regression(record, n_hat, d_hat, c_hat, l_l, l_u, constant_input)
    tt = solve_theta_tilde(prob, solver=solver, theta0=theta0, p0=p0,
                           forgetting=forgetting)
    if constant_input:
        ident = finalize_constant(tt, beta_choice, prob.c_hat, d_hat=d_hat)
    else:
        ident = finalize_general(tt, beta_choice, prob.c_hat, d_hat=d_hat)
    model = ident.model

    phi = prob.full_matrix()
    theta_tilde_vec = np.concatenate([tt.a_hat, tt.theta_A, tt.theta_Lambda])
    J_LS = float(np.linalg.norm(prob.Y - phi @ theta_tilde_vec))
    M = tt.slope_matrix(prob.c_hat.size + 1)
    J_A = float(
        np.linalg.norm(M - np.outer(model.nonlinearity.mu, model.b), "fro")
    )
    sigma_max = float(np.linalg.svd(prob.Phi_etaY, compute_uv=False)[0])
    theta_full = _assembled_theta(ident, constant_input)
    J_theta = float(np.linalg.norm(prob.Y - phi @ theta_full))
    ident.diagnostics.update(
        J_LS=J_LS,
        J_A=J_A,
        sigma_max_Phi_etaY=sigma_max,
        J_theta_hat=J_theta,
        cost_bound=J_LS + sigma_max * J_A,
        rank=tt.rank,
        rows=prob.rows,
        columns=phi.shape[1],
    )
    return ident
