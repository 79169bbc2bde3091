"""Pure NumPy/Python implementations of the hot kernels.

These mirror the compiled extension in ``_core.pyx`` one function for one
function.  Sequential recursions (plant simulation, recursive least squares,
fixed-step integrators) are plain loops over Python floats or per-row NumPy
calls; everything that can be vectorised is vectorised.
"""
from bisect import bisect_left

import numpy as np

BACKEND = "python"


# ---------------------------------------------------------------------------
# piecewise-linear basis
# ---------------------------------------------------------------------------

def partition_index(c, u):
    """1-based index of the partition interval containing ``u``.

    Intervals are left-open, right-closed: interval 1 is (-inf, c_1],
    interval i is (c_{i-1}, c_i], interval p+1 is (c_p, inf).
    """
    return bisect_left(c, u) + 1


def basis_scalar(c, r, u):
    """Regressor vector of the slope parameterisation at a single point."""
    p = len(c)
    out = np.zeros(p + 1)
    d = bisect_left(c, u) + 1
    if d <= r:
        out[d - 1] = u - c[d - 1]
        for j in range(d + 1, r + 1):
            out[j - 1] = c[j - 2] - c[j - 1]
    else:
        for j in range(r + 1, d):
            out[j - 1] = c[j - 1] - c[j - 2]
        out[d - 1] = u - c[d - 2]
    return out


def eta_matrix(c, r, u):
    """Stack of basis vectors, one row per entry of ``u``.

    Uses the signed-overlap identity: entry j is the (signed) length of the
    intersection of partition interval j with the interval between the anchor
    breakpoint and ``u``.  Identical to the per-point expansion, but without
    a Python loop over rows.
    """
    u = np.asarray(u, dtype=float)
    cr = c[r - 1]
    left = np.concatenate(([-np.inf], c))
    right = np.concatenate((c, [np.inf]))
    upper = np.minimum(right[None, :], np.maximum(u, cr)[:, None])
    lower = np.maximum(left[None, :], np.minimum(u, cr)[:, None])
    overlap = np.clip(upper - lower, 0.0, None)
    return np.where((u > cr)[:, None], overlap, -overlap)


def _eval_scalar(c, mu, r, kappa, u):
    d = bisect_left(c, u) + 1
    acc = 0.0
    if d <= r:
        acc += mu[d - 1] * (u - c[d - 1])
        for j in range(d + 1, r + 1):
            acc += mu[j - 1] * (c[j - 2] - c[j - 1])
    else:
        for j in range(r + 1, d):
            acc += mu[j - 1] * (c[j - 1] - c[j - 2])
        acc += mu[d - 1] * (u - c[d - 2])
    return acc + kappa


def cpl_eval_many(c, mu, r, kappa, u):
    """Evaluate the piecewise-linear map at every entry of ``u``."""
    u = np.asarray(u, dtype=float)
    return eta_matrix(c, r, u) @ np.asarray(mu, dtype=float) + kappa


# ---------------------------------------------------------------------------
# plant simulation
# ---------------------------------------------------------------------------

def simulate_dttdl_cpl(a, b, beta, d, v, y_init, c, mu, r, kappa, limit):
    """Run the delayed Lur'e recursion with a piecewise-linear feedback map.

    Returns ``(y, bad_index)`` where ``bad_index`` is -1 on success or the
    first step at which the output left [-limit, limit] or went non-finite.
    """
    n = len(a)
    N = len(v)
    al = [float(x) for x in a]
    bl = [float(x) for x in b]
    cl = [float(x) for x in c]
    ml = [float(x) for x in mu]
    y = np.empty(N)
    head = min(n + d + 1, N)
    y[:head] = y_init[:head]
    yl = y.tolist()
    vl = [float(x) for x in v]
    sn = [0.0] * N
    for j in range(d + 1, head):
        sn[j] = _eval_scalar(cl, ml, r, kappa, yl[j - d] - yl[j - d - 1])
    for k in range(n + d + 1, N):
        j = k - 1
        sn[j] = _eval_scalar(cl, ml, r, kappa, yl[j - d] - yl[j - d - 1])
        acc = 0.0
        for i in range(1, n + 1):
            acc += -al[i - 1] * yl[k - i] + bl[i - 1] * (beta + sn[k - i]) * vl[k - i]
        yl[k] = acc
        if not (-limit <= acc <= limit):
            return np.asarray(yl), k
    return np.asarray(yl), -1


# ---------------------------------------------------------------------------
# recursive least squares
# ---------------------------------------------------------------------------

def rls_solve(phi, y, theta0, p0, lam):
    """Exponentially weighted RLS over the rows of ``phi``."""
    dim = phi.shape[1]
    P = np.eye(dim) * p0
    theta = np.array(theta0, dtype=float, copy=True)
    for m in range(phi.shape[0]):
        row = phi[m]
        p_row = P @ row
        gain = p_row / (lam + row @ p_row)
        theta += gain * (y[m] - row @ theta)
        P -= np.outer(gain, p_row)
        if lam != 1.0:
            P /= lam
    return theta


# ---------------------------------------------------------------------------
# named fixed-step integrators (scalar loops: per-step NumPy overhead would
# dominate at 10^6+ steps)
# ---------------------------------------------------------------------------

def integrate_van_der_pol(mu0, y0, dy0, h, steps):
    out = np.empty((steps + 1, 2))
    yv = float(y0)
    dy = float(dy0)
    out[0, 0] = yv
    out[0, 1] = dy
    for j in range(steps):
        k1y = dy
        k1d = -mu0 * (yv * yv - 1.0) * dy - yv
        y2 = yv + 0.5 * h * k1y
        d2 = dy + 0.5 * h * k1d
        k2y = d2
        k2d = -mu0 * (y2 * y2 - 1.0) * d2 - y2
        y3 = yv + 0.5 * h * k2y
        d3 = dy + 0.5 * h * k2d
        k3y = d3
        k3d = -mu0 * (y3 * y3 - 1.0) * d3 - y3
        y4 = yv + h * k3y
        d4 = dy + h * k3d
        k4y = d4
        k4d = -mu0 * (y4 * y4 - 1.0) * d4 - y4
        yv += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        out[j + 1, 0] = yv
        out[j + 1, 1] = dy
    return out


def integrate_lotka_volterra(zeta, rho, xi, phi, y0, x0, h, steps):
    out = np.empty((steps + 1, 2))
    yv = float(y0)
    xv = float(x0)
    out[0, 0] = yv
    out[0, 1] = xv
    for j in range(steps):
        k1y = zeta * yv - rho * xv * yv
        k1x = -xi * xv + phi * xv * yv
        y2 = yv + 0.5 * h * k1y
        x2 = xv + 0.5 * h * k1x
        k2y = zeta * y2 - rho * x2 * y2
        k2x = -xi * x2 + phi * x2 * y2
        y3 = yv + 0.5 * h * k2y
        x3 = xv + 0.5 * h * k2x
        k3y = zeta * y3 - rho * x3 * y3
        k3x = -xi * x3 + phi * x3 * y3
        y4 = yv + h * k3y
        x4 = xv + h * k3x
        k4y = zeta * y4 - rho * x4 * y4
        k4x = -xi * x4 + phi * x4 * y4
        yv += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        xv += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        out[j + 1, 0] = yv
        out[j + 1, 1] = xv
    return out
