# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: piecewise-linear basis evaluation, the delayed
Lur'e recursion, recursive least squares, and the named RK4 integrators.
Mirrors ``pyloop.py``; selected at import by ``sesid._kernels``.
"""
import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport daxpy, ddot, dger, dsymv

cnp.import_array()

BACKEND = "compiled"


cdef inline int _partition_index(const double* c, int p, double u) nogil:
    # first index i (0-based) with c[i] >= u, i.e. bisect_left, then 1-based
    cdef int lo = 0, hi = p, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if c[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo + 1


cdef inline double _eval_scalar(const double* c, const double* mu, int p,
                                int r, double kappa, double u) nogil:
    cdef int d = _partition_index(c, p, u)
    cdef double acc = 0.0
    cdef int j
    if d <= r:
        acc += mu[d - 1] * (u - c[d - 1])
        for j in range(d + 1, r + 1):
            acc += mu[j - 1] * (c[j - 2] - c[j - 1])
    else:
        for j in range(r + 1, d):
            acc += mu[j - 1] * (c[j - 1] - c[j - 2])
        acc += mu[d - 1] * (u - c[d - 2])
    return acc + kappa


def partition_index(const double[::1] c, double u):
    return _partition_index(&c[0], c.shape[0], u)


def basis_scalar(const double[::1] c, int r, double u):
    cdef int p = c.shape[0]
    out_arr = np.zeros(p + 1)
    cdef double[::1] out = out_arr
    cdef int d = _partition_index(&c[0], p, u)
    cdef int j
    if d <= r:
        out[d - 1] = u - c[d - 1]
        for j in range(d + 1, r + 1):
            out[j - 1] = c[j - 2] - c[j - 1]
    else:
        for j in range(r + 1, d):
            out[j - 1] = c[j - 1] - c[j - 2]
        out[d - 1] = u - c[d - 2]
    return out_arr


def eta_matrix(const double[::1] c, int r, const double[::1] u):
    cdef int p = c.shape[0]
    cdef int m = u.shape[0]
    out_arr = np.zeros((m, p + 1))
    cdef double[:, ::1] out = out_arr
    cdef int i, j, d
    cdef double ui
    for i in range(m):
        ui = u[i]
        d = _partition_index(&c[0], p, ui)
        if d <= r:
            out[i, d - 1] = ui - c[d - 1]
            for j in range(d + 1, r + 1):
                out[i, j - 1] = c[j - 2] - c[j - 1]
        else:
            for j in range(r + 1, d):
                out[i, j - 1] = c[j - 1] - c[j - 2]
            out[i, d - 1] = ui - c[d - 2]
    return out_arr


def cpl_eval_many(const double[::1] c, const double[::1] mu, int r, double kappa,
                  const double[::1] u):
    cdef int p = c.shape[0]
    cdef int m = u.shape[0]
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef int i
    for i in range(m):
        out[i] = _eval_scalar(&c[0], &mu[0], p, r, kappa, u[i])
    return out_arr


def simulate_dttdl_cpl(const double[::1] a, const double[::1] b, double beta, int d,
                       const double[::1] v, const double[::1] y_init,
                       const double[::1] c, const double[::1] mu, int r, double kappa,
                       double limit):
    cdef int n = a.shape[0]
    cdef int N = v.shape[0]
    cdef int p = c.shape[0]
    y_arr = np.empty(N)
    cdef double[::1] y = y_arr
    cdef double[::1] sn = np.zeros(N)
    cdef int head = n + d + 1
    if head > N:
        head = N
    cdef int i, j, k
    cdef double acc
    for k in range(head):
        y[k] = y_init[k]
    for j in range(d + 1, head):
        sn[j] = _eval_scalar(&c[0], &mu[0], p, r, kappa, y[j - d] - y[j - d - 1])
    for k in range(n + d + 1, N):
        j = k - 1
        sn[j] = _eval_scalar(&c[0], &mu[0], p, r, kappa, y[j - d] - y[j - d - 1])
        acc = 0.0
        for i in range(1, n + 1):
            acc += -a[i - 1] * y[k - i] + b[i - 1] * (beta + sn[k - i]) * v[k - i]
        y[k] = acc
        if not (acc >= -limit and acc <= limit):
            return y_arr, k
    return y_arr, -1


def rls_solve(const double[:, ::1] phi, const double[::1] y, const double[::1] theta0,
              double p0, double lam):
    cdef int rows = phi.shape[0]
    cdef int dim = phi.shape[1]
    P_arr = np.eye(dim) * p0
    theta_arr = np.array(theta0, dtype=float)
    cdef double[:, ::1] P = P_arr
    cdef double[::1] theta = theta_arr
    work_arr = np.empty(dim)
    cdef double[::1] work = work_arr
    cdef int m, inc = 1
    cdef double denom, err, alpha, zero = 0.0, one = 1.0, inv_lam = 1.0 / lam
    cdef char uplo = b'L'
    cdef const double* phi_row
    for m in range(rows):
        phi_row = &phi[m, 0]
        # work = P @ phi_row; P stays fully symmetric (dger below applies a
        # symmetric rank-1 update to the whole array)
        dsymv(&uplo, &dim, &one, &P[0, 0], &dim, <double*>phi_row, &inc, &zero,
              &work[0], &inc)
        denom = lam + ddot(&dim, <double*>phi_row, &inc, &work[0], &inc)
        err = y[m] - ddot(&dim, <double*>phi_row, &inc, &theta[0], &inc)
        alpha = err / denom
        daxpy(&dim, &alpha, &work[0], &inc, &theta[0], &inc)
        # P -= outer(work, work) / denom, then P /= lam
        alpha = -1.0 / denom
        dger(&dim, &dim, &alpha, &work[0], &inc, &work[0], &inc, &P[0, 0], &dim)
        if lam != 1.0:
            P_arr *= inv_lam
    return theta_arr


def integrate_van_der_pol(double mu0, double y0, double dy0, double h,
                          long steps):
    out_arr = np.empty((steps + 1, 2))
    cdef double[:, ::1] out = out_arr
    cdef double yv = y0, dy = dy0
    cdef double k1y, k1d, k2y, k2d, k3y, k3d, k4y, k4d, y2, d2, y3, d3, y4, d4
    cdef long j
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
    return out_arr


def integrate_lotka_volterra(double zeta, double rho, double xi, double phi,
                             double y0, double x0, double h, long steps):
    out_arr = np.empty((steps + 1, 2))
    cdef double[:, ::1] out = out_arr
    cdef double yv = y0, xv = x0
    cdef double k1y, k1x, k2y, k2x, k3y, k3x, k4y, k4x, y2, x2, y3, x3, y4, x4
    cdef long j
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
    return out_arr
