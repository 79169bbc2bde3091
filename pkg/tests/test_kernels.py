"""Cross-backend agreement: compiled extension vs pure-Python fallback.

Skipped entirely when the compiled extension is unavailable.
"""
import numpy as np
import pytest

from sesid._kernels import pyloop

core = pytest.importorskip("sesid._kernels._core")


def random_grid(rng, p):
    c = np.cumsum(0.1 + rng.random(p))
    return np.ascontiguousarray(c - c[p // 2])


class TestAgainstFallback:
    def test_partition_index(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            c = random_grid(rng, int(rng.integers(1, 12)))
            for u in rng.normal(scale=3.0, size=40):
                assert core.partition_index(c, float(u)) == pyloop.partition_index(
                    c, float(u)
                )
        # boundary hits exactly on breakpoints
        c = np.array([-1.0, 0.0, 1.0])
        for u, want in [(-1.0, 1), (0.0, 2), (1.0, 3), (1.0 + 1e-12, 4)]:
            assert core.partition_index(c, u) == pyloop.partition_index(c, u) == want

    def test_basis_and_eta_matrix(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            p = int(rng.integers(1, 10))
            c = random_grid(rng, p)
            r = int(rng.integers(1, p + 1))
            us = np.ascontiguousarray(rng.normal(scale=3.0, size=25))
            np.testing.assert_array_equal(
                core.eta_matrix(c, r, us), pyloop.eta_matrix(c, r, us)
            )
            for u in us:
                np.testing.assert_array_equal(
                    core.basis_scalar(c, r, float(u)), pyloop.basis_scalar(c, r, float(u))
                )

    def test_cpl_eval(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            p = int(rng.integers(1, 10))
            c = random_grid(rng, p)
            mu = rng.normal(size=p + 1)
            r = int(rng.integers(1, p + 1))
            kappa = float(rng.normal())
            us = np.ascontiguousarray(rng.normal(scale=3.0, size=25))
            np.testing.assert_allclose(
                core.cpl_eval_many(c, mu, r, kappa, us),
                pyloop.cpl_eval_many(c, mu, r, kappa, us),
                rtol=1e-13, atol=1e-13,
            )

    def test_simulate(self):
        rng = np.random.default_rng(3)
        a = np.array([-1.6, 0.8])
        b = np.array([1.0, -0.5])
        c = np.arange(-10.0, 11.0)
        vals = 2.5 * np.tanh(1.2 * c / 2.5)
        mu = np.empty(22)
        mu[1:-1] = np.diff(vals)
        mu[0], mu[-1] = mu[1], mu[-2]
        v = np.ascontiguousarray(rng.normal(5.0, 1.2, size=3000))
        y_init = np.ascontiguousarray(rng.normal(size=7))
        y1, bad1 = core.simulate_dttdl_cpl(a, b, 7.5, 4, v, y_init, c, mu, 11, 0.0, 1e12)
        y2, bad2 = pyloop.simulate_dttdl_cpl(a, b, 7.5, 4, v, y_init, c, mu, 11, 0.0, 1e12)
        assert bad1 == bad2 == -1
        np.testing.assert_allclose(y1, y2, rtol=1e-12, atol=1e-12)

    def test_rls(self):
        rng = np.random.default_rng(4)
        phi = np.ascontiguousarray(rng.normal(size=(300, 12)))
        y = np.ascontiguousarray(rng.normal(size=300))
        t0 = np.zeros(12)
        # BLAS and NumPy sum in different orders; the recursion compounds the
        # ulp-level differences over the rows
        for lam in (1.0, 0.98):
            th1 = core.rls_solve(phi, y, t0, 1e4, lam)
            th2 = pyloop.rls_solve(phi, y, t0, 1e4, lam)
            np.testing.assert_allclose(th1, th2, rtol=1e-7, atol=1e-12)

    def test_integrators(self):
        s1 = core.integrate_van_der_pol(1.0, 0.1, 0.0, 1e-3, 5000)
        s2 = pyloop.integrate_van_der_pol(1.0, 0.1, 0.0, 1e-3, 5000)
        np.testing.assert_allclose(s1, s2, rtol=1e-12, atol=1e-14)
        l1 = core.integrate_lotka_volterra(2 / 3, 4 / 3, 1.0, 1.0, 1.0, 1.0, 1e-3, 5000)
        l2 = pyloop.integrate_lotka_volterra(2 / 3, 4 / 3, 1.0, 1.0, 1.0, 1.0, 1e-3, 5000)
        np.testing.assert_allclose(l1, l2, rtol=1e-12, atol=1e-14)
