import json
import math

import numpy as np
import pytest

from sesid import (
    CplFunction,
    eta,
    eta_many,
    evaluate,
    interval_index,
    sample_from_function,
)


def piecewise_oracle(f: CplFunction, u: float) -> float:
    """Independent evaluation: anchor at (c_r, kappa), walk slopes outward."""
    c, mu, r, kappa = f.c, f.mu, f.r, f.kappa
    p = c.size
    vals = np.empty(p)
    vals[r - 1] = kappa
    for j in range(r - 1, 0, -1):
        vals[j - 1] = vals[j] - mu[j] * (c[j] - c[j - 1])
    for j in range(r - 1, p - 1):
        vals[j + 1] = vals[j] + mu[j + 1] * (c[j + 1] - c[j])
    if u > c[p - 1]:
        return vals[p - 1] + mu[p] * (u - c[p - 1])
    idx = int(np.searchsorted(c, u, side="left"))
    return vals[idx] + mu[idx] * (u - c[idx])


def random_cpl(rng) -> CplFunction:
    p = int(rng.integers(1, 9))
    c = np.sort(rng.normal(scale=3.0, size=p))
    while p > 1 and np.any(np.diff(c) < 1e-3):
        c = np.sort(rng.normal(scale=3.0, size=p))
    return CplFunction(
        c=c,
        mu=rng.normal(size=p + 1),
        r=int(rng.integers(1, p + 1)),
        kappa=float(rng.normal()),
    )


class TestIntervalIndex:
    def test_boundary_belongs_left(self):
        f = CplFunction(c=[-1.0, 0.0, 1.0], mu=[0.0] * 4, r=2)
        assert interval_index(f, 0.0) == 2
        assert interval_index(f, -1.0) == 1
        assert interval_index(f, 1.0) == 3

    def test_beyond_last(self):
        f = CplFunction(c=[-1.0, 0.0, 1.0], mu=[0.0] * 4, r=2)
        assert interval_index(f, 1.5) == 4

    def test_integer_grid_lower_edge(self):
        c = np.arange(-10.0, 11.0)
        f = CplFunction(c=c, mu=np.zeros(22), r=11)
        assert interval_index(f, -10.0) == 1
        assert interval_index(f, 10.5) == 22

    def test_infinities_total(self):
        f = CplFunction(c=[0.0], mu=[1.0, 1.0], r=1)
        assert interval_index(f, -math.inf) == 1
        assert interval_index(f, math.inf) == 2

    def test_nan_rejected(self):
        f = CplFunction(c=[0.0], mu=[1.0, 1.0], r=1)
        with pytest.raises(ValueError):
            interval_index(f, math.nan)


class TestEta:
    def test_single_entry_at_anchor_interval(self):
        f = CplFunction(c=[0.0, 1.0], mu=[0.0] * 3, r=1)
        np.testing.assert_array_equal(eta(f, -0.5), [-0.5, 0.0, 0.0])

    def test_above_anchor_expansion(self):
        f = CplFunction(c=[0.0, 1.0], mu=[0.0] * 3, r=1)
        np.testing.assert_array_equal(eta(f, 2.0), [0.0, 1.0, 1.0])

    def test_anchor_point_gives_zero_vector(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            f = random_cpl(rng)
            vec = eta(f, float(f.c[f.r - 1]))
            assert not np.any(vec)
            assert evaluate(f, float(f.c[f.r - 1])) == f.kappa

    def test_support_between_interval_and_anchor(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            f = random_cpl(rng)
            u = float(rng.normal(scale=5.0))
            vec = eta(f, u)
            lo = min(interval_index(f, u), f.r)
            hi = max(interval_index(f, u), f.r)
            outside = np.r_[vec[: lo - 1], vec[hi:]]
            assert not np.any(outside)

    def test_matches_matrix_form(self):
        rng = np.random.default_rng(9)
        f = random_cpl(rng)
        us = rng.normal(scale=4.0, size=50)
        rows = eta_many(f, us)
        for i, u in enumerate(us):
            np.testing.assert_array_equal(rows[i], eta(f, float(u)))

    def test_rejects_nonfinite(self):
        f = CplFunction(c=[0.0], mu=[1.0, 1.0], r=1)
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                eta(f, bad)


class TestEvaluate:
    def test_two_piece_line(self):
        f = CplFunction(c=[0.0], mu=[1.0, 2.0], r=1, kappa=0.0)
        assert evaluate(f, -3.0) == -3.0
        assert evaluate(f, 5.0) == 10.0

    def test_tanh_sample_hits_breakpoint_values(self):
        c = np.arange(-10.0, 11.0)
        g = lambda u: 2.5 * math.tanh(1.2 * u / 2.5)
        f = sample_from_function(g, c, r=11)
        for ci in c:
            assert evaluate(f, float(ci)) == pytest.approx(g(ci), abs=1e-14)

    def test_matches_oracle_randomised(self):
        rng = np.random.default_rng(10)
        worst = 0.0
        for _ in range(300):
            f = random_cpl(rng)
            for u in rng.normal(scale=6.0, size=20):
                got = evaluate(f, float(u))
                want = piecewise_oracle(f, float(u))
                worst = max(worst, abs(got - want) / max(1.0, abs(want)))
        assert worst <= 1e-12

    def test_linearity_in_slopes(self):
        rng = np.random.default_rng(11)
        f = random_cpl(rng)
        for alpha in (-2.0, 0.5, 3.0):
            g = CplFunction(c=f.c, mu=alpha * f.mu, r=f.r, kappa=f.kappa)
            for u in rng.normal(scale=4.0, size=20):
                lhs = evaluate(g, float(u))
                rhs = alpha * (evaluate(f, float(u)) - f.kappa) + f.kappa
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_zero_anchor_form(self):
        f = CplFunction(c=[-1.0, 0.0, 2.0], mu=[1.0, 2.0, 3.0, 4.0], r=2, kappa=0.0)
        assert evaluate(f, 0.0) == 0.0

    def test_continuity_at_breakpoints(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            f = random_cpl(rng)
            for i, ci in enumerate(f.c):
                eps = 1e-7 * max(1.0, abs(ci))
                gap = abs(evaluate(f, ci + eps) - evaluate(f, ci - eps))
                bound = (abs(f.mu[i]) + abs(f.mu[i + 1])) * eps + 1e-12
                assert gap <= bound


class TestSampleFromFunction:
    def test_identity_gives_unit_slopes(self):
        f = sample_from_function(lambda u: u, [-1.0, 0.0, 1.0], r=2)
        np.testing.assert_allclose(f.mu, 1.0)
        assert f.kappa == 0.0

    def test_constant_gives_zero_slopes(self):
        f = sample_from_function(lambda u: 7.0, [-1.0, 0.5, 2.0], r=1)
        assert not np.any(f.mu)
        assert f.kappa == 7.0

    def test_outer_slopes_copy_interior(self):
        f = sample_from_function(lambda u: u * u, [-2.0, 0.0, 1.0, 3.0], r=2)
        assert f.mu[0] == f.mu[1]
        assert f.mu[-1] == f.mu[-2]

    def test_nonfinite_sample_rejected(self):
        with np.errstate(divide="ignore"), pytest.raises(ValueError):
            sample_from_function(lambda u: 1.0 / u, [-1.0, 0.0, 1.0], r=2)


class TestValidation:
    def test_requires_increasing_breakpoints(self):
        with pytest.raises(ValueError):
            CplFunction(c=[0.0, 0.0], mu=[0.0] * 3, r=1)

    def test_requires_matching_slope_count(self):
        with pytest.raises(ValueError):
            CplFunction(c=[0.0, 1.0], mu=[0.0, 1.0], r=1)

    def test_requires_anchor_in_range(self):
        with pytest.raises(ValueError):
            CplFunction(c=[0.0], mu=[0.0, 0.0], r=2)

    def test_immutable_arrays(self):
        f = CplFunction(c=[0.0], mu=[1.0, 1.0], r=1)
        with pytest.raises(ValueError):
            f.c[0] = 5.0


class TestSerialization:
    def test_round_trip_lossless(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            f = random_cpl(rng)
            g = CplFunction.from_json(f.to_json())
            assert np.array_equal(f.c, g.c)
            assert np.array_equal(f.mu, g.mu)
            assert (f.r, f.kappa) == (g.r, g.kappa)

    def test_json_shape(self):
        f = CplFunction(c=[0.0, 1.0], mu=[0.25, -1.5, 3.0], r=1, kappa=0.125)
        payload = json.loads(f.to_json())
        assert set(payload) == {"c", "mu", "r", "kappa"}
        assert payload["r"] == 1

    def test_awkward_floats_survive(self):
        c = [0.0, 0.1 + 1e-17]
        mu = [1.0 / 3.0, math.pi, -2.2250738585072014e-308]
        f = CplFunction(c=c, mu=mu, r=1, kappa=0.1)
        g = CplFunction.from_json(f.to_json())
        assert np.array_equal(f.mu, g.mu)
        assert f.kappa == g.kappa
