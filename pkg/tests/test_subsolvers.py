import math

import numpy as np
import pytest

from dynreg import (
    DerivativeBundle,
    Orders,
    cubic_min,
    model_descent_step,
    optimality_measure,
    trust_region_min,
)


def random_symmetric(rng, n, scale=1.0):
    m = rng.standard_normal((n, n)) * scale
    return 0.5 * (m + m.T)


def tr_grid_min(g, H, delta, points=400):
    """Brute-force oracle: quadratic over an inscribed grid of the disk."""
    lin = np.linspace(-delta, delta, points)
    X, Y = np.meshgrid(lin, lin, indexing="ij")
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    mask = np.sum(P * P, axis=1) <= delta * delta
    P = P[mask]
    vals = P @ g + 0.5 * np.einsum("ij,jk,ik->i", P, H, P)
    return float(np.min(vals))


def cubic_grid_min(g, H, sigma, radius, points=400):
    lin = np.linspace(-radius, radius, points)
    X, Y = np.meshgrid(lin, lin, indexing="ij")
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    norms = np.sqrt(np.sum(P * P, axis=1))
    vals = P @ g + 0.5 * np.einsum("ij,jk,ik->i", P, H, P) + sigma / 6.0 * norms**3
    return float(np.min(vals))


class TestTrustRegion:
    def test_interior_newton_point(self):
        sol = trust_region_min(np.array([1.0, 0.0]), np.eye(2), 2.0)
        np.testing.assert_allclose(sol.d, [-1.0, 0.0], atol=1e-12)
        assert sol.value == pytest.approx(-0.5, abs=1e-12)
        assert sol.lam == 0.0
        assert not sol.hard_case

    def test_boundary_solution(self):
        sol = trust_region_min(np.array([1.0, 0.0]), np.eye(2), 0.5)
        np.testing.assert_allclose(sol.d, [-0.5, 0.0], atol=1e-9)
        assert sol.value == pytest.approx(-0.375, abs=1e-9)
        assert sol.lam == pytest.approx(1.0, rel=1e-9)

    def test_hard_case(self):
        sol = trust_region_min(np.zeros(2), np.diag([-2.0, 1.0]), 1.0)
        assert sol.hard_case
        assert sol.value == pytest.approx(-1.0, abs=1e-10)
        assert abs(sol.d[0]) == pytest.approx(1.0, abs=1e-10)
        assert sol.lam == pytest.approx(2.0, abs=1e-10)

    def test_certificates_on_random_instances(self):
        rng = np.random.default_rng(100)
        for i in range(300):
            n = int(rng.integers(2, 11))
            H = random_symmetric(rng, n, scale=float(rng.uniform(0.1, 5.0)))
            g = rng.standard_normal(n) * float(rng.uniform(0.0, 3.0))
            if i % 5 == 0:
                # engineered hard-case candidates: no gradient in the
                # leftmost eigenspace
                w, Q = np.linalg.eigh(H)
                g = g - Q[:, 0] * float(Q[:, 0] @ g)
            delta = float(rng.uniform(0.1, 2.0))
            sol = trust_region_min(g, H, delta)
            nd = np.linalg.norm(sol.d)
            assert nd <= delta + 1e-10
            assert sol.kkt_residual <= 1e-8
            assert sol.lam >= 0.0
            assert sol.lam * (delta - nd) <= 1e-8
            assert np.linalg.eigvalsh(H + sol.lam * np.eye(n))[0] >= -1e-10

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(200)
        for _ in range(25):
            H = random_symmetric(rng, 2, scale=2.0)
            g = rng.standard_normal(2)
            delta = float(rng.uniform(0.2, 1.5))
            sol = trust_region_min(g, H, delta)
            assert sol.value <= tr_grid_min(g, H, delta) + 1e-6

    def test_deterministic(self):
        g = np.array([0.3, -1.2, 0.5])
        H = np.diag([1.0, -0.5, 2.0])
        a = trust_region_min(g, H, 0.7)
        b = trust_region_min(g, H, 0.7)
        np.testing.assert_array_equal(a.d, b.d)
        assert a.lam == b.lam


class TestCubic:
    def test_psd_zero_gradient(self):
        sol = cubic_min(np.zeros(2), np.eye(2), 1.0)
        np.testing.assert_array_equal(sol.s, np.zeros(2))
        assert sol.lam == 0.0

    def test_secular_example(self):
        # ||s||(1 + ||s||) = 3 gives ||s|| = (sqrt(13) - 1)/2
        sol = cubic_min(np.array([-3.0, 0.0]), np.eye(2), 2.0)
        expected = (math.sqrt(13.0) - 1.0) / 2.0
        assert np.linalg.norm(sol.s) == pytest.approx(expected, rel=1e-10)
        np.testing.assert_allclose(sol.s, [expected, 0.0], atol=1e-9)

    def test_hard_case(self):
        sol = cubic_min(np.zeros(2), np.diag([-1.0, 1.0]), 2.0)
        assert sol.hard_case
        assert np.linalg.norm(sol.s) == pytest.approx(1.0, abs=1e-12)
        assert sol.value == pytest.approx(-1.0 / 6.0, rel=1e-12)

    def test_certificates_on_random_instances(self):
        rng = np.random.default_rng(300)
        for i in range(300):
            n = int(rng.integers(2, 11))
            H = random_symmetric(rng, n, scale=float(rng.uniform(0.1, 5.0)))
            g = rng.standard_normal(n) * float(rng.uniform(0.0, 3.0))
            if i % 5 == 0:
                w, Q = np.linalg.eigh(H)
                g = g - Q[:, 0] * float(Q[:, 0] @ g)
            sigma = float(rng.uniform(0.1, 10.0))
            sol = cubic_min(g, H, sigma)
            ns = np.linalg.norm(sol.s)
            assert sol.kkt_residual <= 1e-8
            assert abs(sol.lam - 0.5 * sigma * ns) <= 1e-8 * max(1.0, sol.lam)
            assert np.linalg.eigvalsh(H + sol.lam * np.eye(n))[0] >= -1e-10

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(400)
        for _ in range(25):
            H = random_symmetric(rng, 2, scale=2.0)
            g = rng.standard_normal(2)
            sigma = float(rng.uniform(0.5, 5.0))
            sol = cubic_min(g, H, sigma)
            radius = max(1.0, 2.0 * np.linalg.norm(sol.s))
            assert sol.value <= cubic_grid_min(g, H, sigma, radius) + 1e-6


class TestOptimalityMeasure:
    def test_first_order(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.array([3.0, 4.0]))
        res = optimality_measure(b, 0.5, q=1)
        assert res.phi == pytest.approx(2.5, abs=0)
        np.testing.assert_allclose(res.d, [-0.3, -0.4], atol=1e-15)

    def test_first_order_zero_gradient(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2))
        res = optimality_measure(b, 1.0, q=1)
        assert res.phi == 0.0
        np.testing.assert_array_equal(res.d, np.zeros(2))

    def test_second_order_psd(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2), hess=np.eye(2))
        assert optimality_measure(b, 1.0, q=2).phi == 0.0

    def test_second_order_indefinite(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2), hess=np.diag([-2.0, 1.0]))
        res = optimality_measure(b, 1.0, q=2)
        assert res.phi == pytest.approx(1.0, abs=1e-10)
        assert abs(res.d[0]) == pytest.approx(1.0, abs=1e-10)

    def test_second_order_against_grid(self):
        rng = np.random.default_rng(500)
        for _ in range(20):
            H = random_symmetric(rng, 2, scale=2.0)
            g = rng.standard_normal(2)
            b = DerivativeBundle(origin=np.zeros(2), grad=g, hess=H)
            res = optimality_measure(b, 1.0, q=2)
            grid = max(0.0, -tr_grid_min(g, H, 1.0))
            assert res.phi >= grid - 1e-6


class TestModelDescentStep:
    def test_degree_one_closed_form(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.array([2.0, 0.0]))
        step = model_descent_step(b, sigma=4.0, orders=Orders(p=1, q=1), eps=1e-3, mu=1.0, theta=0.5)
        np.testing.assert_allclose(step.s, [-0.5, 0.0], atol=1e-15)
        assert step.increment == pytest.approx(1.0, rel=1e-14)
        assert not step.zero_step
        assert step.delta == 1.0

    def test_degree_one_zero_gradient(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2))
        step = model_descent_step(b, 4.0, Orders(p=1, q=1), 1e-3, 1.0, 0.5)
        assert step.zero_step

    def test_degree_one_general_beta_is_global_min(self):
        # stationarity of the regularized model at the returned step
        rng = np.random.default_rng(600)
        for beta in (0.5, 0.8, 1.0):
            orders = Orders(p=1, q=1, beta=beta)
            g = rng.standard_normal(3)
            sigma = float(rng.uniform(0.5, 4.0))
            b = DerivativeBundle(origin=np.zeros(3), grad=g)
            step = model_descent_step(b, sigma, orders, eps=1e-6, mu=1.0, theta=0.5)
            t = np.linalg.norm(step.s)
            residual = g + sigma * t ** (beta - 1.0) * step.s
            assert np.linalg.norm(residual) <= 1e-12 * np.linalg.norm(g)
            assert step.increment > sigma / (1.0 + beta) * t ** (1.0 + beta)

    def test_degree_two_long_step(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.array([-3.0, 0.0]), hess=np.eye(2))
        step = model_descent_step(b, 2.0, Orders(p=2, q=1), eps=1e-3, mu=1.0, theta=0.5)
        expected = (math.sqrt(13.0) - 1.0) / 2.0
        assert step.step_norm == pytest.approx(expected, rel=1e-10)
        assert step.delta == 1.0
        assert step.measure_increment is None

    def test_degree_two_short_step_satisfies_measure_test(self):
        # the exact model minimizer has a vanishing model gradient, so the
        # measure-based clause holds at the first grid radius
        b = DerivativeBundle(origin=np.zeros(2), grad=np.array([-3e-4, 0.0]), hess=np.eye(2))
        orders = Orders(p=2, q=1)
        step = model_descent_step(b, 2.0, orders, eps=1e-3, mu=1.0, theta=0.5)
        assert step.step_norm < 1.0 * math.sqrt(1e-3)
        assert step.measure_increment is not None
        assert step.measure_increment <= 1e-8
        bound = 0.5 * step.step_norm**2 / 2.0  # theta ||s||^2 / (1+beta)!
        assert step.measure_increment <= bound * step.delta + 1e-15

    def test_degree_two_zero_step_at_second_order_point(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2), hess=np.eye(2))
        step = model_descent_step(b, 1.0, Orders(p=2, q=2), 1e-3, 1.0, 0.5)
        assert step.zero_step

    def test_degree_two_hard_case_descends(self):
        b = DerivativeBundle(origin=np.zeros(2), grad=np.zeros(2), hess=np.diag([-1.0, 1.0]))
        step = model_descent_step(b, 2.0, Orders(p=2, q=2), 0.5, 1.0, 0.5)
        assert not step.zero_step
        assert step.increment == pytest.approx(0.5, abs=1e-12)

    def test_decrease_exceeds_regularizer_on_random_instances(self):
        # every non-zero step descends, so the increment beats the
        # regularizer term
        from dynreg import holder_factorial

        rng = np.random.default_rng(700)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            g = rng.standard_normal(n) * float(rng.uniform(0.1, 3.0))
            h = rng.standard_normal((n, n))
            h = 0.5 * (h + h.T)
            sigma = float(rng.uniform(0.2, 5.0))
            b = DerivativeBundle(origin=np.zeros(n), grad=g, hess=h)
            step = model_descent_step(b, sigma, Orders(p=2, q=1), 1e-4, 1.0, 0.5)
            if step.zero_step:
                continue
            reg = sigma / holder_factorial(2, 1.0) * step.step_norm**3
            assert step.increment > reg
