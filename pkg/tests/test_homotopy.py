"""Homotopy map tests: block values, analytic derivatives, limit system.

The analytic Jacobians are the one place the solver relies on derivations
not spelled out elsewhere, so they are validated against central finite
differences at random points for every bundled instance.
"""

import numpy as np
import pytest

from homotcp import Anchor, HomotopyMap, HomotopyPoint, corpus, det_sign


def make_map(k, anchor=None):
    prob = corpus()[k]
    return HomotopyMap(prob.tensor, prob.q, anchor)


def random_point(rng, n, mu=None):
    mu = float(rng.uniform(0.05, 0.95)) if mu is None else mu
    return HomotopyPoint(
        rng.uniform(0.2, 2.0, n),
        rng.uniform(0.2, 2.0, n),
        rng.uniform(0.2, 2.0, n),
        rng.uniform(0.2, 2.0, n),
        mu,
    )


def fd_state_jacobian(hmap, p, h=1e-6):
    u = p.stacked()
    cols = []
    for k in range(4 * hmap.n):
        e = np.zeros_like(u)
        e[k] = h
        rp = hmap.residual(HomotopyPoint.from_stacked(u + e))
        rm = hmap.residual(HomotopyPoint.from_stacked(u - e))
        cols.append((rp - rm) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_mu_derivative(hmap, p, h=1e-6):
    u = p.stacked()
    e = np.zeros_like(u)
    e[-1] = h
    rp = hmap.residual(HomotopyPoint.from_stacked(u + e))
    rm = hmap.residual(HomotopyPoint.from_stacked(u - e))
    return (rp - rm) / (2 * h)


class TestAnchorAndPoint:
    def test_anchor_requires_positive(self):
        with pytest.raises(ValueError):
            Anchor(np.array([1.0, 0.0]), np.ones(2), np.ones(2), np.ones(2))
        with pytest.raises(ValueError):
            Anchor(np.ones(2), -np.ones(2), np.ones(2), np.ones(2))

    def test_anchor_stack_round_trip(self):
        a = Anchor.from_stacked(np.arange(1.0, 9.0))
        assert np.array_equal(a.stacked(), np.arange(1.0, 9.0))

    def test_point_rejects_non_finite(self):
        with pytest.raises(ValueError):
            HomotopyPoint(np.array([np.inf, 1.0]), np.ones(2), np.ones(2),
                          np.ones(2), 0.5)

    def test_point_stack_round_trip(self):
        p = HomotopyPoint(np.array([1.0, 2.0]), np.array([3.0, 4.0]),
                          np.array([5.0, 6.0]), np.array([7.0, 8.0]), 0.25)
        q = HomotopyPoint.from_stacked(p.stacked())
        assert np.array_equal(p.stacked(), q.stacked())


class TestResidual:
    def test_zero_at_anchor_for_mu_one(self):
        rng = np.random.default_rng(101)
        for k in range(6):
            prob = corpus()[k]
            anchor = Anchor(*(rng.uniform(0.1, 5.0, 2) for _ in range(4)))
            hmap = HomotopyMap(prob.tensor, prob.q, anchor)
            r = hmap.residual(hmap.start_point(1.0))
            assert np.abs(r).max() <= 1e-14

    def test_start_identity_many_anchors(self):
        # H-1: 200 random strictly positive anchors across the corpus
        rng = np.random.default_rng(103)
        for trial in range(200):
            prob = corpus()[trial % 6]
            anchor = Anchor(*(rng.uniform(0.05, 10.0, 2) for _ in range(4)))
            hmap = HomotopyMap(prob.tensor, prob.q, anchor)
            r = hmap.residual(hmap.start_point(1.0))
            assert np.abs(r).max() <= 1e-14

    def test_limit_point_of_example3(self):
        hmap = make_map(2)  # tensor with solution x = (1, 2)
        x = np.array([1.0, 2.0])
        p = HomotopyPoint(x, np.zeros(2), np.zeros(2), x.copy(), 0.0)
        assert np.abs(hmap.residual(p)).max() <= 1e-14

    def test_matches_direct_formula_on_random_points(self):
        rng = np.random.default_rng(107)
        for k in range(6):
            hmap = make_map(k)
            m = hmap.order
            a = hmap.anchor
            for _ in range(5):
                p = random_point(rng, 2)
                mt = hmap.sym.contract_matrix(p.x).T
                b1 = (1 - p.mu) * (p.w - p.z1 + (m - 1) * mt @ (p.x - p.z2)) \
                    + p.mu * (p.x - a.x0)
                b2 = p.z1 * p.x - p.mu * a.z1_0 * a.x0
                b3 = p.z2 * p.w - p.mu * a.z2_0 * a.w0 + (1 - p.mu) * p.x * p.w
                b4 = p.w - (1 - p.mu) * (hmap.tensor.contract_vector(p.x) + hmap.q) \
                    - p.mu * a.w0
                expect = np.concatenate([b1, b2, b3, b4])
                assert np.allclose(hmap.residual(p), expect, atol=1e-14)


class TestStateJacobian:
    def test_structure_at_mu_one(self):
        # at mu = 1 only the anchored blocks remain and the determinant is
        # sign(prod x_i w_i) = +1 for positive points
        rng = np.random.default_rng(109)
        hmap = make_map(0)
        p = random_point(rng, 2, mu=1.0)
        jac = hmap.state_jacobian(p)
        n = 2
        eye = np.eye(n)
        zero = np.zeros((n, n))
        expect = np.block(
            [
                [eye, zero, zero, zero],
                [np.diag(p.z1), zero, np.diag(p.x), zero],
                [zero, np.diag(p.z2), zero, np.diag(p.w)],
                [zero, eye, zero, zero],
            ]
        )
        assert np.allclose(jac, expect, atol=1e-14)
        assert det_sign(jac) == 1

    def test_determinant_positive_at_positive_mu_one_points(self):
        # H-4
        rng = np.random.default_rng(113)
        for k in range(6):
            hmap = make_map(k)
            for _ in range(10):
                p = random_point(rng, 2, mu=1.0)
                assert det_sign(hmap.state_jacobian(p)) == 1

    def test_order2_block_has_no_curvature_term(self):
        import homotcp

        mat = np.array([[1.0, 2.0], [-1.0, 0.5]])
        t = homotcp.Tensor(mat)
        hmap = HomotopyMap(t, np.array([0.1, -0.2]))
        rng = np.random.default_rng(127)
        p = random_point(rng, 2)
        jac = hmap.state_jacobian(p)
        expect = (1 - p.mu) * t.symmetrized().data.T + p.mu * np.eye(2)
        assert np.allclose(jac[:2, :2], expect, atol=1e-14)

    def test_matches_finite_differences(self):
        # H-2 on random interior points of every corpus instance
        rng = np.random.default_rng(131)
        for k in range(6):
            hmap = make_map(k)
            for _ in range(10):
                p = random_point(rng, 2)
                jac = hmap.state_jacobian(p)
                fd = fd_state_jacobian(hmap, p)
                scale = max(1.0, np.abs(fd).max())
                assert np.abs(jac - fd).max() <= 1e-5 * scale


class TestMuDerivative:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(137)
        for k in range(6):
            hmap = make_map(k)
            for _ in range(10):
                p = random_point(rng, 2)
                d = hmap.mu_derivative(p)
                fd = fd_mu_derivative(hmap, p)
                scale = max(1.0, np.abs(fd).max())
                assert np.abs(d - fd).max() <= 1e-6 * scale

    def test_second_block_at_anchor(self):
        rng = np.random.default_rng(139)
        anchor = Anchor(*(rng.uniform(0.3, 2.0, 2) for _ in range(4)))
        hmap = HomotopyMap(corpus()[0].tensor, corpus()[0].q, anchor)
        d = hmap.mu_derivative(hmap.start_point(1.0))
        assert np.allclose(d[2:4], -anchor.z1_0 * anchor.x0, atol=1e-14)

    def test_fourth_block_example1_all_ones(self):
        hmap = make_map(0)
        d = hmap.mu_derivative(hmap.start_point(1.0))
        # A e^3 + q - e = (-2+1, 2-1) - (1, 1) = (-2, 0)
        assert np.allclose(d[6:8], [-2.0, 0.0], atol=1e-14)


class TestLimitSystem:
    def test_equals_residual_at_mu_zero(self):
        # H-3
        rng = np.random.default_rng(149)
        for k in range(6):
            hmap = make_map(k)
            for _ in range(10):
                p = random_point(rng, 2, mu=0.0)
                lim = hmap.limit_residual(p.x, p.w, p.z1, p.z2)
                assert np.abs(lim - hmap.residual(p)).max() <= 1e-15

    def test_example3_limit_data(self):
        hmap = make_map(2)
        x = np.array([1.0, 2.0])
        lim = hmap.limit_residual(x, np.zeros(2), np.zeros(2), x)
        assert np.abs(lim).max() <= 1e-14

    def test_example6_certificates_from_least_squares(self):
        # solve the first limit block for consistent (z1, z2) at the known
        # solution x = (sqrt 2, 0), w = (0, 1), then check the residual
        hmap = make_map(5)
        x = np.array([np.sqrt(2.0), 0.0])
        w = np.array([0.0, 1.0])
        m = hmap.order
        mt = hmap.sym.contract_matrix(x).T
        # unknown t = (z1_2, z2_1); z1_1 = 0 forced by z1*x = 0, z2_2 = 0 by
        # (z2 + x)*w = 0; block 1 reads w - z1 + (m-1) mt (x - z2) = 0
        def block1(t):
            z1 = np.array([0.0, t[0]])
            z2 = np.array([t[1], 0.0])
            return w - z1 + (m - 1) * mt @ (x - z2)

        # least-squares fit of the two unknowns over the two equations
        a_mat = np.stack(
            [(block1([1.0, 0.0]) - block1([0.0, 0.0])),
             (block1([0.0, 1.0]) - block1([0.0, 0.0]))],
            axis=-1,
        )
        t, *_ = np.linalg.lstsq(a_mat, -block1([0.0, 0.0]), rcond=None)
        z1 = np.array([0.0, t[0]])
        z2 = np.array([t[1], 0.0])
        assert t[0] == pytest.approx(1.0, abs=1e-12)
        assert t[1] == pytest.approx(np.sqrt(2.0), abs=1e-12)
        lim = hmap.limit_residual(x, w, z1, z2)
        assert np.abs(lim).max() <= 1e-12

    def test_near_zero_limit_points_are_complementary(self):
        # H-5: a vanishing limit residual with x, w >= 0 forces the three
        # complementarity products to vanish
        import homotcp

        for k in (0, 2, 3, 4, 5):
            prob = corpus()[k]
            rep = homotcp.solve(prob)
            assert rep.solved
            p = rep.point
            hmap = rep.map
            lim = hmap.limit_residual(p.x, p.w, p.z1, p.z2)
            assert np.abs(lim).max() <= 1e-8
            assert p.x.min() >= -1e-9 and p.w.min() >= -1e-9
            assert np.abs(p.x * p.w).max() <= 1e-7
            assert np.abs(p.z1 * p.x).max() <= 1e-7
            assert np.abs(p.z2 * p.w).max() <= 1e-7
