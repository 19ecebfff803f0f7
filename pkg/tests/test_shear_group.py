import numpy as np
import pytest

from qshear.quat_core import InvalidParameterError
from qshear.shear_group import (
    GroupPoint,
    apply_AtSt,
    apply_inv_SA,
    compose,
    identity,
    invert,
    make_param_grid,
    mat_A,
    mat_S,
)


def random_point(rng, n=1):
    a = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
    return GroupPoint(a, rng.standard_normal(2 * n - 1),
                      rng.standard_normal(2 * n))


def sa(g, n=1):
    return mat_S(g.s, n) @ mat_A(g.a, n)


class TestMatrices:
    def test_parabolic_scaling_n1(self):
        A = mat_A(4.0, 1)
        assert np.allclose(A, np.diag([4.0, 2.0]))
        assert abs(np.linalg.det(A)) == pytest.approx(4.0 ** 1.5, rel=1e-14)

    def test_identity_at_neutral_parameters(self):
        assert np.allclose(mat_A(1.0, 1), np.eye(2))
        assert np.allclose(mat_S(np.zeros(1), 1), np.eye(2))
        assert np.allclose(mat_A(1.0, 2) @ mat_S(np.zeros(3), 2), np.eye(4))

    def test_scaling_group_law(self):
        a, b = -2.0, 3.0
        assert np.allclose(mat_A(a, 1) @ mat_A(b, 1), mat_A(a * b, 1))

    def test_zero_scale_rejected(self):
        with pytest.raises(InvalidParameterError):
            mat_A(0.0, 1)
        with pytest.raises(InvalidParameterError):
            GroupPoint(0.0, np.zeros(1), np.zeros(2))

    def test_det_of_shear_scaling_product(self):
        rng = np.random.default_rng(3)
        for n in (1, 2):
            for _ in range(20):
                g = random_point(rng, n)
                det = abs(np.linalg.det(sa(g, n)))
                assert det == pytest.approx(abs(g.a) ** (2 - 1 / (2 * n)),
                                            rel=1e-12)


class TestGroupLaw:
    def test_neutral_element(self):
        rng = np.random.default_rng(5)
        e = identity(1)
        g = random_point(rng)
        for h in (compose(g, e), compose(e, g)):
            assert h.a == pytest.approx(g.a, rel=1e-15)
            assert np.allclose(h.s, g.s)
            assert np.allclose(h.t, g.t)

    def test_inverse(self):
        rng = np.random.default_rng(7)
        for n in (1, 2):
            for _ in range(20):
                g = random_point(rng, n)
                e = compose(g, invert(g))
                assert e.a == pytest.approx(1.0, rel=1e-12)
                assert np.max(np.abs(e.s)) < 1e-12
                assert np.max(np.abs(e.t)) < 1e-11
                e2 = compose(invert(g), g)
                assert e2.a == pytest.approx(1.0, rel=1e-12)
                assert np.max(np.abs(e2.t)) < 1e-11

    def test_inverse_closed_form_n1(self):
        g = GroupPoint(4.0, np.array([1.0]), np.zeros(2))
        gi = invert(g)
        assert gi.a == pytest.approx(0.25, rel=1e-15)
        assert gi.s[0] == pytest.approx(-0.5, rel=1e-15)
        assert np.allclose(gi.t, 0.0)

    def test_inverse_of_identity_and_involution(self):
        e = identity(2)
        ei = invert(e)
        assert ei.a == 1.0 and not ei.s.any() and not ei.t.any()
        rng = np.random.default_rng(9)
        g = random_point(rng)
        gg = invert(invert(g))
        assert gg.a == pytest.approx(g.a, rel=1e-13)
        assert np.allclose(gg.s, g.s, rtol=1e-12, atol=1e-13)
        assert np.allclose(gg.t, g.t, rtol=1e-12, atol=1e-12)

    def test_associativity(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            g, h, k = (random_point(rng) for _ in range(3))
            lhs = compose(compose(g, h), k)
            rhs = compose(g, compose(h, k))
            assert lhs.a == pytest.approx(rhs.a, rel=1e-12)
            assert np.allclose(lhs.s, rhs.s, rtol=1e-12, atol=1e-12)
            assert np.allclose(lhs.t, rhs.t, rtol=1e-12, atol=1e-11)

    def test_translation_matrix_consistency(self):
        # t-part of the group law is the S_s A_a action on the translation
        rng = np.random.default_rng(13)
        for _ in range(10):
            g, h = random_point(rng), random_point(rng)
            gh = compose(g, h)
            assert np.allclose(gh.t, g.t + sa(g) @ h.t, rtol=1e-12, atol=1e-12)


class TestFrequencyAction:
    def test_identity_parameters(self):
        lam = np.array([1.3, -0.4])
        out = apply_AtSt(1.0, np.zeros(1), lam)
        assert np.allclose(out, lam)

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(17)
        for n in (1, 2):
            for _ in range(100):
                g = random_point(rng, n)
                lam = rng.standard_normal(2 * n)
                out = apply_AtSt(g.a, g.s, lam)
                ref = mat_A(g.a, n).T @ mat_S(g.s, n).T @ lam
                assert np.max(np.abs(out - ref)) < 1e-12 * max(
                    1.0, np.max(np.abs(ref)))

    def test_inverse_action(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            g = random_point(rng)
            x = rng.standard_normal(2)
            out = apply_inv_SA(g.a, g.s, x)
            ref = np.linalg.solve(sa(g), x)
            assert np.max(np.abs(out - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))

    def test_product_relation(self):
        # S_s A_a S_s' A_a' = S_{s + |a|^(1-1/2n) s'} A_{a a'}
        rng = np.random.default_rng(23)
        for n in (1, 2):
            for _ in range(20):
                g, h = random_point(rng, n), random_point(rng, n)
                lhs = sa(g, n) @ sa(h, n)
                s2 = g.s + abs(g.a) ** (1 - 1 / (2 * n)) * h.s
                rhs = mat_S(s2, n) @ mat_A(g.a * h.a, n)
                assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestParamGrid:
    def test_single_cell_weight(self):
        pg = make_param_grid(0.5, 2.0, 1, 1.0, 1, 1, include_negative=False)
        assert pg.num_a == 1 and pg.num_s == 1
        a = pg.a_nodes[0]
        du = np.log(2.0 / 0.5)
        assert a == pytest.approx(np.exp(0.5 * (np.log(0.5) + np.log(2.0))))
        # cell measure of da is du * |a|; Haar weight divides |a|^(2n+1)
        assert pg.weights[0, 0] == pytest.approx(du * a * 2.0 / a ** 3, rel=1e-13)

    def test_total_weight_matches_closed_form(self):
        # integral of da ds / |a|^(2n+1) over +-[a_min,a_max] x [-s,s]^(2n-1)
        a_min, a_max, s_max, n = 0.25, 2.0, 1.5, 1
        pg = make_param_grid(a_min, a_max, 64, s_max, 64, n)
        exact = (1.0 / n) * (a_min ** (-2 * n) - a_max ** (-2 * n)) \
            * (2 * s_max) ** (2 * n - 1)
        assert pg.total_weight() == pytest.approx(exact, rel=1e-2)

    def test_sign_symmetry(self):
        pg = make_param_grid(0.3, 1.7, 6, 1.0, 3, 1)
        assert pg.num_a == 12
        w = pg.weights
        assert np.allclose(w, w[::-1, :])
        assert np.allclose(pg.a_nodes, -pg.a_nodes[::-1])

    def test_n2_shear_tensor_grid(self):
        pg = make_param_grid(0.5, 2.0, 2, 1.0, 3, 2)
        assert pg.s_nodes.shape == (27, 3)

    def test_invalid_ranges(self):
        with pytest.raises(InvalidParameterError):
            make_param_grid(-0.1, 2.0, 4, 1.0, 4, 1)
        with pytest.raises(InvalidParameterError):
            make_param_grid(2.0, 0.5, 4, 1.0, 4, 1)
        with pytest.raises(InvalidParameterError):
            make_param_grid(0.5, 2.0, 0, 1.0, 4, 1)
        with pytest.raises(InvalidParameterError):
            make_param_grid(0.5, 2.0, 4, -1.0, 4, 1)
