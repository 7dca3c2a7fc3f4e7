import math

import numpy as np
import pytest

from tarry2d.poly import alpha_inverse, monomial_count, monomial_indices
from tarry2d.variety import (
    HypothesisError,
    PointConfig,
    ellipsoid_volume_check,
    ellipsoid_volume_mc,
    gram_G0,
    gram_half,
    jacobi_A0,
    jacobian_D_case21,
    residual,
    theta_via_thin_shell,
    thin_shell_measure,
    translate_solution,
)


def random_config(rng, k, lo=0.0, hi=1.0):
    return PointConfig(k, rng.uniform(lo, hi, (2 * k, 2)))


class TestConfig:
    def test_signs(self):
        cfg = random_config(np.random.default_rng(0), 2)
        assert list(cfg.signs) == [1.0, 1.0, -1.0, -1.0]

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            PointConfig(2, np.zeros((3, 2)))
        with pytest.raises(ValueError):
            PointConfig(0, np.zeros((0, 2)))

    def test_json_roundtrip(self):
        cfg = random_config(np.random.default_rng(1), 2)
        back = PointConfig.from_json_dict(cfg.to_json_dict())
        assert back.k == cfg.k
        assert np.array_equal(back.points, cfg.points)

    def test_json_malformed(self):
        with pytest.raises(ValueError):
            PointConfig.from_json_dict({"points": [[0, 0]]})


class TestResidual:
    def test_hand_computed_k1(self):
        cfg = PointConfig(1, [[2.0, 3.0], [5.0, 7.0]])
        # ascending index order (0,1), (1,0), (1,1)
        want = [3.0 - 7.0, 2.0 - 5.0, 6.0 - 35.0]
        assert np.allclose(residual(cfg, 1, 1), want)

    def test_paired_points_solve_system(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0, 1, (2, 2))
        cfg = PointConfig(2, np.vstack([p, p]))
        assert np.allclose(residual(cfg, 2, 2), 0.0)

    def test_translation_preserves_solutions(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(0, 1, (2, 2))
        cfg = PointConfig(2, np.vstack([p, p]))
        moved = translate_solution(cfg, 0.37, -0.21)
        assert np.allclose(residual(moved, 2, 2), 0.0, atol=1e-12)


class TestJacobi:
    def test_shape(self):
        cfg = random_config(np.random.default_rng(5), 2)
        assert jacobi_A0(cfg, 2, 1).shape == (5, 8)

    def test_finite_differences(self):
        rng = np.random.default_rng(6)
        h = 1e-6
        for _ in range(20):
            cfg = random_config(rng, 2)
            A = jacobi_A0(cfg, 2, 1)
            flat = cfg.points.ravel()
            for col in range(flat.size):
                bump = flat.copy()
                bump[col] += h
                up = residual(PointConfig(2, bump.reshape(-1, 2)), 2, 1)
                bump[col] -= 2 * h
                dn = residual(PointConfig(2, bump.reshape(-1, 2)), 2, 1)
                assert np.allclose(A[:, col], (up - dn) / (2 * h), atol=1e-6)


class TestGram:
    def test_nonnegative(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            assert gram_G0(random_config(rng, 2), 1, 1) >= 0.0

    def test_translation_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            cfg = random_config(rng, 2)
            a, b = rng.uniform(-2, 2, 2)
            g = gram_G0(cfg, 1, 1)
            g2 = gram_G0(translate_solution(cfg, a, b), 1, 1)
            assert g2 == pytest.approx(g, rel=1e-9, abs=1e-15)

    def test_scaling_law(self):
        rng = np.random.default_rng(9)
        for n, m in ((1, 1), (2, 1)):
            expo = 2 * alpha_inverse(n, m)
            for _ in range(100):
                cfg = random_config(rng, 2)
                lam = rng.uniform(0.5, 2.0)
                g = gram_G0(cfg, n, m)
                g2 = gram_G0(PointConfig(cfg.k, cfg.points * lam), n, m)
                assert g2 == pytest.approx(g * lam**expo, rel=1e-9, abs=1e-15)

    def test_unit_cube_bound(self):
        rng = np.random.default_rng(10)
        for n, m, k in ((1, 1, 2), (2, 1, 2)):
            N = monomial_count(n, m)
            bound = (4.0 * k * (n + m) ** 2) ** N
            for _ in range(200):
                assert gram_G0(random_config(rng, k), n, m) <= bound

    def test_superadditivity(self):
        # square minors split into the two halves of the columns
        rng = np.random.default_rng(11)
        for _ in range(200):
            cfg = random_config(rng, 2)
            g0 = gram_G0(cfg, 1, 1)
            g = gram_half(cfg.points[:2], 1, 1)
            gp = gram_half(cfg.points[2:], 1, 1)
            assert g0 >= g + gp - 1e-12 * max(g0, 1.0)


class TestEllipsoid:
    def test_unit_ball(self):
        vol, se = ellipsoid_volume_mc(np.eye(3), 400_000, seed=12)
        assert abs(vol - 4.0 * math.pi / 3.0) <= 4 * se

    def test_diagonal(self):
        M = np.diag([1.0, 4.0, 0.25])
        vol, se = ellipsoid_volume_mc(M, 400_000, seed=13)
        want = 4.0 * math.pi / 3.0 / math.sqrt(np.prod(np.diag(M)))
        assert abs(vol - want) <= 4 * se

    def test_rejects_singular(self):
        with pytest.raises(ValueError):
            ellipsoid_volume_mc(np.diag([1.0, 0.0, 1.0]), 1000, seed=1)

    def test_identity_against_gram(self):
        rng = np.random.default_rng(14)
        cfg = random_config(rng, 2)
        chk = ellipsoid_volume_check(cfg, 1, 1, 400_000, seed=15)
        assert abs(chk.mc_volume - chk.closed_form) <= 4 * chk.mc_std_error

    def test_deterministic(self):
        a = ellipsoid_volume_mc(np.eye(3), 100_000, seed=16)
        b = ellipsoid_volume_mc(np.eye(3), 100_000, seed=16)
        assert a == b


class TestThinShell:
    def test_matches_plain_mc_oracle(self):
        n, m, k, h = 1, 1, 1, 0.05
        est = thin_shell_measure(n, m, k, np.zeros(3), h, 400_000, seed=17)
        rng = np.random.default_rng(18)
        M = 600_000
        s = rng.random((M, 4))
        x, y = s[:, 0::2], s[:, 1::2]
        ok = np.ones(M, dtype=bool)
        for i, j in monomial_indices(n, m):
            ok &= np.abs(x[:, 0] ** i * y[:, 0] ** j
                         - x[:, 1] ** i * y[:, 1] ** j) <= h
        p = ok.mean()
        scale = (2 * h) ** -3
        oracle = p * scale
        oracle_se = math.sqrt(p * (1 - p) / M) * scale
        tol = 3 * math.sqrt(est.std_error**2 + oracle_se**2)
        assert abs(est.value - oracle) <= tol

    def test_deterministic_and_worker_invariant(self):
        a = thin_shell_measure(1, 1, 2, np.zeros(3), 0.05, 600_000, seed=19)
        b = thin_shell_measure(1, 1, 2, np.zeros(3), 0.05, 600_000, seed=19,
                               workers=4)
        assert a.value == b.value
        assert a.std_error == b.std_error
        assert a.n_accepted == b.n_accepted

    def test_weighted_positive(self):
        est = thin_shell_measure(1, 1, 2, np.zeros(3), 0.05, 600_000, seed=20,
                                 weight="sqrtG0")
        assert est.value > 0.0
        assert est.value > 3 * est.std_error

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            thin_shell_measure(1, 1, 1, np.zeros(3), 0.0, 100, seed=1)
        with pytest.raises(ValueError):
            thin_shell_measure(1, 1, 1, np.zeros(3), 0.1, 0, seed=1)
        with pytest.raises(ValueError):
            thin_shell_measure(1, 1, 1, np.zeros(3), 0.1, 100, seed=1,
                               weight="bogus")

    def test_theta_form_hypothesis(self):
        with pytest.raises(HypothesisError):
            theta_via_thin_shell(1, 1, 1, 0.05, 1000, seed=1)

    def test_theta_form_runs(self):
        est = theta_via_thin_shell(1, 1, 2, 0.05, 400_000, seed=21)
        assert est.weight == "none"
        assert est.value > 0.0


class TestJacobianD:
    def cofactor_det(self, M):
        # Laplace expansion along the first row, recursively
        M = [list(r) for r in M]
        if len(M) == 1:
            return M[0][0]
        total = 0.0
        for c, v in enumerate(M[0]):
            minor = [r[:c] + r[c + 1 :] for r in M[1:]]
            total += (-1) ** c * v * self.cofactor_det(minor)
        return total

    def matrix(self, x, y, u, v):
        return [
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [y, x, v, u],
            [2 * x, 0.0, 2 * u, 0.0],
        ]

    def test_against_cofactor_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(500):
            x, y, u, v = rng.uniform(-2, 2, 4)
            want = self.cofactor_det(self.matrix(x, y, u, v))
            assert jacobian_D_case21(x, y, u, v) == pytest.approx(want, abs=1e-12)

    def test_against_numpy_det(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            x, y, u, v = rng.uniform(-3, 3, 4)
            want = float(np.linalg.det(np.array(self.matrix(x, y, u, v))))
            assert jacobian_D_case21(x, y, u, v) == pytest.approx(want, abs=1e-12)

    def test_zero_exactly_on_diagonal(self):
        assert jacobian_D_case21(0.4, 0.9, 0.4, -2.0) == 0.0

    def test_independent_of_y_v(self):
        assert jacobian_D_case21(0.3, 5.0, 0.8, -7.0) == \
            jacobian_D_case21(0.3, 0.0, 0.8, 0.0)
