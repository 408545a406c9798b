import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from penreg.errors import PreconditionError, ValidationError
from penreg.estimators import EstimatorKind
from penreg.linalg import projector, svd
from penreg.risk import (
    Estimand,
    empirical_risks,
    estimator_matrix,
    find_lambda_star,
    linear_estimator_moments,
    ridgeless_estimand,
    theoretical_risk,
)


def design(seed, n=30, p=5, rank=None):
    rng = np.random.default_rng(seed)
    if rank is None:
        return rng.standard_normal((n, p))
    return rng.standard_normal((n, rank)) @ rng.standard_normal((rank, p))


def eig(X):
    f = svd(X)
    return f.s_r**2 / X.shape[0]


class TestEmpiricalRisks:
    def test_exact_hit(self):
        assert empirical_risks([1.0, 2.0], [1.0, 2.0], np.eye(2)) == (0.0, 0.0)

    def test_hand_example(self):
        # (theta_hat - theta0) = [1, 0], X = I, n = 2
        assert empirical_risks([1.0, 0.0], [0.0, 0.0], np.eye(2)) == pytest.approx((1.0, 0.5))

    def test_projection_corollary(self):
        X = design(0, 8, 6, rank=3)
        P = projector(X, "range_xt")
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal(6), rng.standard_normal(6)
        assert empirical_risks(a, b, X)[1] == pytest.approx(empirical_risks(P @ a, P @ b, X)[1], rel=1e-12)

    def test_mismatch(self):
        with pytest.raises(ValidationError):
            empirical_risks([1.0], [1.0, 2.0], np.eye(2))


class TestRidgelessEstimand:
    def test_worked_example(self):
        res = ridgeless_estimand([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])
        np.testing.assert_allclose(res.theta, [0.2, 0.4], atol=1e-12)
        assert not res.solution_set_empty

    def test_identity(self):
        res = ridgeless_estimand(np.eye(3), [1.0, -2.0, 3.0])
        np.testing.assert_allclose(res.theta, [1.0, -2.0, 3.0])

    def test_empty_solution_set(self):
        assert ridgeless_estimand([[1.0, 0.0], [0.0, 0.0]], [0.0, 1.0]).solution_set_empty

    def test_asymmetric(self):
        with pytest.raises(ValidationError):
            ridgeless_estimand([[1.0, 0.5], [0.0, 1.0]], [1.0, 1.0])

    def test_not_psd(self):
        with pytest.raises(ValidationError):
            ridgeless_estimand([[1.0, 0.0], [0.0, -1.0]], [1.0, 1.0])

    def test_estimand_membership(self):
        M = np.array([[1.0, 2.0], [2.0, 4.0]])
        est = Estimand.from_population(M, [1.0, 0.0], 1.0)
        np.testing.assert_allclose(est.theta0_rl, [0.2, 0.4], atol=1e-12)
        assert est.rank0 == 1
        with pytest.raises(ValidationError):
            Estimand([1.0, 0.0], 1.0, M)
        with pytest.raises(ValidationError):
            Estimand([0.2, 0.4], 0.0, M)


class TestLinearMoments:
    def test_lse(self):
        X = design(2, 40, 4)
        sigma = 1.3
        rep = linear_estimator_moments(estimator_matrix("ls", X), X, np.ones(4), sigma)
        assert rep.bias_norm_sq == pytest.approx(0.0, abs=1e-20)
        assert rep.mse == pytest.approx(sigma**2 / 40 * np.sum(1 / eig(X)), rel=1e-10)
        assert rep.mpr == pytest.approx(4 * sigma**2 / 40, rel=1e-10)

    def test_ridgeless_rank_deficient(self):
        X = design(3, 30, 6, rank=2)
        rep = linear_estimator_moments(estimator_matrix("ridgeless", X), X, np.arange(6.0), 2.0)
        assert rep.mpr == pytest.approx(2 * 4.0 / 30, rel=1e-9)

    def test_zero_estimator(self):
        X = design(4, 10, 3)
        th = np.array([1.0, -2.0, 0.5])
        rep = linear_estimator_moments(np.zeros((3, 10)), X, th, 1.0)
        np.testing.assert_allclose(rep.bias, -th)
        assert rep.mse == pytest.approx(th @ th)
        assert rep.mpr == pytest.approx(np.sum((X @ th) ** 2) / 10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_bias_variance_identity(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((12, 4))
        A = rng.standard_normal((4, 12))
        rep = linear_estimator_moments(A, X, rng.standard_normal(4), 0.7)
        assert rep.mse == pytest.approx(rep.bias_norm_sq + rep.trace_var, rel=1e-12)
        assert rep.mpr == pytest.approx(rep.pred_bias_sq + rep.pred_var, rel=1e-12)

    def test_gauss_markov(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((15, 3))
        A0 = estimator_matrix("ls", X)
        N = projector(X, "ker_xt")  # B = C (I - X X^+) satisfies B X = 0
        base = A0 @ A0.T
        for _ in range(20):
            B = rng.standard_normal((3, 15)) @ N
            np.testing.assert_allclose(B @ X, 0.0, atol=1e-10)
            A = A0 + B
            assert np.linalg.eigvalsh(A @ A.T - base).min() >= -1e-9

    def test_shape_check(self):
        with pytest.raises(ValidationError):
            linear_estimator_moments(np.zeros((2, 5)), np.ones((5, 3)), np.zeros(3), 1.0)


class TestTheoreticalRisk:
    @pytest.mark.parametrize(
        "kind, seed, rank",
        [("ls", 0, None), ("ridgeless", 0, None), ("ridge", 0, None), ("ridgeless", 1, 3), ("ridge", 1, 3)],
    )
    def test_matches_linear_moments(self, kind, seed, rank):
        X = design(seed, 25, 5, rank)
        est = Estimand.from_design(X, np.array([1.0, -1.0, 0.5, 2.0, 0.0]), 0.8)
        lam = 2.5 if kind == "ridge" else None
        th = theoretical_risk(kind, X, est, lam)
        mom = linear_estimator_moments(estimator_matrix(kind, X, lam), X, est.theta0_rl, 0.8)
        assert th.mse == pytest.approx(mom.mse, rel=1e-9, abs=1e-12)
        assert th.mpr == pytest.approx(mom.mpr, rel=1e-9, abs=1e-12)
        assert th.trace_var == pytest.approx(mom.trace_var, rel=1e-9)
        assert th.mse == pytest.approx(th.bias_norm_sq + th.trace_var, abs=1e-9)

    def test_lse_orthonormal(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((50, 4)))
        X = np.sqrt(50) * Q
        th = theoretical_risk("ls", X, Estimand.from_design(X, np.ones(4), 2.0))
        assert th.mse == pytest.approx(4 * 4.0 / 50)

    def test_lse_rank_precondition(self):
        X = design(1, 20, 4, rank=2)
        with pytest.raises(PreconditionError):
            theoretical_risk("ls", X, Estimand.from_design(X, np.ones(4), 1.0))

    def test_ridge_needs_lambda(self):
        X = design(1)
        with pytest.raises(ValidationError):
            theoretical_risk("ridge", X, Estimand.from_design(X, np.ones(5), 1.0))

    def test_ridgeless_closed_form(self):
        X = design(6, 20, 6, rank=3)
        theta0 = np.arange(1.0, 7.0)
        est = Estimand.from_design(X, theta0, 1.5)
        th = theoretical_risk("ridgeless", X, est)
        assert th.mpr == pytest.approx(3 * 1.5**2 / 20)
        assert th.mse == pytest.approx(1.5**2 / 20 * np.sum(1 / eig(X)) + 0.0, rel=1e-9)

    def test_ridge_variance_part_matches_closed_form(self):
        X = design(7, 30, 5)
        est = Estimand.from_design(X, np.ones(5), 1.0)
        lam = 4.0
        e = eig(X)
        th = theoretical_risk("ridge", X, est, lam)
        assert th.pred_var == pytest.approx(np.sum(e**2 / (e + lam / 30) ** 2) / 30, rel=1e-12)
        assert th.trace_var == pytest.approx(np.sum(e / (e + lam / 30) ** 2) / 30, rel=1e-12)

    def test_ridge_limit(self):
        X = design(8, 30, 5, rank=3)
        est = Estimand.from_design(X, np.ones(5), 1.0)
        target = np.sum(1 / eig(X)) / 30
        assert theoretical_risk("ridge", X, est, 1e-9).mse == pytest.approx(target, rel=1e-6)

    @pytest.mark.parametrize("lam", [1e-3, 1.0, 1e3])
    def test_ridge_variance_below_ridgeless(self, lam):
        X = design(9, 20, 6, rank=4)
        est = Estimand.from_design(X, np.ones(6), 1.0)
        assert theoretical_risk("ridge", X, est, lam).trace_var < theoretical_risk("ridgeless", X, est).trace_var

    def test_variance_dominance_on_range(self):
        X = design(10, 20, 6, rank=4)
        f = svd(X)
        A_rl = estimator_matrix("ridgeless", X)
        A_r = estimator_matrix("ridge", X, 0.5)
        D = A_rl @ A_rl.T - A_r @ A_r.T
        for j in range(f.rank):
            v = f.V[:, j]
            assert v @ D @ v > 0

    def test_unsupported_kind(self):
        X = design(0)
        with pytest.raises(ValidationError):
            theoretical_risk("lasso", X, Estimand.from_design(X, np.ones(5), 1.0), 1.0)


class TestLambdaStar:
    def test_zero_target(self):
        X = design(11)
        est = Estimand.from_design(X, np.zeros(5), 1.0)
        grid = [0.1, 1.0, 10.0]
        assert find_lambda_star(X, est, grid) == 10.0

    def test_orthonormal_scan(self):
        n, p = 40, 4
        Q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((n, p)))
        X = np.sqrt(n) * Q
        theta0 = np.ones(p) / 2.0
        est = Estimand.from_design(X, theta0, 1.0)
        grid = np.logspace(-3, 3, 61)
        star = find_lambda_star(X, est, grid)
        assert star is not None
        base = theoretical_risk("ridgeless", X, est).mse
        assert theoretical_risk("ridge", X, est, star).mse < base
        # with X'X/n = I the exact minimizer is lam = sigma^2 p / ||theta0||^2
        exact = 1.0 * p / (theta0 @ theta0)
        assert abs(np.log(star) - np.log(exact)) <= np.log(10) / 10 + 1e-12

    def test_huge_lambda_absent(self):
        X = design(12, 100, 3)
        est = Estimand.from_design(X, np.full(3, 10.0), 1.0)
        assert find_lambda_star(X, est, [1e12]) is None

    @pytest.mark.parametrize("grid", [[], [0.0], [-1.0, 1.0]])
    def test_bad_grid(self, grid):
        X = design(0)
        with pytest.raises(ValidationError):
            find_lambda_star(X, Estimand.from_design(X, np.ones(5), 1.0), grid)
