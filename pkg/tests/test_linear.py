"""Linear solver: assembly, the constrained solve, and the fit loop."""

import numpy as np
import pytest

from conftest import quiet_max_iters, random_multilabel
from ovnsvm import (
    AssembledSystem,
    ConstraintMode,
    Dataset,
    HessianNotPD,
    Hyperparameters,
    MaxItersExceeded,
    MMState,
    SingularSystem,
    assemble,
    feasibility,
    fit_linear,
    objective,
    solve_kkt,
    training_objective,
)

MODES = [ConstraintMode.from_token(t) for t in ("sw-sb", "sw-hb", "hw-sb", "hw-hb")]


class TestModesAndCoefficients:
    def test_token_round_trip(self):
        for tok in ("sw-sb", "sw-hb", "hw-sb", "hw-hb"):
            assert ConstraintMode.from_token(tok).token == tok

    def test_unknown_token(self):
        with pytest.raises(ValueError, match="unknown mode"):
            ConstraintMode.from_token("xx-yy")

    def test_constraint_names_checked(self):
        with pytest.raises(ValueError):
            ConstraintMode("rigid", "hard")

    def test_hyperparameter_validation(self):
        with pytest.raises(ValueError):
            Hyperparameters(beta=0.0)
        with pytest.raises(ValueError):
            Hyperparameters(epsilon=0.0)
        with pytest.raises(ValueError):
            Hyperparameters(tol=0.0)
        with pytest.raises(ValueError):
            Hyperparameters(max_iters=0)


class TestAssemble:
    def test_single_class_block_by_hand(self):
        # one class, positives x = 1 and x = 2, fresh auxiliaries (all 1)
        d = Dataset([[1.0], [2.0]], [[1], [1]])
        hp = Hyperparameters(beta=8.0)
        sys_ = assemble(d, ConstraintMode("soft", "hard"), hp, MMState.fresh([2]))
        # block = diag(1, 0) + (beta/4) * sum of [x;1][x;1]'
        expected_H = np.array([[1.0, 0.0], [0.0, 0.0]]) + 2.0 * np.array(
            [[5.0, 3.0], [3.0, 2.0]]
        )
        np.testing.assert_allclose(sys_.H, expected_H)
        # rhs = (beta/2) * sum of (1 + 1/z) [x;1] with z = 1
        np.testing.assert_allclose(sys_.rhs, [8.0 * 3.0, 8.0 * 2.0])

    def test_soft_w_off_diagonal_blocks(self):
        d = Dataset([[1.0, 0.0], [0.0, 1.0]], [[1, 0], [0, 1]])
        hp = Hyperparameters(alpha=0.8, beta=4.0)
        sys_ = assemble(d, ConstraintMode("soft", "hard"), hp, MMState.fresh([1, 1]))
        P = 3
        off = sys_.H[:P, P:]
        # coupling touches only weight coordinates, never the bias slot
        np.testing.assert_allclose(off, 0.4 * np.diag([1.0, 1.0, 0.0]))

    def test_soft_b_rank_one_term(self):
        d = Dataset([[1.0]], [[1, 1]])
        hp = Hyperparameters(alpha=0.0, beta=1.0, gamma=2.5)
        soft = assemble(d, ConstraintMode("soft", "soft"), hp, MMState.fresh([1, 1]))
        hard = assemble(d, ConstraintMode("soft", "hard"), hp, MMState.fresh([1, 1]))
        diff = soft.H - hard.H
        u = np.array([0.0, 1.0, 0.0, 1.0])
        np.testing.assert_allclose(diff, 2.5 * np.outer(u, u))

    def test_constraint_column_layout(self):
        d = random_multilabel(np.random.default_rng(0), 6, 3, 2)
        state = MMState.fresh([i.size for i in d.class_index_sets()])
        hp = Hyperparameters()
        P = d.n_features + 1
        U_hw = assemble(d, ConstraintMode("hard", "soft"), hp, state).constraint_matrix
        assert U_hw.shape == (2 * P, d.n_features)
        U_hb = assemble(d, ConstraintMode("soft", "hard"), hp, state).constraint_matrix
        assert U_hb.shape == (2 * P, 1)
        # the bias column sums exactly the per-class bias coordinates
        assert U_hb[:, 0].tolist() == [0, 0, 0, 1, 0, 0, 0, 1]
        U_none = assemble(d, ConstraintMode("soft", "soft"), hp, state).constraint_matrix
        assert U_none.shape == (2 * P, 0)


class TestSolve:
    @pytest.mark.parametrize("mode", MODES, ids=lambda m: m.token)
    def test_matches_dense_block_solve(self, mode):
        rng = np.random.default_rng(7)
        d = random_multilabel(rng, 12, 3, 3)
        state = MMState.fresh([i.size for i in d.class_index_sets()])
        sys_ = assemble(d, mode, Hyperparameters(alpha=0.7, beta=3.0), state)
        w, lam = solve_kkt(sys_)

        L = sys_.H.shape[0]
        c = sys_.constraint_matrix.shape[1]
        full = np.zeros((L + c, L + c))
        full[:L, :L] = 2.0 * sys_.H
        full[:L, L:] = sys_.constraint_matrix
        full[L:, :L] = sys_.constraint_matrix.T
        ref = np.linalg.solve(full, np.concatenate([sys_.rhs, np.zeros(c)]))
        np.testing.assert_allclose(w, ref[:L], atol=1e-8)
        np.testing.assert_allclose(lam, ref[L:], atol=1e-8)
        if c:
            assert np.max(np.abs(sys_.constraint_matrix.T @ w)) < 1e-10

    def test_non_finite_entries_rejected(self):
        H = np.eye(2)
        H[0, 0] = np.nan
        sys_ = AssembledSystem(H=H, rhs=np.ones(2), constraint_matrix=np.zeros((2, 0)))
        with pytest.raises(SingularSystem):
            solve_kkt(sys_)

    def test_indefinite_coupling_raises(self):
        # the pairwise coupling exceeds the diagonal for alpha > 2 and the
        # tiny hinge weight cannot lift the negative eigenvalue back up
        d = Dataset([[1.0, 0.0], [0.0, 1.0]], [[1, 0], [0, 1]])
        hp = Hyperparameters(alpha=10.0, beta=1e-3)
        with pytest.raises(HessianNotPD):
            fit_linear(d, ConstraintMode("soft", "hard"), hp)


class TestFit:
    @pytest.mark.parametrize("mode", MODES, ids=lambda m: m.token)
    def test_surrogate_descends_and_constraints_hold(self, mode):
        rng = np.random.default_rng(11)
        d = random_multilabel(rng, 20, 3, 3)
        with quiet_max_iters():
            model = fit_linear(
                d, mode, Hyperparameters(alpha=0.5, beta=5.0, tol=1e-10)
            )
        trace = np.asarray(model.surrogate_trace)
        assert np.all(np.diff(trace) <= 1e-10 * np.maximum(1.0, np.abs(trace[:-1])))
        res = feasibility(model.W, model.b)
        if mode.w_constraint == "hard":
            assert res["sum_w_inf"] <= 1e-8
        if mode.b_constraint == "hard":
            assert res["sum_b_abs"] <= 1e-8

    def test_objective_conventions_differ_by_half_norm(self):
        rng = np.random.default_rng(13)
        d = random_multilabel(rng, 15, 2, 2)
        with quiet_max_iters():
            model = fit_linear(
                d, ConstraintMode("soft", "hard"), Hyperparameters(max_iters=40)
            )
        half = objective(d, model.W, model.b, model.mode, model.hyperparameters)
        full = training_objective(d, model.W, model.b, model.mode, model.hyperparameters)
        assert full - half == pytest.approx(0.5 * float(np.sum(model.W**2)), rel=1e-12)
        assert model.final_objective == pytest.approx(half)

    def test_hinge_trace_and_diagnostics(self):
        rng = np.random.default_rng(17)
        d = random_multilabel(rng, 10, 2, 2)
        model = fit_linear(d, ConstraintMode("soft", "hard"), Hyperparameters())
        assert model.converged
        assert model.iterations_used == len(model.surrogate_trace)
        assert len(model.hinge_trace) == len(model.surrogate_trace)
        assert model.kkt_residual < 1e-10

    def test_translation_invariance_under_hard_w(self):
        # with the weight rows summing to zero, shifting every pattern by a
        # constant only moves the biases, so scores on shifted points match
        rng = np.random.default_rng(19)
        d = random_multilabel(rng, 18, 3, 3)
        shift = np.array([3.0, -2.0, 0.5])
        d2 = Dataset(d.features + shift, d.labels)
        hp = Hyperparameters(beta=4.0, tol=1e-12, max_iters=2000)
        mode = ConstraintMode("hard", "hard")
        m1 = fit_linear(d, mode, hp)
        m2 = fit_linear(d2, mode, hp)
        T = rng.standard_normal((5, 3))
        np.testing.assert_allclose(
            m1.decision_scores(T), m2.decision_scores(T + shift), atol=1e-6
        )
        np.testing.assert_allclose(m1.W, m2.W, atol=1e-6)

    def test_max_iters_warning_and_flag(self):
        rng = np.random.default_rng(23)
        d = random_multilabel(rng, 20, 3, 2)
        with pytest.warns(MaxItersExceeded):
            model = fit_linear(
                d, ConstraintMode("soft", "hard"), Hyperparameters(max_iters=2)
            )
        assert not model.converged
        assert model.iterations_used == 2

    def test_empty_class_rejected(self):
        d = Dataset([[1.0], [2.0]], [[1, 0], [1, 0]])
        with pytest.raises(ValueError, match="class 1"):
            fit_linear(d, ConstraintMode("soft", "hard"), Hyperparameters())

    def test_soft_b_needs_positive_gamma(self):
        d = Dataset([[1.0]], [[1]])
        with pytest.raises(ValueError, match="gamma"):
            fit_linear(d, ConstraintMode("soft", "soft"), Hyperparameters(gamma=0.0))

    def test_decision_scores_shape(self):
        rng = np.random.default_rng(29)
        d = random_multilabel(rng, 8, 2, 3)
        with quiet_max_iters():
            model = fit_linear(
                d, ConstraintMode("soft", "hard"), Hyperparameters(max_iters=20)
            )
        assert model.decision_scores(np.zeros((4, 2))).shape == (4, 3)
        assert (model.n_classes, model.n_features) == (3, 2)
