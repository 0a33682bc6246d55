import itertools

import numpy as np
import pytest
import scipy.optimize as so
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsecert.ensembles import SamplingMatrix, fourier_rows, generate, normalize
from sparsecert.errors import BudgetExceeded, InvalidParameter
from sparsecert.l1solve import l0_oracle, realify_system, recover, solve_l1


def highs_l1(A, y):
    a, yr = realify_system(A, y)
    n = a.shape[1]
    res = so.linprog(np.ones(2 * n), A_eq=np.hstack([a, -a]), b_eq=yr, bounds=(0, None), method="highs")
    return res.fun


class TestSolve:
    def test_zero_measurements(self):
        res = solve_l1(np.array([[1.0, 2.0, 3.0]]), [0.0])
        assert res.status == "optimal" and res.objective == 0 and not np.any(res.minimizer)

    def test_identity(self):
        y = np.array([1.5, -2.0, 0.0, 4.0])
        res = solve_l1(np.eye(4), y)
        assert np.allclose(res.minimizer, y)

    def test_tie_reports_objective_one(self):
        res = solve_l1(np.array([[1.0, -1.0]]), [1.0])
        assert res.objective == pytest.approx(1.0)

    def test_infeasible(self):
        assert solve_l1(np.zeros((1, 2)), [1.0]).status == "infeasible"

    def test_bad_shape(self):
        with pytest.raises(InvalidParameter):
            solve_l1(np.eye(3), [1.0, 2.0])

    def test_json_shape(self):
        out = solve_l1(np.eye(2), [1.0, 0.0]).to_json()
        assert set(out) == {"x", "objective", "residual", "status"}

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(["fourier", "hadamard", "rademacher"]), st.integers(0, 2**32 - 1))
    def test_objective_matches_highs(self, ens, seed):
        rng = np.random.default_rng(seed)
        N = 16
        A = normalize(generate(ens, N, int(rng.integers(2, N)), seed))
        x = np.zeros(N)
        k = int(rng.integers(1, 5))
        x[rng.choice(N, k, replace=False)] = rng.standard_normal(k)
        y = A.entries @ x
        res = solve_l1(A, y)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(highs_l1(A, y), rel=1e-8, abs=1e-10)
        assert res.feasibility_residual <= 1e-9 * (1 + np.abs(y).max())


class TestRecover:
    def test_identity_always(self):
        assert recover(np.eye(5), [0, 3, 0, -1, 2]).success

    def test_full_dft(self):
        A = normalize(SamplingMatrix(fourier_rows(8, range(8))))
        x0 = np.random.default_rng(2).standard_normal(8)
        assert recover(A, x0).success

    def test_tie_is_exposed(self):
        rep = recover(np.array([[1.0, -1.0]]), [0.0, -1.0])
        assert rep.bp_result.objective == pytest.approx(1.0)
        assert rep.success or rep.tied_objective

    def test_wrong_length(self):
        with pytest.raises(InvalidParameter):
            recover(np.eye(3), [1.0])


class TestL0:
    def test_zero(self):
        sol = l0_oracle(np.eye(3), [0, 0, 0], 2)
        assert sol.sparsity == 0

    def test_example(self):
        sol = l0_oracle(np.array([[1.0, 1, 0], [0, 1, 1]]), [1, 0], 2)
        assert sol.support == (0,) and np.allclose(sol.x, [1, 0, 0])

    def test_identity_dense(self):
        y = np.array([1.0, 2.0, 3.0])
        assert np.allclose(l0_oracle(np.eye(3), y, 3).x, y)

    def test_none_when_too_sparse(self):
        assert l0_oracle(np.eye(3), [1, 1, 1], 2) is None

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            l0_oracle(np.ones((1, 40)), [1.0], 5, budget=1000)

    def test_bp_agrees_with_l0_for_sparse_inputs(self):
        # with m = 8 Hadamard rows a 1-sparse signal is the unique sparsest and l1 solution
        A = normalize(generate("hadamard", 8, 8, 0, replace_rows=False))
        for j, sign in itertools.product(range(8), (1.0, -1.0)):
            x = np.zeros(8)
            x[j] = sign
            y = A.entries @ x
            assert np.allclose(l0_oracle(A, y, 1).x, x)
            assert np.allclose(solve_l1(A, y).minimizer, x, atol=1e-9)
