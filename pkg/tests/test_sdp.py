import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otacomp.design import constraint_rows, verify_lifted
from otacomp.field import random_table, stacked, tabulate_function
from otacomp.sdp import ConvergenceError, clean_primal, dual_bound, solve_maxmin

cp = pytest.importorskip("cvxpy")


def cvx_maxmin(C):
    """Independent reference: the same program handed to a generic conic solver."""
    n = C.shape[1]
    W = cp.Variable((n, n), symmetric=True)
    t = cp.Variable()
    cons = [W >> 0, cp.trace(W) <= 1] + [C[p] @ W @ C[p] >= t for p in range(C.shape[0])]
    cp.Problem(cp.Maximize(t), cons).solve(solver="CLARABEL")
    return float(t.value)


@pytest.mark.parametrize("gamma", [1.0, 3.0, 4.0])
@pytest.mark.parametrize("n", [2, 4, 7])
def test_single_constraint_closed_form(n, gamma):
    a = np.zeros(n)
    a[0], a[1] = 1.0, -1.0
    r = solve_maxmin((a / np.sqrt(gamma))[None, :])
    assert r.converged
    assert r.t == pytest.approx(2.0 / gamma, rel=1e-6)
    # all the weight sits on the direction of a
    u = a / np.linalg.norm(a)
    assert u @ r.W @ u == pytest.approx(1.0, abs=1e-6)


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
@pytest.mark.parametrize("name,K,Q", [("sum", 2, 2), ("product", 2, 2), ("max", 3, 3),
                                      ("sum", 3, 4), ("product", 3, 4), ("max", 3, 4),
                                      ("sum-of-squares", 2, 4)])
def test_matches_generic_solver(name, K, Q):
    tab = tabulate_function(stacked([name]), K, Q, 1)
    alphas, gammas = constraint_rows(tab, 0)
    C = alphas / np.sqrt(gammas)[:, None]
    r = solve_maxmin(C)
    ref = cvx_maxmin(C)
    assert r.t == pytest.approx(ref, rel=1e-4, abs=1e-9)
    assert r.t <= r.upper_bound + 1e-12
    assert r.gap <= 1e-6 * abs(r.upper_bound)


@settings(max_examples=15)
@given(K=st.integers(1, 3), Q=st.integers(2, 3), seed=st.integers(0, 2**20))
def test_random_tables_feasible_and_certified(K, Q, seed):
    tab = random_table(K, Q, 1, 3, np.random.default_rng(seed))
    alphas, gammas = constraint_rows(tab, 0)
    if len(alphas) == 0:
        return
    r = solve_maxmin(alphas / np.sqrt(gammas)[:, None])
    chk = verify_lifted(r.W, r.t, alphas, gammas, tol=1e-9)
    assert chk["psd"] and chk["trace"] and chk["pairs"]
    assert r.t > 0
    assert r.t <= r.upper_bound * (1 + 1e-9)


def test_dual_bound_is_upper_bound():
    rng = np.random.default_rng(1)
    C = rng.standard_normal((6, 4))
    r = solve_maxmin(C)
    for _ in range(20):
        assert dual_bound(C, rng.random(6)) >= r.t - 1e-9


def test_clean_primal_projects():
    C = np.eye(3)
    W = np.diag([2.0, -1.0, 0.5])
    Wc, t = clean_primal(C, W)
    assert np.linalg.eigvalsh(Wc)[0] >= -1e-12
    assert np.trace(Wc) <= 1 + 1e-12
    assert t == pytest.approx(np.min(np.diag(Wc)))


def test_iteration_budget_raises_with_best_iterate():
    tab = tabulate_function(stacked(["product"]), 3, 4, 1)
    alphas, gammas = constraint_rows(tab, 0)
    with pytest.raises(ConvergenceError) as ei:
        solve_maxmin(alphas / np.sqrt(gammas)[:, None], max_iter=2)
    assert ei.value.best.W.shape == (12, 12)
