import numpy as np
import pytest

from conftest import random_socp
from greenbeam.socp import (
    ConeProblem,
    ConeSolution,
    ConeSpec,
    NonNeg,
    Residuals,
    SecondOrder,
    Status,
    kkt_residuals,
    solve_socp,
)

cp = pytest.importorskip("cvxpy")


def norm_problem():
    # minimize t s.t. ||(3, 4)|| <= t
    return ConeProblem(c=[1.0], G=[[-1.0], [0.0], [0.0]], h=[0.0, 3.0, 4.0],
                       cones=ConeSpec([SecondOrder(3)]))


def cvxpy_value(p: ConeProblem) -> float:
    x = cp.Variable(p.n_var)
    s = p.h - p.G @ x
    cons, pos = [], 0
    for b in p.cones.blocks:
        if isinstance(b, NonNeg):
            cons.append(s[pos:pos + b.length] >= 0)
            pos += b.length
        else:
            if b.dim == 1:
                cons.append(s[pos] >= 0)
            else:
                cons.append(cp.SOC(s[pos], s[pos + 1:pos + b.dim]))
            pos += b.dim
    if p.b.size:
        cons.append(p.A @ x == p.b)
    prob = cp.Problem(cp.Minimize(p.c @ x), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def test_cone_spec_validation():
    with pytest.raises(ValueError):
        NonNeg(0)
    with pytest.raises(ValueError):
        SecondOrder(0)
    spec = ConeSpec([NonNeg(2), SecondOrder(3)])
    assert spec.dim == 5 and spec.degree == 3


def test_problem_validation():
    with pytest.raises(ValueError):
        ConeProblem(c=[1.0], G=[[1.0], [1.0]], h=[1.0], cones=ConeSpec([NonNeg(1)]))
    with pytest.raises(ValueError):
        ConeProblem(c=[1.0], G=[[1.0]], h=[1.0], cones=ConeSpec([NonNeg(2)]))
    with pytest.raises(ValueError):
        ConeProblem(c=[np.inf], G=[[1.0]], h=[1.0], cones=ConeSpec([NonNeg(1)]))
    with pytest.raises(ValueError):
        solve_socp(norm_problem(), tol=0.0)


def test_one_variable_lp():
    # minimize z s.t. z >= 1
    p = ConeProblem(c=[1.0], G=[[-1.0]], h=[-1.0], cones=ConeSpec([NonNeg(1)]))
    sol = solve_socp(p)
    assert sol.status == Status.OPTIMAL
    assert sol.x[0] == pytest.approx(1.0, abs=1e-7)


def test_norm_of_fixed_vector():
    sol = solve_socp(norm_problem())
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(5.0, abs=1e-7)
    assert kkt_residuals(norm_problem(), sol).max() <= 1e-8


def test_residuals_of_analytic_pair():
    p = norm_problem()
    sol = ConeSolution(status=Status.OPTIMAL, x=np.array([5.0]), s=np.array([5.0, 3.0, 4.0]),
                       y=np.zeros(0), z=np.array([1.0, -0.6, -0.8]),
                       primal_objective=5.0, dual_objective=5.0,
                       residuals=Residuals(0, 0, 0), iterations=0)
    assert kkt_residuals(p, sol).max() <= 1e-12
    perturbed = ConeSolution(**{**sol.__dict__, "x": np.array([5.1])})
    assert kkt_residuals(p, perturbed, relative=False).primal >= 0.05
    assert kkt_residuals(p, perturbed).primal > 1e-3


def test_primal_infeasible_certificate():
    # x <= -1 and x >= 1
    p = ConeProblem(c=[1.0], G=[[1.0], [-1.0]], h=[-1.0, -1.0], cones=ConeSpec([NonNeg(2)]))
    sol = solve_socp(p)
    assert sol.status == Status.PRIMAL_INFEASIBLE
    assert float(p.h @ sol.z) == pytest.approx(-1.0, abs=1e-8)
    assert np.linalg.norm(p.G.T @ sol.z) <= 1e-7
    assert np.all(sol.z >= -1e-10)


def test_dual_infeasible_certificate():
    # minimize x s.t. x <= 1: unbounded below
    p = ConeProblem(c=[1.0], G=[[1.0]], h=[1.0], cones=ConeSpec([NonNeg(1)]))
    sol = solve_socp(p)
    assert sol.status == Status.DUAL_INFEASIBLE
    assert float(p.c @ sol.x) == pytest.approx(-1.0, abs=1e-8)


def test_equality_constraints():
    # minimize ||x|| s.t. x1 + x2 = 2
    G = np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
    p = ConeProblem(c=[1.0, 0.0, 0.0], G=G, h=np.zeros(3), A=[[0.0, 1.0, 1.0]], b=[2.0],
                    cones=ConeSpec([SecondOrder(3)]))
    sol = solve_socp(p)
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(np.sqrt(2.0), abs=1e-7)


def test_max_iterations_status():
    rng = np.random.default_rng(3)
    sol = solve_socp(random_socp(rng, n=5), max_iter=1)
    assert sol.status == Status.MAX_ITERATIONS


@pytest.mark.parametrize("seed", range(40))
def test_random_socp_against_cvxpy(seed):
    rng = np.random.default_rng(seed)
    p = random_socp(rng)
    sol = solve_socp(p)
    assert sol.status == Status.OPTIMAL
    assert kkt_residuals(p, sol).max() <= 1e-7
    assert sol.primal_objective >= sol.dual_objective - 1e-7 * max(1.0, abs(sol.primal_objective))
    ref = cvxpy_value(p)
    assert sol.objective == pytest.approx(ref, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_small_socp_against_grid(seed):
    # two variables: brute-force refinement over a shrinking grid
    rng = np.random.default_rng(100 + seed)
    p = random_socp(rng, n=2, with_eq=False)
    sol = solve_socp(p)
    assert sol.status == Status.OPTIMAL

    def feasible(X):
        S = p.h[None, :] - X @ p.G.T
        ok = np.ones(len(X), dtype=bool)
        pos = 0
        for b in p.cones.blocks:
            if isinstance(b, NonNeg):
                ok &= np.all(S[:, pos:pos + b.length] >= 0, axis=1)
                pos += b.length
            else:
                ok &= S[:, pos] >= np.linalg.norm(S[:, pos + 1:pos + b.dim], axis=1)
                pos += b.dim
        return ok

    center, width, best = sol.x.copy(), 4.0, np.inf
    for _ in range(30):
        g = np.linspace(-width, width, 81)
        X = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2) + center
        X = X[feasible(X)]
        if len(X):
            vals = X @ p.c
            i = int(np.argmin(vals))
            if vals[i] < best:
                best, center = vals[i], X[i]
        width /= 2
    assert sol.objective == pytest.approx(best, rel=1e-4, abs=1e-4)
    assert sol.objective <= best + 1e-7


def test_deterministic():
    rng = np.random.default_rng(9)
    p = random_socp(rng)
    a, b = solve_socp(p), solve_socp(p)
    for f in ("x", "s", "y", "z"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()
