import math

import numpy as np
import pytest

import oracles
from tmfrac.eigen import principal_eigenvalue
from tmfrac.errors import ConvergenceError, DomainError, FunctionalOverflowError, PreconditionError
from tmfrac.extremal import (
    SolverOptions,
    euler_lagrange_residual,
    lagrange_lambda,
    moser_functional,
    solve_subcritical,
    solve_subcritical_oracle,
)
from tmfrac.fracspace import Params, RadialFunction, make_grid, norms

P21 = Params(2.0, 1.0)
GRID = make_grid(512)


@pytest.fixture(scope="module")
def fp21():
    return solve_subcritical(P21, P21.mu / 2, GRID)


def test_functional_examples():
    g = make_grid(8192)
    zero = RadialFunction.from_values(g, np.zeros(g.N))
    assert moser_functional(zero, 4.0, P21) == pytest.approx(1.0, rel=1e-13)
    assert lagrange_lambda(zero, 4.0, P21) == 0.0
    u = RadialFunction.from_callable(g, lambda r: 1 - r)
    ref = oracles.moser_integral(lambda r: 1 - r, 4.0, 2.0, 1.0)
    assert moser_functional(u, 4.0, P21) == pytest.approx(ref, rel=1e-6)
    ref_l = oracles.weighted_quad(lambda r: np.exp(4 * (1 - r) ** 2) * (1 - r) ** 2, 1.0, 0.0, 1.0)
    assert lagrange_lambda(u, 4.0, P21) == pytest.approx(ref_l, rel=1e-6)
    assert moser_functional(u, 3.0, P21) <= moser_functional(u, 4.0, P21)
    # e^t <= 1 + t e^t with t = mu u^q bounds F - |B_R| by mu times lambda
    assert 4.0 * lagrange_lambda(u, 4.0, P21) >= moser_functional(u, 4.0, P21) - P21.ball


def test_lambda_bound_needs_mu_factor():
    # without the factor mu the bound fails on this simple profile
    g = make_grid(2048)
    u = RadialFunction.from_callable(g, lambda r: 1 - r)
    assert lagrange_lambda(u, 4.0, P21) < moser_functional(u, 4.0, P21) - P21.ball


def test_overflow_names_node():
    g = make_grid(128)
    u = RadialFunction.from_callable(g, lambda r: 20 * (1 - r))
    with pytest.raises(FunctionalOverflowError) as info:
        moser_functional(u, 4.0, P21)
    assert info.value.index == 0
    assert "node 0" in str(info.value)


def test_eps_guards():
    with pytest.raises(DomainError):
        solve_subcritical(P21, 0.0, GRID)
    with pytest.raises(DomainError):
        solve_subcritical(P21, P21.mu, GRID)
    with pytest.raises(PreconditionError):
        solve_subcritical(P21, 0.01 * P21.mu, GRID)


def test_maximizer_invariants(fp21):
    r = fp21
    assert r.converged
    assert abs(norms(r.u, P21).h_nu - 1) <= 1e-8
    assert r.S_eps >= P21.ball
    assert r.mu_eps * r.lambda_eps > r.S_eps - P21.ball
    assert np.all(np.diff(r.u.values) <= 0.0)
    assert r.u.values[-1] == 0.0
    assert abs(r.u.derivative[0]) < 0.05 * np.max(np.abs(r.u.derivative))
    assert r.mu_eps == pytest.approx(P21.mu / 2)
    assert r.fixed_point_residual < 1e-6


def test_euler_lagrange_residual(fp21):
    assert euler_lagrange_residual(fp21) <= 1e-6


def test_oracle_agrees_and_dominates_trials(fp21):
    orc = solve_subcritical_oracle(P21, P21.mu / 2, GRID)
    assert abs(orc.S_eps - fp21.S_eps) / fp21.S_eps <= 5e-3
    assert np.all(np.diff(orc.u.values) <= 1e-12)
    rng = np.random.default_rng(11)
    for _ in range(10):
        drops = rng.uniform(0.0, 1.0, GRID.N - 1) * GRID.h
        v = np.zeros(GRID.N)
        v[:-1] = np.cumsum(drops[::-1])[::-1]
        u = RadialFunction.from_values(GRID, v)
        u = u.scaled(1.0 / norms(u, P21).h_nu)
        assert orc.S_eps >= moser_functional(u, orc.mu_eps, P21)
        assert fp21.S_eps >= moser_functional(u, fp21.mu_eps, P21)


def test_monotone_in_eps():
    vals = [solve_subcritical(P21, f * P21.mu, GRID).S_eps for f in (0.8, 0.6, 0.4, 0.3, 0.2)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_monotone_in_nu():
    lam = principal_eigenvalue(P21, GRID).lambda_
    vals = [solve_subcritical(P21.replace(nu=f * lam), P21.mu / 2, GRID).S_eps for f in (0.0, 0.2, 0.4, 0.6)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_scaling_identity():
    R = 2.0
    lam = principal_eigenvalue(P21, GRID).lambda_
    nu = 0.3 * lam / R**2  # admissible on the bigger ball
    big = solve_subcritical(P21.replace(R=R, nu=nu), P21.mu / 2, make_grid(512, R))
    unit = solve_subcritical(P21.replace(nu=nu * R**2), P21.mu / 2, GRID)
    assert big.S_eps == pytest.approx(R**2 * unit.S_eps, rel=5e-3)


def test_p3_solver_and_oracle():
    prm = Params(3.0, 2.0)
    g = make_grid(512)
    a = solve_subcritical(prm, prm.mu / 2, g)
    b = solve_subcritical_oracle(prm, prm.mu / 2, g)
    assert a.S_eps == pytest.approx(b.S_eps, rel=5e-3)
    assert abs(norms(a.u, prm).h_nu - 1) <= 1e-8
    assert euler_lagrange_residual(a) <= 1e-6


def test_nonconvergence_carries_best():
    with pytest.raises(ConvergenceError) as info:
        solve_subcritical(P21, P21.mu / 2, GRID, SolverOptions(max_iter=3))
    assert info.value.best.S_eps >= P21.ball
    assert len(info.value.trace) == 3
