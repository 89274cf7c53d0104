"""The Moser functional and its subcritical constrained maximizers.

The maximization of ``F(u) = int exp(mu_eps |u|^q) d lambda_theta`` over
``H_nu(u) = 1`` (with ``q = p/(p-1)`` and ``mu_eps = mu - eps``) is solved in
two independent ways:

* :func:`solve_subcritical` iterates the integral form of the Euler-Lagrange
  equation,
  ``-u'(r) = [ (omega_alpha r^alpha)^-1 int_0^r (f/lambda + nu u^(p-1)) d lambda_theta ]^(1/(p-1))``
  with ``f = exp(mu_eps u^q) u^(1/(p-1))`` and ``lambda`` the Lagrange
  normalization ``int exp(mu_eps u^q) u^q d lambda_theta``.
* :func:`solve_subcritical_oracle` runs projected gradient ascent on the
  discretized functional and shares nothing with the fixed point beyond the
  quadrature weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, DomainError, FunctionalOverflowError, PreconditionError
from .fracspace import (
    Params,
    RadialFunction,
    RadialGrid,
    cell_weights,
    make_grid,
    mass_weights,
    norms,
    solve_flux,
)

__all__ = [
    "SolverOptions",
    "MaximizerResult",
    "moser_functional",
    "lagrange_lambda",
    "euler_lagrange_residual",
    "solve_subcritical",
    "solve_subcritical_oracle",
    "EXP_LIMIT",
    "EPS_FLOOR",
]

EXP_LIMIT = 700.0
EPS_FLOOR = 0.02


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 10_000
    damping: float = 0.5
    n_starts: int = 3
    allow_small_eps: bool = False
    seed: int = 0


@dataclass(frozen=True)
class MaximizerResult:
    u: RadialFunction
    S_eps: float
    lambda_eps: float
    a_eps: float
    mu_eps: float
    fixed_point_residual: float
    iterations: int
    converged: bool
    params: Params = field(repr=False, default=None)
    eps: float = math.nan


def _exponent(values, mu, params):
    t = mu * np.abs(values) ** params.q
    bad = np.flatnonzero(t > EXP_LIMIT)
    return t, bad


def _raise_overflow(u_values, nodes, bad, t):
    i = int(bad[0])
    raise FunctionalOverflowError(
        f"mu |u|^q = {t[i]:.4g} exceeds {EXP_LIMIT:g} at node {i} (r = {nodes[i]:.6g})",
        index=i,
        radius=float(nodes[i]),
    )


def moser_functional(u: RadialFunction, mu: float, params: Params) -> float:
    """``int_0^R exp(mu |u|^q) d lambda_theta`` from nodal exponentials.

    Raises
    ------
    FunctionalOverflowError
        When ``mu |u|^q > 700`` at some node; the first offending node is named.
    """
    t, bad = _exponent(u.values, mu, params)
    if bad.size:
        _raise_overflow(u.values, u.nodes, bad, t)
    return float(mass_weights(u.grid, params.theta) @ np.exp(t))


def lagrange_lambda(u: RadialFunction, mu: float, params: Params) -> float:
    """``int_0^R exp(mu u^q) u^q d lambda_theta``."""
    t, bad = _exponent(u.values, mu, params)
    if bad.size:
        _raise_overflow(u.values, u.nodes, bad, t)
    return float(mass_weights(u.grid, params.theta) @ (np.exp(t) * np.abs(u.values) ** params.q))


def _source(values, mu, lam, params):
    v = np.maximum(values, 0.0)
    t, bad = _exponent(v, mu, params)
    if bad.size:
        raise FunctionalOverflowError(f"mu u^q = {t[bad[0]]:.4g} exceeds {EXP_LIMIT:g} at node {bad[0]}", index=int(bad[0]))
    return np.exp(t) * v ** (1.0 / (params.p - 1.0)) / lam + params.nu * v ** (params.p - 1.0)


def _fixed_point_map(values, grid, mu, params):
    u = RadialFunction(grid, values, np.zeros_like(values))
    lam = lagrange_lambda(u, mu, params)
    return solve_flux(grid, params.p, params.theta, _source(values, mu, lam, params)), lam


def _h_nu(values, grid, params):
    u = RadialFunction(grid, values, np.zeros_like(values))
    return norms(u, params).h_nu


def _normalize(values, grid, params):
    return values / _h_nu(values, grid, params)


def euler_lagrange_residual(result: MaximizerResult) -> float:
    """Largest mismatch in the integral Euler-Lagrange relation, relative.

    Evaluated cell by cell: the slope ``-s_j`` is compared with the right-hand
    side built from the cumulative weighted integral up to the cell, and the
    result is divided by ``max |s_j|``.
    """
    params = result.params
    grid = result.u.grid
    v = result.u.values
    src = _source(v, result.mu_eps, result.lambda_eps, params)
    flux = np.cumsum(mass_weights(grid, params.theta) * src)[:-1]
    rhs = (grid.h * flux / cell_weights(grid, params.alpha)) ** (1.0 / (params.p - 1.0))
    lhs = -result.u.slopes
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))


def _check_eps(params, eps, opts):
    mu = params.mu
    if not 0.0 < eps < mu:
        raise DomainError(f"eps must lie in (0, mu) = (0, {mu:.6g}), got {eps!r}")
    if eps < EPS_FLOOR * mu and not opts.allow_small_eps:
        raise PreconditionError(
            f"eps = {eps:g} is below {EPS_FLOOR} mu; pass allow_small_eps=True for sweeps on fine grids"
        )


def _finish(values, grid, params, eps, mu_eps, its, converged, residual):
    u = RadialFunction.from_values(grid, values, dirichlet=True)
    S = moser_functional(u, mu_eps, params)
    lam = lagrange_lambda(u, mu_eps, params)
    return MaximizerResult(
        u=u,
        S_eps=S,
        lambda_eps=lam,
        a_eps=u.value_at_zero(),
        mu_eps=mu_eps,
        fixed_point_residual=residual,
        iterations=its,
        converged=converged,
        params=params,
        eps=eps,
    )


def solve_subcritical(
    params: Params,
    eps: float,
    grid: RadialGrid | None = None,
    opts: SolverOptions | None = None,
    initial: np.ndarray | None = None,
) -> MaximizerResult:
    """Damped fixed-point iteration on the integral Euler-Lagrange equation.

    Each sweep recomputes the Lagrange normalization from the current iterate,
    applies the exact discrete inverse of the weighted p-Laplacian, blends with
    the previous iterate (``damping`` is the weight of the new one) and rescales
    onto ``H_nu = 1``.

    Raises
    ------
    ConvergenceError
        If the sup-norm change does not drop below ``opts.tol`` within
        ``opts.max_iter`` sweeps; the best iterate is attached.
    """
    opts = opts or SolverOptions()
    _check_eps(params, eps, opts)
    grid = grid or make_grid(1024, params.R)
    mu_eps = params.mu - eps
    tau = opts.damping
    if initial is None:
        initial = 1.0 - grid.nodes / grid.R
    u = _normalize(np.asarray(initial, dtype=float), grid, params)
    trace = []
    for it in range(1, opts.max_iter + 1):
        tu, _ = _fixed_point_map(u, grid, mu_eps, params)
        nxt = _normalize((1.0 - tau) * u + tau * tu, grid, params)
        step = float(np.max(np.abs(nxt - u)))
        u = nxt
        trace.append(step)
        if step < opts.tol:
            tu, _ = _fixed_point_map(u, grid, mu_eps, params)
            residual = float(np.max(np.abs(u - tu)))
            return _finish(u, grid, params, eps, mu_eps, it, True, residual)
    tu, _ = _fixed_point_map(u, grid, mu_eps, params)
    best = _finish(u, grid, params, eps, mu_eps, opts.max_iter, False, float(np.max(np.abs(u - tu))))
    raise ConvergenceError(
        f"fixed point did not converge in {opts.max_iter} sweeps (last step {trace[-1]:.3e})",
        best=best,
        trace=trace[-50:],
    )


# -- projected ascent oracle ---------------------------------------------------


class _AscentProblem:
    """Functional and gradient in scaled slope coordinates ``x_j = A_j^(1/p) s_j``.

    In these coordinates the gradient energy is ``sum |x_j|^p``, which keeps the
    ascent well conditioned on strongly graded grids.
    """

    def __init__(self, grid, params, mu):
        self.grid = grid
        self.params = params
        self.mu = mu
        self.W = np.asarray(mass_weights(grid, params.theta))
        self.A = np.asarray(cell_weights(grid, params.alpha))
        self.h = grid.h
        self.scale = self.A ** (1.0 / params.p)

    def values(self, x):
        s = x / self.scale
        u = np.zeros(self.grid.N)
        u[:-1] = np.cumsum((-s * self.h)[::-1])[::-1]
        return u

    def coords(self, u):
        return np.diff(u) / self.h * self.scale

    def _pullback(self, du):
        # d/dx_j of a function of u: u_i depends on s_j for i <= j
        return -np.cumsum(du)[:-1] * self.h / self.scale

    def constraint(self, x):
        u = self.values(x)
        p = self.params.p
        return float(np.sum(np.abs(x) ** p) - self.params.nu * self.W @ np.abs(u) ** p)

    def constraint_grad(self, x):
        u = self.values(x)
        p = self.params.p
        gx = p * np.abs(x) ** (p - 2.0) * x
        du = self.params.nu * p * self.W * np.abs(u) ** (p - 2.0) * u
        return gx - self._pullback(du)

    def project(self, x):
        return x / self.constraint(x) ** (1.0 / self.params.p)

    def objective(self, x):
        u = self.values(x)
        t = self.mu * np.abs(u) ** self.params.q
        if np.any(t > EXP_LIMIT):
            return -math.inf
        return float(self.W @ np.exp(t))

    def objective_grad(self, x):
        u = self.values(x)
        q = self.params.q
        t = self.mu * np.abs(u) ** q
        du = self.W * np.exp(t) * self.mu * q * np.abs(u) ** (q - 1.0) * np.sign(u)
        return self._pullback(du)


def _ascend(prob, x, tol, max_iter):
    x = prob.project(x)
    f = prob.objective(x)
    step = 1e-2
    for it in range(1, max_iter + 1):
        g = prob.objective_grad(x)
        n = prob.constraint_grad(x)
        tangent = g - (g @ n) / (n @ n) * n
        tnorm = math.sqrt(tangent @ tangent)
        xnorm = math.sqrt(x @ x)
        if tnorm == 0.0:
            return x, f, it
        direction = tangent / tnorm * xnorm
        while True:
            trial = prob.project(x + step * direction)
            ft = prob.objective(trial)
            if ft >= f + 1e-4 * step * tnorm * xnorm * 1e-3 or step < 1e-14:
                break
            step *= 0.5
        if ft < f:
            return x, f, it
        gain = ft - f
        x, f = trial, ft
        step = min(step * 1.5, 0.5)
        if gain <= tol * f:
            return x, f, it
    return x, f, max_iter


def solve_subcritical_oracle(
    params: Params,
    eps: float,
    grid: RadialGrid | None = None,
    opts: SolverOptions | None = None,
    eigenfunction: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 20_000,
) -> MaximizerResult:
    """Projected gradient ascent on the discrete functional (verification only).

    Starts from the scaled profiles ``1 - r/R``, the principal eigenfunction
    and a truncated blow-up bubble, ascends along the constraint tangent with
    backtracking, rescales onto ``H_nu = 1`` after every step, and keeps the
    best functional value.
    """
    opts = opts or SolverOptions()
    _check_eps(params, eps, opts)
    grid = grid or make_grid(1024, params.R)
    mu_eps = params.mu - eps
    prob = _AscentProblem(grid, params, mu_eps)
    r = grid.nodes
    starts = [1.0 - r / grid.R]
    if opts.n_starts >= 2:
        if eigenfunction is None:
            from .eigen import principal_eigenvalue

            eigenfunction = principal_eigenvalue(params, grid).eigenfunction.values
        starts.append(np.asarray(eigenfunction, dtype=float))
    if opts.n_starts >= 3:
        delta = 0.1 * grid.R
        k = (params.theta + 1.0) / (params.p - 1.0)
        bubble = np.log((1.0 + grid.R**k / delta**k) / (1.0 + (r / delta) ** k))
        starts.append(bubble)
    best = None
    iters = 0
    for u0 in starts[: max(1, opts.n_starts)]:
        x, f, its = _ascend(prob, prob.coords(np.asarray(u0, dtype=float)), tol, max_iter)
        iters += its
        if best is None or f > best[1]:
            best = (x, f)
    u = prob.values(best[0])
    u = _normalize(u, grid, params)
    tu, _ = _fixed_point_map(u, grid, mu_eps, params)
    return _finish(u, grid, params, eps, mu_eps, iters, True, float(np.max(np.abs(u - tu))))
