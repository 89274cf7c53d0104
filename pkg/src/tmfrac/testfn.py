"""Explicit competitors that beat the critical upper bound.

For ``L = -ln eps`` the family glues a scaled bubble to the Green profile:

* ``[0, L eps]``: ``c + c^(-1/(p-1)) [ -(p-1)/mu ln(1 + c0 (r/eps)^k) + Lambda ]``
* ``[L eps, 2 L eps]``: ``c^(-1/(p-1)) (g - phi z)`` with a smooth cutoff ``phi``
  going from 1 to 0
* ``[2 L eps, R]``: ``c^(-1/(p-1)) g``

``Lambda`` is fixed by continuity at ``L eps`` and ``c`` by ``H_nu(v) = 1``.
Substituting ``Lambda`` shows ``v = c^(-1/(p-1)) w`` with ``w`` independent of
``c``; the scalar solve is still done by bisection so that a mistake in that
algebra would show up as a bracket failure rather than a silent error.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from . import specfun
from .blowup import _thread_cap, profile_psi
from .errors import DomainError, PreconditionError
from .extremal import moser_functional
from .fracspace import Params, RadialFunction, make_grid, merge_grids, norms, omega
from .green import GreenResult

__all__ = [
    "TestFunctionResult",
    "LowerBoundTable",
    "build_test_function",
    "c_asymptotic_power",
    "inner_branch_energy",
    "lower_bound_check",
    "write_lower_bound_csv",
    "TABLE_COLUMNS",
]

TABLE_COLUMNS = ("eps", "L", "c", "c_asym", "H_residual", "functional", "upper_bound", "margin")


@dataclass(frozen=True)
class TestFunctionResult:
    __test__ = False  # keep pytest from collecting this class

    v: RadialFunction
    eps: float
    L: float
    Lambda_eps: float
    c: float
    c_asymptotic: float
    h_residual: float
    functional: float
    margin: float


def c_asymptotic_power(params: Params, eps: float, A0: float) -> float:
    """Large-``L`` prediction for ``c^(p/(p-1))``."""
    mu = params.mu
    return (
        -(params.theta + 1.0) / mu * math.log(eps)
        + A0
        + math.log(omega(params.theta) / (params.theta + 1.0)) / mu
        - (params.p - 1.0) / mu * (specfun.digamma(params.p) + specfun.euler_gamma())
    )


def _smoothstep_cutoff(r, lo, hi):
    t = np.clip((r - lo) / (hi - lo), 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


def _test_grid(params, eps, L, green, n_inner, n_glue):
    le = L * eps
    inner = np.geomspace(eps * 1e-4, le, n_inner)
    glue = np.linspace(le, 2.0 * le, n_glue)
    outer_g = green.g.nodes[green.g.nodes > 2.0 * le]
    # keep the outer part at least as fine as a 1500-node log grid
    outer_log = np.geomspace(2.0 * le, params.R, 1500)
    return merge_grids(inner, glue, outer_g, outer_log)


def _shape(params, eps, L, green, r):
    """The ``c``-free profile ``w`` with ``v = c^(-1/(p-1)) w``."""
    prof = profile_psi(params.p, params.theta)
    mu = params.mu
    kappa = (params.theta + 1.0) / mu
    le = L * eps
    w = np.empty_like(r)
    a = r <= le
    w[a] = (params.p - 1.0) / mu * (
        np.log1p(prof.c0 * L**prof.k) - np.log1p(prof.c0 * (r[a] / eps) ** prof.k)
    ) - kappa * math.log(le) + green.A0
    b = (r > le) & (r < 2.0 * le)
    w[b] = green.g_eval(r[b]) - _smoothstep_cutoff(r[b], le, 2.0 * le) * green.z_eval(r[b])
    c = r >= 2.0 * le
    w[c] = green.g_eval(r[c])
    return w


def _gluing_constant(params, eps, L, A0, c):
    prof = profile_psi(params.p, params.theta)
    mu = params.mu
    return (
        -(c**params.q)
        + (params.p - 1.0) / mu * math.log1p(prof.c0 * L**prof.k)
        - (params.theta + 1.0) / mu * math.log(L * eps)
        + A0
    )


def build_test_function(
    params: Params,
    eps: float,
    green: GreenResult,
    n_inner: int = 4000,
    n_glue: int = 400,
) -> TestFunctionResult:
    """Assemble ``v_eps``, solve for ``c`` and evaluate the critical functional.

    Raises
    ------
    PreconditionError
        If ``L eps >= R/4``.
    DomainError
        If no bracket for ``c`` is found; the scanned interval is reported.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    L = -math.log(eps)
    if L * eps >= params.R / 4.0:
        raise PreconditionError(f"L eps = {L * eps:.4g} must be below R/4 = {params.R / 4:.4g}")
    grid = _test_grid(params, eps, L, green, n_inner, n_glue)
    w = _shape(params, eps, L, green, grid.nodes)
    shape = RadialFunction.from_values(grid, w, dirichlet=True)
    p = params.p
    c_asym = max(c_asymptotic_power(params, eps, green.A0), 1e-12) ** (1.0 / params.q)

    def h_minus_one(c):
        return norms(shape.scaled(c ** (-1.0 / (p - 1.0))), params).h_nu - 1.0

    lo, hi = 0.5 * c_asym, 2.0 * c_asym
    f_lo, f_hi = h_minus_one(lo), h_minus_one(hi)
    if not (f_lo > 0.0 > f_hi):
        # widen geometrically before giving up
        for _ in range(40):
            lo, hi = 0.5 * lo, 2.0 * hi
            f_lo, f_hi = h_minus_one(lo), h_minus_one(hi)
            if f_lo > 0.0 > f_hi:
                break
        else:
            raise DomainError(f"no sign change of H - 1 for c in [{lo:.4g}, {hi:.4g}]")
    c = bisect(h_minus_one, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    v = shape.scaled(c ** (-1.0 / (p - 1.0)))
    h_res = abs(norms(v, params).h_nu - 1.0)
    F = moser_functional(v, params.mu, params)
    return TestFunctionResult(
        v=v,
        eps=eps,
        L=L,
        Lambda_eps=_gluing_constant(params, eps, L, green.A0, c),
        c=c,
        c_asymptotic=c_asym,
        h_residual=h_res,
        functional=F,
        margin=F - green.upper_bound,
    )


def inner_branch_energy(params: Params, result: TestFunctionResult) -> tuple[float, float]:
    """Gradient energy of the bubble branch, by quadrature and by reduction.

    Returns ``(quadrature, reduced)`` where the second is
    ``(p-1) / (c^q mu) * I(c0 L^k, p)``.
    """
    prof = profile_psi(params.p, params.theta)
    eps, c, p = result.eps, result.c, params.p
    scale = c ** (-1.0 / (p - 1.0))
    oa = params.omega_alpha
    alpha = params.alpha

    def integrand(r):
        return np.abs(scale * prof.derivative(r / eps) / eps) ** p * oa * r**alpha

    le = result.L * eps
    edges = np.concatenate(([0.0], np.geomspace(eps * 1e-6, le, 60)))
    quad = math.fsum(specfun.adaptive_quad(integrand, a, b, 1e-13) for a, b in zip(edges[:-1], edges[1:]))
    tb = specfun.truncated_beta_integral(prof.c0 * result.L**prof.k, p)
    reduced = (p - 1.0) / (c**params.q * params.mu) * tb.value
    return quad, reduced


@dataclass(frozen=True)
class LowerBoundTable:
    rows: list
    rejected: list
    smallest_positive_eps: float | None


def _row(params, eps, green):
    try:
        res = build_test_function(params, eps, green)
    except PreconditionError as exc:
        return None, str(exc)
    return {
        "eps": eps,
        "L": res.L,
        "c": res.c,
        "c_asym": res.c_asymptotic,
        "H_residual": res.h_residual,
        "functional": res.functional,
        "upper_bound": green.upper_bound,
        "margin": res.margin,
    }, None


def lower_bound_check(
    params: Params,
    eps_list: Sequence[float],
    green: GreenResult,
    workers: int | None = None,
) -> LowerBoundTable:
    """Tabulate ``F(v_eps)`` and its margin over the upper bound.

    ``eps_list`` must be decreasing.  Values violating ``L eps < R/4`` are
    kept as rejected rows (all numeric fields NaN) and listed in ``rejected``.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError("eps_list must be strictly decreasing")
    workers = workers or _thread_cap()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(lambda e: _row(params, e, green), eps_list))
    rows, rejected = [], []
    for eps, (row, why) in zip(eps_list, out):
        if row is None:
            rejected.append((eps, why))
            row = {k: math.nan for k in TABLE_COLUMNS}
            row["eps"] = eps
            row["L"] = -math.log(eps) if 0 < eps < 1 else math.nan
        rows.append(row)
    positive = [r["eps"] for r in rows if r["margin"] > 0.0]
    return LowerBoundTable(rows, rejected, min(positive) if positive else None)


def write_lower_bound_csv(table: LowerBoundTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for row in table.rows:
            writer.writerow(["%.17g" % row[k] for k in TABLE_COLUMNS])
