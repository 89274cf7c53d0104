"""Concentration diagnostics for subcritical maximizers.

The limit profile of a concentrating family is

    psi(r) = -(p-1)/mu * ln(1 + c0 r^k),   k = (theta+1)/(p-1),
    c0 = (omega_theta / (theta+1))^(1/alpha),

which solves ``-omega_alpha (r^alpha |psi'|^(p-2) psi')' = omega_theta r^theta exp(q mu psi)``
with ``psi(0) = psi'(0) = 0``.  This module evaluates ``psi`` and its integrals
and measures how far a computed maximizer is from it after rescaling by

    r_eps^(theta+1) = lambda_eps / (a_eps^q exp(mu_eps a_eps^q)).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import specfun
from .errors import DomainError, PreconditionError
from .extremal import MaximizerResult, SolverOptions, solve_subcritical
from .fracspace import Params, RadialFunction, RadialGrid, gradient_energy, integrate, omega

__all__ = [
    "BlowupProfile",
    "BlowupReport",
    "TruncatedEnergy",
    "profile_psi",
    "psi_normalization",
    "psi_truncated_energy",
    "psi_derivative_from_mass",
    "rescale",
    "truncation_energies",
    "concentration_tail",
    "annulus_capacity",
    "dirac_diagnostic",
    "blowup_sweep",
    "write_sweep_csv",
    "SWEEP_COLUMNS",
]


def _check_pt(p, theta):
    # reuse the Params validation (p >= 2, theta >= p - 1)
    return Params(float(p), float(theta))


@dataclass(frozen=True)
class BlowupProfile:
    p: float
    theta: float
    mu: float
    c0: float
    k: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return -(self.p - 1.0) / self.mu * np.log1p(self.c0 * r**self.k)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        ck = self.c0 * r**self.k
        return -(self.p - 1.0) / self.mu * self.k * self.c0 * r ** (self.k - 1.0) / (1.0 + ck)


def profile_psi(p: float, theta: float) -> BlowupProfile:
    """Closed-form limit profile for ``(p, theta)``; call it or its ``derivative``."""
    prm = _check_pt(p, theta)
    c0 = (omega(prm.theta) / (prm.theta + 1.0)) ** (1.0 / prm.alpha)
    return BlowupProfile(prm.p, prm.theta, prm.mu, c0, (prm.theta + 1.0) / prm.alpha)


def psi_normalization(p: float, theta: float) -> float:
    """``int_0^inf exp(q mu psi) d lambda_theta``, which should equal 1.

    With ``s = c0 r^k`` the integral becomes
    ``(p-1) int_0^inf s^(p-2) (1+s)^(-p) ds``.  The piece on ``(0, 1)`` is
    integrated numerically and the tail, after ``s -> 1/s``, is
    ``int_0^1 (1+t)^(-p) dt = (1 - 2^(1-p)) / (p-1)`` in closed form.
    """
    prm = _check_pt(p, theta)
    p = prm.p

    def head(s):
        return s ** (p - 2.0) / (1.0 + s) ** p

    edges = [0.0] + [2.0**-j for j in range(40, -1, -1)]
    body = math.fsum(specfun.adaptive_quad(head, a, b, 1e-14) for a, b in zip(edges[:-1], edges[1:]))
    tail = (1.0 - 2.0 ** (1.0 - p)) / (p - 1.0)
    return (p - 1.0) * (body + tail)


def psi_derivative_from_mass(p: float, theta: float, r: float) -> float:
    """``psi'(r)`` rebuilt from the integrated equation.

    ``-[ (omega_alpha r^alpha)^-1 int_0^r exp(q mu psi) d lambda_theta ]^(1/(p-1))``,
    with the inner integral done by quadrature; used to cross-check the closed
    form of the derivative.
    """
    prof = profile_psi(p, theta)
    prm = _check_pt(p, theta)
    mass = integrate(lambda t: np.exp(prm.q * prm.mu * prof(t)), prm.theta, (0.0, float(r)), rel_tol=1e-13)
    return -((mass / (prm.omega_alpha * r**prm.alpha)) ** (1.0 / (prm.p - 1.0)))


class TruncatedEnergy(NamedTuple):
    value: float
    asymptotic: float
    residual: float


def psi_truncated_energy(L: float, p: float, theta: float) -> TruncatedEnergy:
    """``int_0^L |psi'|^p d lambda_alpha`` through its one-dimensional reduction.

    The value is ``(p-1)/mu * I(c0 L^k, p)`` with ``I`` from
    :func:`tmfrac.specfun.truncated_beta_integral`; the large-``L`` form is
    ``(p-1)/mu * (k ln L + ln c0 - digamma(p) - euler_gamma)``.
    """
    if not L > 0.0:
        raise DomainError(f"L must be positive, got {L!r}")
    prof = profile_psi(p, theta)
    pre = (prof.p - 1.0) / prof.mu
    tb = specfun.truncated_beta_integral(prof.c0 * L**prof.k, prof.p)
    approx = pre * (
        prof.k * math.log(L) + math.log(prof.c0) - specfun.digamma(prof.p) - specfun.euler_gamma()
    )
    value = pre * tb.value
    return TruncatedEnergy(value, approx, abs(value - approx))


@dataclass(frozen=True)
class BlowupReport:
    eps: float
    a_eps: float
    r_eps: float
    ratio: float
    a_over_lambda: float
    profile_distance_phi: float
    profile_distance_psi: float
    tail_energy: float
    s_max: float
    truncated: bool


def _scaling_radius(res: MaximizerResult, params: Params) -> float:
    aq = res.a_eps**params.q
    log_r = (math.log(res.lambda_eps) - math.log(aq) - res.mu_eps * aq) / (params.theta + 1.0)
    return math.exp(log_r)


def _monotone_interpolant(u: RadialFunction, a: float):
    x = np.concatenate(([0.0], u.nodes))
    y = np.concatenate(([a], u.values))
    return PchipInterpolator(x, y, extrapolate=False)


def rescale(
    result: MaximizerResult,
    params: Params | None = None,
    s_max: float = 10.0,
    r0: float | None = None,
    n_samples: int = 801,
) -> BlowupReport:
    """Rescaled profiles of a maximizer and their distance to the limits.

    ``phi_eps(s) = u(r_eps s)/a_eps`` is compared with 1 and
    ``psi_eps(s) = a_eps^(1/(p-1)) (u(r_eps s) - a_eps)`` with ``psi`` on
    ``[0, s_max]``, using monotone cubic interpolation of ``u``.  When
    ``r_eps s_max`` exceeds ``R`` the window is shortened and ``truncated``
    is set.  ``tail_energy`` is the gradient energy beyond ``r0``
    (default ``R/10``).
    """
    params = params or result.params
    R = result.u.grid.R
    a = result.a_eps
    r_eps = _scaling_radius(result, params)
    truncated = r_eps * s_max > R
    if truncated:
        s_max = R / r_eps
    s = np.linspace(0.0, s_max, n_samples)
    interp = _monotone_interpolant(result.u, a)
    us = interp(np.minimum(r_eps * s, R))
    phi = us / a
    psi_eps = a ** (1.0 / (params.p - 1.0)) * (us - a)
    psi = profile_psi(params.p, params.theta)(s)
    if r0 is None:
        r0 = 0.1 * R
    return BlowupReport(
        eps=result.eps,
        a_eps=a,
        r_eps=r_eps,
        ratio=result.lambda_eps / a**params.q,
        a_over_lambda=a / result.lambda_eps,
        profile_distance_phi=float(np.max(np.abs(phi - 1.0))),
        profile_distance_psi=float(np.max(np.abs(psi_eps - psi))),
        tail_energy=concentration_tail(result.u, r0, params),
        s_max=float(s_max),
        truncated=bool(truncated),
    )


def _crossing_radius(u: RadialFunction, level: float) -> float:
    x = np.concatenate(([0.0], u.nodes))
    y = np.concatenate(([u.value_at_zero()], u.values))
    # y is nonincreasing; interpolate the inverse
    return float(np.interp(-level, -y, x))


def truncation_energies(result: MaximizerResult, c: float, params: Params | None = None) -> tuple[float, float]:
    """Split the gradient energy at the level ``a_eps / c``.

    Returns ``(low, high)``: the energy of ``min(u, a/c)`` and of
    ``u - min(u, a/c)``.  The split radius sits inside one cell, whose slope is
    shared by both parts, so ``low + high`` reproduces the full energy up to
    rounding.
    """
    if not c > 1.0:
        raise DomainError(f"c must exceed 1, got {c!r}")
    params = params or result.params
    u = result.u
    rc = _crossing_radius(u, result.a_eps / c)
    high = gradient_energy(u, params.p, params.alpha, (0.0, rc))
    low = gradient_energy(u, params.p, params.alpha, (rc, u.grid.R))
    return low, high


def concentration_tail(u: RadialFunction, r0: float, params: Params) -> float:
    """``int_{r0}^R |u'|^p d lambda_alpha``."""
    R = u.grid.R
    if not 0.0 < r0 < R:
        raise DomainError(f"r0 must lie in (0, R) = (0, {R:g}), got {r0!r}")
    return gradient_energy(u, params.p, params.alpha, (r0, R))


def annulus_capacity(a: float, b: float, va: float, vb: float, params: Params):
    """Minimal ``int_a^b |h'|^p d lambda_alpha`` with ``h(a) = va, h(b) = vb``.

    Returns
    -------
    value : float
        ``omega_alpha |va - vb|^p / ln(b/a)^(p-1)``.
    minimizer : callable
        The log-linear profile ``va + (vb - va) ln(r/a) / ln(b/a)``.
    """
    if not (0.0 < a < b <= params.R):
        raise DomainError(f"need 0 < a < b <= R, got a={a!r}, b={b!r}, R={params.R!r}")
    if va < vb:
        raise DomainError(f"need va >= vb, got va={va!r}, vb={vb!r}")
    span = math.log(b / a)
    value = params.omega_alpha * abs(va - vb) ** params.p / span ** (params.p - 1.0)

    def minimizer(r):
        return va + (vb - va) * np.log(np.asarray(r, dtype=float) / a) / span

    return value, minimizer


def dirac_diagnostic(
    result: MaximizerResult,
    probes: dict[str, Callable] | None = None,
    params: Params | None = None,
) -> dict[str, tuple[float, float]]:
    """Pair ``(a/lambda) int u^(1/(p-1)) exp(mu_eps u^q) v d lambda_theta`` with ``v(0)``.

    Along a concentrating sweep the first entry of each pair should approach
    the second.  Default probes are ``1``, ``1 - r/R`` and ``cos(pi r / 2R)``.
    """
    params = params or result.params
    u = result.u
    R = u.grid.R
    if probes is None:
        probes = {
            "one": lambda r: np.ones_like(r),
            "linear": lambda r: 1.0 - r / R,
            "cosine": lambda r: np.cos(0.5 * np.pi * r / R),
        }
    w = result.a_eps / result.lambda_eps
    base = np.maximum(u.values, 0.0)
    dens = w * base ** (1.0 / (params.p - 1.0)) * np.exp(result.mu_eps * base**params.q)
    out = {}
    for name, v in probes.items():
        vals = dens * v(u.nodes)
        out[name] = (integrate(RadialFunction(u.grid, vals, np.zeros_like(vals)), params.theta), float(v(np.zeros(1))[0]))
    return out


SWEEP_COLUMNS = (
    "eps",
    "mu_eps",
    "S_eps",
    "lambda_eps",
    "a_eps",
    "r_eps",
    "ratio",
    "a_over_lambda",
    "profile_distance_phi",
    "profile_distance_psi",
    "tail_energy",
    "trunc_low",
    "trunc_high",
    "s_max",
    "truncated",
    "iterations",
)


def _sweep_item(params, eps, grid, opts, c, r0, s_max):
    res = solve_subcritical(params, eps, grid, opts)
    rep = rescale(res, params, s_max=s_max, r0=r0)
    low, high = truncation_energies(res, c, params)
    row = asdict(rep)
    row.update(
        mu_eps=res.mu_eps,
        S_eps=res.S_eps,
        lambda_eps=res.lambda_eps,
        trunc_low=low,
        trunc_high=high,
        iterations=res.iterations,
    )
    return {k: row[k] for k in SWEEP_COLUMNS}


def _thread_cap():
    raw = os.environ.get("TMFRAC_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    return max(1, int(raw))


def blowup_sweep(
    params: Params,
    eps_list: Sequence[float],
    grid: RadialGrid,
    opts: SolverOptions | None = None,
    c: float = 2.0,
    r0: float | None = None,
    s_max: float = 10.0,
    workers: int | None = None,
) -> list[dict]:
    """Solve and diagnose each ``eps``; rows come back in input order.

    ``eps_list`` must be strictly decreasing.  Solves are independent and
    are fanned out over a thread pool capped by ``workers`` or the
    ``TMFRAC_THREADS`` environment variable.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError("eps_list must be strictly decreasing")
    opts = opts or SolverOptions(allow_small_eps=True)
    r0 = 0.1 * grid.R if r0 is None else r0
    workers = workers or _thread_cap()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_item, params, e, grid, opts, c, r0, s_max) for e in eps_list]
        return [f.result() for f in futures]


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in SWEEP_COLUMNS])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v
