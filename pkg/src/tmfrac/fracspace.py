"""Radial grids, sampled radial functions and the weighted norms on them.

The measure throughout is ``d lambda_theta = omega_theta r^theta dr`` on
``(0, R]`` with ``omega_theta = 2 pi^(theta/2) / Gamma(theta/2)``.  Note that
this indexes the constant by the weight exponent ``theta`` rather than by an
ambient dimension, so ``omega_1 = 2`` and ``omega_2 = 2 pi``.

Discrete model
--------------
A sampled profile is identified with its piecewise-linear interpolant, and on
the first cell ``(0, r_1]`` with the linear extension of the segment through
``r_1, r_2``.  Integrals of sampled data use exact moments of ``r^theta``
against that interpolant, and the gradient seminorm uses the cell slopes

    E(u) = sum_j A_j |s_j|^p,    A_j = omega_alpha * int_cell_j r^alpha dr,

where the first cell's weight covers ``(0, r_2]``.  The extremal and eigen
solvers are built on exactly these sums, so every quantity they report is
consistent with :func:`norms`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union

import numpy as np

from . import specfun
from .errors import ConstraintError, DomainError, InputError, PreconditionError

__all__ = [
    "Params",
    "RadialGrid",
    "RadialFunction",
    "NormReport",
    "omega",
    "ball_volume",
    "make_grid",
    "merge_grids",
    "integrate",
    "mass_weights",
    "cell_weights",
    "gradient_energy",
    "solve_flux",
    "norms",
    "tintarev_lift",
    "P_H_BAND",
]

P_H_BAND = 1e-9


def omega(theta: float) -> float:
    """``2 pi^(theta/2) / Gamma(theta/2)`` for ``theta > 0``."""
    theta = float(theta)
    if not theta > 0.0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    return 2.0 * math.pi ** (0.5 * theta) / specfun.gamma(0.5 * theta)


def ball_volume(theta: float, R: float) -> float:
    """Measure of ``(0, R)``: ``omega_theta R^(theta+1) / (theta+1)``."""
    if not R > 0.0:
        raise DomainError(f"R must be positive, got {R!r}")
    return omega(theta) * R ** (theta + 1.0) / (theta + 1.0)


@dataclass(frozen=True)
class Params:
    """Problem parameters ``(p, theta, R, nu)``.

    ``alpha = p - 1`` is fixed by construction, which is what puts the
    weighted space in its Trudinger-Moser regime.
    """

    p: float
    theta: float
    R: float = 1.0
    nu: float = 0.0

    def __post_init__(self):
        for name in ("p", "theta", "R", "nu"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real, got {v!r}")
        if self.p < 2.0:
            raise DomainError(f"p must be >= 2, got {self.p}")
        if self.theta < self.alpha:
            raise DomainError(f"theta must be >= alpha = {self.alpha}, got {self.theta}")
        if not self.R > 0.0:
            raise DomainError(f"R must be positive, got {self.R}")
        if self.nu < 0.0:
            raise DomainError(f"nu must be >= 0, got {self.nu}")

    @property
    def alpha(self) -> float:
        return self.p - 1.0

    @property
    def q(self) -> float:
        """Conjugate exponent ``p/(p-1)`` appearing in the exponential."""
        return self.p / (self.p - 1.0)

    @property
    def mu(self) -> float:
        return (self.theta + 1.0) * omega(self.alpha) ** (1.0 / self.alpha)

    @property
    def omega_theta(self) -> float:
        return omega(self.theta)

    @property
    def omega_alpha(self) -> float:
        return omega(self.alpha)

    @property
    def ball(self) -> float:
        return ball_volume(self.theta, self.R)

    def replace(self, **kw) -> "Params":
        d = dict(p=self.p, theta=self.theta, R=self.R, nu=self.nu)
        d.update(kw)
        return Params(**d)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing nodes ``0 < r_1 < ... < r_N = R``."""

    nodes: np.ndarray
    grading: float = 1.0
    kind: str = "power"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 64:
            raise InputError(f"a grid needs at least 64 nodes, got {nodes.size}")
        if not np.all(np.isfinite(nodes)) or nodes[0] <= 0.0:
            raise InputError("grid nodes must be finite and positive")
        if np.any(np.diff(nodes) <= 0.0):
            raise InputError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.size

    @property
    def R(self) -> float:
        return float(self.nodes[-1])

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    def cached(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]


def make_grid(
    N: int = 1024,
    R: float = 1.0,
    grading: float = 2.0,
    kind: str = "power",
    decades: float = 8.0,
) -> RadialGrid:
    """Build a power-graded or geometric grid on ``(0, R]``.

    Parameters
    ----------
    N : int
        Number of nodes, at least 64.
    R : float
        Outer radius; the last node equals ``R`` exactly.
    grading : float
        Power-grid exponent, ``r_i = R (i/N)^grading``.  Ignored for ``log``.
    kind : {"power", "log"}
        ``log`` spaces nodes geometrically from ``R 10^-decades`` to ``R``.
    decades : float
        Depth of the geometric grid.
    """
    if int(N) != N or N < 64:
        raise InputError(f"N must be an integer >= 64, got {N!r}")
    if not R > 0.0:
        raise DomainError(f"R must be positive, got {R!r}")
    N = int(N)
    if kind == "power":
        if not grading >= 1.0:
            raise InputError(f"grading must be >= 1, got {grading!r}")
        nodes = R * (np.arange(1, N + 1) / N) ** grading
    elif kind == "log":
        if not decades > 0.0:
            raise InputError(f"decades must be positive, got {decades!r}")
        nodes = np.geomspace(R * 10.0 ** (-decades), R, N)
    else:
        raise InputError(f"unknown grid kind {kind!r}")
    nodes[-1] = R
    return RadialGrid(nodes, grading=float(grading), kind=kind)


def merge_grids(*node_sets, rtol: float = 1e-12) -> RadialGrid:
    """Union of node arrays with near-duplicates removed."""
    nodes = np.unique(np.concatenate([np.asarray(n, dtype=float) for n in node_sets]))
    keep = np.ones(nodes.size, dtype=bool)
    keep[1:] = np.diff(nodes) > rtol * nodes[1:]
    return RadialGrid(nodes[keep], grading=1.0, kind="merged")


# -- exact moments ---------------------------------------------------------

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def _segment_weights(x0, x1, theta):
    """Weights (wl, wr) with ``int_x0^x1 f r^theta dr = wl f(x0) + wr f(x1)``.

    ``f`` is linear on the segment.  Closed-form moments lose digits when the
    segment is short compared with its distance from 0, so those segments use
    8-point Gauss-Legendre, which is far beyond double precision there.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    h = x1 - x0
    wl = np.empty_like(h)
    wr = np.empty_like(h)
    short = h < 0.1 * x0
    if np.any(short):
        a, b, hh = x0[short], x1[short], h[short]
        r = 0.5 * (a + b)[:, None] + 0.5 * hh[:, None] * _GL8_X[None, :]
        rt = r**theta * (0.5 * hh[:, None]) * _GL8_W[None, :]
        t = (r - a[:, None]) / hh[:, None]
        wr[short] = np.sum(rt * t, axis=1)
        wl[short] = np.sum(rt * (1.0 - t), axis=1)
    long_ = ~short
    if np.any(long_):
        a, b, hh = x0[long_], x1[long_], h[long_]
        m0 = (b ** (theta + 1.0) - a ** (theta + 1.0)) / (theta + 1.0)
        m1 = (b ** (theta + 2.0) - a ** (theta + 2.0)) / (theta + 2.0)
        wr[long_] = (m1 - a * m0) / hh
        wl[long_] = m0 - wr[long_]
    return wl, wr


def _polyline_weights(x, theta):
    """Nodal weights of ``int_{x_0}^{x_-1} f r^theta dr`` for P1 data on ``x``."""
    wl, wr = _segment_weights(x[:-1], x[1:], theta)
    w = np.zeros(x.size)
    w[:-1] += wl
    w[1:] += wr
    return w


def _extension_at_zero(nodes, values):
    return values[0] - (values[1] - values[0]) / (nodes[1] - nodes[0]) * nodes[0]


def mass_weights(grid: RadialGrid, theta: float) -> np.ndarray:
    """Weights ``W`` with ``integrate(f, theta) == W @ f`` over ``(0, R]``.

    The value at 0 implied by the linear extension is folded back onto the
    first two nodes, so the weights act directly on nodal samples.
    """

    def build():
        x = np.concatenate(([0.0], grid.nodes))
        w = omega(theta) * _polyline_weights(x, theta)
        r1, r2 = grid.nodes[0], grid.nodes[1]
        # f(0) = f1 - (f2 - f1) r1 / (r2 - r1)
        k = r1 / (r2 - r1)
        out = w[1:].copy()
        out[0] += w[0] * (1.0 + k)
        out[1] -= w[0] * k
        out.setflags(write=False)
        return out

    return grid.cached(("mass", float(theta)), build)


def cell_weights(grid: RadialGrid, alpha: float) -> np.ndarray:
    """``A_j = omega_alpha int r^alpha dr`` over each cell, first cell from 0."""

    def build():
        x = np.concatenate(([0.0], grid.nodes[1:]))
        a = omega(alpha) * (x[1:] ** (alpha + 1.0) - x[:-1] ** (alpha + 1.0)) / (alpha + 1.0)
        # short cells far from 0 again go through Gauss-Legendre
        mid = 0.5 * (x[1:] + x[:-1])
        h = x[1:] - x[:-1]
        short = h < 0.1 * x[:-1]
        if np.any(short):
            r = mid[short, None] + 0.5 * h[short, None] * _GL8_X[None, :]
            a[short] = omega(alpha) * np.sum(r**alpha * _GL8_W, axis=1) * 0.5 * h[short]
        a.setflags(write=False)
        return a

    return grid.cached(("cell", float(alpha)), build)


# -- sampled functions -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Nodal samples of a radial profile together with a derivative field.

    Build instances with :meth:`from_values` or :meth:`from_callable`, which
    fill the derivative by nonuniform three-point differences (second-order
    one-sided at both ends).
    """

    grid: RadialGrid
    values: np.ndarray
    derivative: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        d = np.array(self.derivative, dtype=float)
        if v.shape != self.grid.nodes.shape or d.shape != v.shape:
            raise InputError("values and derivative must match the grid")
        if not np.all(np.isfinite(v)):
            raise InputError("radial function values must be finite")
        v.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "derivative", d)

    @classmethod
    def from_values(cls, grid: RadialGrid, values, dirichlet: bool = False) -> "RadialFunction":
        v = np.array(values, dtype=float)
        if v.shape != grid.nodes.shape:
            raise InputError("values must have one entry per grid node")
        if np.any(np.isnan(v)):
            raise InputError("NaN in radial function samples")
        if dirichlet:
            v[-1] = 0.0
        d = np.gradient(v, grid.nodes, edge_order=2)
        return cls(grid, v, d)

    @classmethod
    def from_callable(cls, grid: RadialGrid, f: Callable, dirichlet: bool = False) -> "RadialFunction":
        return cls.from_values(grid, f(grid.nodes), dirichlet=dirichlet)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def slopes(self) -> np.ndarray:
        """Cell slopes ``(u_{i+1} - u_i) / h_i``."""
        return np.diff(self.values) / self.grid.h

    def value_at_zero(self) -> float:
        """Linear extension of the first segment to ``r = 0``."""
        return float(_extension_at_zero(self.nodes, self.values))

    def __call__(self, r):
        """Piecewise-linear evaluation, extended linearly on ``[0, r_1]``."""
        x = np.concatenate(([0.0], self.nodes))
        y = np.concatenate(([self.value_at_zero()], self.values))
        return np.interp(r, x, y)

    def scaled(self, factor: float) -> "RadialFunction":
        return RadialFunction(self.grid, factor * self.values, factor * self.derivative)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.nodes, self.values, self.derivative])
        np.savetxt(path, data, delimiter=",", header="r,u,du", comments="", fmt="%.17e")

    @classmethod
    def from_csv(cls, path, grading: float = 1.0, kind: str = "power") -> "RadialFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        grid = RadialGrid(data[:, 0], grading=grading, kind=kind)
        return cls(grid, data[:, 1], data[:, 2])


Integrand = Union[RadialFunction, Callable]


def integrate(f: Integrand, theta: float, interval: tuple | None = None, rel_tol: float = 1e-12) -> float:
    """``omega_theta * int_a^b f(r) r^theta dr``.

    Parameters
    ----------
    f : RadialFunction or callable
        Sampled data are integrated exactly against their piecewise-linear
        interpolant; a callable (vectorized in ``r``) goes through adaptive
        Gauss-Legendre quadrature.
    theta : float
        Weight exponent.
    interval : (a, b), optional
        Defaults to ``(0, R)`` for sampled data.  Required for callables.
    """
    if isinstance(f, RadialFunction):
        return _integrate_sampled(f, theta, interval)
    if interval is None:
        raise InputError("an interval is required when integrating a callable")
    a, b = map(float, interval)
    if b <= a:
        return 0.0
    w = omega(theta)

    def g(r):
        vals = np.asarray(f(r), dtype=float)
        if np.any(np.isnan(vals)):
            raise InputError("integrand returned NaN")
        return vals * r**theta

    # one piece per decade keeps the bisection from accepting a coarse
    # estimate on a long interval where the integrand is concentrated
    lo = max(a, b * 1e-15)
    edges = np.geomspace(lo, b, max(2, int(math.ceil(math.log10(b / lo))) + 1)) if b / lo > 10 else np.array([lo, b])
    if a < lo:
        edges = np.concatenate(([a], edges))
    total = math.fsum(
        specfun.adaptive_quad(g, x0, x1, rel_tol) for x0, x1 in zip(edges[:-1], edges[1:])
    )
    return w * total


def _integrate_sampled(f: RadialFunction, theta, interval):
    vals = f.values
    if np.any(np.isnan(vals)):
        raise InputError("NaN in radial function samples")
    if interval is None:
        return float(mass_weights(f.grid, theta) @ vals)
    a, b = map(float, interval)
    b = min(b, f.grid.R)
    a = max(a, 0.0)
    if b <= a:
        return 0.0
    nodes = f.nodes
    inside = nodes[(nodes > a) & (nodes < b)]
    x = np.concatenate(([a], inside, [b]))
    y = f(x)
    return float(omega(theta) * (_polyline_weights(x, theta) @ y))


def gradient_energy(u: RadialFunction, p: float, alpha: float | None = None, interval: tuple | None = None) -> float:
    """``int |u'|^p d lambda_alpha`` from cell slopes (``alpha = p - 1`` default)."""
    if alpha is None:
        alpha = p - 1.0
    s = np.abs(u.slopes) ** p
    if interval is None:
        return float(cell_weights(u.grid, alpha) @ s)
    a, b = map(float, interval)
    x = np.concatenate(([0.0], u.nodes[1:]))
    lo = np.clip(x[:-1], a, b)
    hi = np.clip(x[1:], a, b)
    m = omega(alpha) * (hi ** (alpha + 1.0) - lo ** (alpha + 1.0)) / (alpha + 1.0)
    return float(m @ s)


def solve_flux(grid: RadialGrid, p: float, theta: float, source: np.ndarray) -> np.ndarray:
    """Invert the discrete radial p-Laplacian with a Dirichlet condition at R.

    Returns nodal values ``u`` (with ``u_N = 0``) whose cell slopes satisfy

        A_j |s_j|^(p-2) s_j / h_j = - sum_{k <= j} W_k f_k,

    which is the stationarity condition of ``E(u)/p - sum_k W_k f_k u_k``.
    The partial sums are clipped at 0, which only matters for sources that are
    not nonnegative and nonincreasing.
    """
    h = grid.h
    flux = np.cumsum(mass_weights(grid, theta) * source)[:-1]
    np.maximum(flux, 0.0, out=flux)
    slopes = -(h * flux / cell_weights(grid, p - 1.0)) ** (1.0 / (p - 1.0))
    drop = -slopes * h
    u = np.zeros(grid.N)
    u[:-1] = np.cumsum(drop[::-1])[::-1]
    return u


class NormReport(NamedTuple):
    lp_theta: float
    grad_lp_alpha: float
    h_nu: float
    p_h: float


def _lions_exponent(h, p):
    if abs(h - 1.0) < P_H_BAND:
        return math.inf
    if h > 1.0:
        # outside the unit H-ball the improved exponent is not defined
        return math.nan
    return (1.0 - h**p) ** (-1.0 / (p - 1.0))


def norms(u: RadialFunction, params: Params, tol: float = 1e-12) -> NormReport:
    """Weighted norms of ``u`` and the constraint quantities derived from them.

    Returns
    -------
    NormReport
        ``lp_theta`` and ``grad_lp_alpha`` are the ``L^p`` norms of ``u`` and
        ``u'``; ``h_nu = (grad^p - nu lp^p)^(1/p)``; ``p_h`` is
        ``(1 - h_nu^p)^(-1/(p-1))``, ``inf`` within ``1e-9`` of ``h_nu = 1``
        and NaN when ``h_nu > 1``.

    Raises
    ------
    ConstraintError
        If the radicand is negative beyond ``tol`` (relative).
    """
    p = params.p
    mass = float(mass_weights(u.grid, params.theta) @ np.abs(u.values) ** p)
    energy = gradient_energy(u, p, params.alpha)
    rad = energy - params.nu * mass
    if rad < 0.0:
        if rad < -tol * max(energy, params.nu * mass, 1e-300):
            raise ConstraintError(
                f"constraint radicand negative: |u'|^p - nu |u|^p = {rad:.3e}"
            )
        rad = 0.0
    h = rad ** (1.0 / p)
    return NormReport(max(mass, 0.0) ** (1.0 / p), energy ** (1.0 / p), h, _lions_exponent(h, p))


def tintarev_lift(u: RadialFunction, params: Params, tol: float = 1e-10) -> RadialFunction:
    """Rescale ``u`` by ``(1 + nu |u|_p^p)^(1/p)``.

    For ``|u'|_p <= 1`` the result satisfies ``H_nu <= 1``; the squared
    constraint quantity works out to
    ``|u'|^p + nu |u|^p (|u'|^p - 1) - nu^2 |u|^(2p)``.
    """
    rep = norms(u, params.replace(nu=0.0))
    if rep.grad_lp_alpha > 1.0 + tol:
        raise PreconditionError(
            f"lift needs |u'| <= 1, got {rep.grad_lp_alpha:.12g}"
        )
    factor = (1.0 + params.nu * rep.lp_theta**params.p) ** (1.0 / params.p)
    return u.scaled(factor)
