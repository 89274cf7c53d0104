"""Acceptance suite: one PASS/FAIL line per criterion at the stated tolerances.

Run under pytest (the lines are repeated in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from tmfrac import specfun  # noqa: E402
from tmfrac.blowup import annulus_capacity, blowup_sweep, profile_psi, psi_normalization, psi_truncated_energy  # noqa: E402
from tmfrac.eigen import principal_eigenvalue  # noqa: E402
from tmfrac.extremal import solve_subcritical, solve_subcritical_oracle  # noqa: E402
from tmfrac.fracspace import Params, make_grid, norms  # noqa: E402
from tmfrac.green import derivg_residual, extract_A0, solve_green  # noqa: E402
from tmfrac.testfn import lower_bound_check  # noqa: E402

P21 = Params(2.0, 1.0)
REPORT: list[str] = []


def _report(n, ok, detail, t0):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - t0:.1f}s)"
    REPORT.append(line)
    print(line)
    assert ok, line


def test_criterion_1_special_functions():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    xs = rng.uniform(0.1, 20.0, 100)
    g_rec = max(abs(specfun.gamma(x + 1) / (x * specfun.gamma(x)) - 1) for x in xs)
    d_rec = max(abs(specfun.digamma(x + 1) - specfun.digamma(x) - 1 / x) for x in xs)
    d1 = abs(specfun.digamma(1.0) + oracles.euler_gamma_partial_sums())
    pts = rng.uniform(0.5, 5.0, (20, 2))
    b_err = max(abs(specfun.beta(x, y) / oracles.beta_by_quad(x, y) - 1) for x, y in pts)
    tb_err = tb_res = 0.0
    for a in (1e-3, 0.5, 3.0, 50.0, 1e4):
        tb = specfun.truncated_beta_integral(a, 2.0)
        tb_err = max(tb_err, abs(tb.value - (math.log1p(a) + 1 / (1 + a) - 1)))
        tb_res = max(tb_res, abs(tb.residual * (1 + a) - 1))
    ok = g_rec <= 1e-11 and d_rec <= 1e-10 and d1 <= 1e-10 and b_err <= 1e-8 and tb_err <= 1e-10 and tb_res <= 1e-12
    _report(
        1,
        ok,
        f"gamma rec {g_rec:.1e}, digamma rec {d_rec:.1e}, |digamma(1)+gamma| {d1:.1e}, "
        f"beta {b_err:.1e} <= 1e-8, trunc beta {tb_err:.1e} <= 1e-10, residual {tb_res:.1e}",
        t0,
    )


def test_criterion_2_psi_normalization():
    t0 = time.perf_counter()
    worst = max(abs(psi_normalization(p, p - 1 + j) - 1) for p in (2.0, 2.5, 3.0) for j in (0, 1, 2))
    # p = 2, theta = 1: int_0^inf 2r (1+r^2)^-2 dr = [-(1+r^2)^-1]_0^inf = 1
    exact = 1.0
    e21 = abs(psi_normalization(2.0, 1.0) - exact)
    _report(2, worst <= 1e-8 and e21 <= 1e-10, f"max |I-1| {worst:.1e} <= 1e-8, p=2 theta=1 {e21:.1e} <= 1e-10", t0)


def test_criterion_3_truncated_energy():
    t0 = time.perf_counter()
    worst = 0.0
    bound = 0.0
    for p, theta in ((2.0, 1.0), (2.5, 2.0), (3.0, 3.0)):
        prm = Params(p, theta)
        prof = profile_psi(p, theta)
        for L in (1.0, 10.0, 100.0):
            direct = oracles.weighted_quad(lambda r: np.abs(prof.derivative(r)) ** p, prm.alpha, 0.0, L)
            red = psi_truncated_energy(L, p, theta).value
            worst = max(worst, abs(direct / red - 1))
        for L in (10.0, 100.0, 1000.0, 1e4):
            bound = max(bound, psi_truncated_energy(L, p, theta).residual * L ** ((theta + 1) / (p - 1)))
    _report(3, worst <= 1e-6 and bound < 10.0, f"max rel gap {worst:.1e} <= 1e-6, max scaled residual {bound:.3f}", t0)


def test_criterion_4_eigenvalue():
    t0 = time.perf_counter()
    lam = principal_eigenvalue(P21, make_grid(2048)).lambda_
    rel = abs(lam / 5.783186 - 1)
    sc = max(
        abs(principal_eigenvalue(P21.replace(R=R), make_grid(2048, R)).lambda_ / (lam * R**-2.0) - 1)
        for R in (0.5, 2.0)
    )
    _report(4, rel <= 3e-3 and sc <= 5e-3, f"lambda {lam:.7f}, rel err {rel:.1e} <= 3e-3, scaling {sc:.1e} <= 5e-3", t0)


def test_criterion_5_green():
    t0 = time.perf_counter()
    g0 = solve_green(P21)
    sup = float(np.max(np.abs(g0.g.values + 0.5 * np.log(g0.g.nodes))))
    lam = principal_eigenvalue(P21, make_grid(2048)).lambda_
    prm = P21.replace(nu=0.5 * lam)
    gr = solve_green(prm, make_grid(2048, kind="log", decades=6))
    fit, formula, _ = extract_A0(gr)
    res = derivg_residual(gr)
    ok = sup <= 1e-8 and abs(fit - formula) <= 1e-4 and res <= 1e-6
    _report(5, ok, f"nu=0 sup err {sup:.1e} <= 1e-8, |A0 fit-formula| {abs(fit - formula):.1e} <= 1e-4, derivg {res:.1e} <= 1e-6", t0)


def test_criterion_6_upper_bound():
    t0 = time.perf_counter()
    U = solve_green(P21).upper_bound
    err = abs(U - (1 + math.e))
    _report(6, err <= 1e-9, f"U = {U:.12f}, |U-(1+e)| {err:.1e} <= 1e-9", t0)


def test_criterion_7_lower_bound():
    t0 = time.perf_counter()
    lam = principal_eigenvalue(P21, make_grid(2048)).lambda_
    eps = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    parts, ok = [], True
    for frac in (0.0, 0.25):
        prm = P21.replace(nu=frac * lam)
        table = lower_bound_check(prm, eps, solve_green(prm))
        good = [r for r in table.rows if r["margin"] > 1e-3 and r["H_residual"] <= 1e-8]
        ok &= bool(good)
        best = max(r["margin"] for r in table.rows if r["margin"] == r["margin"])
        parts.append(f"nu={frac}lambda: {len(good)} eps with margin > 1e-3, best {best:.4f}")
    ok &= time.perf_counter() - t0 <= 120.0
    _report(7, ok, "; ".join(parts), t0)


def test_criterion_8_solver_cross_validation():
    t0 = time.perf_counter()
    grid = make_grid(512)
    lam22 = principal_eigenvalue(Params(2.0, 2.0), make_grid(2048)).lambda_
    parts, ok = [], True
    for prm in (P21, Params(2.0, 2.0, nu=0.5 * lam22)):
        fp = solve_subcritical(prm, prm.mu / 2, grid)
        orc = solve_subcritical_oracle(prm, prm.mu / 2, grid)
        rel = abs(fp.S_eps / orc.S_eps - 1)
        h = abs(norms(fp.u, prm).h_nu - 1)
        ok &= rel <= 5e-3 and h <= 1e-8 and fp.S_eps >= prm.ball
        parts.append(f"theta={prm.theta:g}: |dS|/S {rel:.1e}, |H-1| {h:.1e}")
    vals = [solve_subcritical(P21, f * P21.mu, grid).S_eps for f in (0.8, 0.6, 0.4, 0.3, 0.2)]
    mono = all(b >= a for a, b in zip(vals, vals[1:]))
    ok &= mono
    parts.append(f"S_eps sweep nondecreasing: {mono}")
    _report(8, ok, "; ".join(parts), t0)


def test_criterion_9_scaling():
    t0 = time.perf_counter()
    R = 2.0
    parts, ok = [], True
    for theta in (1.0, 2.0):
        base = Params(2.0, theta)
        lam = principal_eigenvalue(base, make_grid(1024)).lambda_
        nu = 0.3 * lam / R ** (theta + 1)
        big = solve_subcritical(base.replace(R=R, nu=nu), base.mu / 2, make_grid(512, R)).S_eps
        unit = solve_subcritical(base.replace(nu=nu * R ** (theta + 1)), base.mu / 2, make_grid(512)).S_eps
        rel = abs(big / (R ** (theta + 1) * unit) - 1)
        ok &= rel <= 5e-3
        parts.append(f"theta={theta:g}: rel gap {rel:.1e} <= 5e-3")
    _report(9, ok, "; ".join(parts), t0)


def test_criterion_10_capacity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    for p in (2.0, 3.0):
        prm = Params(p, p - 1)
        for _ in range(5):
            a = rng.uniform(0.05, 0.5)
            b = rng.uniform(0.6, 1.0)
            vb = rng.uniform(0.0, 1.0)
            va = vb + rng.uniform(0.1, 2.0)
            m, _ = annulus_capacity(a, b, va, vb, prm)
            worst = max(worst, abs(oracles.capacity_by_minimization(a, b, va, vb, p) / m - 1))
    _report(10, worst <= 1e-4, f"max rel gap {worst:.1e} <= 1e-4 over 10 configs", t0)


def test_criterion_11_blowup_trends():
    t0 = time.perf_counter()
    rows = blowup_sweep(P21, P21.mu * np.geomspace(0.5, 0.05, 6), make_grid(2048, kind="log", decades=8))

    def increasing(xs):
        return all(b > a for a, b in zip(xs, xs[1:]))

    a = [r["a_eps"] for r in rows]
    dist = [r["profile_distance_psi"] for r in rows]
    gap = [abs(r["trunc_low"] - 0.5) for r in rows[-3:]]
    ratio = [r["a_eps"] / r["lambda_eps"] for r in rows]
    checks = {
        "a_eps up": increasing(a),
        "psi distance down": increasing(dist[::-1]),
        "trunc(c=2) to 1/2": increasing(gap[::-1]),
        "a/lambda down": increasing(ratio[::-1]),
    }
    detail = ", ".join(f"{k}: {v}" for k, v in checks.items())
    _report(11, all(checks.values()), f"{detail}; a {a[0]:.3f}->{a[-1]:.3f}, trunc_low {rows[-1]['trunc_low']:.3f}", t0)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
