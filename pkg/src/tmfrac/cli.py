"""Command-line front end.

    tmfrac <command> [--config run.json] [--p P --theta T --R R --nu NU --eps E --out DIR ...]

Commands: constants, eigen, maximize, sweep, profile, green, testfn, verify.
Scalars go to ``result.json``, sampled functions and tables to CSV, and the
``verify`` command writes ``report.txt`` with one PASS/FAIL line per check.

Exit status: 0 success, 1 a verify check failed, 2 invalid configuration or
arguments, 3 a solver did not converge.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import blowup, eigen, extremal, fracspace, green, specfun, testfn
from .errors import ConvergenceError, TmfracError

COMMANDS = ("constants", "eigen", "maximize", "sweep", "profile", "green", "testfn", "verify")

DEFAULTS = {
    "command": None,
    "params": {"p": 2.0, "theta": 1.0, "R": 1.0, "nu": 0.0, "nu_frac": None},
    "eps": None,
    "grid": {"n": 1024, "grading": 2.0, "kind": "power", "decades": 8.0},
    "solver": {"tol": 1e-8, "max_iter": 10000, "damping": 0.5, "n_starts": 3, "allow_small_eps": False},
    "sweep": {"eps_list": None, "nu_list": None},
    "output": {"dir": "out", "format": "csv"},
}


class ConfigError(TmfracError, ValueError):
    pass


# -- configuration -------------------------------------------------------------


def _merge_strict(base, override, path=""):
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            _merge_strict(base[key], val, where + ".")
        else:
            base[key] = val


def _number(cfg, section, key, kind=float, allow_none=False):
    val = cfg[section][key] if section else cfg[key]
    name = f"{section}.{key}" if section else key
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{name} must be a number, got {val!r}")
    if kind is int:
        if int(val) != val:
            raise ConfigError(f"{name} must be an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"{name} must be finite")
    return float(val)


def _number_list(cfg, key):
    val = cfg["sweep"][key]
    if val is None:
        return None
    if not isinstance(val, list) or not val:
        raise ConfigError(f"sweep.{key} must be a non-empty list")
    out = []
    for v in val:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"sweep.{key} entries must be numbers")
        out.append(float(v))
    return out


def validate(cfg: dict) -> dict:
    """Type-check a merged configuration and return it normalized."""
    if cfg["command"] not in COMMANDS:
        raise ConfigError(f"unknown command {cfg['command']!r}; choose from {', '.join(COMMANDS)}")
    for key in ("p", "theta", "R", "nu"):
        cfg["params"][key] = _number(cfg, "params", key)
    cfg["params"]["nu_frac"] = _number(cfg, "params", "nu_frac", allow_none=True)
    if cfg["params"]["nu_frac"] is not None:
        if cfg["params"]["nu"] != 0.0:
            raise ConfigError("give params.nu or params.nu_frac, not both")
        if not 0.0 <= cfg["params"]["nu_frac"] < 1.0:
            raise ConfigError("params.nu_frac must lie in [0, 1)")
    cfg["eps"] = _number(cfg, None, "eps", allow_none=True)
    cfg["grid"]["n"] = _number(cfg, "grid", "n", int)
    cfg["grid"]["grading"] = _number(cfg, "grid", "grading")
    cfg["grid"]["decades"] = _number(cfg, "grid", "decades")
    if cfg["grid"]["kind"] not in ("power", "log"):
        raise ConfigError("grid.kind must be 'power' or 'log'")
    cfg["solver"]["tol"] = _number(cfg, "solver", "tol")
    cfg["solver"]["max_iter"] = _number(cfg, "solver", "max_iter", int)
    cfg["solver"]["damping"] = _number(cfg, "solver", "damping")
    cfg["solver"]["n_starts"] = _number(cfg, "solver", "n_starts", int)
    if not isinstance(cfg["solver"]["allow_small_eps"], bool):
        raise ConfigError("solver.allow_small_eps must be true or false")
    if not 0.0 < cfg["solver"]["damping"] <= 1.0:
        raise ConfigError("solver.damping must lie in (0, 1]")
    eps_list = _number_list(cfg, "eps_list")
    nu_list = _number_list(cfg, "nu_list")
    if eps_list is not None and any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("sweep.eps_list must be strictly decreasing")
    cfg["sweep"] = {"eps_list": eps_list, "nu_list": nu_list}
    if cfg["output"]["format"] != "csv":
        raise ConfigError("output.format must be 'csv'")
    if not isinstance(cfg["output"]["dir"], str) or not cfg["output"]["dir"]:
        raise ConfigError("output.dir must be a non-empty string")
    return cfg


def load_config(command: str, path: str | None, overrides: dict) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if doc.get("command") not in (None, command):
            raise ConfigError(f"config command {doc['command']!r} does not match {command!r}")
        _merge_strict(cfg, doc)
    cfg["command"] = command
    _merge_strict(cfg, overrides)
    return validate(cfg)


# -- helpers -------------------------------------------------------------------


def _params(cfg):
    P = cfg["params"]
    params = fracspace.Params(P["p"], P["theta"], P["R"], P["nu"])
    if P["nu_frac"] is not None:
        params = params.replace(nu=P["nu_frac"] * _lambda(params))
    return params


def _lambda(params):
    grid = fracspace.make_grid(2048, params.R)
    return eigen.principal_eigenvalue(params.replace(nu=0.0), grid).lambda_


def _grid(cfg, params):
    G = cfg["grid"]
    return fracspace.make_grid(G["n"], params.R, G["grading"], G["kind"], G["decades"])


def _opts(cfg):
    S = cfg["solver"]
    return extremal.SolverOptions(
        tol=S["tol"],
        max_iter=S["max_iter"],
        damping=S["damping"],
        n_starts=S["n_starts"],
        allow_small_eps=S["allow_small_eps"],
    )


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_columns(path, header, columns):
    data = np.column_stack(columns)
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def _params_dict(params):
    return {"p": params.p, "theta": params.theta, "R": params.R, "nu": params.nu}


# -- commands ------------------------------------------------------------------


def cmd_constants(cfg, out):
    params = _params(cfg)
    prof = blowup.profile_psi(params.p, params.theta)
    payload = {
        "params": _params_dict(params),
        "alpha": params.alpha,
        "omega_theta": params.omega_theta,
        "omega_alpha": params.omega_alpha,
        "mu": params.mu,
        "ball_volume": params.ball,
        "lambda": _lambda(params),
        "c0": prof.c0,
    }
    _write_json(out / "result.json", payload)
    return 0


def cmd_eigen(cfg, out):
    params = _params(cfg)
    res = eigen.principal_eigenvalue(params, _grid(cfg, params))
    _write_json(
        out / "result.json",
        {"params": _params_dict(params), "lambda": res.lambda_, "iterations": res.iterations, "residual": res.residual},
    )
    res.eigenfunction.to_csv(out / "profile.csv")
    return 0


def _require_eps(cfg):
    if cfg["eps"] is None:
        raise ConfigError("this command needs eps (config key 'eps' or --eps)")
    return cfg["eps"]


def _maximizer_payload(res, params):
    return {
        "params": _params_dict(params),
        "eps": res.eps,
        "mu_eps": res.mu_eps,
        "S_eps": res.S_eps,
        "lambda_eps": res.lambda_eps,
        "a_eps": res.a_eps,
        "h_nu": fracspace.norms(res.u, params).h_nu,
        "fixed_point_residual": res.fixed_point_residual,
        "iterations": res.iterations,
        "converged": res.converged,
    }


def cmd_maximize(cfg, out):
    params = _params(cfg)
    eps = _require_eps(cfg)
    res = extremal.solve_subcritical(params, eps, _grid(cfg, params), _opts(cfg))
    _write_json(out / "result.json", _maximizer_payload(res, params))
    res.u.to_csv(out / "profile.csv")
    return 0


def cmd_sweep(cfg, out):
    params = _params(cfg)
    grid = _grid(cfg, params)
    opts = _opts(cfg)
    eps_list = cfg["sweep"]["eps_list"]
    nu_list = cfg["sweep"]["nu_list"]
    if (eps_list is None) == (nu_list is None):
        raise ConfigError("sweep needs exactly one of sweep.eps_list or sweep.nu_list")
    if eps_list is not None:
        rows = blowup.blowup_sweep(params, eps_list, grid, opts)
        blowup.write_sweep_csv(rows, out / "sweep.csv")
        _write_json(out / "result.json", {"params": _params_dict(params), "n_rows": len(rows), "kind": "eps"})
        return 0
    eps = _require_eps(cfg)
    results = [extremal.solve_subcritical(params.replace(nu=nu), eps, grid, opts) for nu in nu_list]
    header = ("nu", "S_eps", "lambda_eps", "a_eps", "iterations")
    cols = [
        np.array(nu_list),
        np.array([r.S_eps for r in results]),
        np.array([r.lambda_eps for r in results]),
        np.array([r.a_eps for r in results]),
        np.array([r.iterations for r in results], dtype=float),
    ]
    _write_columns(out / "sweep.csv", header, cols)
    _write_json(out / "result.json", {"params": _params_dict(params), "n_rows": len(results), "kind": "nu", "eps": eps})
    return 0


def cmd_profile(cfg, out):
    params = _params(cfg)
    prof = blowup.profile_psi(params.p, params.theta)
    r = np.geomspace(1e-4, 1e4, 801)
    _write_columns(out / "profile.csv", ("r", "psi", "dpsi"), [r, prof(r), prof.derivative(r)])
    energies = {}
    for L in (1.0, 10.0, 100.0, 1000.0):
        te = blowup.psi_truncated_energy(L, params.p, params.theta)
        energies[f"{L:g}"] = te._asdict()
    payload = {
        "params": _params_dict(params),
        "c0": prof.c0,
        "mu": prof.mu,
        "psi_normalization": blowup.psi_normalization(params.p, params.theta),
        "truncated_energy": energies,
    }
    _write_json(out / "result.json", payload)
    return 0


def _green_grid(cfg, params):
    G = cfg["grid"]
    return fracspace.make_grid(max(G["n"], 2048), params.R, kind="log", decades=G["decades"])


def cmd_green(cfg, out):
    params = _params(cfg)
    res = green.solve_green(params, _green_grid(cfg, params))
    green.write_green_outputs(res, out / "result.json", out / "profile.csv")
    return 0


def cmd_testfn(cfg, out):
    params = _params(cfg)
    eps_list = cfg["sweep"]["eps_list"] or [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    gr = green.solve_green(params, _green_grid(cfg, params))
    table = testfn.lower_bound_check(params, eps_list, gr)
    testfn.write_lower_bound_csv(table, out / "table.csv")
    _write_json(
        out / "result.json",
        {
            "params": _params_dict(params),
            "A0": gr.A0,
            "upper_bound": gr.upper_bound,
            "smallest_positive_eps": table.smallest_positive_eps,
            "rejected": [{"eps": e, "reason": why} for e, why in table.rejected],
        },
    )
    return 0


def _check(lines, name, ok, detail):
    lines.append(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def cmd_verify(cfg, out):
    params = _params(cfg)
    lines = [f"# verification for p={params.p:g} theta={params.theta:g} R={params.R:g} nu={params.nu:.17g}"]
    ok = True
    rng = np.random.default_rng(12345)

    xs = rng.uniform(0.1, 20.0, 100)
    err = max(abs(specfun.gamma(x + 1) - x * specfun.gamma(x)) / specfun.gamma(x + 1) for x in xs)
    ok &= _check(lines, "gamma_recursion", err <= 1e-11, f"max rel err {err:.3e} <= 1e-11")
    err = max(abs(specfun.digamma(x + 1) - specfun.digamma(x) - 1 / x) for x in xs)
    ok &= _check(lines, "digamma_recursion", err <= 1e-10, f"max err {err:.3e} <= 1e-10")
    err = abs(specfun.digamma(1.0) + specfun.euler_gamma())
    ok &= _check(lines, "digamma_at_one", err <= 1e-12, f"|digamma(1)+gamma| = {err:.3e}")
    err = max(
        abs(specfun.beta(x, y) / specfun.beta_by_quadrature(x, y) - 1)
        for x, y in rng.uniform(0.5, 5.0, (20, 2))
    )
    ok &= _check(lines, "beta_quadrature", err <= 1e-8, f"max rel err {err:.3e} <= 1e-8")

    norm = blowup.psi_normalization(params.p, params.theta)
    ok &= _check(lines, "psi_normalization", abs(norm - 1) < 1e-8, f"|I-1| = {abs(norm - 1):.3e} < 1e-08")
    worst = 0.0
    for L in (10.0, 100.0, 1000.0):
        te = blowup.psi_truncated_energy(L, params.p, params.theta)
        prof = blowup.profile_psi(params.p, params.theta)
        worst = max(worst, te.residual * L**prof.k)
    ok &= _check(lines, "psi_energy_asymptote", worst < 10.0, f"max L^k residual {worst:.3e} < 10")

    lam = _lambda(params)
    lines.append(f"lambda: {lam:.12g}")
    if params.p == 2.0 and params.theta == 1.0:
        ref = 5.783185962946784 / params.R**2
        ok &= _check(lines, "eigenvalue_bessel", abs(lam / ref - 1) < 3e-3, f"rel err {abs(lam / ref - 1):.3e} < 3e-3")
    if params.nu >= lam:
        lines.append(f"nu_admissible: FAIL (nu = {params.nu:.6g} >= lambda)")
        ok = False
    else:
        gr = green.solve_green(params, fracspace.make_grid(2048, params.R, kind="log", decades=8))
        res = green.derivg_residual(gr)
        ok &= _check(lines, "green_derivg", res <= 1e-6, f"max residual {res:.3e} <= 1e-6")
        fit, formula, _ = green.extract_A0(gr)
        ok &= _check(lines, "green_A0", abs(fit - formula) <= 1e-4, f"|fit-formula| = {abs(fit - formula):.3e} <= 1e-4")
        lines.append(f"upper_bound: {gr.upper_bound:.15g}")
        if params.p == 2.0 and params.theta == 1.0 and params.R == 1.0 and params.nu == 0.0:
            err = abs(gr.upper_bound - (1.0 + math.e))
            ok &= _check(lines, "upper_bound_closed_form", err <= 1e-9, f"|U-(1+e)| = {err:.3e} <= 1e-9")
        table = testfn.lower_bound_check(params, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6], gr)
        best = max((r["margin"] for r in table.rows if r["margin"] == r["margin"]), default=-math.inf)
        ok &= _check(lines, "test_function_margin", best > 1e-3, f"best margin {best:.6g} > 1e-3")

        grid = fracspace.make_grid(512, params.R)
        eps = params.mu / 2
        fp = extremal.solve_subcritical(params, eps, grid)
        orc = extremal.solve_subcritical_oracle(params, eps, grid)
        rel = abs(fp.S_eps / orc.S_eps - 1)
        ok &= _check(lines, "solver_vs_oracle", rel <= 5e-3, f"|dS|/S = {rel:.3e} <= 5e-3")
        h = fracspace.norms(fp.u, params).h_nu
        ok &= _check(lines, "constraint_active", abs(h - 1) <= 1e-8, f"|H-1| = {abs(h - 1):.3e} <= 1e-8")

    m, _ = blowup.annulus_capacity(0.1 * params.R, params.R, 1.0, 0.0, params)
    ref = params.omega_alpha / math.log(10.0) ** (params.p - 1.0)
    ok &= _check(lines, "annulus_capacity", abs(m - ref) <= 1e-12 * ref, f"value {m:.12g}")

    (out / "report.txt").write_text("\n".join(lines) + "\n")
    _write_json(out / "result.json", {"params": _params_dict(params), "all_pass": bool(ok)})
    return 0 if ok else 1


DISPATCH = {
    "constants": cmd_constants,
    "eigen": cmd_eigen,
    "maximize": cmd_maximize,
    "sweep": cmd_sweep,
    "profile": cmd_profile,
    "green": cmd_green,
    "testfn": cmd_testfn,
    "verify": cmd_verify,
}


# -- entry point -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tmfrac", description="Weighted Trudinger-Moser extremals and their bounds.")
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--p", type=float)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--R", type=float)
    ap.add_argument("--nu", type=float)
    ap.add_argument("--nu-frac", type=float, help="nu as a fraction of the first eigenvalue")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--eps-list", type=float, nargs="+")
    ap.add_argument("--nu-list", type=float, nargs="+")
    ap.add_argument("--n", type=int, help="grid nodes")
    ap.add_argument("--grading", type=float)
    ap.add_argument("--kind", choices=("power", "log"))
    ap.add_argument("--decades", type=float)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--max-iter", type=int)
    ap.add_argument("--damping", type=float)
    ap.add_argument("--n-starts", type=int)
    ap.add_argument("--allow-small-eps", action="store_true", default=None)
    ap.add_argument("--out", help="output directory")
    return ap


def _overrides(ns) -> dict:
    o: dict = {}

    def put(section, key, val):
        if val is None:
            return
        if section is None:
            o[key] = val
        else:
            o.setdefault(section, {})[key] = val

    put("params", "p", ns.p)
    put("params", "theta", ns.theta)
    put("params", "R", ns.R)
    put("params", "nu", ns.nu)
    put("params", "nu_frac", ns.nu_frac)
    put(None, "eps", ns.eps)
    put("sweep", "eps_list", ns.eps_list)
    put("sweep", "nu_list", ns.nu_list)
    put("grid", "n", ns.n)
    put("grid", "grading", ns.grading)
    put("grid", "kind", ns.kind)
    put("grid", "decades", ns.decades)
    put("solver", "tol", ns.tol)
    put("solver", "max_iter", ns.max_iter)
    put("solver", "damping", ns.damping)
    put("solver", "n_starts", ns.n_starts)
    put("solver", "allow_small_eps", ns.allow_small_eps)
    put("output", "dir", ns.out)
    return o


def run(command: str, config_path: str | None = None, overrides: dict | None = None) -> int:
    """Validate, dispatch and write artifacts; returns the exit status."""
    try:
        cfg = load_config(command, config_path, overrides or {})
        out = Path(cfg["output"]["dir"])
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        return DISPATCH[cfg["command"]](cfg, out)
    except ConvergenceError as exc:
        print(f"tmfrac: not converged: {exc}", file=sys.stderr)
        return 3
    except (TmfracError, ValueError) as exc:
        print(f"tmfrac: invalid input: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run(ns.command, ns.config, _overrides(ns))


if __name__ == "__main__":
    sys.exit(main())
