"""Subcritical maximizers: fixed point, ascent oracle and monotone trends.

Run with ``python3 demos/03_subcritical_maximizers.py``.
"""

# %%
from tmfrac.eigen import principal_eigenvalue
from tmfrac.extremal import euler_lagrange_residual, solve_subcritical, solve_subcritical_oracle
from tmfrac.fracspace import Params, make_grid, norms

prm = Params(p=2.0, theta=1.0)
grid = make_grid(512)

# %% [markdown]
# The fixed-point solver and the projected-ascent oracle land on the same
# discrete maximizer.

# %%
fp = solve_subcritical(prm, prm.mu / 2, grid)
orc = solve_subcritical_oracle(prm, prm.mu / 2, grid)
print(f"S_eps fixed point {fp.S_eps:.12f}   oracle {orc.S_eps:.12f}")
print(f"H_nu = {norms(fp.u, prm).h_nu:.15f}  EL residual {euler_lagrange_residual(fp):.2e}")
print(f"lambda_eps = {fp.lambda_eps:.6f}  a_eps = {fp.a_eps:.6f}")

# %% [markdown]
# S_eps grows as eps shrinks and as nu grows.

# %%
for f in (0.8, 0.6, 0.4, 0.2):
    r = solve_subcritical(prm, f * prm.mu, grid)
    print(f"eps={f:.1f} mu  S_eps={r.S_eps:.6f}  a_eps={r.a_eps:.4f}")

lam = principal_eigenvalue(prm, grid).lambda_
for f in (0.0, 0.3, 0.6):
    r = solve_subcritical(prm.replace(nu=f * lam), prm.mu / 2, grid)
    print(f"nu={f:.1f} lambda  S_eps={r.S_eps:.6f}")
