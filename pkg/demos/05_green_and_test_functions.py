"""Green-type profile, the critical upper bound and competitors exceeding it.

Run with ``python3 demos/05_green_and_test_functions.py``.
"""

# %%
import math

from tmfrac.eigen import principal_eigenvalue
from tmfrac.fracspace import Params, make_grid
from tmfrac.green import derivg_residual, extract_A0, solve_green
from tmfrac.testfn import lower_bound_check

prm = Params(2.0, 1.0)
lam = principal_eigenvalue(prm, make_grid(2048)).lambda_

# %% [markdown]
# At nu = 0 the profile is ``-ln(r)/2`` and the bound is ``1 + e``.

# %%
g0 = solve_green(prm)
print("A0 =", g0.A0, " U =", g0.upper_bound, " 1+e =", 1 + math.e)

# %% [markdown]
# For nu > 0 the constant A0 grows; the fitted and integral values agree.

# %%
for f in (0.1, 0.25, 0.5):
    gr = solve_green(prm.replace(nu=f * lam))
    fit, formula, _ = extract_A0(gr)
    print(f"nu={f:.2f} lambda  A0={formula:.8f}  fit-formula={fit - formula:.1e}"
          f"  derivg residual={derivg_residual(gr):.1e}  U={gr.upper_bound:.6f}")

# %% [markdown]
# Glued bubble/Green competitors on the constraint surface beat U.

# %%
for f in (0.0, 0.25):
    p = prm.replace(nu=f * lam)
    table = lower_bound_check(p, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], solve_green(p))
    print(f"nu={f} lambda")
    for r in table.rows:
        print(f"  eps={r['eps']:.0e}  F={r['functional']:.6f}  U={r['upper_bound']:.6f}  margin={r['margin']:+.4f}")
