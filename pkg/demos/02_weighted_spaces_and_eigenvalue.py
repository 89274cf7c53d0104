"""Radial grids, weighted norms and the first eigenvalue.

Run with ``python3 demos/02_weighted_spaces_and_eigenvalue.py``.
"""

# %%
import math

from scipy import special

from tmfrac.eigen import principal_eigenvalue
from tmfrac.fracspace import Params, RadialFunction, make_grid, norms, tintarev_lift

# %% [markdown]
# With p = 2 and theta = alpha = 1 the weighted measure is the planar one, so
# the unit-ball eigenvalue is the square of the first Bessel zero.

# %%
prm = Params(p=2.0, theta=1.0)
print("mu =", prm.mu, " |B_1| =", prm.ball)
for n in (256, 512, 1024, 2048):
    lam = principal_eigenvalue(prm, make_grid(n)).lambda_
    print(f"N={n:5d}  lambda={lam:.8f}")
print("Bessel reference:", special.jn_zeros(0, 1)[0] ** 2)

# %% [markdown]
# A non-integer dimension: p = 3 with theta = 2.5.

# %%
prm3 = Params(p=3.0, theta=2.5)
print("p=3, theta=2.5: lambda =", principal_eigenvalue(prm3, make_grid(1024)).lambda_)

# %% [markdown]
# Norms of the cone ``1 - r`` and the effect of the constraint lift.

# %%
g = make_grid(1024)
u = RadialFunction.from_callable(g, lambda r: 1 - r)
prm_nu = prm.replace(nu=1.0)
print("norms at nu=0:", norms(u, prm))
print("norms at nu=1:", norms(u, prm_nu))
v = tintarev_lift(u, prm_nu)
print("H_nu of lifted profile:", norms(v, prm_nu).h_nu, "(expected", math.sqrt(35 / 36), ")")
