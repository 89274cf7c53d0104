"""Gamma, digamma and the truncated Beta integral, checked against scipy.

Run with ``python3 demos/01_special_functions.py``.
"""

# %%
import math

import numpy as np
from scipy import special

from tmfrac import specfun

# %% [markdown]
# The hand-rolled Gamma uses upward recursion to x >= 10 followed by the
# Stirling series; digamma does the same with its asymptotic expansion.

# %%
xs = np.array([0.1, 0.5, 1.0, 2.5, 7.0, 30.0])
for x in xs:
    print(f"x={x:5.1f}  gamma rel err {abs(specfun.gamma(x) / special.gamma(x) - 1):.1e}"
          f"  digamma abs err {abs(specfun.digamma(x) - special.digamma(x)):.1e}")

print("Euler-Mascheroni:", specfun.euler_gamma(), "vs", np.euler_gamma)

# %% [markdown]
# ``int_0^a s^(x-1) (1+s)^-x ds`` approaches ``ln(1+a) - digamma(x) - gamma``.
# For x = 2 the gap is exactly 1/(1+a).

# %%
for a in (1.0, 10.0, 100.0, 1e4):
    tb = specfun.truncated_beta_integral(a, 2.0)
    print(f"a={a:8.0f}  value={tb.value:.12f}  closed={math.log1p(a) + 1 / (1 + a) - 1:.12f}"
          f"  residual*(1+a)={tb.residual * (1 + a):.15f}")
