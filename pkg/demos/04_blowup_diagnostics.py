"""The bubble profile, its energy and blow-up diagnostics along a sweep.

Run with ``python3 demos/04_blowup_diagnostics.py``.
"""

# %%
import numpy as np

from tmfrac.blowup import annulus_capacity, blowup_sweep, profile_psi, psi_normalization, psi_truncated_energy
from tmfrac.fracspace import Params, make_grid

# %% [markdown]
# The bubble ``psi`` is normalized for every admissible (p, theta).

# %%
for p in (2.0, 2.5, 3.0):
    for theta in (p - 1, p, p + 1):
        prof = profile_psi(p, theta)
        print(f"p={p} theta={theta}  c0={prof.c0:.6f}  normalization-1={psi_normalization(p, theta) - 1:.1e}")

for L in (1.0, 10.0, 100.0):
    te = psi_truncated_energy(L, 2.0, 1.0)
    print(f"L={L:6.1f}  energy={te.value:.8f}  asymptotic={te.asymptotic:.8f}")

# %% [markdown]
# The annulus capacity is attained by a log-linear profile.

# %%
prm = Params(2.0, 1.0)
m, h = annulus_capacity(0.1, 1.0, 1.0, 0.0, prm)
print("capacity of (0.1, 1):", m, " minimizer at r=0.3:", h(0.3))

# %% [markdown]
# Along a near-critical sweep the peak value grows, the rescaled profile moves
# toward ``psi`` and the energy split at c = 2 drifts toward 1/2.

# %%
rows = blowup_sweep(prm, prm.mu * np.geomspace(0.5, 0.05, 6), make_grid(2048, kind="log", decades=8))
print(f"{'eps':>8} {'a_eps':>8} {'dist_psi':>9} {'trunc_low':>9} {'a/lambda':>9}")
for r in rows:
    print(f"{r['eps']:8.4f} {r['a_eps']:8.4f} {r['profile_distance_psi']:9.4f} "
          f"{r['trunc_low']:9.4f} {r['a_eps'] / r['lambda_eps']:9.4f}")
