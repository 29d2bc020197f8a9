# %% [markdown]
# # The unipotent contribution, two ways
#
# For a cusp with lattice `L` and a kernel profile `h`, the truncated unipotent
# integral can be summed directly over lattice vectors or written in closed
# form with `log Y`, `kappa` and two small remainders. We compare both.

# %%
import math

from cusptorsion import geom_trace as gt
from cusptorsion.lattice2d import lattice

h = gt.gaussian_profile()
L = lattice((0.7, 0.1), (0.3, 2.9))
for Y in (5.0, 20.0, 80.0):
    b = gt.unipotent_bruteforce(L, h, Y)
    c = gt.unipotent_closed_form(L, h, Y)
    print(f"Y={Y:5.0f}  brute {b.value:.12f}  closed {c.value:.12f}  diff {abs(b.value - c.value):.1e}")

# %% [markdown]
# As `Y` grows, subtracting the `log Y` divergence leaves the regularised cusp
# term. The gap shrinks roughly like `Y^-2`.

# %%
Z2 = lattice((1, 0), (0, 1))
m = gt.radial_moments(h)
reg = gt.cusp_regularized_terms([Z2], h)
for Y in (10, 100, 1000):
    u = gt.unipotent_bruteforce(Z2, h, Y, method="shell").value
    print(Y, u - 2 * math.pi * math.log(Y) * m.m1.value - reg)

# %% [markdown]
# A manifold summary puts the pieces together.

# %%
M = gt.ManifoldSummary(10.0, (Z2, lattice((1, 0), (0.2, 1.6))), identity_density=0.01)
print(gt.trace_breakdown(M, h))
