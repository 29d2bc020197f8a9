# %% [markdown]
# # Cusp lattices and the cusp constant
#
# A cusp cross-section is a flat torus, so everything starts with a rank-2
# lattice. We reduce a skewed basis, look at the lattice-point error term, and
# compute the constant that the unipotent term needs.

# %%
import math

import numpy as np

from cusptorsion import lattice2d as l2

lat = l2.lattice((100.0, 0.0), (99.0, 1.0))
print("alpha1, alpha2, covolume:", lat.alpha1, lat.alpha2, lat.covolume)
print("transform:", lat.transform)

# %% [markdown]
# ## Gauss-circle error
#
# The error term divided by `r/alpha1 + alpha2/alpha1` stays small, uniformly
# over lattices of bounded shape. Here is the worst value up to `r = 100 alpha1`
# for a handful of random lattices.

# %%
rng = np.random.default_rng(1)
for _ in range(5):
    b1 = rng.normal(size=2)
    b2 = rng.normal(size=2) * 3
    L = l2.gauss_reduce(l2.LatticeBasis(b1, b2))
    r = np.linspace(0.1, 100 * L.alpha1, 4000)
    print(f"shape {L.uniformity_ratio:6.2f}  worst ratio {l2.error_bound_ratio(L, r).max():.3f}")

# %% [markdown]
# ## The cusp constant
#
# `kappa` is the finite part of the sum of `|v|^-2` over the lattice. For the
# square lattice it has a closed form through the Dedekind eta function at `i`.

# %%
Z2 = l2.lattice((1, 0), (0, 1))
k = l2.kappa(Z2)
eta_i = math.gamma(0.25) / (2 * math.pi ** 0.75)
closed = 2 * math.pi * (np.euler_gamma - math.log(2) - 2 * math.log(eta_i))
print(k.kappa, closed, k.kappa - closed)

# %% [markdown]
# Scaling the lattice by `c` changes `kappa` by a logarithmic shift.

# %%
c = 3.0
big = l2.scale(Z2, c)
pred = k.kappa / c**2 - 2 * math.pi * math.log(c) / (c**2 * Z2.covolume)
print(l2.kappa(big).kappa, pred)
