# %% [markdown]
# # Regularised determinants and tower diagnostics
#
# A finite spectrum is the simplest check for the zeta-regularised determinant:
# the answer must be `-sum log(lambda)` no matter where the small/large time
# split `t0` sits.

# %%
import math

from cusptorsion import bs_sequences as bs
from cusptorsion import mellin_reg as mr
from cusptorsion.lattice2d import lattice
from cusptorsion.rep_theory import RepWeights

spec = mr.DiscreteSpectrum([0.5, 2.0, 2.0, 7.0])
exp = mr.synthetic_expansion(spec)
for t0 in (0.25, 1.0, 3.0):
    print(t0, mr.regularized_log_det(exp, spec, t0), -sum(math.log(x) for x in spec.eigenvalues))

# %% [markdown]
# Torsion combines the degree-wise determinants; the L2 value only needs the
# volume and the representation.

# %%
led = mr.analytic_torsion({0: mr.regularized_log_det(exp, spec, 1.0), 1: -1.3})
print(led.log_T_R, mr.l2_log_torsion(6 * math.pi, RepWeights(0, 0)))

# %% [markdown]
# ## A synthetic congruence tower
#
# Index grows like `n^4` and the cusp count like `n^2`, with each cusp lattice
# scaled by `n`. The cusp conditions should all trend to zero.

# %%
base = bs.CuspedManifoldDescriptor(2.0, (lattice((1, 0), (0.3, 1.4)),))
tower = bs.congruence_tower(base, 8, "n4", "n2")
rep = bs.bs_report(tower)
print(rep.to_csv())
print(rep.verdicts)
print([round(bs.truncation_schedule(m).scale, 4) for m in tower])
