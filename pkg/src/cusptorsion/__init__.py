"""Numerics for cusped hyperbolic 3-manifolds: cusp lattices, regularised traces,
zeta-regularised determinants, scattering data and Benjamini-Schramm diagnostics."""

from .errors import AdmissionError, CuspTorsionError, NumericalError, ParseError
from .lattice2d import (LatticeBasis, ReducedLattice, CuspConstant, gauss_reduce, lattice,
                        count_points, error_term, error_bound_ratio, kappa, scale)
from .hyperbolic import (CuspGeometry, TruncationHeights, ell, parabolic_distance,
                         log_lower_bound_constant, cusp_boundary_area, cusp_volume_above)
from .rep_theory import (RepWeights, WeightSpectrum, dimension, casimir,
                         weight_multiplicities, form_eigenvalue, spectral_gap,
                         l2_torsion_coefficient)
from .mellin_reg import (SmallTimeExpansion, DiscreteSpectrum, TorsionLedger, HomologySummary,
                         mellin_zero_derivative, large_time_integral, regularized_log_det,
                         analytic_torsion, l2_log_torsion, small_eigenvalue_tail,
                         reidemeister_from_homology, boundary_correction, synthetic_expansion)
from .geom_trace import (KernelProfile, ManifoldSummary, gaussian_profile, exponential_profile,
                         zero_profile, unipotent_bruteforce, unipotent_closed_form,
                         cusp_regularized_terms, regularized_trace, truncation_defect)
from .spectral_side import (ScatteringModel, TestFunction, constant_model, mobius_model,
                            maass_selberg_norm0, maass_selberg_norm1, scattering_limit,
                            winding_integral, intertwiner_bound_check)
from .bs_sequences import (CuspedManifoldDescriptor, TowerDescriptor, bs_report,
                           cusp_uniformity, truncation_schedule, congruence_tower)

__version__ = "0.1.0"
