"""Discrepancy of multidimensional arithmetic progressions.

Upper bounds via gamma_2 factorization certificates rounded by the
Gram-Schmidt walk; lower bounds via exact lattice counting and comb
convolution; exact brute force and an exhaustive property suite at
small scale.
"""

from .apgen import (APDescriptor, BoxSpec, CanonicalAP, LargeStepSet,
                    canonical_step, canonical_steps, canonicalize,
                    enumerate_all_aps, enumerate_maximal_aps,
                    enumerate_prefix_maximal, large_step_set,
                    lex_interval_repr, lex_order, maximal_ap,
                    step_max_length)
from .body import (FKResult, Polytope, ShiftedBody, ZetaEvaluation,
                   box_polytope, check_zeta_maxshift, check_zeta_scaling,
                   difference_body, enumerate_maximal_aps_in_body, f_K,
                   format_polytope, integer_points, load_polytope,
                   maximal_ap_in_body, parse_polytope, zeta)
from .core import (Coloring, OrderingSigma, SetSystem, Universe, chi_sum,
                   concat_systems, disc_eval, pdisc_eval, random_coloring,
                   subinterval_max_disc)
from .errors import (ConstructionError, DomainError, ResourceLimitError,
                     StructuralError)
from .fourier import (CertifiedLowerBound, CombFunction, FourierLBParams,
                      certified_lower_bound, choose_lb_params, comb_convolve,
                      coloring_as_function, convolution_identity_check,
                      parseval_check)
from .gamma2 import (FBoundResult, FactorizationCertificate, ap_cert,
                     certificate_document, degree_bound_cert,
                     disjoint_support_cert, f_of_N, map_cert,
                     prefix_ap_cert, size_bound_cert, spectral_lower_bounds,
                     triangle_cert, union_cert)
from .walk import (BruteForceResult, WalkState, ap_family_disc,
                   ap_family_size, brute_force_min_disc,
                   brute_force_min_pdisc, gamma2_coloring, gs_walk)

__version__ = "1.0.0"
