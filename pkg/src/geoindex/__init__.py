"""Index theory and linear stability of closed semi-Riemannian geodesics.

The package represents a closed geodesic by its twisted Morse-Sturm data
(signature matrix G, curvature path Rhat, twist A), integrates the associated
linear Hamiltonian system, and computes three integer invariants: the
geometric index (a Maslov-type intersection count), the omega-spectral index
(a spectral flow), and, for G = I, the classical Morse index via a finite
element oracle.  Identities tying the three together are exposed as exact
integer checks, and the spectrum of the linearized Poincare map feeds the
stability classification.
"""
from .system import (SignatureMatrix, MorseSturmSystem, ConstantCurvature,
                     FourierCurvature, scenario, SCENARIO_NAMES,
                     random_system, iterate, validate, twist_lift,
                     closed_form_phi, system_to_dict, system_from_dict)
from .symplectic import (standard_J, diamond, krein_type, KreinType,
                         hermitian_signature, is_symplectic, d_omega)
from .integrator import (integrate_fundamental, endpoint_family,
                         AccuracyError, FundamentalSolution)
from .maslov import (LagrangianPath, CrossingRecord, DegeneratePathError,
                     graph_path, crossing_form, clm_index, iota_omega,
                     hermitian_path_spectral_flow)
from .indices import (IndexReport, nullity, geometric_index,
                      spectral_index_spath, theorem_A_check, prop55_check,
                      block_fact_check, bott_check, fundamental_solution)
from .fem import (NotApplicableError, omega_morse_index,
                  morse_index_theorem_check)
from .stability import (StabilityReport, ClusteredSpectrumError,
                        poincare_map, classify_stability, splitting_numbers,
                        geodesic_splitting_check, instability_criterion,
                        index_hyperbolic_check, strong_stability_check,
                        theorem_F_check, perturbation_lemma_check)

__version__ = "0.1.0"
