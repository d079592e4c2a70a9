"""Morse-theoretic analysis of adiabatic annealing Hamiltonians.

The secular surface f(s, lambda) = det(H(s) - lambda I) turns avoided
crossings into saddle points; this package finds and classifies those
critical points, derives local gap models and asymptote angles, accounts for
Gaussian curvature via Gauss-Bonnet, tracks birth/death of critical pairs
across an enhancement parameter, and classifies quantum-phase-transition
order for the ferromagnetic p-spin model.
"""

__version__ = "0.1.0"

from .errors import (CapacityError, InvariantViolationError, MorsegapError,
                     SignPatternError, ValidationError)
from .hamiltonians import (DegeneracyEnhancedSurface, DegeneracyFamily,
                           GroverEffectiveFamily, GroverSurface,
                           PauliInterpolationFamily, PauliTerm,
                           ReducedPSpinFamily, ToyFamily, ToyThreePointSurface,
                           analytic_surface, build_full_pspin,
                           build_pauli_matrix, build_pspin_reduced,
                           grover_family, load_model)
from .surface import (CallableSurface, MatrixSurface, MorseSurface, Region,
                      ScaledSurface, SpectralCurves, charpoly_coefficients,
                      default_spectral_domain, eval_f, gauss_curvature,
                      gradient_f, hessian_f, spectral_curves)
from .critical_points import (CriticalPoint, CriticalPointSearch,
                              DegeneratePoint, asymptote_angle,
                              find_critical_points, gap_from_saddle,
                              local_model)
from .topology import (CurvatureIntegral, CurvatureReport,
                       curvature_redistribution, curvature_report,
                       euler_characteristic, integrate_curvature)
from .cerf_sweep import (AngleTrace, Branch, CerfDiagram, CerfEvent,
                         angle_trace, first_gap_saddle_branch, sweep,
                         verify_invariants)
from .qpt import (ClassicalEnergyParams, QptReport, classical_energy,
                  finite_size_gap_scan, magnetization_energy, minimizer_curve)
