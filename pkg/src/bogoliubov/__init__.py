"""Diagonalization, vacuum energies and renormalization of bosonic quadratic Hamiltonians."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"

from ._backend import BACKEND
from .algebra import (DoubledOperator, QuadraticProblem, build_generator,
                      classical_hamiltonian, d_operators, free_generator,
                      is_symplectic, matrix_sqrt_psd, sign_real_spectrum,
                      symplectic_inverse)
from .criteria import CriteriaReport, criteria_report, f_of_t, flow_blocks, gamma_of_g
from .diagonalize import (DiagonalizationResult, decompose_positive_symplectic,
                          diagonalize, r0_via_a_form, r0_via_sign, relative_bound_a)
from .energy import (EnergyReport, energy_report, normal_energy,
                     quantization_shifts, weyl_energy)
from .errors import *  # noqa: F401,F403
from .fock import (build_basis, coherent_state, ground_energy,
                   implementation_residual, implementer_group_check,
                   natural_implementer, oracle_ground_energy,
                   quadratic_hamiltonian, vacuum_overlap)
from .quadrature import QuadratureConfig, integrate_tau
from .renorm import (LoopExpansion, RenormReport, counterterms, e_ren,
                     loop_expansion, loop_term, merits_family, potential_v,
                     scalar_field_instance)
