"""Numerical Lie-Nambu triple-bracket dynamics for finite density matrices."""

from .config import RunReport, ScenarioConfig, run_scenario
from .dynamics import ModelSpec, Trajectory, effective_hamiltonian, integrate, rhs, step_isospectral, step_rk4
from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    LieNambuError,
    NumericalError,
    SizeGuardError,
    UnsupportedModelError,
    ValidationError,
)
from .functionals import (
    EntropySpec,
    HamiltonianSpec,
    casimir_gradient,
    casimir_value,
    entropy_gradient,
    entropy_value,
    fd_gradient_oracle,
    gradient_polynomial,
    hamiltonian_gradient,
    hamiltonian_value,
)
from .matrix import (
    PAULI,
    SpectralDecomposition,
    anticommutator,
    commutator,
    hermitian_eig,
    matrix_power,
    trace_product,
    unitary_conjugate,
)
from .scenarios import analytic_eigvecs, analytic_rho_2x2, convex_scenario
from .spectral import (
    conservation_report,
    match_spectra,
    signed_power_sums,
    spectrum_from_moments,
    top_eigenvalue_estimate,
)

__version__ = "0.1.0"
