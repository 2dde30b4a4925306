"""Two coupled Cooper pair boxes under intrinsic phase decoherence.

Builds the charge-qubit Hamiltonian, propagates the joint density matrix
exactly in the energy eigenbasis, and tracks von Neumann and mutual
entropies along the trajectory.
"""

from .charge import (
    BandStructure,
    CapacitanceSpec,
    QubitEnergies,
    RegimeWarning,
    band_energies,
    build_four_level_hamiltonian,
    build_lattice_hamiltonian,
    energies_from_capacitances,
    eta,
)
from .dynamics import (
    Propagator,
    dephased_limit,
    evolve,
    evolve_rk4,
    make_initial_state,
)
from .entropy import (
    CorrelationRecord,
    closed_form_joint_eigenvalues,
    mutual_entropy,
    observe,
    reduced_entropies,
)
from .errors import (
    ContractError,
    EigenSolverError,
    GridSizeError,
    SingularGeometryError,
)
from .linalg import (
    DensityMatrix,
    EigenSystem,
    eig_hermitian,
    hermitize,
    partial_trace,
    purity,
    von_neumann_entropy,
)
from .sweep import SweepConfig, SweepResult, run_sweep, validate

__version__ = "0.1.0"
