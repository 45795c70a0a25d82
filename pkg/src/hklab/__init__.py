"""hklab: an exact-diagonalization laboratory for density-functional
dualities on small fermionic lattices.

Discretizes many-body Hamiltonians (local, Zeeman, non-local, pair,
two-species) on 1-D chains, computes ground and Gibbs states exactly,
extracts the reduced quantities they couple to external fields through
(density, pair density, magnetization, 1RDM, entropy), verifies the
associated uniqueness inequalities and constraints, solves the inverse
problems, and builds the known zero-temperature counterexamples.
"""

from ._kernels import backend_name
from .exceptions import (
    ConfigError,
    DegenerateGroundError,
    DimensionTooLargeError,
    EnsembleMismatchError,
    FamilyMismatchError,
    HKLabError,
    HypothesisNotSatisfiedError,
    LevelCrossingError,
    SolverConvergenceError,
    ValidationError,
)
from .hilbert import (
    LatticeSpace,
    MagneticField,
    OneBodyOperator,
    kinetic_operator,
    local_potential_operator,
    nonlocal_operator,
    rank_one_operator,
    zeeman_operator,
    zeeman_spectrum_formula,
)
from .manybody import (
    FockBasis,
    ManyBodyOperator,
    PairPotential,
    SectorBasis,
    TwoSpeciesBasis,
    TwoSpeciesSpec,
    assemble_fock_hamiltonian,
    assemble_hamiltonian,
    assemble_two_species,
    build_fock_basis,
    build_sector_basis,
)
from .observables import (
    DensityProfile,
    Magnetization,
    OneRDM,
    PairDensity,
    ReducedData,
    SpeciesPairData,
    average_particle_number,
    density,
    entropy,
    magnetization,
    one_rdm,
    pair_density,
    reduced_data,
    species_densities,
    species_pair_functions,
)
from .solve import GroundSolution, check_nonvanishing, full_spectrum, ground_state
from .states import QuantumState, trace_distance
from .thermal import GibbsState, free_energy_of, gibbs_canonical, gibbs_grand_canonical
from .hktheory import (
    ChiField,
    Conclusion,
    GroundSystem,
    HKReport,
    SearchReport,
    ThermalSystem,
    decompose_pair_potential,
    hk_semimetric,
    nonlocal_thermal_pairing,
    search_assumption_gap,
    search_density_collision,
    solve_system,
    solve_thermal_system,
    spin_constraint_chi,
    thermal_semimetric,
    uniqueness_defect_onebody,
    variational_slacks,
    verify_constancy,
)
from .counterexamples import (
    CounterexampleCertificate,
    CounterexampleKind,
    capelle_vignale_pair,
    gilbert_counterexample,
)
from .inverse import (
    InversionResult,
    ProblemFamily,
    invert_density,
    invert_pair_density,
    invert_v_and_T,
)

__version__ = "0.1.0"
