"""The two explicit edge constructions: a rank-one non-local perturbation
that leaves the ground 1RDM unchanged, and the spin-bias construction that
leaves density and magnetization unchanged while the field moves.

Both certify their defining properties from fresh forward solves rather than
trusting the construction, and both are destroyed by heat (see the thermal
pairing checks in `hktheory`), which the tests exercise.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateGroundError,
    LevelCrossingError,
    ValidationError,
)
from .hilbert import (
    LatticeSpace,
    MagneticField,
    OneBodyOperator,
    kinetic_operator,
    rank_one_operator,
)
from .hktheory import chi_field_from_data, solve_system
from .manybody import PairPotential, assemble_hamiltonian, build_sector_basis, spin_z_diagonal
from .observables import density, magnetization, one_rdm
from .solve import ground_state
from .states import QuantumState


class CounterexampleKind(enum.Enum):
    GILBERT_NONLOCAL = "gilbert_nonlocal"
    CAPELLE_VIGNALE_SPIN = "capelle_vignale_spin"


@dataclass
class CounterexampleCertificate:
    """verdict is true only when the external operators are far apart
    (distance > 1e-3) while the reduced data coincide (distance <= 1e-9)."""

    kind: CounterexampleKind
    operator_distance: float
    reduced_data_distance: float
    energies: tuple
    verdict: bool
    extras: dict = field(default_factory=dict)


def gilbert_counterexample(
    space: LatticeSpace,
    num_particles: int,
    g1: OneBodyOperator,
    epsilon: float | None = None,
    orbital_index: int | None = None,
    gap_tol: float = 1e-6,
) -> CounterexampleCertificate:
    """Build G2 = G1 + eps |phi><phi| with phi an unoccupied orbital.

    `g1` is the external (possibly non-local) potential of the
    non-interacting Hamiltonian H = sum_i (-Delta + G1)_i; the interaction
    must be absent so the ground state is a Slater determinant and an exactly
    unoccupied orbital exists.  The default phi is the lowest unoccupied
    orbital of the one-body problem; passing an occupied index is the
    documented misuse path and produces a false certificate (the energy
    shifts by eps).
    """
    D = space.dim
    if num_particles >= D:
        raise ValidationError("need an unoccupied orbital: N < D required")
    basis = build_sector_basis(space, num_particles)
    one_body_1 = kinetic_operator(space) + g1
    ham1 = assemble_hamiltonian(basis, one_body_1)
    sol1 = ground_state(ham1)
    if sol1.degeneracy != 1:
        raise DegenerateGroundError(
            f"ground state is {sol1.degeneracy}-fold degenerate; construction needs a unique one"
        )
    if sol1.gap <= gap_tol:
        raise DegenerateGroundError(f"ground gap {sol1.gap:.3e} below {gap_tol:.1e}")
    if epsilon is None:
        epsilon = 0.1 * sol1.gap
    if epsilon <= 0:
        raise ValidationError("perturbation strength must be positive (min-max argument)")

    orb_vals, orb_vecs = np.linalg.eigh(one_body_1.matrix)
    index = num_particles if orbital_index is None else int(orbital_index)
    phi = orb_vecs[:, index]
    g2 = g1 + rank_one_operator(space, phi, weight=epsilon)
    ham2 = assemble_hamiltonian(basis, kinetic_operator(space) + g2)
    sol2 = ground_state(ham2)

    psi1 = QuantumState.pure(basis, sol1.vector)
    psi2 = QuantumState.pure(basis, sol2.vector)
    gamma1 = one_rdm(psi1).matrix
    gamma2 = one_rdm(psi2).matrix
    overlap = abs(np.vdot(sol1.vector, sol2.vector))
    operator_distance = float(np.linalg.norm(g2.matrix - g1.matrix, 2))
    reduced_distance = float(np.max(np.abs(gamma1 - gamma2)))
    energy_gap = abs(sol1.energy - sol2.energy)
    verdict = (
        operator_distance > 1e-3
        and reduced_distance <= 1e-9
        and energy_gap <= 1e-10
        and overlap >= 1.0 - 1e-12
    )
    return CounterexampleCertificate(
        kind=CounterexampleKind.GILBERT_NONLOCAL,
        operator_distance=operator_distance,
        reduced_data_distance=reduced_distance,
        energies=(sol1.energy, sol2.energy),
        verdict=verdict,
        extras={
            "epsilon": epsilon,
            "overlap": overlap,
            "gap": sol1.gap,
            "orbital_index": index,
            "orbital_energies": orb_vals,
            "phi": phi,
            "g2": g2,
            "system1": (ham1, sol1),
            "system2": (ham2, sol2),
        },
    )


def _resolve_spin_branches(solution, sz_diag, tol=1e-8):
    """Rotate a degenerate ground span into simultaneous sigma-z-total
    eigenvectors; [H, Sz] = 0 guarantees the span is Sz-invariant."""
    span = solution.vectors
    overlap = span.conj().T @ (sz_diag[:, None] * span)
    svals, rot = np.linalg.eigh(0.5 * (overlap + overlap.conj().T))
    branches = span @ rot
    eigenvalues = []
    for k in range(branches.shape[1]):
        vec = branches[:, k]
        s = float(np.real(np.vdot(vec, sz_diag * vec)))
        s_int = round(s)
        if np.linalg.norm(sz_diag * vec - s_int * vec) > tol:
            raise ValidationError(
                "ground span could not be resolved into spin-z eigenvectors"
            )
        eigenvalues.append(int(s_int))
    return branches, eigenvalues


def capelle_vignale_pair(
    space: LatticeSpace,
    num_particles: int,
    v,
    pair: PairPotential | None = None,
    bias: float | None = None,
    seed: int = 0,
):
    """Perturb a zero-field system by a uniform field B2 = b e_z.

    The unbiased ground multiplet is resolved into total-sigma-z branches;
    the member that stays lowest under the bias keeps its wavefunction, so
    density and magnetization are unchanged while the field is not.  Returns
    (certificate, chi_field); the constraint reads N b chi = E1 - E2 with
    chi = -sign(b) s / N.
    """
    if space.spin_dim != 2:
        raise ValidationError("the construction needs spin-1/2")
    sys1 = solve_system(space, num_particles, v=v, pair=pair, seed=seed)
    sol1 = sys1.solution
    if sol1.gap <= 1e-8:
        raise DegenerateGroundError(
            "no spectral gap above the ground multiplet"
        )
    sz = spin_z_diagonal(sys1.basis)
    branches, s_values = _resolve_spin_branches(sol1, sz)

    # conservative no-crossing bound: |b| (s - s') never exceeds 2N|b|
    threshold = sol1.gap / (2 * num_particles)
    if bias is None:
        bias = 1e-3 * sol1.gap
    if bias != 0 and abs(bias) >= threshold:
        raise LevelCrossingError(
            f"|b| = {abs(bias):.3e} can cross levels; safe threshold is {threshold:.3e}",
            threshold=threshold,
        )

    # branch that stays lowest under the bias b * s
    pick = int(np.argmin([bias * s for s in s_values]))
    psi_star = branches[:, pick]
    s_star = s_values[pick]

    b_field = MagneticField(np.tile([0.0, 0.0, bias], (space.num_sites, 1)))
    sys2 = solve_system(space, num_particles, v=v, pair=pair, b_field=b_field, seed=seed)
    sol2 = sys2.solution
    overlap = float(np.max(np.abs(psi_star.conj() @ sol2.vectors)))

    state1 = QuantumState.pure(sys1.basis, psi_star)
    state2 = sys2.state()
    rho1 = density(state1).values
    rho2 = density(state2).values
    m1 = magnetization(state1).values
    m2 = magnetization(state2).values
    reduced_distance = float(max(np.max(np.abs(rho1 - rho2)), np.max(np.abs(m1 - m2))))
    operator_distance = abs(bias)
    predicted_e2 = sol1.energy + bias * s_star

    chi = chi_field_from_data(
        space,
        num_particles,
        v1=np.asarray(v, dtype=float),
        v2=np.asarray(v, dtype=float),
        e1=sol1.energy,
        e2=sol2.energy,
        db_magnitudes=np.full(space.num_sites, abs(bias)),
    )
    verdict = (
        bias != 0
        and operator_distance > 1e-3
        and reduced_distance <= 1e-9
        and abs(sol2.energy - predicted_e2) <= 1e-9 * max(1.0, abs(predicted_e2))
        and overlap >= 1.0 - 1e-10
    )
    certificate = CounterexampleCertificate(
        kind=CounterexampleKind.CAPELLE_VIGNALE_SPIN,
        operator_distance=operator_distance,
        reduced_data_distance=reduced_distance,
        energies=(sol1.energy, sol2.energy),
        verdict=verdict,
        extras={
            "bias": bias,
            "spin_eigenvalue": s_star,
            "branch_spins": s_values,
            "overlap": overlap,
            "gap": sol1.gap,
            "crossing_threshold": threshold,
            "system1": sys1,
            "system2": sys2,
            "matched_state": psi_star,
        },
    )
    return certificate, chi
