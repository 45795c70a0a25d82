"""Duality pairings, semi-metrics, and verifiers for the uniqueness theorems
this laboratory exercises.

Every pairing carries the lattice weight h so that it mirrors the continuum
integral it discretizes:

    density pairing       sum_x  v(x) rho(x) h          = <sum_i v(x_i)>
    pair pairing          sum_xy W(x,y) rho2(x,y) h^2   = <sum_{i<j} W(x_i,x_j)>
    magnetization pairing sum_x  B(x) . m(x) h          = <sum_i sigma_i . B(x_i)>
    non-local pairing     h tr(G gamma)                 = <sum_i G_i>

The ground-state semi-metric is -sum (v1-v2)(rho1-rho2) h >= 0, vanishing
exactly on constant shifts; its thermal extension adds (T1-T2)(S1-S2).
Degenerate ground spans are handled by evaluating every vector combination
and reporting the worst case.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    FamilyMismatchError,
    HypothesisNotSatisfiedError,
    ValidationError,
)
from .hilbert import (
    LatticeSpace,
    MagneticField,
    OneBodyOperator,
    kinetic_operator,
    local_potential_operator,
    zeeman_operator,
)
from .manybody import (
    ManyBodyOperator,
    PairPotential,
    assemble_fock_hamiltonian,
    assemble_hamiltonian,
    build_fock_basis,
    build_sector_basis,
    distance_matrix,
    num_displacement_bins,
)
from .observables import density, magnetization, one_rdm
from .solve import GroundSolution, check_nonvanishing, ground_state
from .states import QuantumState
from .thermal import GibbsState, gibbs_canonical, gibbs_grand_canonical


# ---------------------------------------------------------------------------
# duality pairings


def density_pairing(v, rho_values, space: LatticeSpace) -> float:
    return float(np.dot(np.asarray(v), np.asarray(rho_values)) * space.spacing)


def pair_density_pairing(kernel, rho2_values, space: LatticeSpace) -> float:
    return float(np.sum(np.asarray(kernel) * np.asarray(rho2_values)) * space.spacing**2)


def magnetization_pairing(field: MagneticField, m_values, space: LatticeSpace) -> float:
    return float(np.sum(field.values * np.asarray(m_values)) * space.spacing)


def nonlocal_pairing(g_matrix, gamma_matrix, space: LatticeSpace) -> float:
    val = np.trace(np.asarray(g_matrix) @ np.asarray(gamma_matrix)) * space.spacing
    return float(val.real)


# ---------------------------------------------------------------------------
# forward-solved systems


@dataclass
class GroundSystem:
    """A potential family member together with its solved ground data."""

    space: LatticeSpace
    num_particles: int
    v: np.ndarray
    pair: PairPotential | None
    b_field: MagneticField | None
    g: OneBodyOperator | None
    hamiltonian: ManyBodyOperator
    solution: GroundSolution

    @property
    def energy(self):
        return self.solution.energy

    @property
    def basis(self):
        return self.hamiltonian.basis

    def state(self, index=0) -> QuantumState:
        return QuantumState.pure(self.basis, self.solution.vectors[:, index])

    def densities(self):
        """One density array per ground vector."""
        return [density(self.state(i)).values for i in range(self.solution.degeneracy)]

    def representative_density(self):
        return self.densities()[0]


def solve_system(
    space: LatticeSpace,
    num_particles: int,
    v=None,
    pair: PairPotential | None = None,
    b_field: MagneticField | None = None,
    g: OneBodyOperator | None = None,
    degeneracy_tol: float = 1e-8,
    seed: int = 0,
) -> GroundSystem:
    """Assemble H = -Delta + v + B.sigma + G + w on the N-sector and solve."""
    v = np.zeros(space.num_sites) if v is None else np.asarray(v, dtype=float)
    one_body = kinetic_operator(space) + local_potential_operator(space, v)
    if b_field is not None:
        one_body = one_body + zeeman_operator(space, b_field)
    if g is not None:
        one_body = one_body + g
    basis = build_sector_basis(space, num_particles)
    ham = assemble_hamiltonian(basis, one_body, pair)
    sol = ground_state(ham, degeneracy_tol=degeneracy_tol, seed=seed)
    return GroundSystem(
        space=space,
        num_particles=num_particles,
        v=v,
        pair=pair,
        b_field=b_field,
        g=g,
        hamiltonian=ham,
        solution=sol,
    )


def _pairs_equal(p1, p2, space):
    if p1 is None and p2 is None:
        return True
    return (p1 or p2).equals(p2 if p1 is not None else p1, space)


def _check_same_family(sys1: GroundSystem, sys2: GroundSystem, compare_v=False,
                       compare_b=True):
    if sys1.space != sys2.space:
        raise FamilyMismatchError("systems live on different lattices")
    if sys1.num_particles != sys2.num_particles:
        raise FamilyMismatchError("systems have different particle numbers")
    if not _pairs_equal(sys1.pair, sys2.pair, sys1.space):
        raise FamilyMismatchError("systems have different interactions")
    g1 = sys1.g.matrix if sys1.g is not None else 0.0
    g2 = sys2.g.matrix if sys2.g is not None else 0.0
    if np.max(np.abs(g1 - g2)) > 1e-12:
        raise FamilyMismatchError("systems must share the same non-local potential")
    if compare_b:
        b1 = sys1.b_field.values if sys1.b_field is not None else 0.0
        b2 = sys2.b_field.values if sys2.b_field is not None else 0.0
        if np.max(np.abs(b1 - b2)) > 1e-12:
            raise FamilyMismatchError("systems must share the same magnetic field")
    if compare_v and np.max(np.abs(sys1.v - sys2.v)) > 1e-12:
        raise FamilyMismatchError("systems must share the same local potential")


# ---------------------------------------------------------------------------
# ground-state Hohenberg-Kohn machinery


def hk_semimetric(sys1: GroundSystem, sys2: GroundSystem) -> float:
    """d(v1, v2) = -sum (v1-v2)(rho1-rho2) h, worst case over degenerate spans."""
    _check_same_family(sys1, sys2)
    dv = sys1.v - sys2.v
    h = sys1.space.spacing
    p1 = [float(np.dot(dv, rho)) * h for rho in sys1.densities()]
    p2 = [float(np.dot(dv, rho)) * h for rho in sys2.densities()]
    # -(p1_i - p2_j) is minimized by the largest p1 and smallest p2
    return min(p2) - max(p1)


def variational_slacks(sys1: GroundSystem, sys2: GroundSystem):
    """slack1 = sum (v1-v2) rho2 h - (E1-E2) and its mirror; both are >= 0
    for true ground states and their sum equals the semi-metric exactly."""
    _check_same_family(sys1, sys2)
    dv = sys1.v - sys2.v
    h = sys1.space.spacing
    de = sys1.energy - sys2.energy
    slack1 = min(float(np.dot(dv, rho)) * h for rho in sys2.densities()) - de
    slack2 = min(float(np.dot(-dv, rho)) * h for rho in sys1.densities()) + de
    return slack1, slack2


class Conclusion(enum.Enum):
    POTENTIALS_EQUAL_UP_TO_CONSTANT = "potentials_equal_up_to_constant"
    CONSTRAINT_HOLDS = "constraint_holds"
    VIOLATED = "violated"
    FLAGGED_ZERO_STATE = "flagged_zero_state"


@dataclass
class HKReport:
    """Outcome of a uniqueness check on a pair of solved systems."""

    pairing: float
    slacks: tuple
    conclusion: Conclusion
    constant: float | None = None
    max_configuration_residual: float | None = None
    site_residuals: np.ndarray | None = None
    zero_count: int = 0


def configuration_residuals(basis, delta_v, delta_e):
    """Per-configuration values of (E2 - E1) + sum_i (v1 - v2)(x_i)."""
    return delta_e + basis.site_occupations() @ np.asarray(delta_v)


def verify_constancy(
    sys1: GroundSystem,
    sys2: GroundSystem,
    residual_tol: float = 1e-8,
    zero_tol: float = 1e-12,
) -> HKReport:
    """Check whether the shared-ground-state conclusion holds: the
    configuration residual must vanish on the support of the candidate state
    and the recovered constant must equal (E1-E2)/N.

    States with exact zeros cannot support the constancy conclusion on a
    lattice (no unique-continuation theorem), so they are flagged instead.
    """
    _check_same_family(sys1, sys2)
    dv = sys1.v - sys2.v
    de = sys2.energy - sys1.energy
    residuals = configuration_residuals(sys2.basis, dv, de)
    pairing = hk_semimetric(sys1, sys2)
    slacks = variational_slacks(sys1, sys2)
    n = sys1.num_particles
    recovered = float(np.mean(dv))
    expected = (sys1.energy - sys2.energy) / n
    site_res = dv - expected

    worst = None
    all_flagged = True
    zero_count = 0
    for k in range(sys2.solution.degeneracy):
        psi = sys2.solution.vectors[:, k]
        report = check_nonvanishing(psi, zero_tol=zero_tol)
        if report.has_zeros:
            zero_count = max(zero_count, report.zero_count)
            continue
        all_flagged = False
        support_res = float(np.max(np.abs(residuals)))
        worst = support_res if worst is None else max(worst, support_res)

    if all_flagged:
        return HKReport(pairing, slacks, Conclusion.FLAGGED_ZERO_STATE,
                        constant=recovered, site_residuals=site_res,
                        zero_count=zero_count)
    ok = worst <= residual_tol and abs(recovered - expected) <= residual_tol
    conclusion = Conclusion.POTENTIALS_EQUAL_UP_TO_CONSTANT if ok else Conclusion.VIOLATED
    return HKReport(pairing, slacks, conclusion, constant=recovered,
                    max_configuration_residual=worst, site_residuals=site_res,
                    zero_count=zero_count)


# ---------------------------------------------------------------------------
# pair-potential decomposition


@dataclass
class PairDecomposition:
    v: np.ndarray
    w: np.ndarray
    residual: float
    null_space_dim: int
    null_vector: np.ndarray


def decompose_pair_potential(space: LatticeSpace, W, num_particles: int) -> PairDecomposition:
    """Least-squares split of a symmetric two-site kernel into
    W(x,y) = (v(x)+v(y))/(N-1) + w(d(x,y)), gauge-fixed by mean-zero v.

    The fit's null space is the one-parameter family of constant (v, w) with
    v + (N-1) w / 2 = 0; its dimension is reported so callers can assert it.
    """
    W = np.asarray(W, dtype=float)
    L = space.num_sites
    if W.shape != (L, L):
        raise ValidationError(f"kernel must be {L}x{L}, got {W.shape}")
    if np.max(np.abs(W - W.T)) > 1e-12:
        raise ValidationError("kernel must be symmetric")
    if num_particles < 2:
        raise ValidationError("decomposition needs N >= 2")
    nbins = num_displacement_bins(space)
    dist = distance_matrix(space)
    rows = L * L
    A = np.zeros((rows, L + nbins))
    r = 0
    for x in range(L):
        for y in range(L):
            A[r, x] += 1.0 / (num_particles - 1)
            A[r, y] += 1.0 / (num_particles - 1)
            A[r, L + dist[x, y]] = 1.0
            r += 1
    theta, *_ = np.linalg.lstsq(A, W.ravel(), rcond=None)
    _, svals, vt = np.linalg.svd(A)
    tol = max(A.shape) * np.finfo(float).eps * svals[0]
    null_dim = A.shape[1] - int(np.sum(svals > tol))
    null_vector = vt[-1] if null_dim >= 1 else np.zeros(L + nbins)
    # shift along the null family to zero the mean of v
    if null_dim >= 1 and abs(np.mean(null_vector[:L])) > 1e-14:
        theta = theta - (np.mean(theta[:L]) / np.mean(null_vector[:L])) * null_vector
    v, w = theta[:L], theta[L:]
    residual = float(np.max(np.abs(A @ theta - W.ravel())))
    return PairDecomposition(v=v, w=w, residual=residual,
                             null_space_dim=null_dim, null_vector=null_vector)


# ---------------------------------------------------------------------------
# spin constraint


@dataclass
class ChiField:
    """The per-site constraint field chi with its snap onto the admissible
    grid {-1 + 2k/N : 0 <= k <= N}."""

    space: LatticeSpace
    num_particles: int
    raw: np.ndarray
    snapped: np.ndarray
    snap_errors: np.ndarray
    active: np.ndarray  # sites where |B1 - B2| is above threshold
    violated: np.ndarray  # active sites whose raw value is off-grid

    @property
    def max_snap_error(self):
        return float(np.max(self.snap_errors[self.active])) if np.any(self.active) else 0.0

    @property
    def is_constant(self):
        act = self.snapped[self.active]
        return bool(len(act)) and bool(np.all(act == act[0]))


def chi_grid(num_particles: int):
    return -1.0 + 2.0 * np.arange(num_particles + 1) / num_particles


def chi_field_from_data(
    space: LatticeSpace,
    num_particles: int,
    v1,
    v2,
    e1: float,
    e2: float,
    db_magnitudes,
    field_tol: float = 1e-8,
    snap_slack: float = 0.25,
) -> ChiField:
    """chi(x) = ((E1-E2)/N + v2 - v1)(x) / |B1-B2|(x) on active sites,
    snapped to the admissible grid; off-grid by more than snap_slack/N marks
    the site as violated."""
    db = np.asarray(db_magnitudes, dtype=float)
    active = db > field_tol
    raw = np.zeros(space.num_sites)
    numer = (e1 - e2) / num_particles + np.asarray(v2) - np.asarray(v1)
    raw[active] = numer[active] / db[active]
    grid = chi_grid(num_particles)
    idx = np.argmin(np.abs(raw[:, None] - grid[None, :]), axis=1)
    snapped = grid[idx]
    snap_errors = np.abs(raw - snapped)
    violated = active & (snap_errors > snap_slack / num_particles)
    return ChiField(
        space=space,
        num_particles=num_particles,
        raw=raw,
        snapped=snapped,
        snap_errors=snap_errors,
        active=active,
        violated=violated,
    )


def spin_constraint_chi(
    sys1: GroundSystem,
    sys2: GroundSystem,
    hypothesis_tol: float = 1e-8,
    field_tol: float = 1e-8,
) -> ChiField:
    """Spin-system constraint check.  Verifies the combined pairing
    hypothesis first; when it fails the constraint claims nothing and the
    call refuses explicitly."""
    _check_same_family(sys1, sys2, compare_b=False)  # differing B is the point
    space = sys1.space
    h = space.spacing
    rho1 = density(sys1.state()).values
    rho2 = density(sys2.state()).values
    m1 = magnetization(sys1.state()).values
    m2 = magnetization(sys2.state()).values
    b1 = sys1.b_field.values if sys1.b_field is not None else np.zeros((space.num_sites, 3))
    b2 = sys2.b_field.values if sys2.b_field is not None else np.zeros((space.num_sites, 3))
    pairing = float(np.dot(sys1.v - sys2.v, rho1 - rho2) * h + np.sum((b1 - b2) * (m1 - m2)) * h)
    if abs(pairing) > hypothesis_tol:
        raise HypothesisNotSatisfiedError(
            f"combined pairing is {pairing:.3e}, above {hypothesis_tol:.1e}; "
            "the constraint claims nothing for this pair"
        )
    db = np.linalg.norm(b1 - b2, axis=1)
    return chi_field_from_data(
        space, sys1.num_particles, sys1.v, sys2.v, sys1.energy, sys2.energy, db,
        field_tol=field_tol,
    )


# ---------------------------------------------------------------------------
# thermal machinery


@dataclass
class ThermalSystem:
    """A (v, T) -- or (G, T) -- family member with its solved Gibbs data."""

    ensemble: str
    space: LatticeSpace
    temperature: float
    v: np.ndarray
    pair: PairPotential | None
    g: OneBodyOperator | None
    num_particles: int | None
    max_particles: int | None
    hamiltonian: ManyBodyOperator
    gibbs: GibbsState

    @property
    def entropy(self):
        return self.gibbs.entropy

    @property
    def density_values(self):
        return density(self.gibbs.state).values

    @property
    def rdm_matrix(self):
        return one_rdm(self.gibbs.state).matrix


def solve_thermal_system(
    space: LatticeSpace,
    temperature: float,
    v=None,
    pair: PairPotential | None = None,
    g: OneBodyOperator | None = None,
    num_particles: int | None = None,
    max_particles: int | None = None,
) -> ThermalSystem:
    """Build H = -Delta + v (+ G) + w and its Gibbs state in the requested
    ensemble (canonical for num_particles, grand canonical for max_particles)."""
    if (num_particles is None) == (max_particles is None):
        raise ValidationError("give exactly one of num_particles or max_particles")
    v = np.zeros(space.num_sites) if v is None else np.asarray(v, dtype=float)
    one_body = kinetic_operator(space) + local_potential_operator(space, v)
    if g is not None:
        one_body = one_body + g
    if num_particles is not None:
        basis = build_sector_basis(space, num_particles)
        ham = assemble_hamiltonian(basis, one_body, pair)
        gibbs = gibbs_canonical(ham, temperature)
        ensemble = "canonical"
    else:
        fock = build_fock_basis(space, max_particles)
        ham = assemble_fock_hamiltonian(fock, one_body, pair)
        gibbs = gibbs_grand_canonical(ham, temperature)
        ensemble = "grand_canonical"
    return ThermalSystem(
        ensemble=ensemble,
        space=space,
        temperature=temperature,
        v=v,
        pair=pair,
        g=g,
        num_particles=num_particles,
        max_particles=max_particles,
        hamiltonian=ham,
        gibbs=gibbs,
    )


def _check_same_thermal_family(t1: ThermalSystem, t2: ThermalSystem, compare_v=False,
                               compare_g=True):
    from .exceptions import EnsembleMismatchError

    if t1.ensemble != t2.ensemble:
        raise EnsembleMismatchError(f"ensembles differ: {t1.ensemble} vs {t2.ensemble}")
    if t1.space != t2.space:
        raise FamilyMismatchError("systems live on different lattices")
    if (t1.num_particles, t1.max_particles) != (t2.num_particles, t2.max_particles):
        raise FamilyMismatchError("particle sectors differ")
    if not _pairs_equal(t1.pair, t2.pair, t1.space):
        raise FamilyMismatchError("systems have different interactions")
    if compare_v and np.max(np.abs(t1.v - t2.v)) > 1e-12:
        raise FamilyMismatchError("systems must share the same local potential")
    if compare_g:
        g1 = t1.g.matrix if t1.g is not None else 0.0
        g2 = t2.g.matrix if t2.g is not None else 0.0
        if np.max(np.abs(g1 - g2)) > 1e-12:
            raise FamilyMismatchError("systems must share the same non-local potential")


def thermal_semimetric(t1: ThermalSystem, t2: ThermalSystem) -> float:
    """d_T = (T1-T2)(S1-S2) - sum (v1-v2)(rho1-rho2) h >= 0, and = 0 exactly
    when the two Gibbs states coincide."""
    _check_same_thermal_family(t1, t2, compare_g=True)
    h = t1.space.spacing
    ds = t1.entropy - t2.entropy
    dv = t1.v - t2.v
    drho = t1.density_values - t2.density_values
    return float((t1.temperature - t2.temperature) * ds - np.dot(dv, drho) * h)


def nonlocal_thermal_pairing(t1: ThermalSystem, t2: ThermalSystem) -> float:
    """(T1-T2)(S1-S2) - h tr((G1-G2)(gamma1-gamma2)) >= 0 for Gibbs pairs
    sharing v and w but differing in (G, T)."""
    _check_same_thermal_family(t1, t2, compare_v=True, compare_g=False)
    g1 = t1.g.matrix if t1.g is not None else np.zeros((t1.space.dim, t1.space.dim))
    g2 = t2.g.matrix if t2.g is not None else np.zeros((t2.space.dim, t2.space.dim))
    dgamma = t1.rdm_matrix - t2.rdm_matrix
    ds = t1.entropy - t2.entropy
    tr_term = nonlocal_pairing(g1 - g2, dgamma, t1.space)
    return float((t1.temperature - t2.temperature) * ds - tr_term)


def canonical_potential_shift(t1: ThermalSystem, t2: ThermalSystem) -> float:
    """The per-site constant separating two canonical potentials that share a
    Gibbs state: N (v1 - v2) = T1 ln(Z2/Z1), returned as (T1/N) ln(Z2/Z1)."""
    if t1.ensemble != "canonical" or t2.ensemble != "canonical":
        raise ValidationError("constant-shift identity is canonical-only")
    return t1.temperature * (t2.gibbs.log_z - t1.gibbs.log_z) / t1.num_particles


# ---------------------------------------------------------------------------
# exploratory searches; these probe open structural questions and report the
# best candidates found, guaranteeing nothing


@dataclass
class SearchReport:
    """Best candidate found by a numeric probe; `found` flags candidates
    meeting the stated thresholds, never a proof of existence."""

    found: bool
    best_objective: float
    best_witness: dict


def search_assumption_gap(
    space: LatticeSpace,
    num_particles: int,
    pair: PairPotential | None = None,
    trials: int = 50,
    pairing_tol: float = 1e-8,
    density_gap: float = 1e-3,
    seed: int = 0,
) -> SearchReport:
    """Probe for potential pairs whose duality pairing vanishes while their
    ground densities differ.

    The uniqueness mechanism only needs the single scalar constraint
    sum (v1-v2)(rho1-rho2) h = 0, which is weaker than density equality;
    whether lattice instances realize the weaker constraint with unequal
    densities is open.  Samples random mean-zero pairs and locally shrinks
    |pairing| along the line between them, reporting the smallest |pairing|
    seen among pairs whose densities differ by more than `density_gap`.
    """
    rng = np.random.default_rng(seed)
    L = space.num_sites
    best = float("inf")
    witness = {}
    for _ in range(trials):
        v1 = rng.normal(size=L)
        v1 -= v1.mean()
        v2 = rng.normal(size=L)
        v2 -= v2.mean()
        s1 = solve_system(space, num_particles, v=v1, pair=pair)
        # walk v2 toward v1: the pairing vanishes at the diagonal, so look
        # for the smallest |pairing| that keeps the densities apart
        for t in (1.0, 0.5, 0.25, 0.1, 0.03, 0.01):
            vt = v1 + t * (v2 - v1)
            s2 = solve_system(space, num_particles, v=vt, pair=pair)
            value = hk_semimetric(s1, s2)
            drho = float(
                np.max(np.abs(s1.representative_density() - s2.representative_density()))
            )
            if drho > density_gap and abs(value) < best:
                best = abs(value)
                witness = {"v1": v1, "v2": vt, "pairing": value, "density_gap": drho}
    return SearchReport(
        found=bool(witness) and best <= pairing_tol,
        best_objective=best if np.isfinite(best) else float("nan"),
        best_witness=witness,
    )


def search_density_collision(
    space: LatticeSpace,
    temperature: float,
    v=None,
    max_particles: int = 2,
    t_grid=None,
    density_tol: float = 1e-8,
    seed: int = 0,
) -> SearchReport:
    """Probe the conjecture that the Gibbs density alone does not determine
    (v, T): at each alternative temperature, invert the density of the
    reference system and report how closely it can be matched.

    A candidate is a (v', T') with T' far from T whose Gibbs density
    reproduces the target below `density_tol`; finding none settles nothing.
    """
    from .inverse import ProblemFamily, invert_density
    from .observables import density

    rng = np.random.default_rng(seed)
    v = rng.normal(size=space.num_sites) if v is None else np.asarray(v, dtype=float)
    reference = solve_thermal_system(space, temperature, v=v, max_particles=max_particles)
    target = density(reference.gibbs.state)
    if t_grid is None:
        t_grid = temperature * np.array([0.5, 0.75, 1.5, 2.0])
    best = float("inf")
    witness = {}
    for t_alt in np.asarray(t_grid, dtype=float):
        if abs(t_alt - temperature) < 1e-9:
            continue
        family = ProblemFamily(space=space, max_particles=max_particles, temperature=float(t_alt))
        result = invert_density(target, family, tol=density_tol, max_iter=80)
        if result.residual < best:
            best = result.residual
            witness = {
                "temperature": float(t_alt),
                "v": result.v,
                "density_residual": result.residual,
                "reference_temperature": temperature,
            }
    return SearchReport(
        found=bool(witness) and best <= density_tol,
        best_objective=best,
        best_witness=witness,
    )


# ---------------------------------------------------------------------------
# uniqueness defect of combined one-body relations


@dataclass
class UniquenessReport:
    sector_defect: float
    onebody_defect: float
    alpha: float
    g_norm: float
    conclusion_holds: bool
    explanation: str


def uniqueness_defect_onebody(
    g: OneBodyOperator, alpha: float, basis, defect_tol: float = 1e-8
) -> UniquenessReport:
    """Test the candidate relation sum_i (alpha K + G)_i = 0 on a sector.

    When the sector defect vanishes, the one-body combination itself must
    vanish (diagonal/off-diagonal matrix-element argument, valid for
    1 <= N <= D-1), i.e. G = -alpha K.  The conclusion "alpha = 0 and G = 0"
    then additionally requires alpha = 0: a Laplacian multiple is not an
    admissible non-local potential (it violates the form bound
    |G| <= eps(-Delta) + c_eps for small eps), so alpha != 0 is rejected.
    """
    space = g.space
    kin = kinetic_operator(space)
    combined = alpha * kin + g
    assembled = assemble_hamiltonian(basis, combined)
    sector_defect = float(np.linalg.norm(assembled.dense(), 2))
    onebody_defect = combined.norm()
    g_norm = g.norm()
    holds = False
    if sector_defect <= defect_tol:
        if not 1 <= basis.num_particles <= space.dim - 1:
            explanation = (
                "sector defect vanishes but the filled/empty sector cannot "
                "separate one-body terms; no conclusion"
            )
        elif abs(alpha) <= 1e-12 and g_norm <= defect_tol:
            holds = True
            explanation = "alpha = 0 and G = 0: the relation is trivial, conclusion holds"
        elif onebody_defect <= defect_tol:
            explanation = (
                f"G = -alpha K with alpha = {alpha}: the one-body relation holds on the "
                "lattice, but a Laplacian multiple violates the admissibility bound "
                "|G| <= eps(-Delta) + c_eps, so the conclusion (alpha = 0, G = 0) is rejected"
            )
        else:
            explanation = "sector defect vanishes but one-body defect does not; inconsistent data"
    else:
        explanation = f"nonzero sector defect {sector_defect:.3e}; relation does not hold"
    return UniquenessReport(
        sector_defect=sector_defect,
        onebody_defect=onebody_defect,
        alpha=alpha,
        g_norm=g_norm,
        conclusion_holds=holds,
        explanation=explanation,
    )
