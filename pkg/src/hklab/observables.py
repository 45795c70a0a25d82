"""Reduced quantities of many-body states: density, pair density,
magnetization, one-body reduced density matrix, entropy, species pair
functions.

Lattice sums carry the spacing weight h so reported densities approximate
continuum ones: sum_x rho(x) h = N, the pair density obeys
(2/(N-1)) sum_y rho2(x, y) h = rho(x), and the 1RDM uses the kernel
normalization gamma[i, j] = <a+_j a_i> / h (trace * h = N; its eigenvalues
times h are fermionic occupations in [0, 1]).

Mixed states are combined convexly over their spectral components, so every
extraction here accepts pure and mixed states alike.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .hilbert import LatticeSpace
from .manybody import FockBasis, SectorBasis, TwoSpeciesBasis, TwoSpeciesSpec
from .states import QuantumState


@dataclass
class DensityProfile:
    """Per-site nonnegative density rho(x); mass = sum rho h."""

    space: LatticeSpace
    values: np.ndarray

    @property
    def mass(self):
        return float(self.values.sum() * self.space.spacing)


@dataclass
class PairDensity:
    """Symmetric nonnegative rho2(x, y) with prefactor N(N-1)/2."""

    space: LatticeSpace
    values: np.ndarray
    num_particles: int

    def marginal_density(self) -> DensityProfile:
        """rho(x) = (2/(N-1)) sum_y rho2(x, y) h."""
        if self.num_particles < 2:
            raise ValidationError("marginal needs N >= 2")
        vals = 2.0 / (self.num_particles - 1) * self.values.sum(axis=1) * self.space.spacing
        return DensityProfile(self.space, vals)


@dataclass
class Magnetization:
    """Per-site 3-vector m(x) = (2 Re xi, 2 Im xi, rho_up - rho_down)."""

    space: LatticeSpace
    values: np.ndarray  # (L, 3)


@dataclass
class OneRDM:
    """D x D Hermitian kernel gamma(x s, y s')."""

    space: LatticeSpace
    matrix: np.ndarray

    def occupation_spectrum(self):
        """Eigenvalues scaled by h: fermionic occupations in [0, 1]."""
        return np.linalg.eigvalsh(self.matrix) * self.space.spacing

    def site_trace(self) -> DensityProfile:
        q = self.space.spin_dim
        diag = self.matrix.diagonal().real
        return DensityProfile(self.space, diag.reshape(-1, q).sum(axis=1))


@dataclass
class SpeciesPairData:
    """The three pair functions of a two-species mixture."""

    space: LatticeSpace
    rho2_a: np.ndarray
    rho2_b: np.ndarray
    rho2_ab: np.ndarray


def _site_probability_matrix(state: QuantumState):
    basis = state.basis
    prob = state.probabilities()
    return basis.site_occupations(), prob


def density(state: QuantumState) -> DensityProfile:
    """Spin-summed one-body density; couples to v via sum_x v rho h."""
    basis = state.basis
    if isinstance(basis, TwoSpeciesBasis):
        rho_a, rho_b = species_densities(state)
        return DensityProfile(basis.space, rho_a.values + rho_b.values)
    n, prob = _site_probability_matrix(state)
    return DensityProfile(basis.space, (prob @ n) / basis.space.spacing)


def pair_density(state: QuantumState) -> PairDensity:
    """Two-body density; couples to W via sum_xy W rho2 h^2."""
    basis = state.basis
    if not isinstance(basis, SectorBasis):
        raise ValidationError("pair density is defined on fixed-N sectors")
    N = basis.num_particles
    if N < 2:
        raise ValidationError("pair density needs N >= 2")
    n, prob = _site_probability_matrix(state)
    h = basis.space.spacing
    quad = np.einsum("i,ix,iy->xy", prob, n, n)
    quad[np.diag_indices_from(quad)] -= prob @ n
    return PairDensity(basis.space, quad / (2.0 * h * h), num_particles=N)


def _rdm_element(state: QuantumState, p, q):
    """<a+_p a_q> summed over spectral components (p != q)."""
    rows, cols, signs = state.basis.hopping(p, q)
    if len(rows) == 0:
        return 0.0 + 0.0j
    V = state.vectors
    pair = np.conj(V[rows, :]) * V[cols, :]
    return complex(signs @ (pair @ state.weights))


def one_rdm(state: QuantumState) -> OneRDM:
    """gamma[i, j] = <a+_j a_i> / h; couples to a one-body G via
    h * tr(G gamma) = <sum_i G_i>."""
    basis = state.basis
    if isinstance(basis, TwoSpeciesBasis):
        raise ValidationError("1RDM is defined for single-species bases")
    D = basis.space.dim
    h = basis.space.spacing
    gamma = np.zeros((D, D), dtype=complex)
    occ = basis.occupations()
    gamma[np.diag_indices(D)] = (state.probabilities() @ occ) / h
    for i in range(D):
        for j in range(i + 1, D):
            val = _rdm_element(state, j, i) / h  # <a+_j a_i> = gamma[i, j]
            gamma[i, j] = val
            gamma[j, i] = np.conj(val)
    return OneRDM(basis.space, gamma)


def magnetization(state: QuantumState) -> Magnetization:
    """Spin-vector density; couples to B via sum_x B . m h."""
    basis = state.basis
    space = basis.space
    if space.spin_dim != 2:
        raise ValidationError("magnetization requires spin_dim == 2")
    h = space.spacing
    occ = basis.occupations()
    prob = state.probabilities()
    rho_up = (prob @ occ[:, 0::2]) / h
    rho_dn = (prob @ occ[:, 1::2]) / h
    m = np.zeros((space.num_sites, 3))
    for x in range(space.num_sites):
        up, dn = space.mode(x, 0), space.mode(x, 1)
        xi = _rdm_element(state, up, dn) / h  # <a+_up a_dn>
        m[x, 0] = 2.0 * xi.real
        m[x, 1] = 2.0 * xi.imag
        m[x, 2] = rho_up[x] - rho_dn[x]
    return Magnetization(space, m)


def entropy(state: QuantumState) -> float:
    """Von Neumann entropy -sum p ln p of the spectral weights."""
    w = state.weights
    if np.any(w < -1e-12):
        raise ValidationError("state weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-10:
        raise ValidationError("state weights must sum to 1")
    live = w > 0
    return float(-np.sum(w[live] * np.log(w[live])))


def species_densities(state: QuantumState):
    """Per-species site densities of a two-species state."""
    basis = state.basis
    if not isinstance(basis, TwoSpeciesBasis):
        raise ValidationError("species densities need a two-species state")
    h = basis.space.spacing
    P = state.probabilities().reshape(basis.basis_a.dim, basis.basis_b.dim)
    n_a = basis.basis_a.site_occupations()
    n_b = basis.basis_b.site_occupations()
    rho_a = (P.sum(axis=1) @ n_a) / h
    rho_b = (P.sum(axis=0) @ n_b) / h
    return DensityProfile(basis.space, rho_a), DensityProfile(basis.space, rho_b)


def species_pair_functions(state: QuantumState, spec: TwoSpeciesSpec) -> SpeciesPairData:
    """The pair function of each species plus the inter-species one.

    Masses: sum rho2_a h^2 = C(N,2), sum rho2_b h^2 = C(M,2),
    sum rho2_ab h^2 = N*M.
    """
    basis = state.basis
    if not isinstance(basis, TwoSpeciesBasis):
        raise ValidationError("pair functions need a two-species state")
    if basis.num_a != spec.num_a or basis.num_b != spec.num_b:
        raise ValidationError("state and spec disagree on particle numbers")
    h = basis.space.spacing
    P = state.probabilities().reshape(basis.basis_a.dim, basis.basis_b.dim)
    n_a = basis.basis_a.site_occupations()
    n_b = basis.basis_b.site_occupations()

    def intra(nmat, marginal):
        quad = np.einsum("i,ix,iy->xy", marginal, nmat, nmat)
        quad[np.diag_indices_from(quad)] -= marginal @ nmat
        return quad / (2.0 * h * h)

    rho2_a = intra(n_a, P.sum(axis=1))
    rho2_b = intra(n_b, P.sum(axis=0))
    rho2_ab = (n_a.T @ P @ n_b) / (h * h)
    return SpeciesPairData(basis.space, rho2_a, rho2_b, rho2_ab)


@dataclass
class ReducedData:
    """Bundle of every reduced quantity the duality checks consume."""

    density: DensityProfile
    pair: PairDensity | None
    magnetization: Magnetization | None
    rdm: OneRDM | None
    entropy: float
    energy: float | None


def reduced_data(state: QuantumState, energy: float | None = None) -> ReducedData:
    """Extract everything that applies to the state's basis at once."""
    basis = state.basis
    rho = density(state)
    pair = None
    if isinstance(basis, SectorBasis) and basis.num_particles >= 2:
        pair = pair_density(state)
    mag = None
    rdm = None
    if not isinstance(basis, TwoSpeciesBasis):
        rdm = one_rdm(state)
        if basis.space.spin_dim == 2:
            mag = magnetization(state)
    return ReducedData(
        density=rho,
        pair=pair,
        magnetization=mag,
        rdm=rdm,
        entropy=entropy(state),
        energy=energy,
    )


def average_particle_number(state: QuantumState) -> float:
    """<N> from the per-configuration particle numbers (Fock states)."""
    basis = state.basis
    if isinstance(basis, FockBasis):
        return float(state.probabilities() @ basis.particle_numbers())
    if isinstance(basis, SectorBasis):
        return float(basis.num_particles)
    if isinstance(basis, TwoSpeciesBasis):
        return float(basis.num_a + basis.num_b)
    raise ValidationError("unsupported basis")
