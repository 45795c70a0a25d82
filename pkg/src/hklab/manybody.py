"""Antisymmetric sector bases and second-quantized Hamiltonian assembly.

A sector basis is the list of occupation bitmasks over the D = L*q one-body
modes with exactly N bits set, sorted increasingly.  One-body terms are
assembled as sum_pq t_pq a+_p a_q with the sign convention documented in
`hklab._kernels`; pair interactions act on positions only (spin-blind), so
they are diagonal in the occupation basis:

    sum_{i<j} W(x_i, x_j)  =  sum_{x<y} W(x,y) n_x n_y
                              + sum_x W(x,x) n_x (n_x - 1) / 2,

with n_x the total (spin-summed) occupation of site x.  On-site terms thus
act only between different spin components of the same site; same-spin
on-site terms are killed by Pauli exclusion automatically.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .exceptions import DimensionTooLargeError, ValidationError
from .hilbert import LatticeSpace, OneBodyOperator, kinetic_operator, local_potential_operator

DENSE_CUTOFF = 4000


class SectorBasis:
    """Canonical ordered occupation basis of the N-particle sector."""

    def __init__(self, space: LatticeSpace, num_particles: int, _allow_empty=False):
        if not _allow_empty and not 1 <= num_particles <= space.dim:
            raise ValidationError(
                f"num_particles must satisfy 1 <= N <= {space.dim}, got {num_particles}"
            )
        if not 0 <= num_particles <= space.dim:
            raise ValidationError(f"num_particles out of range: {num_particles}")
        if space.dim > 64:
            raise ValidationError(
                f"one-body dimension {space.dim} exceeds the 64-mode bitmask limit"
            )
        self.space = space
        self.num_particles = num_particles
        masks = np.fromiter(
            (sum(1 << i for i in combo) for combo in combinations(range(space.dim), num_particles)),
            dtype=np.uint64,
            count=math.comb(space.dim, num_particles),
        )
        masks.sort()
        masks.setflags(write=False)
        self.masks = masks
        self.dim = len(masks)
        self._hops = {}
        self._occ = None
        self._site_occ = None

    def occupations(self):
        """(dim, D) matrix of per-mode occupations."""
        if self._occ is None:
            self._occ = _kernels.occupations(self.masks, self.space.dim)
            self._occ.setflags(write=False)
        return self._occ

    def site_occupations(self):
        """(dim, L) matrix of spin-summed per-site occupations."""
        if self._site_occ is None:
            q = self.space.spin_dim
            occ = self.occupations()
            self._site_occ = occ.reshape(self.dim, self.space.num_sites, q).sum(axis=2)
            self._site_occ.setflags(write=False)
        return self._site_occ

    def hopping(self, p, q):
        """Cached COO entries (rows, cols, signs) of a+_p a_q, p != q."""
        key = (p, q)
        if key not in self._hops:
            self._hops[key] = _kernels.hopping_entries(self.masks, p, q)
        return self._hops[key]

    def index(self, mask):
        i = int(np.searchsorted(self.masks, np.uint64(mask)))
        if i >= self.dim or self.masks[i] != np.uint64(mask):
            raise KeyError(f"mask {mask:#x} not in sector")
        return i

    def __repr__(self):
        return (
            f"SectorBasis(L={self.space.num_sites}, q={self.space.spin_dim}, "
            f"N={self.num_particles}, dim={self.dim})"
        )


@lru_cache(maxsize=None)
def build_sector_basis(space: LatticeSpace, num_particles: int) -> SectorBasis:
    """Canonical basis of the N-particle sector; cached per (space, N)."""
    return SectorBasis(space, num_particles)


class FockBasis:
    """Direct sum of sectors n = 0..N_max; n = 0 is the one-dimensional vacuum."""

    def __init__(self, space: LatticeSpace, max_particles: int):
        if not 0 <= max_particles <= space.dim:
            raise ValidationError(f"max_particles out of range: {max_particles}")
        self.space = space
        self.max_particles = max_particles
        self.sectors = tuple(
            SectorBasis(space, n, _allow_empty=True) if n == 0 else build_sector_basis(space, n)
            for n in range(max_particles + 1)
        )
        dims = [s.dim for s in self.sectors]
        self.offsets = np.concatenate([[0], np.cumsum(dims)])
        self.dim = int(self.offsets[-1])
        self.masks = np.concatenate([s.masks for s in self.sectors])
        self._occ = None
        self._site_occ = None

    def sector_slice(self, n):
        return slice(int(self.offsets[n]), int(self.offsets[n + 1]))

    def occupations(self):
        if self._occ is None:
            self._occ = np.vstack([s.occupations() for s in self.sectors])
            self._occ.setflags(write=False)
        return self._occ

    def site_occupations(self):
        if self._site_occ is None:
            self._site_occ = np.vstack([s.site_occupations() for s in self.sectors])
            self._site_occ.setflags(write=False)
        return self._site_occ

    def particle_numbers(self):
        """Per-basis-state particle number (diagonal of the number operator)."""
        return np.concatenate(
            [np.full(s.dim, float(s.num_particles)) for s in self.sectors]
        )

    def hopping(self, p, q):
        rows, cols, signs = [], [], []
        for n, s in enumerate(self.sectors):
            if s.num_particles == 0:
                continue
            r, c, sg = s.hopping(p, q)
            off = int(self.offsets[n])
            rows.append(r + off)
            cols.append(c + off)
            signs.append(sg)
        if not rows:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty.copy(), np.empty(0)
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(signs)

    def __repr__(self):
        return (
            f"FockBasis(L={self.space.num_sites}, q={self.space.spin_dim}, "
            f"N_max={self.max_particles}, dim={self.dim})"
        )


@lru_cache(maxsize=None)
def build_fock_basis(space: LatticeSpace, max_particles: int) -> FockBasis:
    return FockBasis(space, max_particles)


def num_displacement_bins(space: LatticeSpace) -> int:
    """Distinct lattice distances under the declared boundary condition."""
    L = space.num_sites
    return L // 2 + 1 if space.boundary == "periodic" else L


def distance_matrix(space: LatticeSpace):
    """(L, L) integer matrix of lattice distances (ring distance if periodic)."""
    L = space.num_sites
    x = np.arange(L)
    d = np.abs(x[:, None] - x[None, :])
    if space.boundary == "periodic":
        d = np.minimum(d, L - d)
    return d


class PairPotential:
    """Even two-body potential, either distance-binned w(r) or a full
    symmetric two-site kernel W(x, y)."""

    def __init__(self, displacement=None, kernel_matrix=None):
        if (displacement is None) == (kernel_matrix is None):
            raise ValidationError("provide exactly one of displacement or kernel_matrix")
        if displacement is not None:
            self.displacement = np.asarray(displacement, dtype=float)
            if self.displacement.ndim != 1:
                raise ValidationError("displacement values must be a 1-D array")
            self.kernel_matrix = None
        else:
            W = np.asarray(kernel_matrix, dtype=float)
            if W.ndim != 2 or W.shape[0] != W.shape[1]:
                raise ValidationError("kernel must be a square matrix")
            if np.max(np.abs(W - W.T)) > 1e-12:
                raise ValidationError("pair kernel must be symmetric")
            self.displacement = None
            self.kernel_matrix = W

    @classmethod
    def from_displacement(cls, values):
        return cls(displacement=values)

    @classmethod
    def from_kernel(cls, matrix):
        return cls(kernel_matrix=matrix)

    def kernel(self, space: LatticeSpace):
        """Expand to the full symmetric W(x, y) on the given lattice."""
        if self.kernel_matrix is not None:
            if self.kernel_matrix.shape[0] != space.num_sites:
                raise ValidationError("kernel size does not match lattice")
            return self.kernel_matrix
        nbins = num_displacement_bins(space)
        if len(self.displacement) != nbins:
            raise ValidationError(
                f"displacement form needs {nbins} bins for this lattice, "
                f"got {len(self.displacement)}"
            )
        return self.displacement[distance_matrix(space)]

    def equals(self, other, space, tol=1e-12):
        if other is None:
            return float(np.max(np.abs(self.kernel(space)))) <= tol
        return float(np.max(np.abs(self.kernel(space) - other.kernel(space)))) <= tol


@dataclass
class TwoSpeciesSpec:
    """Mixture of N type-a and M type-b fermions; the type-b kinetic term is
    scaled by the mass factor alpha != 0."""

    num_a: int
    num_b: int
    alpha: float
    v_a: np.ndarray
    v_b: np.ndarray
    w_a: PairPotential | None = None
    w_b: PairPotential | None = None
    w_ab: PairPotential | None = None

    def __post_init__(self):
        if self.num_a < 1 or self.num_b < 1:
            raise ValidationError("both species need at least one particle")
        if self.alpha == 0:
            raise ValidationError("mass factor alpha must be nonzero")
        self.v_a = np.asarray(self.v_a, dtype=float)
        self.v_b = np.asarray(self.v_b, dtype=float)


class TwoSpeciesBasis:
    """Tensor product of the two species' antisymmetric sectors (a-major)."""

    def __init__(self, space: LatticeSpace, num_a: int, num_b: int):
        self.space = space
        self.basis_a = build_sector_basis(space, num_a)
        self.basis_b = build_sector_basis(space, num_b)
        self.num_a = num_a
        self.num_b = num_b
        self.dim = self.basis_a.dim * self.basis_b.dim

    def __repr__(self):
        return f"TwoSpeciesBasis(N={self.num_a}, M={self.num_b}, dim={self.dim})"


class ManyBodyOperator:
    """Sparse Hermitian operator on a sector / Fock / two-species basis."""

    def __init__(self, basis, matrix, info=None):
        matrix = matrix.tocsr()
        if matrix.shape != (basis.dim, basis.dim):
            raise ValidationError(
                f"matrix shape {matrix.shape} does not match basis dim {basis.dim}"
            )
        defect = abs(matrix - matrix.conjugate().T)
        if defect.nnz and defect.max() > 1e-12:
            raise ValidationError(f"assembled matrix not Hermitian (defect {defect.max():.3e})")
        self.basis = basis
        self.matrix = matrix
        self.info = dict(info or {})

    @property
    def dim(self):
        return self.basis.dim

    def matvec(self, vec):
        return self.matrix @ vec

    def dense(self):
        if self.dim > DENSE_CUTOFF:
            raise DimensionTooLargeError(
                f"dense form only supported up to {DENSE_CUTOFF}, dim is {self.dim}"
            )
        return self.matrix.toarray()

    def expectation(self, vec):
        return complex(np.vdot(vec, self.matrix @ vec))

    def __add__(self, other):
        if isinstance(other, ManyBodyOperator):
            if other.basis is not self.basis and other.dim != self.dim:
                raise ValidationError("dimension mismatch")
            return ManyBodyOperator(self.basis, self.matrix + other.matrix)
        return NotImplemented

    def __repr__(self):
        return f"ManyBodyOperator(dim={self.dim}, nnz={self.matrix.nnz})"


def _pair_diagonal(basis, pair: PairPotential):
    kern = pair.kernel(basis.space)
    n = basis.site_occupations()
    # 0.5*(n W n^T - n.diag(W)) realizes sum_{i<j} W(x_i, x_j) per basis state
    quad = 0.5 * np.einsum("il,lm,im->i", n, kern, n)
    self_term = 0.5 * (n @ np.diag(kern))
    return quad - self_term


def assemble_hamiltonian(
    basis, one_body: OneBodyOperator | None = None, pair: PairPotential | None = None
) -> ManyBodyOperator:
    """Second-quantized H = sum_pq t_pq a+_p a_q + spin-blind pair term."""
    if one_body is not None and one_body.space != basis.space:
        raise ValidationError("one-body operator and basis live on different spaces")
    dim = basis.dim
    diag = np.zeros(dim)
    complex_valued = one_body is not None and np.iscomplexobj(one_body.matrix) and np.max(
        np.abs(one_body.matrix.imag)
    ) > 0
    rows_all, cols_all, vals_all = [], [], []
    if one_body is not None:
        t = one_body.matrix
        diag += basis.occupations() @ t.diagonal().real
        D = basis.space.dim
        for p in range(D):
            for q in range(D):
                if p == q or t[p, q] == 0:
                    continue
                rows, cols, signs = basis.hopping(p, q)
                if len(rows) == 0:
                    continue
                rows_all.append(rows)
                cols_all.append(cols)
                vals_all.append(t[p, q] * signs)
    if pair is not None:
        diag += _pair_diagonal(basis, pair)
    dtype = complex if complex_valued else float
    if rows_all:
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        vals = np.concatenate(vals_all)
        vals = vals.astype(complex) if complex_valued else vals.real.astype(float)
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
        mat = mat + sp.diags(diag.astype(dtype))
    else:
        mat = sp.diags(diag.astype(dtype)).tocsr()
    info = {
        "one_body_kind": None if one_body is None else one_body.kind,
        "interacting": pair is not None,
    }
    return ManyBodyOperator(basis, mat, info=info)


def assemble_fock_hamiltonian(
    fock: FockBasis, one_body: OneBodyOperator | None = None, pair: PairPotential | None = None
) -> ManyBodyOperator:
    """Block-diagonal assembly over all sectors; the vacuum block is the 1x1 zero."""
    blocks = []
    for sector in fock.sectors:
        if sector.num_particles == 0:
            blocks.append(sp.csr_matrix((1, 1)))
        else:
            blocks.append(assemble_hamiltonian(sector, one_body, pair).matrix)
    mat = sp.block_diag(blocks, format="csr")
    info = {"one_body_kind": None if one_body is None else one_body.kind,
            "interacting": pair is not None, "fock": True}
    return ManyBodyOperator(fock, mat, info=info)


def assemble_two_species(spec: TwoSpeciesSpec, space: LatticeSpace) -> ManyBodyOperator:
    """Hamiltonian of the two-species mixture on the product of sectors.

    Each species fills its own antisymmetric space, so N <= D and M <= D
    independently (enforced by the sector construction)."""
    if len(spec.v_a) != space.num_sites or len(spec.v_b) != space.num_sites:
        raise ValidationError("species potentials must have one entry per site")
    basis = TwoSpeciesBasis(space, spec.num_a, spec.num_b)
    kin = kinetic_operator(space)
    h_a = kin + local_potential_operator(space, spec.v_a)
    h_b = spec.alpha * kin + local_potential_operator(space, spec.v_b)
    op_a = assemble_hamiltonian(basis.basis_a, h_a, spec.w_a)
    op_b = assemble_hamiltonian(basis.basis_b, h_b, spec.w_b)
    eye_a = sp.identity(basis.basis_a.dim, format="csr")
    eye_b = sp.identity(basis.basis_b.dim, format="csr")
    mat = sp.kron(op_a.matrix, eye_b, format="csr") + sp.kron(eye_a, op_b.matrix, format="csr")
    if spec.w_ab is not None:
        kern = spec.w_ab.kernel(space)
        n_a = basis.basis_a.site_occupations()
        n_b = basis.basis_b.site_occupations()
        cross = (n_a @ kern @ n_b.T).ravel()
        mat = mat + sp.diags(cross)
    info = {"two_species": True, "alpha": spec.alpha, "N": spec.num_a, "M": spec.num_b}
    return ManyBodyOperator(basis, mat, info=info)


def number_operator_diagonal(basis, site):
    """Diagonal of the spin-summed number operator of one site."""
    return basis.site_occupations()[:, site].copy()


def spin_z_diagonal(basis):
    """Diagonal of the total sigma-z operator (q = 2 only)."""
    if basis.space.spin_dim != 2:
        raise ValidationError("spin-z requires spin_dim == 2")
    occ = basis.occupations()
    return occ[:, 0::2].sum(axis=1) - occ[:, 1::2].sum(axis=1)
