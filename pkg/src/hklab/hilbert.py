"""One-body lattice space and the operators acting on it.

The lattice is a 1-D chain of L sites with q internal spin components
(q = 2 for spin-1/2), so the one-body dimension is D = L*q.  Modes are
ordered site-major: mode = site*q + spin, hence spatial operators are
kron(site_matrix, I_q) and on-site spin operators kron(I_L, sigma).

Spin-1/2 uses the standard Pauli algebra regardless of the spatial
dimension; component 0 is "up" (sigma_z eigenvalue +1), component 1 "down".
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import ValidationError

HERMITICITY_TOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

Boundary = Literal["dirichlet", "periodic"]
OperatorKind = Literal["kinetic", "local_potential", "zeeman", "nonlocal", "composite"]


@dataclass(frozen=True)
class LatticeSpace:
    """Descriptor of the discretized one-body Hilbert space."""

    num_sites: int
    spin_dim: int = 2
    boundary: Boundary = "dirichlet"
    spacing: float = 1.0

    def __post_init__(self):
        if self.num_sites < 2:
            raise ValidationError(f"num_sites must be >= 2, got {self.num_sites}")
        if self.spin_dim < 1:
            raise ValidationError(f"spin_dim must be >= 1, got {self.spin_dim}")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValidationError(f"unknown boundary {self.boundary!r}")
        if not self.spacing > 0:
            raise ValidationError(f"spacing must be positive, got {self.spacing}")

    @property
    def dim(self):
        """One-body dimension D = L*q."""
        return self.num_sites * self.spin_dim

    def mode(self, site, spin=0):
        return site * self.spin_dim + spin

    def site_of_mode(self, mode):
        return mode // self.spin_dim


def hermiticity_defect(matrix):
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass
class OneBodyOperator:
    """Hermitian matrix on the one-body space, tagged by its construction."""

    space: LatticeSpace
    matrix: np.ndarray
    kind: OperatorKind = "composite"

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"matrix shape {mat.shape} does not match one-body dimension {self.space.dim}"
            )
        mat = mat.astype(complex) if np.iscomplexobj(mat) else mat.astype(float)
        defect = hermiticity_defect(mat)
        if defect > HERMITICITY_TOL:
            raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def __add__(self, other):
        if not isinstance(other, OneBodyOperator):
            return NotImplemented
        if other.space != self.space:
            raise ValidationError("cannot add operators on different spaces")
        return OneBodyOperator(self.space, self.matrix + other.matrix, kind="composite")

    def __mul__(self, scalar):
        return OneBodyOperator(self.space, float(scalar) * self.matrix, kind="composite")

    __rmul__ = __mul__

    def norm(self):
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2))


@dataclass
class MagneticField:
    """Per-site real 3-vector B(x), in units of energy."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != 3:
            raise ValidationError(f"field must be (L, 3), got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field entries must be finite")
        vals.setflags(write=False)
        self.values = vals

    def magnitudes(self):
        return np.linalg.norm(self.values, axis=1)


def _site_laplacian(space: LatticeSpace):
    L = space.num_sites
    lap = np.zeros((L, L))
    np.fill_diagonal(lap, 2.0)
    idx = np.arange(L - 1)
    lap[idx, idx + 1] = -1.0
    lap[idx + 1, idx] = -1.0
    if space.boundary == "periodic":
        lap[0, L - 1] += -1.0
        lap[L - 1, 0] += -1.0
    return lap / space.spacing**2


def kinetic_operator(space: LatticeSpace) -> OneBodyOperator:
    """Three-point finite-difference Laplacian (as -Delta, so PSD), tensored
    with the spin identity."""
    mat = np.kron(_site_laplacian(space), np.eye(space.spin_dim))
    return OneBodyOperator(space, mat, kind="kinetic")


def local_potential_operator(space: LatticeSpace, v) -> OneBodyOperator:
    """Diagonal multiplication operator, spin-scalar: entry v(x) on every
    spin component of site x."""
    v = np.asarray(v, dtype=float)
    if v.shape != (space.num_sites,):
        raise ValidationError(
            f"potential must have {space.num_sites} entries, got shape {v.shape}"
        )
    mat = np.diag(np.repeat(v, space.spin_dim))
    return OneBodyOperator(space, mat, kind="local_potential")


def zeeman_operator(space: LatticeSpace, field: MagneticField) -> OneBodyOperator:
    """Block-diagonal B(x).sigma coupling; requires spin-1/2 (q = 2)."""
    if space.spin_dim != 2:
        raise ValidationError("Zeeman coupling requires spin_dim == 2")
    if field.values.shape[0] != space.num_sites:
        raise ValidationError("field length does not match lattice")
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for x in range(space.num_sites):
        block = sum(field.values[x, a] * PAULI[a] for a in range(3))
        mat[2 * x : 2 * x + 2, 2 * x : 2 * x + 2] = block
    return OneBodyOperator(space, mat, kind="zeeman")


def nonlocal_operator(space: LatticeSpace, kernel) -> OneBodyOperator:
    """Wraps a full D x D Hermitian kernel."""
    kernel = np.asarray(kernel)
    if hermiticity_defect(kernel) > HERMITICITY_TOL:
        raise ValidationError("non-local kernel must be Hermitian")
    return OneBodyOperator(space, kernel, kind="nonlocal")


def rank_one_operator(space: LatticeSpace, phi, weight=1.0) -> OneBodyOperator:
    """weight * |phi><phi| for a one-body vector phi (normalized first)."""
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    return nonlocal_operator(space, weight * np.outer(phi, phi.conj()))


def zeeman_spectrum_formula(field: MagneticField, occupied_sites):
    """All 2^N eigenvalues sum_i (+-)|B(x_i)| of the N-particle Zeeman
    coupling at fixed particle positions, enumerated over sign patterns."""
    occupied_sites = list(occupied_sites)
    if len(occupied_sites) < 1:
        raise ValidationError("need at least one occupied site")
    mags = field.magnitudes()[occupied_sites]
    values = np.zeros(1)
    for m in mags:
        values = np.concatenate([values + m, values - m])
    return np.sort(values)
