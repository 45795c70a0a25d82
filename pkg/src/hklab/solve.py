"""Ground states (degeneracy-aware) and full spectra of many-body operators.

Dense problems (dim <= 4000) go through LAPACK; larger ones use restarted
Lanczos with full reorthogonalization (ARPACK) and an explicit iteration
budget.  Ground vectors are gauge-fixed by making the largest-magnitude
coefficient real positive, so downstream reduced densities are reproducible
bit-for-bit across runs.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .exceptions import DimensionTooLargeError, SolverConvergenceError, ValidationError
from .manybody import DENSE_CUTOFF, ManyBodyOperator


def _fix_phase(vectors):
    fixed = np.array(vectors, copy=True)
    for k in range(fixed.shape[1]):
        j = int(np.argmax(np.abs(fixed[:, k])))
        pivot = fixed[j, k]
        if pivot != 0:
            fixed[:, k] *= np.conj(pivot) / abs(pivot)
    if not np.iscomplexobj(vectors):
        fixed = fixed.real
    return fixed


@dataclass
class GroundSolution:
    """Lowest eigenvalue with the full (near-)degenerate eigenspace."""

    energy: float
    vectors: np.ndarray  # (dim, degeneracy), orthonormal
    degeneracy: int
    gap: float
    residuals: np.ndarray

    @property
    def vector(self):
        """Representative ground vector (first of the span)."""
        return self.vectors[:, 0]


@dataclass
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray


@dataclass
class ZeroReport:
    """Coefficients at or below the zero threshold, for flagging states that
    vanish somewhere on the lattice configuration space."""

    zero_count: int
    zero_indices: np.ndarray
    min_abs: float

    @property
    def has_zeros(self):
        return self.zero_count > 0


def _window_split(values, degeneracy_tol):
    e0 = values[0]
    window = degeneracy_tol * max(1.0, abs(e0))
    inside = np.nonzero(values - e0 <= window)[0]
    g = int(inside[-1] + 1)
    gap = float(values[g] - e0) if g < len(values) else math.inf
    return g, gap


def ground_state(
    operator: ManyBodyOperator,
    degeneracy_tol: float = 1e-8,
    dense_cutoff: int = DENSE_CUTOFF,
    seed: int = 0,
) -> GroundSolution:
    """Lowest eigenvalue and every eigenvector within the relative window
    degeneracy_tol * max(1, |E0|) of it."""
    dim = operator.dim
    mat = operator.matrix
    if dim <= dense_cutoff:
        values, vectors = np.linalg.eigh(mat.toarray())
        g, gap = _window_split(values, degeneracy_tol)
        vecs = _fix_phase(vectors[:, :g])
        energy = float(values[0])
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim)
        maxiter = int(math.ceil(50.0 * math.sqrt(dim)))
        k = 6
        while True:
            k = min(k, dim - 1)
            try:
                values, vectors = spla.eigsh(mat, k=k, which="SA", v0=v0, maxiter=maxiter)
            except spla.ArpackNoConvergence as err:
                raise SolverConvergenceError(
                    f"Lanczos did not converge within {maxiter} iterations (dim={dim})"
                ) from err
            order = np.argsort(values)
            values, vectors = values[order], vectors[:, order]
            window = degeneracy_tol * max(1.0, abs(values[0]))
            if values[-1] - values[0] > window or k == dim - 1:
                break
            k *= 2  # whole window degenerate: widen until the gap is visible
        g, gap = _window_split(values, degeneracy_tol)
        vecs, _ = np.linalg.qr(vectors[:, :g])
        vecs = _fix_phase(vecs)
        energy = float(values[0])
    residuals = np.array(
        [float(np.linalg.norm(mat @ vecs[:, i] - energy * vecs[:, i])) for i in range(g)]
    )
    return GroundSolution(energy=energy, vectors=vecs, degeneracy=g, gap=gap, residuals=residuals)


def full_spectrum(operator: ManyBodyOperator) -> Spectrum:
    """Complete eigendecomposition, ascending; dense only."""
    if operator.dim > DENSE_CUTOFF:
        raise DimensionTooLargeError(
            f"full spectrum limited to dim <= {DENSE_CUTOFF}, got {operator.dim}"
        )
    values, vectors = np.linalg.eigh(operator.matrix.toarray())
    return Spectrum(values=values, vectors=_fix_phase(vectors))


def check_nonvanishing(psi, zero_tol: float = 1e-12) -> ZeroReport:
    """Count and locate coefficients with |psi_i| <= zero_tol.

    There is no lattice analog of unique continuation, so states with exact
    zeros are flagged; theorem verifiers downgrade their conclusions on such
    states instead of assuming the zeros away.
    """
    psi = np.asarray(psi)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValidationError(f"state must be normalized, norm is {nrm}")
    mags = np.abs(psi)
    idx = np.nonzero(mags <= zero_tol)[0]
    return ZeroReport(zero_count=len(idx), zero_indices=idx, min_abs=float(mags.min()))
