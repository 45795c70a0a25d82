"""Pure and mixed quantum states in spectral form.

A mixed state is held as (weights, vectors): probabilities p_k plus the
orthonormal pure components they weight.  All reduced quantities downstream
are computed per component and combined convexly, so a pure state is just
the k = 1 special case.
"""

import numpy as np

from .exceptions import ValidationError

NORM_TOL = 1e-8
WEIGHT_NEG_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-10


class QuantumState:
    """State on a sector / Fock / two-species basis, spectral form."""

    def __init__(self, basis, weights, vectors):
        vectors = np.ascontiguousarray(vectors)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        weights = np.asarray(weights, dtype=float).ravel()
        if vectors.shape[0] != basis.dim:
            raise ValidationError(
                f"vector length {vectors.shape[0]} does not match basis dim {basis.dim}"
            )
        if vectors.shape[1] != len(weights):
            raise ValidationError("need one weight per component")
        if np.any(weights < -WEIGHT_NEG_TOL):
            raise ValidationError(f"negative weight {weights.min():.3e}")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {weights.sum()}, expected 1")
        norms = np.linalg.norm(vectors, axis=0)
        live = weights > 0
        if np.any(np.abs(norms[live] - 1.0) > NORM_TOL):
            raise ValidationError("components must be normalized")
        self.basis = basis
        self.weights = np.clip(weights, 0.0, None)
        self.vectors = vectors
        self._probabilities = None

    @classmethod
    def pure(cls, basis, vector):
        vector = np.asarray(vector)
        nrm = np.linalg.norm(vector)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValidationError(f"pure state must be normalized, norm is {nrm}")
        return cls(basis, [1.0], vector)

    @classmethod
    def mixed(cls, basis, weights, vectors):
        return cls(basis, weights, vectors)

    @property
    def num_components(self):
        return len(self.weights)

    @property
    def is_pure(self):
        return self.num_components == 1 or np.max(self.weights) > 1.0 - 1e-14

    def probabilities(self):
        """Per-basis-configuration probability sum_k p_k |psi_k(i)|^2.

        This is the full information needed by every occupation-diagonal
        observable (density, pair density, particle number, ...).
        """
        if self._probabilities is None:
            self._probabilities = (np.abs(self.vectors) ** 2) @ self.weights
        return self._probabilities

    def expectation(self, operator):
        """<O> for a ManyBodyOperator, sparse or dense matrix."""
        mat = getattr(operator, "matrix", operator)
        applied = mat @ self.vectors
        per_component = np.einsum("ik,ik->k", self.vectors.conj(), applied)
        return complex(per_component @ self.weights)

    def density_matrix(self):
        """Dense Gamma = sum_k p_k |psi_k><psi_k| (small dimensions only)."""
        return (self.vectors * self.weights) @ self.vectors.conj().T

    def __repr__(self):
        return f"QuantumState(dim={self.basis.dim}, components={self.num_components})"


def trace_distance(state1: QuantumState, state2: QuantumState) -> float:
    """(1/2)||Gamma_1 - Gamma_2||_1 via dense eigenvalues."""
    if state1.basis.dim != state2.basis.dim:
        raise ValidationError("states live on different bases")
    delta = state1.density_matrix() - state2.density_matrix()
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))
