"""Canonical and grand-canonical Gibbs states, partition functions, free
energies.

Everything is computed from exact eigendecompositions (no matrix
exponentials), which also gives the entropy in closed form.  Temperatures
are absolute (k_B = 1), matching the e^{-H/T} convention.  Boltzmann
weights below 1e-300 are flushed to zero; their entropy contribution is
bounded by dim * 1e-300 * 700 and therefore far below every tolerance used
here.

The log-partition function is the primitive stored quantity: Z itself can
overflow at very low temperature, while F = -T ln Z never does.
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import ValidationError
from .manybody import FockBasis, ManyBodyOperator
from .observables import entropy as state_entropy
from .solve import Spectrum, full_spectrum
from .states import QuantumState

Ensemble = Literal["canonical", "grand_canonical"]

WEIGHT_FLUSH = 1e-300


@dataclass
class GibbsState:
    """Thermal equilibrium state with its partition data."""

    ensemble: Ensemble
    temperature: float
    state: QuantumState
    log_z: float
    energies: np.ndarray  # full spectrum, ascending per construction order

    @property
    def partition_function(self):
        return math.exp(self.log_z)

    @property
    def free_energy(self):
        return -self.temperature * self.log_z

    @property
    def entropy(self):
        return state_entropy(self.state)

    @property
    def mean_energy(self):
        return float(self.state.weights @ self.energies)


def _boltzmann(values, T):
    shifted = (values - values.min()) / T
    weights = np.exp(-shifted)
    log_z = -values.min() / T + math.log(weights.sum())
    probs = weights / weights.sum()
    probs[probs < WEIGHT_FLUSH] = 0.0
    return probs, log_z


def gibbs_canonical(operator: ManyBodyOperator, temperature: float) -> GibbsState:
    """Gibbs state e^{-H/T}/Z on a fixed-N sector."""
    if temperature <= 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    spec = full_spectrum(operator)
    probs, log_z = _boltzmann(spec.values, temperature)
    state = QuantumState.mixed(operator.basis, probs, spec.vectors)
    return GibbsState(
        ensemble="canonical",
        temperature=temperature,
        state=state,
        log_z=log_z,
        energies=spec.values,
    )


def _sector_spectra(operator: ManyBodyOperator) -> Spectrum:
    """Eigendecomposition of a block-diagonal Fock Hamiltonian, sector by
    sector, leaving each eigenvector supported on its own sector."""
    fock: FockBasis = operator.basis
    dim = fock.dim
    values = np.empty(dim)
    vectors = np.zeros((dim, dim))
    dense = operator.matrix
    for n in range(fock.max_particles + 1):
        sl = fock.sector_slice(n)
        block = dense[sl, sl].toarray()
        if np.iscomplexobj(block) and np.max(np.abs(block.imag)) > 0:
            if not np.iscomplexobj(vectors):
                vectors = vectors.astype(complex)
            vals, vecs = np.linalg.eigh(block)
        else:
            vals, vecs = np.linalg.eigh(block.real)
        values[sl] = vals
        vectors[sl, sl] = vecs
    return Spectrum(values=values, vectors=vectors)


def gibbs_grand_canonical(operator: ManyBodyOperator, temperature: float) -> GibbsState:
    """Gibbs state on a truncated Fock space, vacuum included (its zero
    energy contributes e^0 = 1 to Z)."""
    if temperature <= 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    if not isinstance(operator.basis, FockBasis):
        raise ValidationError("grand-canonical ensemble needs a Fock-space Hamiltonian")
    spec = _sector_spectra(operator)
    probs, log_z = _boltzmann(spec.values, temperature)
    state = QuantumState.mixed(operator.basis, probs, spec.vectors)
    return GibbsState(
        ensemble="grand_canonical",
        temperature=temperature,
        state=state,
        log_z=log_z,
        energies=spec.values,
    )


def free_energy_of(state: QuantumState, operator: ManyBodyOperator, temperature: float) -> float:
    """tr(H Gamma) - T S(Gamma) for an arbitrary mixed state."""
    if state.basis.dim != operator.dim:
        raise ValidationError(
            f"state dim {state.basis.dim} does not match operator dim {operator.dim}"
        )
    energy = state.expectation(operator).real
    return energy - temperature * state_entropy(state)
