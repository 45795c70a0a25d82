"""Ground-state and spectrum solvers."""

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from hklab import (
    DimensionTooLargeError,
    LatticeSpace,
    SolverConvergenceError,
    ValidationError,
    assemble_hamiltonian,
    build_sector_basis,
    check_nonvanishing,
    full_spectrum,
    ground_state,
    kinetic_operator,
    local_potential_operator,
)


class _DimBasis:
    """Dimension-only stand-in; the solvers touch nothing else."""

    def __init__(self, dim):
        self.dim = dim


def _operator_from_matrix(matrix):
    """Wrap a Hermitian matrix as a many-body operator of matching size."""
    import scipy.sparse as sp

    from hklab import ManyBodyOperator

    matrix = np.asarray(matrix)
    return ManyBodyOperator(_DimBasis(matrix.shape[0]), sp.csr_matrix(matrix))


def _random_hermitian(rng, n):
    raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (raw + raw.conj().T)


def test_diagonal_ground():
    op = _operator_from_matrix(np.diag([3.0, 1.0, 2.0]))
    sol = ground_state(op)
    assert sol.energy == pytest.approx(1.0, abs=1e-12)
    assert sol.degeneracy == 1
    assert sol.gap == pytest.approx(1.0, abs=1e-12)


def test_identity_fully_degenerate():
    op = _operator_from_matrix(np.eye(5))
    sol = ground_state(op)
    assert sol.degeneracy == 5
    assert sol.gap == np.inf
    overlaps = sol.vectors.conj().T @ sol.vectors
    assert np.max(np.abs(overlaps - np.eye(5))) <= 1e-10


def test_random_matrix_matches_dense_oracle():
    rng = np.random.default_rng(0)
    mat = _random_hermitian(rng, 200)
    sol = ground_state(_operator_from_matrix(mat))
    expected = np.linalg.eigvalsh(mat)[0]
    assert abs(sol.energy - expected) <= 1e-9
    residual = np.linalg.norm(mat @ sol.vector - sol.energy * sol.vector)
    assert residual <= 1e-9


def test_iterative_branch_matches_dense():
    rng = np.random.default_rng(1)
    mat = _random_hermitian(rng, 120).real
    op = _operator_from_matrix(mat)
    dense_sol = ground_state(op)
    lanczos_sol = ground_state(op, dense_cutoff=50, seed=3)
    assert abs(dense_sol.energy - lanczos_sol.energy) <= 1e-9
    assert abs(abs(np.vdot(dense_sol.vector, lanczos_sol.vector)) - 1.0) <= 1e-8


def test_iterative_path_on_above_cutoff_sector():
    # C(16, 5) = 4368 exceeds the densification cutoff, so this exercises
    # the restarted-Lanczos branch on a real assembly end to end
    rng = np.random.default_rng(7)
    space = LatticeSpace(8, spin_dim=2)
    basis = build_sector_basis(space, 5)
    assert basis.dim > 4000
    op = assemble_hamiltonian(
        basis, kinetic_operator(space) + local_potential_operator(space, rng.normal(size=8))
    )
    sol = ground_state(op, seed=1)
    assert np.all(sol.residuals <= 1e-9)
    overlaps = sol.vectors.conj().T @ sol.vectors
    assert np.max(np.abs(overlaps - np.eye(sol.degeneracy))) <= 1e-10
    assert sol.degeneracy == 2  # odd N with a spin-blind H: Kramers doublet
    assert sol.gap > 1e-3
    for _ in range(20):
        phi = rng.normal(size=basis.dim)
        phi /= np.linalg.norm(phi)
        assert np.vdot(phi, op.matvec(phi)).real >= sol.energy - 1e-9


def test_iterative_nonconvergence_is_explicit(monkeypatch):
    def fail(*args, **kwargs):
        raise spla.ArpackNoConvergence("no", np.array([]), np.array([[]]))

    monkeypatch.setattr(spla, "eigsh", fail)
    rng = np.random.default_rng(2)
    op = _operator_from_matrix(_random_hermitian(rng, 30).real)
    with pytest.raises(SolverConvergenceError):
        ground_state(op, dense_cutoff=10)


def test_phase_gauge_deterministic():
    rng = np.random.default_rng(3)
    mat = _random_hermitian(rng, 40)
    sol1 = ground_state(_operator_from_matrix(mat))
    sol2 = ground_state(_operator_from_matrix(mat.copy()))
    assert np.array_equal(sol1.vector, sol2.vector)
    pivot = sol1.vector[np.argmax(np.abs(sol1.vector))]
    assert pivot.imag == pytest.approx(0.0, abs=1e-14)
    assert pivot.real > 0


def test_variational_bound_over_random_trials():
    rng = np.random.default_rng(4)
    space = LatticeSpace(4, spin_dim=2)
    basis = build_sector_basis(space, 2)
    op = assemble_hamiltonian(
        basis, kinetic_operator(space) + local_potential_operator(space, rng.normal(size=4))
    )
    sol = ground_state(op)
    dense = op.dense()
    for _ in range(100):
        phi = rng.normal(size=basis.dim)
        phi /= np.linalg.norm(phi)
        assert phi @ dense @ phi >= sol.energy - 1e-9


def test_degenerate_subspace_is_invariant():
    # two exactly degenerate lowest levels
    mat = np.diag([0.0, 0.0, 1.0, 2.0])
    mat[2, 3] = mat[3, 2] = 0.3
    sol = ground_state(_operator_from_matrix(mat))
    assert sol.degeneracy == 2
    P = sol.vectors @ sol.vectors.conj().T
    assert np.linalg.norm(mat @ P - P @ mat @ P) <= 1e-8


def test_full_spectrum_examples():
    assert np.allclose(full_spectrum(_operator_from_matrix(np.array([[4.2]]))).values, [4.2])
    space = LatticeSpace(4, spin_dim=1, boundary="periodic")
    op = assemble_hamiltonian(build_sector_basis(space, 1), kinetic_operator(space))
    assert np.allclose(full_spectrum(op).values, [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_full_spectrum_reconstruction_and_trace():
    rng = np.random.default_rng(5)
    mat = _random_hermitian(rng, 60)
    op = _operator_from_matrix(mat)
    spec = full_spectrum(op)
    rebuilt = (spec.vectors * spec.values) @ spec.vectors.conj().T
    assert np.linalg.norm(rebuilt - mat) <= 1e-8 * np.linalg.norm(mat)
    assert abs(np.sum(spec.values) - np.trace(mat).real) <= 1e-10


def test_full_spectrum_dimension_guard():
    space = LatticeSpace(8, spin_dim=2)
    basis = build_sector_basis(space, 6)
    with pytest.raises(DimensionTooLargeError):
        full_spectrum(assemble_hamiltonian(basis))


def test_check_nonvanishing_uniform_and_basis_vector():
    psi = np.full(16, 0.25)
    report = check_nonvanishing(psi)
    assert report.zero_count == 0 and not report.has_zeros
    e0 = np.zeros(16)
    e0[3] = 1.0
    report = check_nonvanishing(e0)
    assert report.zero_count == 15
    assert 3 not in report.zero_indices


def test_check_nonvanishing_matches_direct_scan():
    rng = np.random.default_rng(6)
    mat = _random_hermitian(rng, 25).real
    sol = ground_state(_operator_from_matrix(mat))
    report = check_nonvanishing(sol.vector, zero_tol=1e-3)
    assert report.zero_count == int(np.sum(np.abs(sol.vector) <= 1e-3))
    assert report.min_abs == pytest.approx(np.min(np.abs(sol.vector)))


def test_check_nonvanishing_requires_normalization():
    with pytest.raises(ValidationError):
        check_nonvanishing(np.ones(4))
