"""Sector bases and second-quantized assembly."""

import math

import numpy as np
import pytest

from hklab import (
    LatticeSpace,
    PairPotential,
    TwoSpeciesSpec,
    ValidationError,
    assemble_fock_hamiltonian,
    assemble_hamiltonian,
    assemble_two_species,
    build_fock_basis,
    build_sector_basis,
    kinetic_operator,
    local_potential_operator,
)
from hklab.manybody import distance_matrix, num_displacement_bins, spin_z_diagonal

from oracles import first_quantized_two_particle


def test_sector_dimensions():
    space = LatticeSpace(4, spin_dim=1)
    assert build_sector_basis(space, 1).dim == 4
    assert build_sector_basis(space, 4).dim == 1
    space12 = LatticeSpace(6, spin_dim=2)
    assert build_sector_basis(space12, 3).dim == 220


def test_sector_masks_sorted_with_correct_popcount():
    space = LatticeSpace(3, spin_dim=2)
    basis = build_sector_basis(space, 2)
    masks = [int(m) for m in basis.masks]
    assert masks == sorted(masks)
    assert all(bin(m).count("1") == 2 for m in masks)
    assert len(set(masks)) == math.comb(6, 2)


def test_sector_particle_range():
    space = LatticeSpace(3, spin_dim=1)
    with pytest.raises(ValidationError):
        build_sector_basis(space, 0)
    with pytest.raises(ValidationError):
        build_sector_basis(space, 4)


def test_one_particle_assembly_equals_one_body():
    rng = np.random.default_rng(0)
    space = LatticeSpace(4, spin_dim=2)
    raw = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    op = kinetic_operator(space) + local_potential_operator(space, rng.normal(size=4))
    from hklab import nonlocal_operator

    op = op + nonlocal_operator(space, 0.5 * (raw + raw.conj().T))
    basis = build_sector_basis(space, 1)
    assembled = assemble_hamiltonian(basis, op)
    assert np.max(np.abs(assembled.dense() - op.matrix)) == 0.0


def test_noninteracting_two_particle_pairwise_sums():
    space = LatticeSpace(4, spin_dim=1)
    energies = np.array([0.3, 1.1, 2.0, 5.0])
    op = local_potential_operator(space, energies)
    basis = build_sector_basis(space, 2)
    eigs = np.sort(np.linalg.eigvalsh(assemble_hamiltonian(basis, op).dense()))
    expected = np.sort([energies[p] + energies[q] for p in range(4) for q in range(p + 1, 4)])
    assert np.allclose(eigs, expected, atol=1e-12)


def test_two_particle_spectrum_vs_first_quantized_oracle():
    rng = np.random.default_rng(1)
    space = LatticeSpace(4, spin_dim=2)
    v = rng.normal(size=4)
    wvals = rng.normal(size=num_displacement_bins(space))
    pair = PairPotential.from_displacement(wvals)
    one_body = kinetic_operator(space) + local_potential_operator(space, v)
    basis = build_sector_basis(space, 2)
    assembled = assemble_hamiltonian(basis, one_body, pair)
    oracle, _ = first_quantized_two_particle(
        one_body.matrix, pair.kernel(space), space.site_of_mode
    )
    got = np.linalg.eigvalsh(assembled.dense())
    expected = np.linalg.eigvalsh(oracle)
    assert np.max(np.abs(got - expected)) <= 1e-9


def test_assembled_matrices_hermitian():
    rng = np.random.default_rng(2)
    space = LatticeSpace(3, spin_dim=2)
    raw = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    from hklab import nonlocal_operator

    op = kinetic_operator(space) + nonlocal_operator(space, 0.5 * (raw + raw.conj().T))
    basis = build_sector_basis(space, 2)
    mat = assemble_hamiltonian(basis, op).dense()
    assert np.max(np.abs(mat - mat.conj().T)) <= 1e-12


def test_spin_blind_hamiltonian_commutes_with_spin_z():
    rng = np.random.default_rng(3)
    space = LatticeSpace(4, spin_dim=2)
    v = rng.normal(size=4)
    pair = PairPotential.from_displacement(rng.normal(size=4))
    basis = build_sector_basis(space, 2)
    H = assemble_hamiltonian(
        basis, kinetic_operator(space) + local_potential_operator(space, v), pair
    ).dense()
    sz = np.diag(spin_z_diagonal(basis))
    assert np.linalg.norm(H @ sz - sz @ H) <= 1e-10


def test_onsite_interaction_acts_between_opposite_spins_only():
    space = LatticeSpace(2, spin_dim=2)
    w = np.zeros(num_displacement_bins(space))
    w[0] = 3.0  # pure on-site repulsion
    basis = build_sector_basis(space, 2)
    H = assemble_hamiltonian(basis, pair=PairPotential.from_displacement(w)).dense()
    diag = np.real(np.diag(H))
    for i, mask in enumerate(basis.masks):
        mask = int(mask)
        doubly = sum(
            1 for x in range(2) if (mask >> (2 * x)) & 1 and (mask >> (2 * x + 1)) & 1
        )
        assert np.isclose(diag[i], 3.0 * doubly)


def test_pair_potential_forms():
    space = LatticeSpace(5, spin_dim=1)
    with pytest.raises(ValidationError):
        PairPotential(displacement=[1.0], kernel_matrix=np.eye(5))
    with pytest.raises(ValidationError):
        PairPotential.from_kernel(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValidationError):
        PairPotential.from_displacement(np.ones(3)).kernel(space)
    disp = PairPotential.from_displacement([0.0, 1.0, 2.0, 3.0, 4.0])
    kern = disp.kernel(space)
    assert np.allclose(kern, np.abs(np.subtract.outer(range(5), range(5))))


def test_periodic_distance_binning():
    space = LatticeSpace(6, spin_dim=1, boundary="periodic")
    assert num_displacement_bins(space) == 4
    d = distance_matrix(space)
    assert d[0, 5] == 1 and d[0, 3] == 3 and d[1, 5] == 2
    assert np.array_equal(d, d.T)


def test_fock_block_structure():
    rng = np.random.default_rng(4)
    space = LatticeSpace(4, spin_dim=1)
    v = rng.normal(size=4)
    pair = PairPotential.from_displacement(rng.normal(size=4))
    one_body = kinetic_operator(space) + local_potential_operator(space, v)
    fock = build_fock_basis(space, 3)
    H = assemble_fock_hamiltonian(fock, one_body, pair)
    dense = H.dense()
    assert fock.dim == 1 + 4 + 6 + 4
    # vacuum block is the 1x1 zero
    assert dense[0, 0] == 0.0
    # cross-sector entries exactly zero, each block equals its own assembly
    for n in range(4):
        sl = fock.sector_slice(n)
        outside = np.ones(fock.dim, dtype=bool)
        outside[sl] = False
        assert np.count_nonzero(dense[sl][:, outside]) == 0
        if n >= 1:
            block = assemble_hamiltonian(fock.sectors[n], one_body, pair).dense()
            assert np.max(np.abs(dense[sl, sl] - block)) == 0.0


def test_fock_nmax_one_blocks():
    space = LatticeSpace(3, spin_dim=1)
    one_body = kinetic_operator(space)
    fock = build_fock_basis(space, 1)
    dense = assemble_fock_hamiltonian(fock, one_body).dense()
    assert dense.shape == (4, 4)
    assert dense[0, 0] == 0.0
    assert np.allclose(dense[1:, 1:], one_body.matrix)


def test_two_species_requires_both_species():
    with pytest.raises(ValidationError):
        TwoSpeciesSpec(num_a=1, num_b=0, alpha=1.0, v_a=np.zeros(3), v_b=np.zeros(3))
    with pytest.raises(ValidationError):
        TwoSpeciesSpec(num_a=1, num_b=1, alpha=0.0, v_a=np.zeros(3), v_b=np.zeros(3))


def test_two_species_single_particles_tensor_sum():
    rng = np.random.default_rng(5)
    space = LatticeSpace(3, spin_dim=1)
    v_a, v_b = rng.normal(size=3), rng.normal(size=3)
    alpha = 1.7
    spec = TwoSpeciesSpec(num_a=1, num_b=1, alpha=alpha, v_a=v_a, v_b=v_b)
    H = assemble_two_species(spec, space).dense()
    ka = kinetic_operator(space).matrix + np.diag(v_a)
    kb = alpha * kinetic_operator(space).matrix + np.diag(v_b)
    ea, eb = np.linalg.eigvalsh(ka), np.linalg.eigvalsh(kb)
    expected = np.sort(np.add.outer(ea, eb).ravel())
    assert np.allclose(np.linalg.eigvalsh(H), expected, atol=1e-10)


def test_two_species_swap_symmetry():
    rng = np.random.default_rng(6)
    space = LatticeSpace(3, spin_dim=1)
    v = rng.normal(size=3)
    w = PairPotential.from_displacement(rng.normal(size=3))
    spec = TwoSpeciesSpec(
        num_a=1, num_b=1, alpha=1.0, v_a=v, v_b=v, w_a=w, w_b=w, w_ab=None
    )
    H = assemble_two_species(spec, space).dense()
    da = 3
    swap = H.reshape(da, da, da, da).transpose(1, 0, 3, 2).reshape(da * da, da * da)
    assert np.allclose(
        np.linalg.eigvalsh(H), np.linalg.eigvalsh(swap), atol=1e-10
    )


def test_two_species_cross_interaction_diagonal():
    rng = np.random.default_rng(7)
    space = LatticeSpace(3, spin_dim=1)
    wab = PairPotential.from_displacement(rng.normal(size=3))
    spec = TwoSpeciesSpec(
        num_a=1, num_b=1, alpha=1.0, v_a=np.zeros(3), v_b=np.zeros(3), w_ab=wab
    )
    spec_free = TwoSpeciesSpec(
        num_a=1, num_b=1, alpha=1.0, v_a=np.zeros(3), v_b=np.zeros(3)
    )
    delta = assemble_two_species(spec, space).dense() - assemble_two_species(
        spec_free, space
    ).dense()
    kern = wab.kernel(space)
    expected = np.diag([kern[x, y] for x in range(3) for y in range(3)])
    assert np.allclose(delta, expected, atol=1e-12)


def test_dense_cutoff_enforced():
    space = LatticeSpace(8, spin_dim=2)  # C(16, 6) = 8008 > 4000
    basis = build_sector_basis(space, 6)
    H = assemble_hamiltonian(basis)  # diagonal zero operator; cutoff still applies
    assert basis.dim > 4000
    from hklab import DimensionTooLargeError

    with pytest.raises(DimensionTooLargeError):
        H.dense()
