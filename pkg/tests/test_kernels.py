"""Kernel convention and backend-parity checks.

The anticommutation oracle rebuilds the fermionic operators directly from
the documented bit convention on the full occupation space; the sector
kernels must reproduce their sector restrictions exactly.
"""

import numpy as np
import pytest

from hklab import LatticeSpace, build_sector_basis
from hklab._kernels import _pure, backend_name, hopping_entries, occupations

from oracles import fermion_annihilators


def test_anticommutation_relations():
    D = 4
    ann = fermion_annihilators(D)
    eye = np.eye(2**D)
    for p in range(D):
        for q in range(D):
            anti = ann[p] @ ann[q] + ann[q] @ ann[p]
            assert np.allclose(anti, 0.0, atol=1e-14)
            mixed = ann[p] @ ann[q].T + ann[q].T @ ann[p]
            expected = eye if p == q else 0.0 * eye
            assert np.allclose(mixed, expected, atol=1e-14)


@pytest.mark.parametrize("num_particles", [1, 2, 3])
def test_hopping_matches_operator_oracle(num_particles):
    space = LatticeSpace(2, spin_dim=2)  # D = 4
    basis = build_sector_basis(space, num_particles)
    ann = fermion_annihilators(space.dim)
    sector = [int(m) for m in basis.masks]
    for p in range(space.dim):
        for q in range(space.dim):
            if p == q:
                continue
            exact = (ann[p].T @ ann[q])[np.ix_(sector, sector)]
            rows, cols, signs = basis.hopping(p, q)
            built = np.zeros_like(exact)
            built[rows, cols] = signs
            assert np.array_equal(built, exact), (p, q)


def test_occupations_match_bit_scan():
    space = LatticeSpace(3, spin_dim=2)
    basis = build_sector_basis(space, 3)
    occ = basis.occupations()
    for i, mask in enumerate(basis.masks):
        for p in range(space.dim):
            assert occ[i, p] == float(bool(int(mask) >> p & 1))


def test_pure_backend_parity():
    rng = np.random.default_rng(11)
    space = LatticeSpace(4, spin_dim=2)
    basis = build_sector_basis(space, 3)
    occ_active = occupations(basis.masks, space.dim)
    occ_pure = _pure.occupations(basis.masks, space.dim)
    assert np.array_equal(occ_active, occ_pure)
    for _ in range(20):
        p, q = rng.choice(space.dim, size=2, replace=False)
        active = hopping_entries(basis.masks, int(p), int(q))
        pure = _pure.hopping_entries(basis.masks, int(p), int(q))
        for a, b in zip(active, pure):
            assert np.array_equal(a, b)


def test_backend_is_reported():
    assert backend_name() in ("compiled", "pure")


def test_hopping_rejects_diagonal():
    space = LatticeSpace(2, spin_dim=1)
    basis = build_sector_basis(space, 1)
    with pytest.raises(ValueError):
        hopping_entries(basis.masks, 0, 0)
    with pytest.raises(ValueError):
        _pure.hopping_entries(basis.masks, 1, 1)
