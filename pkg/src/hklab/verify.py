"""Named property suites runnable from the CLI: each draws seeded random
instances, checks one family of identities, and reports worst-case errors."""

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    LatticeSpace,
    MagneticField,
    PAULI,
    kinetic_operator,
    local_potential_operator,
    zeeman_spectrum_formula,
)
from .hktheory import (
    Conclusion,
    decompose_pair_potential,
    hk_semimetric,
    solve_system,
    variational_slacks,
    verify_constancy,
)
from .manybody import PairPotential, assemble_hamiltonian, build_sector_basis, num_displacement_bins
from .observables import density, pair_density
from .states import QuantumState
from .thermal import free_energy_of, gibbs_canonical


@dataclass
class VerifyResult:
    suite: str
    passed: bool
    stats: dict = field(default_factory=dict)


def _random_mixed_state(basis, rng):
    dim = basis.dim
    k = min(dim, 6)
    raw = rng.standard_normal((dim, k))
    q, _ = np.linalg.qr(raw)
    w = rng.random(k)
    w /= w.sum()
    return QuantumState.mixed(basis, w, q)


def verify_zeeman_lemma(seed=0, max_particles=4, trials=50, num_sites=6):
    """Sign-sum spectrum formula vs dense diagonalization of the explicit
    2^N x 2^N spin matrix."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(1, max_particles + 1):
        for _ in range(trials):
            field_vals = rng.normal(size=(num_sites, 3))
            bfield = MagneticField(field_vals)
            sites = rng.choice(num_sites, size=n, replace=False)
            predicted = zeeman_spectrum_formula(bfield, sites)
            mat = np.zeros((2**n, 2**n), dtype=complex)
            for i, site in enumerate(sites):
                ops = [np.eye(2, dtype=complex)] * n
                block = sum(field_vals[site, a] * PAULI[a] for a in range(3))
                ops[i] = block
                term = ops[0]
                for op in ops[1:]:
                    term = np.kron(term, op)
                mat += term
            exact = np.sort(np.linalg.eigvalsh(mat))
            worst = max(worst, float(np.max(np.abs(predicted - exact))))
    return VerifyResult("zeeman-lemma", worst <= 1e-10, {"max_deviation": worst})


def verify_marginals(seed=0, trials=10, num_sites=5, num_particles=2):
    """Pair-density marginal and mass identities on random interacting
    ground states."""
    rng = np.random.default_rng(seed)
    space = LatticeSpace(num_sites, spin_dim=2)
    nbins = num_displacement_bins(space)
    worst = 0.0
    for _ in range(trials):
        v = rng.normal(size=num_sites)
        w = PairPotential.from_displacement(rng.normal(size=nbins))
        sys = solve_system(space, num_particles, v=v, pair=w)
        state = sys.state()
        rho = density(state)
        rho2 = pair_density(state)
        worst = max(worst, float(np.max(np.abs(rho2.marginal_density().values - rho.values))))
        mass = rho2.values.sum() * space.spacing**2
        expected = num_particles * (num_particles - 1) / 2
        worst = max(worst, abs(mass - expected))
    return VerifyResult("marginals", worst <= 1e-10, {"max_deviation": worst})


def verify_gibbs_variational(seed=0, trials=5, mixed_per_trial=20, num_sites=4,
                             num_particles=2):
    """Free energy of random mixed states never beats the Gibbs state."""
    rng = np.random.default_rng(seed)
    space = LatticeSpace(num_sites, spin_dim=2)
    basis = build_sector_basis(space, num_particles)
    worst = np.inf
    for _ in range(trials):
        v = rng.normal(size=num_sites)
        T = float(rng.uniform(0.2, 2.0))
        op = assemble_hamiltonian(
            basis, kinetic_operator(space) + local_potential_operator(space, v)
        )
        gibbs = gibbs_canonical(op, T)
        f_star = gibbs.free_energy
        for _ in range(mixed_per_trial):
            trial_state = _random_mixed_state(basis, rng)
            worst = min(worst, free_energy_of(trial_state, op, T) - f_star)
    return VerifyResult("gibbs-variational", worst >= -1e-9, {"min_slack": float(worst)})


def verify_pair_decomposition(seed=0, trials=20, num_sites=6, num_particles=2):
    """Round-trip of the (v, w) -> W(x,y) split, plus its null-space rank."""
    rng = np.random.default_rng(seed)
    space = LatticeSpace(num_sites, spin_dim=2)
    nbins = num_displacement_bins(space)
    from .manybody import distance_matrix

    dist = distance_matrix(space)
    worst = 0.0
    null_dims = set()
    for _ in range(trials):
        v0 = rng.normal(size=num_sites)
        v0 -= v0.mean()
        w0 = rng.normal(size=nbins)
        w0 -= w0.mean()
        W = (v0[:, None] + v0[None, :]) / (num_particles - 1) + w0[dist]
        dec = decompose_pair_potential(space, W, num_particles)
        null_dims.add(dec.null_space_dim)
        worst = max(worst, dec.residual,
                    float(np.max(np.abs(dec.v - v0))), float(np.max(np.abs(dec.w - w0))))
    passed = worst <= 1e-10 and null_dims == {1}
    return VerifyResult("pair-decomposition", passed,
                        {"max_deviation": worst, "null_dims": sorted(null_dims)})


def verify_constancy_suite(seed=0, trials=10, num_sites=5, num_particles=2):
    """Shifted potentials are recognized as equal-up-to-constant; genuinely
    different potentials are flagged as violated, and the semi-metric stays
    nonnegative with the slack-sum identity intact.

    Runs spinless: spin-1/2 ground states carry exact symmetry zeros on the
    Sz != 0 configurations, which (correctly) trips the zero-state gate."""
    rng = np.random.default_rng(seed)
    space = LatticeSpace(num_sites, spin_dim=1)
    ok = True
    worst_metric = np.inf
    worst_identity = 0.0
    for _ in range(trials):
        v = rng.normal(size=num_sites)
        shift = float(rng.normal())
        sys1 = solve_system(space, num_particles, v=v + shift)
        sys2 = solve_system(space, num_particles, v=v)
        report = verify_constancy(sys1, sys2)
        ok &= report.conclusion in (
            Conclusion.POTENTIALS_EQUAL_UP_TO_CONSTANT,
            Conclusion.FLAGGED_ZERO_STATE,
        )
        if report.conclusion is Conclusion.POTENTIALS_EQUAL_UP_TO_CONSTANT:
            ok &= abs(report.constant - shift) <= 1e-8

        other = solve_system(space, num_particles, v=rng.normal(size=num_sites))
        report2 = verify_constancy(sys2, other)
        ok &= report2.conclusion in (Conclusion.VIOLATED, Conclusion.FLAGGED_ZERO_STATE)
        metric = hk_semimetric(sys2, other)
        s1, s2 = variational_slacks(sys2, other)
        worst_metric = min(worst_metric, metric)
        worst_identity = max(worst_identity, abs(s1 + s2 - metric))
    passed = bool(ok and worst_metric >= -1e-9 and worst_identity <= 1e-10)
    return VerifyResult(
        "constancy", passed,
        {"min_semimetric": float(worst_metric), "max_slack_sum_error": worst_identity},
    )


SUITES = {
    "zeeman-lemma": verify_zeeman_lemma,
    "marginals": verify_marginals,
    "gibbs-variational": verify_gibbs_variational,
    "pair-decomposition": verify_pair_decomposition,
    "constancy": verify_constancy_suite,
}


def run_suite(name, seed=0, **params) -> VerifyResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    return SUITES[name](seed=seed, **params)
