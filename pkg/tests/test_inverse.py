"""Inverse problems: recovery, Jacobian correctness, gauge handling,
refusals."""

import numpy as np
import pytest

from hklab import (
    DegenerateGroundError,
    LatticeSpace,
    PairPotential,
    ProblemFamily,
    ValidationError,
    density,
    invert_density,
    invert_pair_density,
    invert_v_and_T,
    pair_density,
    solve_system,
    solve_thermal_system,
)
from hklab.inverse import _ForwardModel, _fd_jacobian
from hklab.manybody import num_displacement_bins


def _mean_zero(rng, n, scale=1.0):
    v = scale * rng.normal(size=n)
    return v - v.mean()


def test_invert_density_fixed_point_at_zero_potential():
    space = LatticeSpace(5, spin_dim=2)
    sys = solve_system(space, 2)
    target = density(sys.state())
    family = ProblemFamily(space=space, num_particles=2)
    result = invert_density(target, family)
    assert result.converged
    assert np.max(np.abs(result.v)) <= 1e-6


def test_invert_density_recovers_random_potential():
    rng = np.random.default_rng(0)
    space = LatticeSpace(8, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    for _ in range(3):
        v0 = _mean_zero(rng, 8)
        sys = solve_system(space, 2, v=v0)
        result = invert_density(density(sys.state()), family)
        assert result.converged
        assert np.max(np.abs(result.v - v0)) <= 1e-6


def test_invert_density_interacting_thermal():
    rng = np.random.default_rng(1)
    space = LatticeSpace(8, spin_dim=2)
    w = PairPotential.from_displacement(0.5 * rng.normal(size=8))
    v0 = _mean_zero(rng, 8)
    tsys = solve_thermal_system(space, 0.5, v=v0, pair=w, num_particles=2)
    family = ProblemFamily(space=space, num_particles=2, pair=w, temperature=0.5)
    result = invert_density(density(tsys.gibbs.state), family)
    assert result.converged
    assert np.max(np.abs(result.v - v0)) <= 1e-5


def test_invert_density_grand_canonical_recovers_full_potential():
    rng = np.random.default_rng(2)
    space = LatticeSpace(5, spin_dim=2)
    v0 = 0.6 + 0.4 * rng.normal(size=5)  # deliberately non-mean-zero
    tsys = solve_thermal_system(space, 0.8, v=v0, max_particles=2)
    family = ProblemFamily(space=space, max_particles=2, temperature=0.8)
    result = invert_density(density(tsys.gibbs.state), family)
    assert result.converged
    assert result.gauge == "none"
    assert np.max(np.abs(result.v - v0)) <= 1e-6


def test_invert_density_validates_target():
    space = LatticeSpace(4, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    with pytest.raises(ValidationError):
        invert_density(np.zeros(4), family)  # zero-density site
    with pytest.raises(ValidationError):
        invert_density(np.full(4, 1.0), family)  # mass 4 != N = 2


def test_invert_density_refuses_degenerate_iterate():
    # half-filled uniform ring: the v = 0 start is an exact level crossing
    space = LatticeSpace(4, spin_dim=1, boundary="periodic")
    family = ProblemFamily(space=space, num_particles=2)
    target = np.full(4, 0.5)
    with pytest.raises(DegenerateGroundError):
        invert_density(target, family)


def test_invert_density_unrealizable_target_stagnates():
    space = LatticeSpace(4, spin_dim=1)
    family = ProblemFamily(space=space, num_particles=2)
    target = np.array([1.2, 0.3, 0.3, 0.2])  # mass 2, but not a ground density
    result = invert_density(target, family, tol=1e-10, max_iter=60)
    assert not result.converged
    assert result.residual > 1e-10
    assert "stagnated" in result.message or "max_iter" in result.message


def test_ground_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    space = LatticeSpace(5, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    model = _ForwardModel(family)
    v = _mean_zero(rng, 5)
    _, spec = model.forward(v)
    analytic = model.density_jacobian(spec)
    fd = _fd_jacobian(lambda u: model.forward(u)[0], v)
    scale = np.max(np.abs(fd))
    assert np.max(np.abs(analytic - fd)) <= 1e-4 * scale


def test_thermal_jacobian_matches_finite_differences():
    rng = np.random.default_rng(4)
    space = LatticeSpace(4, spin_dim=2)
    for family in (
        ProblemFamily(space=space, num_particles=2, temperature=0.7),
        ProblemFamily(space=space, max_particles=2, temperature=0.7),
    ):
        model = _ForwardModel(family)
        v = _mean_zero(rng, 4)
        _, gibbs = model.forward(v)
        analytic = model.density_jacobian(gibbs)
        fd = _fd_jacobian(lambda u: model.forward(u)[0], v)
        scale = np.max(np.abs(fd))
        assert np.max(np.abs(analytic - fd)) <= 1e-4 * scale


def test_fd_jacobian_option_agrees_with_linear_response():
    rng = np.random.default_rng(5)
    space = LatticeSpace(5, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    v0 = _mean_zero(rng, 5)
    target = density(solve_system(space, 2, v=v0).state())
    res_lr = invert_density(target, family, jacobian="linear_response")
    res_fd = invert_density(target, family, jacobian="fd")
    assert res_lr.converged and res_fd.converged
    assert np.max(np.abs(res_lr.v - res_fd.v)) <= 1e-6


def test_invert_pair_density_zero_truth():
    space = LatticeSpace(5, spin_dim=2)
    sys = solve_system(space, 2)
    target = pair_density(sys.state())
    family = ProblemFamily(space=space, num_particles=2)
    result = invert_pair_density(target, family)
    assert result.converged
    assert np.max(np.abs(result.v)) <= 1e-5
    assert np.max(np.abs(result.w)) <= 1e-5


def test_invert_pair_density_recovers_both_potentials():
    rng = np.random.default_rng(6)
    space = LatticeSpace(6, spin_dim=2)
    nb = num_displacement_bins(space)
    family = ProblemFamily(space=space, num_particles=2)
    v0 = _mean_zero(rng, 6, 0.7)
    w0 = _mean_zero(rng, nb, 0.5)
    sys = solve_system(space, 2, v=v0, pair=PairPotential.from_displacement(w0))
    result = invert_pair_density(pair_density(sys.state()), family, tol=1e-9)
    assert result.converged
    assert np.max(np.abs(result.v - v0)) <= 1e-5
    assert np.max(np.abs(result.w - w0)) <= 1e-5


def test_invert_pair_density_gauge_family_degenerate():
    # shifting w by a constant and compensating v leaves the target invariant
    rng = np.random.default_rng(7)
    space = LatticeSpace(5, spin_dim=2)
    nb = num_displacement_bins(space)
    family = ProblemFamily(space=space, num_particles=2)
    v0 = _mean_zero(rng, 5, 0.5)
    w0 = _mean_zero(rng, nb, 0.4)
    c = 0.8
    n = 2
    shifted_w = w0 + c
    shifted_v = v0 - c * (n - 1) / 2.0
    sys = solve_system(
        space, n, v=shifted_v, pair=PairPotential.from_displacement(shifted_w)
    )
    result = invert_pair_density(pair_density(sys.state()), family, tol=1e-9)
    assert result.converged
    assert np.max(np.abs(result.v - v0)) <= 1e-5
    assert np.max(np.abs(result.w - w0)) <= 1e-5


def test_invert_v_and_T_recovers_both():
    rng = np.random.default_rng(8)
    space = LatticeSpace(5, spin_dim=2)
    v0 = 0.5 + 0.4 * rng.normal(size=5)
    T0 = 0.9
    tsys = solve_thermal_system(space, T0, v=v0, max_particles=2)
    family = ProblemFamily(space=space, max_particles=2, temperature=T0)
    target = (density(tsys.gibbs.state), tsys.entropy)
    result = invert_v_and_T(target, family, (0.2, 2.5))
    assert result.converged
    assert abs(result.temperature - T0) / T0 <= 0.01
    assert np.max(np.abs(result.v - v0)) <= 1e-4


def test_invert_v_and_T_zero_entropy_unreachable():
    rng = np.random.default_rng(9)
    space = LatticeSpace(4, spin_dim=2)
    v0 = _mean_zero(rng, 4)
    tsys = solve_thermal_system(space, 0.8, v=v0, num_particles=2)
    family = ProblemFamily(space=space, num_particles=2, temperature=0.8)
    target = (density(tsys.gibbs.state), 0.0)
    result = invert_v_and_T(target, family, (0.2, 2.0))
    assert not result.converged
    assert "entropy" in result.message


def test_invert_v_and_T_canonical_constant_shift():
    # two targets whose potentials differ by a constant share the recovered
    # mean-zero representative; the constant is T ln(Z2/Z1) at N = 1
    rng = np.random.default_rng(10)
    space = LatticeSpace(6, spin_dim=1)
    v_base = _mean_zero(rng, 6)
    c = 0.45
    T0 = 0.8
    t1 = solve_thermal_system(space, T0, v=v_base + c, num_particles=1)
    t2 = solve_thermal_system(space, T0, v=v_base, num_particles=1)
    family = ProblemFamily(space=space, num_particles=1, temperature=T0)
    r1 = invert_v_and_T((density(t1.gibbs.state), t1.entropy), family, (0.3, 2.0))
    r2 = invert_v_and_T((density(t2.gibbs.state), t2.entropy), family, (0.3, 2.0))
    assert r1.converged and r2.converged
    assert np.max(np.abs(r1.v - r2.v)) <= 1e-6  # same mean-zero representative
    # v1 = v2 + T ln(Z2/Z1), verified from the forward partition functions
    recovered_constant = T0 * (t2.gibbs.log_z - t1.gibbs.log_z)
    assert recovered_constant == pytest.approx(c, abs=1e-6)


def test_round_trip_reproduces_reduced_data():
    rng = np.random.default_rng(11)
    space = LatticeSpace(6, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    v0 = _mean_zero(rng, 6)
    target = density(solve_system(space, 2, v=v0).state())
    tol = 1e-8
    result = invert_density(target, family, tol=tol)
    assert result.converged
    fresh = density(solve_system(space, 2, v=result.v).state())
    assert np.max(np.abs(fresh.values - target.values)) <= 10 * tol


def test_gauge_consistency_constant_shifts():
    rng = np.random.default_rng(12)
    space = LatticeSpace(5, spin_dim=2)
    family = ProblemFamily(space=space, num_particles=2)
    v0 = _mean_zero(rng, 5)
    r_base = invert_density(density(solve_system(space, 2, v=v0).state()), family)
    r_shift = invert_density(
        density(solve_system(space, 2, v=v0 + 2.1).state()), family
    )
    assert np.max(np.abs(r_base.v - r_shift.v)) <= 1e-8


def test_family_validation():
    space = LatticeSpace(4, spin_dim=2)
    with pytest.raises(ValidationError):
        ProblemFamily(space=space)
    with pytest.raises(ValidationError):
        ProblemFamily(space=space, num_particles=2, max_particles=2)
    with pytest.raises(ValidationError):
        ProblemFamily(space=space, max_particles=2)  # grand needs T
    with pytest.raises(ValidationError):
        ProblemFamily(space=space, num_particles=2, temperature=-0.1)
    with pytest.raises(ValidationError):
        invert_pair_density(
            np.zeros((4, 4)),
            ProblemFamily(space=space, num_particles=2, temperature=1.0),
        )
