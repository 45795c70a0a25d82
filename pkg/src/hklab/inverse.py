"""Numerical inverses of the forward maps: density -> potential,
pair density -> (v, w), and (density, entropy) -> (v, T).

The optimizer is Gauss-Newton with Levenberg damping.  Jacobians come from
first-order perturbation theory on the solved spectrum -- the ground-state
sum over excited states at T = 0, the Duhamel (Kubo) formula at T > 0 --
with central finite differences available as an explicit fallback and as
the correctness oracle for the analytic path.

Gauge: every uniqueness conclusion in this family is "up to a constant", so
recovered potentials are reported mean-zero wherever that gauge freedom is
real (ground-state and canonical ensembles).  In the grand-canonical
ensemble a constant shift of v changes the mean particle number, so v is
fully determined and no projection is applied.

Degenerate iterates make the forward map set-valued; the inversion refuses
them (gap below 1e-6) instead of silently selecting a branch.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .exceptions import DegenerateGroundError, ValidationError
from .hilbert import LatticeSpace, kinetic_operator
from .manybody import (
    ManyBodyOperator,
    PairPotential,
    _pair_diagonal,
    assemble_fock_hamiltonian,
    assemble_hamiltonian,
    build_fock_basis,
    build_sector_basis,
    num_displacement_bins,
)
from .observables import DensityProfile, density, entropy, pair_density
from .solve import full_spectrum
from .states import QuantumState
from .thermal import gibbs_canonical, gibbs_grand_canonical

GAP_REFUSAL = 1e-6


@dataclass
class ProblemFamily:
    """The fixed data of an inversion: lattice, sector/ensemble, interaction,
    and (for thermal problems) the temperature."""

    space: LatticeSpace
    num_particles: int | None = None
    max_particles: int | None = None
    pair: PairPotential | None = None
    temperature: float | None = None

    def __post_init__(self):
        if (self.num_particles is None) == (self.max_particles is None):
            raise ValidationError("give exactly one of num_particles or max_particles")
        if self.max_particles is not None and self.temperature is None:
            raise ValidationError("grand-canonical families need a temperature")
        if self.temperature is not None and self.temperature <= 0:
            raise ValidationError("temperature must be positive")

    @property
    def ensemble(self):
        if self.max_particles is not None:
            return "grand_canonical"
        return "ground" if self.temperature is None else "canonical"


@dataclass
class InversionResult:
    v: np.ndarray | None
    w: np.ndarray | None
    temperature: float | None
    residual: float
    iterations: int
    gauge: str
    converged: bool
    message: str


def _with_matrix(op: ManyBodyOperator, matrix) -> ManyBodyOperator:
    return ManyBodyOperator(op.basis, matrix, info=op.info)


def _ground_response(spec, observables, perturbations):
    """Sum-over-excited-states response of <A> to H -> H + dλ B for diagonal
    A and B stacks of shape (n, dim)."""
    psi0 = spec.vectors[:, 0]
    excited = spec.vectors[:, 1:]
    denom = spec.values[0] - spec.values[1:]
    ma = (observables * psi0.conj()[None, :]) @ excited  # <0|A|k>
    mb = (perturbations * psi0.conj()[None, :]) @ excited
    return 2.0 * np.real((ma / denom[None, :]) @ mb.conj().T)


def _thermal_response(gibbs, observables, perturbations):
    """Duhamel two-point response of Gibbs averages, exact on the solved
    spectrum (handles degeneracies through the equal-energy limit)."""
    beta = 1.0 / gibbs.temperature
    energies = gibbs.energies
    V = gibbs.state.vectors
    u = np.exp(-(energies - energies.min()) * beta)
    zs = u.sum()
    prob = u / zs
    diff = energies[:, None] - energies[None, :]
    degenerate = np.abs(diff) <= 1e-12
    safe = np.where(degenerate, 1.0, diff)
    g = np.where(degenerate, -beta * u[:, None] * np.ones_like(diff), (u[:, None] - u[None, :]) / safe)
    tilde_obs = np.stack([V.conj().T @ (a[:, None] * V) for a in observables])
    tilde_pert = np.stack([V.conj().T @ (b[:, None] * V) for b in perturbations])
    mean_obs = np.real(np.einsum("amm,m->a", tilde_obs, prob))
    mean_pert = np.real(np.einsum("bmm,m->b", tilde_pert, prob))
    fluct = np.real(np.einsum("anm,bmn,mn->ab", tilde_obs, tilde_pert, g)) / zs
    return fluct + beta * np.outer(mean_obs, mean_pert)


class _ForwardModel:
    """Caches the v-independent parts of H(v) = H_base + sum_x v(x) n_x and
    produces densities plus response Jacobians."""

    def __init__(self, family: ProblemFamily):
        self.family = family
        space = family.space
        kin = kinetic_operator(space)
        if family.ensemble == "grand_canonical":
            self.basis = build_fock_basis(space, family.max_particles)
            self.base = assemble_fock_hamiltonian(self.basis, kin, family.pair)
        else:
            self.basis = build_sector_basis(space, family.num_particles)
            self.base = assemble_hamiltonian(self.basis, kin, family.pair)
        self.site_occ = self.basis.site_occupations()
        self.h = space.spacing
        self.L = space.num_sites

    def operator(self, v):
        return _with_matrix(self.base, self.base.matrix + sp.diags(self.site_occ @ v))

    def forward(self, v):
        """(density values, solved data) at potential v."""
        fam = self.family
        op = self.operator(v)
        if fam.ensemble == "ground":
            spec = full_spectrum(op)
            gap = spec.values[1] - spec.values[0] if len(spec.values) > 1 else math.inf
            if gap < GAP_REFUSAL:
                raise DegenerateGroundError(
                    f"gap {gap:.3e} below {GAP_REFUSAL:.1e}: density is set-valued here"
                )
            state = QuantumState.pure(self.basis, spec.vectors[:, 0])
            return density(state).values, spec
        if fam.ensemble == "canonical":
            gibbs = gibbs_canonical(op, fam.temperature)
        else:
            gibbs = gibbs_grand_canonical(op, fam.temperature)
        return density(gibbs.state).values, gibbs

    def density_jacobian(self, forward_data):
        observables = self.site_occ.T / self.h
        perturbations = self.site_occ.T  # dH/dv_y is the site-y number operator
        if self.family.ensemble == "ground":
            return _ground_response(forward_data, observables, perturbations)
        return _thermal_response(forward_data, observables, perturbations)


def _fd_jacobian(fn, x, step=1e-5):
    f0 = fn(x)
    J = np.zeros((len(f0), len(x)))
    for y in range(len(x)):
        dx = np.zeros_like(x)
        dx[y] = step
        J[:, y] = (fn(x + dx) - fn(x - dx)) / (2 * step)
    return J


def _mean_zero(x):
    return x - np.mean(x)


def _gauss_newton(residual_fn, jacobian_fn, x0, tol, max_iter, project=None):
    """Levenberg-damped Gauss-Newton on a vector residual; converged when
    the sup-norm of the residual reaches tol.

    Iterates keep polishing well below tol while improving steps exist, so
    recovered parameters track the residual floor, not the tolerance."""
    x = project(np.array(x0, dtype=float)) if project else np.array(x0, dtype=float)
    r = residual_fn(x)
    best = float(np.max(np.abs(r)))
    goal = max(tol * 1e-4, 1e-15)
    lam = 1e-10
    iterations = 0
    message = "max_iter reached"
    while iterations < max_iter:
        if best <= goal:
            break
        J = jacobian_fn(x)
        JTJ = J.T @ J
        JTr = J.T @ r
        # Marquardt scaling handles the wildly different parameter
        # sensitivities; the small ridge keeps exact gauge nulls solvable
        scale = np.diag(np.maximum(np.diag(JTJ), 1e-12))
        stepped = False
        for _ in range(40):
            try:
                delta = np.linalg.solve(JTJ + lam * scale + 1e-14 * np.eye(len(x)), -JTr)
            except np.linalg.LinAlgError:
                lam = max(lam * 10.0, 1e-12)
                continue
            if project is not None:
                delta = project(delta)
            trial = x + delta
            try:
                r_trial = residual_fn(trial)
            except DegenerateGroundError:
                # probe landed on a level crossing: reject the step, damp more
                lam = max(lam * 10.0, 1e-6)
                continue
            trial_res = float(np.max(np.abs(r_trial)))
            if trial_res < best:
                x, r, best = trial, r_trial, trial_res
                lam = max(lam * 0.3, 1e-14)
                stepped = True
                break
            lam *= 10.0
            if lam > 1e12:
                break
        iterations += 1
        if not stepped:
            if best > tol:
                message = "stagnated above tolerance"
            break
    return x, best, iterations, best <= tol, "converged" if best <= tol else message


def _validate_density_target(target, family: ProblemFamily):
    values = target.values if isinstance(target, DensityProfile) else np.asarray(target, float)
    if len(values) != family.space.num_sites:
        raise ValidationError("target density has the wrong number of sites")
    if np.any(values <= 1e-10):
        raise ValidationError("target density must be strictly positive on every site")
    if family.ensemble != "grand_canonical":
        mass = float(values.sum() * family.space.spacing)
        if abs(mass - family.num_particles) > 1e-6:
            raise ValidationError(
                f"target mass {mass} does not match N = {family.num_particles}"
            )
    return values


def invert_density(
    target_rho,
    family: ProblemFamily,
    v_init=None,
    tol: float = 1e-8,
    max_iter: int = 500,
    jacobian: str = "linear_response",
) -> InversionResult:
    """Recover the local potential whose (ground or Gibbs) density matches
    the target."""
    target = _validate_density_target(target_rho, family)
    model = _ForwardModel(family)
    gauge = family.ensemble != "grand_canonical"

    cache = {}

    def solved(v):
        key = v.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = model.forward(v)
        return cache[key]

    def residual(v):
        return solved(v)[0] - target

    def jac(v):
        if jacobian == "fd":
            return _fd_jacobian(lambda u: model.forward(u)[0], v)
        return model.density_jacobian(solved(v)[1])

    project = _mean_zero if gauge else None

    # the forward map is nonlinear enough for cold starts to stall in a
    # wrong basin occasionally; retry from an interaction-free inversion
    # (the effective-potential warm start) and then seeded random inits
    def candidate_starts():
        if v_init is not None:
            yield np.asarray(v_init, dtype=float)
            return
        yield np.zeros(model.L)
        if family.pair is not None:
            try:
                free = invert_density(
                    target, replace(family, pair=None), tol=1e-6, max_iter=60
                )
                yield free.v
            except (ValidationError, DegenerateGroundError):
                pass
        for attempt in range(6):
            rng = np.random.default_rng(2000 + attempt)
            start = (0.5 + 0.3 * attempt) * rng.normal(size=model.L)
            yield _mean_zero(start) if gauge else start

    budget = max(40, max_iter // 8)
    total_iters = 0
    best = None
    for x0 in candidate_starts():
        try:
            x, res, iters, converged, message = _gauss_newton(
                residual, jac, x0, tol, min(budget, max_iter - total_iters), project=project
            )
        except DegenerateGroundError:
            if best is None:
                raise  # the requested start itself sits on a crossing: refuse
            continue
        total_iters += iters
        if best is None or res < best[1]:
            best = (x, res, converged, message)
        if converged or total_iters >= max_iter:
            break
    x, res, converged, message = best
    iters = total_iters
    return InversionResult(
        v=x,
        w=None,
        temperature=family.temperature,
        residual=res,
        iterations=iters,
        gauge="mean-zero v" if gauge else "none",
        converged=converged,
        message=message,
    )


def invert_pair_density(
    target_rho2,
    family: ProblemFamily,
    init=None,
    tol: float = 1e-8,
    max_iter: int = 500,
    jacobian: str = "linear_response",
) -> InversionResult:
    """Recover (v, w) from a target pair density; ground-state families only.

    Gauge: both v and the displacement bins of w are reported mean-zero
    (each shifts only the energy, never the ground state)."""
    if family.ensemble != "ground":
        raise ValidationError("pair-density inversion is a ground-state problem")
    if family.num_particles < 2:
        raise ValidationError("pair density needs N >= 2")
    target = np.asarray(
        target_rho2.values if hasattr(target_rho2, "values") else target_rho2, dtype=float
    )
    space = family.space
    L = space.num_sites
    if target.shape != (L, L):
        raise ValidationError(f"target must be {L}x{L}")
    nbins = num_displacement_bins(space)
    basis = build_sector_basis(space, family.num_particles)
    h = space.spacing
    n = basis.site_occupations()

    # occupation-diagonal observables rho2(x, y), row-major over (x, y)
    obs = np.empty((L * L, basis.dim))
    k = 0
    for x in range(L):
        for y in range(L):
            vals = n[:, x] * n[:, y]
            if x == y:
                vals = vals - n[:, x]
            obs[k] = vals / (2.0 * h * h)
            k += 1
    # dH/dw_bin is the diagonal of the unit-bin interaction
    bin_diags = np.empty((nbins, basis.dim))
    for b in range(nbins):
        e = np.zeros(nbins)
        e[b] = 1.0
        bin_diags[b] = _pair_diagonal(basis, PairPotential.from_displacement(e))
    perturbations = np.vstack([n.T, bin_diags])

    kin = kinetic_operator(space)

    def split(theta):
        return theta[:L], theta[L:]

    def forward(theta):
        v, wbins = split(theta)
        op = assemble_hamiltonian(basis, kin, PairPotential.from_displacement(wbins))
        op = _with_matrix(op, op.matrix + sp.diags(n @ v))
        spec = full_spectrum(op)
        gap = spec.values[1] - spec.values[0]
        if gap < GAP_REFUSAL:
            raise DegenerateGroundError(f"gap {gap:.3e}: pair density is set-valued here")
        state = QuantumState.pure(basis, spec.vectors[:, 0])
        return pair_density(state).values, spec

    cache = {}

    def solved(theta):
        key = theta.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = forward(theta)
        return cache[key]

    def residual(theta):
        return (solved(theta)[0] - target).ravel()

    def jac(theta):
        if jacobian == "fd":
            return _fd_jacobian(lambda t: forward(t)[0].ravel(), theta)
        return _ground_response(solved(theta)[1], obs, perturbations)

    def project(theta):
        v, wbins = split(theta)
        return np.concatenate([_mean_zero(v), _mean_zero(wbins)])

    # the pair objective is nonconvex: on stagnation, retry from the
    # marginal-density warm start and then from seeded random inits
    def candidate_starts():
        if init is not None:
            yield np.asarray(init, dtype=float)
            return
        yield np.zeros(L + nbins)
        try:
            marginal = target.sum(axis=1) * 2.0 / (family.num_particles - 1) * h
            staged = invert_density(marginal, family, tol=1e-6, max_iter=60)
            yield np.concatenate([staged.v, np.zeros(nbins)])
        except (ValidationError, DegenerateGroundError):
            pass
        for attempt in range(3):
            rng = np.random.default_rng(1000 + attempt)
            yield project(0.5 * rng.normal(size=L + nbins))

    budget = max(50, max_iter // 5)
    total_iters = 0
    best = None
    for x0 in candidate_starts():
        try:
            x, res, iters, converged, message = _gauss_newton(
                residual, jac, x0, tol, min(budget, max_iter - total_iters), project=project
            )
        except DegenerateGroundError:
            if best is None:
                raise  # the requested start itself sits on a crossing: refuse
            continue
        total_iters += iters
        if best is None or res < best[1]:
            best = (x, res, converged, message)
        if converged or total_iters >= max_iter:
            break
    x, res, converged, message = best
    iters = total_iters
    v, wbins = split(x)
    return InversionResult(
        v=v,
        w=wbins,
        temperature=None,
        residual=res,
        iterations=iters,
        gauge="mean-zero v and w",
        converged=converged,
        message=message,
    )


def invert_v_and_T(
    target,
    family: ProblemFamily,
    t_bracket,
    tol: float = 1e-6,
    density_tol: float = 1e-9,
    max_iter: int = 500,
) -> InversionResult:
    """Recover (v, T) from a (density, entropy) target: golden-section search
    over T, inverting the density at each fixed T.

    Converged only when both sub-objectives land: the density residual of the
    inner inversion at T* and the entropy mismatch |S(v*(T*), T*) - S_target|.
    An entropy target of zero is unreachable at T > 0 (Gibbs states are never
    pure there), so such runs report converged = False.
    """
    rho_target, s_target = target
    t_lo, t_hi = float(t_bracket[0]), float(t_bracket[1])
    if not 0 < t_lo < t_hi:
        raise ValidationError("bracket must satisfy 0 < T_lo < T_hi")

    warm = {"v": None}

    def subproblem(T):
        fam = replace(family, temperature=T)
        result = invert_density(
            rho_target, fam, v_init=warm["v"], tol=density_tol, max_iter=60
        )
        warm["v"] = result.v
        model = _ForwardModel(fam)
        _, data = model.forward(result.v)
        return abs(entropy(data.state) - s_target), result

    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = t_lo, t_hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, rc = subproblem(c)
    fd, rd = subproblem(d)
    evals = 2
    while (b - a) > 1e-7 * (t_lo + t_hi) / 2 and evals < max_iter:
        if fc <= fd:
            b, d, fd, rd = d, c, fc, rc
            c = b - phi * (b - a)
            fc, rc = subproblem(c)
        else:
            a, c, fc, rc = c, d, fd, rd
            d = a + phi * (b - a)
            fd, rd = subproblem(d)
        evals += 1
    if fc <= fd:
        t_star, f_star, inner = c, fc, rc
    else:
        t_star, f_star, inner = d, fd, rd
    converged = bool(f_star <= tol and inner.converged)
    if converged:
        message = "converged"
    elif f_star > tol:
        message = "entropy target unreachable in bracket"
    else:
        message = inner.message
    return InversionResult(
        v=inner.v,
        w=None,
        temperature=t_star,
        residual=max(f_star, inner.residual),
        iterations=evals,
        gauge=inner.gauge,
        converged=converged,
        message=message,
    )
