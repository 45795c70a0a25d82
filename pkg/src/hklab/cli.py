"""Batch experiment runner.

Every command reads one JSON config file, runs, and writes a machine-readable
record (record.json with the fully resolved config, its digest, the seed, and
all scalar results) plus CSV files for array results into the output
directory.  Re-running an identical config and seed reproduces the scalar
results byte-for-byte.

Exit codes: 0 success / verdict true, 2 verdict false or violated, 1 error
(malformed configs name the offending key).

Config grammar (JSON):

    {
      "command":   "solve" | "thermal" | "metric" | "invert"
                   | "counterexample" | "verify" | "sweep",
      "lattice":   {"num_sites": 6, "spin_dim": 2,
                    "boundary": "dirichlet", "spacing": 1.0},
      "particles": {"num_particles": 2}            # or {"max_particles": 2}
      "potential": {"kind": "well" | "double-well" | "random-uniform"
                            | "inline" | "csv", ...},
      "interaction": {"kind": "displacement" | "kernel" | "random-displacement",
                      "values": [...]} | null,
      "magnetic_field": {"kind": "uniform-z", "b": 0.1} |
                        {"kind": "inline", "values": [[bx,by,bz], ...]} | null,
      "temperature": 0.5,                          # thermal commands
      ... command-specific keys, see each _cmd_* runner ...
    }

Arrays may be inline or CSV paths; named generators carry their own seeds so
sweeps stay declarative and reproducible.
"""

import argparse
import concurrent.futures
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .counterexamples import capelle_vignale_pair, gilbert_counterexample
from .exceptions import ConfigError, HKLabError
from .generators import make_potential
from .hilbert import (
    LatticeSpace,
    MagneticField,
    kinetic_operator,
    local_potential_operator,
    nonlocal_operator,
)
from .hktheory import (
    hk_semimetric,
    nonlocal_thermal_pairing,
    solve_system,
    solve_thermal_system,
    thermal_semimetric,
    variational_slacks,
    verify_constancy,
)
from .inverse import ProblemFamily, invert_density, invert_pair_density, invert_v_and_T
from .manybody import PairPotential, num_displacement_bins
from .observables import (
    average_particle_number,
    density,
    magnetization,
    one_rdm,
    pair_density,
)
from .verify import run_suite


# ---------------------------------------------------------------------------
# config resolution


def _require(cfg, key, context=""):
    if key not in cfg:
        raise ConfigError(f"{context}{key}: missing required key")
    return cfg[key]


def _build_space(cfg) -> LatticeSpace:
    lat = _require(cfg, "lattice")
    if not isinstance(lat, dict):
        raise ConfigError("lattice: expected an object")
    try:
        return LatticeSpace(
            num_sites=int(_require(lat, "num_sites", "lattice.")),
            spin_dim=int(lat.get("spin_dim", 2)),
            boundary=lat.get("boundary", "dirichlet"),
            spacing=float(lat.get("spacing", 1.0)),
        )
    except HKLabError as err:
        raise ConfigError(f"lattice: {err}") from err


def _build_interaction(space, block, key="interaction"):
    if block is None:
        return None
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError(f"{key}: expected an object with a 'kind' field")
    kind = block["kind"]
    nbins = num_displacement_bins(space)
    if kind == "displacement":
        values = np.asarray(_require(block, "values", f"{key}."), dtype=float)
        if len(values) != nbins:
            raise ConfigError(f"{key}.values: need {nbins} displacement bins")
        return PairPotential.from_displacement(values)
    if kind == "kernel":
        values = np.asarray(_require(block, "values", f"{key}."), dtype=float)
        return PairPotential.from_kernel(values)
    if kind == "random-displacement":
        rng = np.random.default_rng(int(block.get("seed", 0)))
        lo, hi = float(block.get("low", -0.5)), float(block.get("high", 0.5))
        return PairPotential.from_displacement(rng.uniform(lo, hi, size=nbins))
    raise ConfigError(f"{key}.kind: unknown interaction kind {kind!r}")


def _build_field(space, block, key="magnetic_field"):
    if block is None:
        return None
    kind = block.get("kind")
    if kind == "uniform-z":
        b = float(_require(block, "b", f"{key}."))
        return MagneticField(np.tile([0.0, 0.0, b], (space.num_sites, 1)))
    if kind == "inline":
        return MagneticField(np.asarray(_require(block, "values", f"{key}."), dtype=float))
    if kind == "random":
        rng = np.random.default_rng(int(block.get("seed", 0)))
        scale = float(block.get("scale", 1.0))
        return MagneticField(scale * rng.normal(size=(space.num_sites, 3)))
    raise ConfigError(f"{key}.kind: unknown field kind {kind!r}")


def _particles(cfg):
    part = _require(cfg, "particles")
    n = part.get("num_particles")
    nmax = part.get("max_particles")
    if (n is None) == (nmax is None):
        raise ConfigError("particles: give exactly one of num_particles or max_particles")
    return (int(n) if n is not None else None, int(nmax) if nmax is not None else None)


def config_digest(cfg) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# record output


def _write_csv(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")


def _write_record(outdir: Path, record, arrays, quiet):
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, (header, rows) in arrays.items():
        path = outdir / f"{name}.csv"
        _write_csv(path, header, rows)
        files[name] = str(path)
    record["array_files"] = files
    path = outdir / "record.json"
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        scalars = record.get("scalars", {})
        print(f"[{record['command']}] digest={record['config_digest']} -> {path}")
        for key, val in scalars.items():
            print(f"  {key} = {val}")
    return path


def _density_rows(rho):
    return ["site", "value"], list(enumerate(rho.values.tolist()))


# ---------------------------------------------------------------------------
# command runners; each returns (exit_code, scalars, arrays)


def _cmd_solve(cfg, seed):
    space = _build_space(cfg)
    n, nmax = _particles(cfg)
    if n is None:
        raise ConfigError("particles.num_particles: ground-state solve needs a fixed N")
    v = make_potential(space, cfg.get("potential"))
    pair = _build_interaction(space, cfg.get("interaction"))
    b_field = _build_field(space, cfg.get("magnetic_field"))
    sys = solve_system(space, n, v=v, pair=pair, b_field=b_field,
                       degeneracy_tol=float(cfg.get("degeneracy_tol", 1e-8)), seed=seed)
    state = sys.state()
    rho = density(state)
    scalars = {
        "energy": sys.energy,
        "degeneracy": sys.solution.degeneracy,
        "gap": sys.solution.gap,
        "entropy": 0.0,
        "density_mass": rho.mass,
    }
    arrays = {"density": _density_rows(rho)}
    rdm = one_rdm(state)
    occ = rdm.occupation_spectrum()
    arrays["rdm_occupations"] = (["index", "occupation"], list(enumerate(occ.tolist())))
    if space.spin_dim == 2:
        m = magnetization(state).values
        arrays["magnetization"] = (
            ["site", "mx", "my", "mz"],
            [(x, *m[x].tolist()) for x in range(space.num_sites)],
        )
    if n >= 2:
        rho2 = pair_density(state).values
        arrays["pair_density"] = (
            ["x", "y", "value"],
            [(x, y, float(rho2[x, y])) for x in range(space.num_sites) for y in range(space.num_sites)],
        )
    return 0, scalars, arrays


def _cmd_thermal(cfg, seed):
    space = _build_space(cfg)
    n, nmax = _particles(cfg)
    T = float(_require(cfg, "temperature"))
    v = make_potential(space, cfg.get("potential"))
    pair = _build_interaction(space, cfg.get("interaction"))
    sys = solve_thermal_system(space, T, v=v, pair=pair,
                               num_particles=n, max_particles=nmax)
    rho = density(sys.gibbs.state)
    scalars = {
        "temperature": T,
        "ensemble": sys.ensemble,
        "log_partition_function": sys.gibbs.log_z,
        "free_energy": sys.gibbs.free_energy,
        "entropy": sys.gibbs.entropy,
        "mean_energy": sys.gibbs.mean_energy,
        "mean_particle_number": average_particle_number(sys.gibbs.state),
        "density_mass": rho.mass,
    }
    return 0, scalars, {"density": _density_rows(rho)}


def _subsystem_cfg(cfg, key):
    sub = dict(_require(cfg, key))
    merged = {k: v for k, v in cfg.items() if k in ("lattice", "particles")}
    merged.update(sub)
    return merged


def _cmd_metric(cfg, seed):
    space = _build_space(cfg)
    n, nmax = _particles(cfg)
    which = cfg.get("metric", "ground")
    sub1 = _subsystem_cfg(cfg, "system1")
    sub2 = _subsystem_cfg(cfg, "system2")
    scalars = {"metric": which}
    arrays = {}
    if which == "ground":
        if n is None:
            raise ConfigError("particles.num_particles: ground metric needs a fixed N")
        pair = _build_interaction(space, cfg.get("interaction"))
        s1 = solve_system(space, n, v=make_potential(space, sub1.get("potential"), "system1.potential"),
                          pair=pair, seed=seed)
        s2 = solve_system(space, n, v=make_potential(space, sub2.get("potential"), "system2.potential"),
                          pair=pair, seed=seed)
        value = hk_semimetric(s1, s2)
        slack1, slack2 = variational_slacks(s1, s2)
        report = verify_constancy(s1, s2)
        scalars.update(
            semimetric=value, slack1=slack1, slack2=slack2,
            conclusion=report.conclusion.value,
            energy1=s1.energy, energy2=s2.energy,
        )
        verdict = value >= -1e-9
    elif which in ("thermal", "nonlocal"):
        pair = _build_interaction(space, cfg.get("interaction"))

        def build(sub, key):
            T = float(_require(sub, "temperature", key + "."))
            g_block = sub.get("nonlocal")
            g = None
            if g_block is not None:
                g = nonlocal_operator(space, np.asarray(g_block["values"], dtype=complex))
            return solve_thermal_system(
                space, T, v=make_potential(space, sub.get("potential"), key + ".potential"),
                pair=pair, g=g, num_particles=n, max_particles=nmax,
            )

        t1, t2 = build(sub1, "system1"), build(sub2, "system2")
        if which == "thermal":
            value = thermal_semimetric(t1, t2)
        else:
            value = nonlocal_thermal_pairing(t1, t2)
        scalars.update(
            pairing=value,
            entropy1=t1.entropy, entropy2=t2.entropy,
            log_z1=t1.gibbs.log_z, log_z2=t2.gibbs.log_z,
        )
        verdict = value >= -1e-9
    else:
        raise ConfigError(f"metric: unknown metric kind {which!r}")
    scalars["verdict"] = bool(verdict)
    return (0 if verdict else 2), scalars, arrays


def _cmd_invert(cfg, seed):
    space = _build_space(cfg)
    n, nmax = _particles(cfg)
    kind = _require(cfg, "inversion")
    pair = _build_interaction(space, cfg.get("interaction"))
    target_cfg = _require(cfg, "target")
    if target_cfg.get("kind") != "forward":
        raise ConfigError("target.kind: only 'forward' targets are supported")
    true_v = make_potential(space, target_cfg.get("potential"), "target.potential")
    tol = float(cfg.get("tol", 1e-8))
    arrays = {}
    if kind == "density":
        T = cfg.get("temperature")
        family = ProblemFamily(space=space, num_particles=n, max_particles=nmax,
                               pair=pair, temperature=None if T is None else float(T))
        if family.ensemble == "ground":
            sys = solve_system(space, n, v=true_v, pair=pair, seed=seed)
            target = density(sys.state())
        else:
            tsys = solve_thermal_system(space, float(T), v=true_v, pair=pair,
                                        num_particles=n, max_particles=nmax)
            target = density(tsys.gibbs.state)
        result = invert_density(target, family, tol=tol,
                                max_iter=int(cfg.get("max_iter", 500)))
        arrays["recovered_v"] = (["site", "value"], list(enumerate(result.v.tolist())))
    elif kind == "pair_density":
        family = ProblemFamily(space=space, num_particles=n, pair=None)
        true_w = _build_interaction(space, target_cfg.get("interaction"), "target.interaction")
        sys = solve_system(space, n, v=true_v, pair=true_w, seed=seed)
        target = pair_density(sys.state())
        result = invert_pair_density(target, family, tol=tol,
                                     max_iter=int(cfg.get("max_iter", 500)))
        arrays["recovered_v"] = (["site", "value"], list(enumerate(result.v.tolist())))
        arrays["recovered_w"] = (["bin", "value"], list(enumerate(result.w.tolist())))
    elif kind == "v_and_T":
        T0 = float(_require(target_cfg, "temperature", "target."))
        family = ProblemFamily(space=space, num_particles=n, max_particles=nmax,
                               pair=pair, temperature=T0)
        tsys = solve_thermal_system(space, T0, v=true_v, pair=pair,
                                    num_particles=n, max_particles=nmax)
        target = (density(tsys.gibbs.state), tsys.entropy)
        bracket = cfg.get("t_bracket", [T0 / 4, T0 * 4])
        result = invert_v_and_T(target, family, bracket, tol=float(cfg.get("tol", 1e-6)))
        arrays["recovered_v"] = (["site", "value"], list(enumerate(result.v.tolist())))
    else:
        raise ConfigError(f"inversion: unknown inversion kind {kind!r}")
    scalars = {
        "inversion": kind,
        "converged": bool(result.converged),
        "residual": result.residual,
        "iterations": result.iterations,
        "gauge": result.gauge,
        "message": result.message,
    }
    if result.temperature is not None:
        scalars["recovered_temperature"] = result.temperature
    return (0 if result.converged else 2), scalars, arrays


def _cmd_counterexample(cfg, seed):
    space = _build_space(cfg)
    n, _ = _particles(cfg)
    construction = _require(cfg, "construction")
    arrays = {}
    if construction == "gilbert":
        rng = np.random.default_rng(seed)
        diag_scale = float(cfg.get("diagonal_scale", 1.0))
        g1 = kinetic_operator(space) + local_potential_operator(
            space, diag_scale * rng.normal(size=space.num_sites)
        )
        eps = cfg.get("epsilon")
        cert = gilbert_counterexample(space, n, g1, None if eps is None else float(eps))
        scalars = {
            "construction": construction,
            "verdict": bool(cert.verdict),
            "operator_distance": cert.operator_distance,
            "reduced_data_distance": cert.reduced_data_distance,
            "energy1": cert.energies[0],
            "energy2": cert.energies[1],
            "epsilon": cert.extras["epsilon"],
            "overlap": cert.extras["overlap"],
        }
    elif construction == "capelle-vignale":
        v = make_potential(space, cfg.get("potential"))
        pair = _build_interaction(space, cfg.get("interaction"))
        bias = cfg.get("bias")
        cert, chi = capelle_vignale_pair(space, n, v, pair=pair,
                                         bias=None if bias is None else float(bias), seed=seed)
        scalars = {
            "construction": construction,
            "verdict": bool(cert.verdict),
            "operator_distance": cert.operator_distance,
            "reduced_data_distance": cert.reduced_data_distance,
            "energy1": cert.energies[0],
            "energy2": cert.energies[1],
            "bias": cert.extras["bias"],
            "spin_eigenvalue": cert.extras["spin_eigenvalue"],
            "max_snap_error": chi.max_snap_error,
        }
        arrays["chi"] = (
            ["site", "raw", "snapped", "active"],
            [
                (x, float(chi.raw[x]), float(chi.snapped[x]), int(chi.active[x]))
                for x in range(space.num_sites)
            ],
        )
    else:
        raise ConfigError(f"construction: unknown construction {construction!r}")
    return (0 if scalars["verdict"] else 2), scalars, arrays


def _cmd_verify(cfg, seed):
    suite = _require(cfg, "suite")
    params = cfg.get("params", {})
    try:
        result = run_suite(suite, seed=seed, **params)
    except KeyError as err:
        raise ConfigError(f"suite: {err.args[0]}") from err
    except TypeError as err:
        raise ConfigError(f"params: {err}") from err
    scalars = {"suite": suite, "passed": bool(result.passed)}
    scalars.update({k: v for k, v in result.stats.items()})
    return (0 if result.passed else 2), scalars, {}


RUNNERS = {
    "solve": _cmd_solve,
    "thermal": _cmd_thermal,
    "metric": _cmd_metric,
    "invert": _cmd_invert,
    "counterexample": _cmd_counterexample,
    "verify": _cmd_verify,
}


def run_config(cfg, seed, outdir: Path, quiet=False):
    """Execute one resolved config; returns the exit code."""
    command = _require(cfg, "command")
    if command == "sweep":
        return _run_sweep(cfg, seed, outdir, quiet)
    if command not in RUNNERS:
        raise ConfigError(f"command: unknown command {command!r}")
    resolved = dict(cfg)
    resolved["seed"] = seed
    digest = config_digest(resolved)
    start = time.perf_counter()
    code, scalars, arrays = RUNNERS[command](cfg, seed)
    wall = time.perf_counter() - start
    record = {
        "command": command,
        "config_digest": digest,
        "resolved_config": resolved,
        "seed": seed,
        "scalars": scalars,
        "exit_status": code,
        "wall_time_s": wall,
    }
    _write_record(outdir / digest, record, arrays, quiet)
    return code


def _run_one_sweep_entry(args):
    sub, seed, outdir_str, quiet = args
    try:
        return run_config(sub, seed, Path(outdir_str), quiet=True)
    except HKLabError as err:
        if not quiet:
            print(f"sweep entry failed: {err}", file=sys.stderr)
        return 1


def _run_sweep(cfg, seed, outdir: Path, quiet):
    runs = _require(cfg, "runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("runs: need a nonempty list of sub-configs")
    entries = []
    for i, sub in enumerate(runs):
        if not isinstance(sub, dict):
            raise ConfigError(f"runs[{i}]: expected an object")
        entries.append((sub, int(sub.get("seed", seed)), str(outdir), quiet))
    workers = int(cfg.get("max_workers", 1))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_run_one_sweep_entry, entries))
    else:
        codes = [_run_one_sweep_entry(e) for e in entries]
    # deterministic merge: index records by digest, sorted
    digests = sorted(
        config_digest({**sub, "seed": sd}) for sub, sd, _, _ in entries
    )
    summary = {
        "command": "sweep",
        "config_digest": config_digest({**cfg, "seed": seed}),
        "seed": seed,
        "scalars": {"num_runs": len(runs), "num_failures": sum(c != 0 for c in codes)},
        "run_digests": digests,
        "exit_status": max(codes),
    }
    _write_record(outdir, summary, {}, quiet)
    return max(codes)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hklab",
        description="Exact-diagonalization experiments on density-functional dualities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*RUNNERS, "sweep"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default="hklab_runs", help="output directory")
        p.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as err:
        print(f"error: config is not valid JSON: {err}", file=sys.stderr)
        return 1
    if not isinstance(cfg, dict):
        print("error: config root must be an object", file=sys.stderr)
        return 1
    cfg.setdefault("command", args.command)
    if cfg["command"] != args.command:
        print(
            f"error: command: config says {cfg['command']!r} but subcommand is {args.command!r}",
            file=sys.stderr,
        )
        return 1
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    try:
        return run_config(cfg, seed, Path(args.out), quiet=args.quiet)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except HKLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
