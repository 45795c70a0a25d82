"""Named potential and interaction generators for declarative experiment
configs: a single well, a double well, and seeded uniform noise."""

import numpy as np

from .exceptions import ConfigError
from .hilbert import LatticeSpace


def potential_well(space: LatticeSpace, depth=2.0, center=None, width=None):
    """Attractive square well of the given depth (v = -depth inside)."""
    L = space.num_sites
    center = L // 2 if center is None else int(center)
    width = max(1, L // 3) if width is None else int(width)
    v = np.zeros(L)
    half = width // 2
    lo, hi = max(0, center - half), min(L, center - half + width)
    v[lo:hi] = -float(depth)
    return v


def potential_double_well(space: LatticeSpace, depth=2.0, separation=None, width=1):
    """Two attractive wells placed symmetrically about the chain center."""
    L = space.num_sites
    separation = max(2, L // 2) if separation is None else int(separation)
    width = int(width)
    c1 = max(0, L // 2 - separation // 2 - width // 2)
    c2 = min(L - width, L // 2 + (separation + 1) // 2 - width // 2)
    v = np.zeros(L)
    v[c1 : c1 + width] -= float(depth)
    v[c2 : c2 + width] -= float(depth)
    return v


def potential_random_uniform(space: LatticeSpace, low=-1.0, high=1.0, seed=0, mean_zero=False):
    rng = np.random.default_rng(seed)
    v = rng.uniform(float(low), float(high), size=space.num_sites)
    return v - v.mean() if mean_zero else v


GENERATORS = {
    "well": potential_well,
    "double-well": potential_double_well,
    "random-uniform": potential_random_uniform,
}


def make_potential(space: LatticeSpace, spec: dict, key="potential"):
    """Resolve a config block into a per-site array.

    Blocks are either {"kind": "inline", "values": [...]}, a named generator
    with its parameters, or {"kind": "csv", "path": ...} with one value per
    row (last column)."""
    if spec is None:
        return np.zeros(space.num_sites)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{key}: expected an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "inline":
        values = np.asarray(spec.get("values"), dtype=float)
        if values.shape != (space.num_sites,):
            raise ConfigError(f"{key}.values: need {space.num_sites} entries")
        return values
    if kind == "csv":
        path = spec.get("path")
        if not path:
            raise ConfigError(f"{key}.path: missing CSV path")
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError:
            # header row, as written by the run records themselves
            data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1)
        values = data[:, -1]
        if len(values) != space.num_sites:
            raise ConfigError(f"{key}.path: CSV has {len(values)} rows, need {space.num_sites}")
        return values
    if kind in GENERATORS:
        params = {k: v for k, v in spec.items() if k != "kind"}
        try:
            return GENERATORS[kind](space, **params)
        except TypeError as err:
            raise ConfigError(f"{key}: bad parameters for generator '{kind}': {err}") from err
    raise ConfigError(f"{key}.kind: unknown generator {kind!r}")
