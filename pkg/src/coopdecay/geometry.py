"""Lattice construction and disorder sampling.

Atom arrays are built in natural units: the single-emitter decay rate
gamma0 is the rate unit, the transition wavelength lambda0 the length
unit, hence k0 = 2*pi. Half-waveguide chains run along z with the mirror
at z = 0; free-space chains run along x with the dipole along z.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from itertools import product
from pathlib import Path

import numpy as np

from .errors import DegenerateConfigurationError, ValidationError


@dataclass(frozen=True)
class UnitsConvention:
    """Natural units used throughout: rates in gamma0, lengths in lambda0."""

    gamma0: float = 1.0
    lambda0: float = 1.0

    @property
    def k0(self) -> float:
        return 2.0 * np.pi / self.lambda0


UNITS = UnitsConvention()
K0 = UNITS.k0
GAMMA0 = UNITS.gamma0

# Two atoms closer than this (in lambda0) make the free-space coupling
# numerically singular; offending offsets are resampled.
EPS_MIN = 1e-9

_MAX_RESAMPLE = 1000

# Sub-streams of the per-realization RNG, so positions, detunings and
# initial-state phases never share draws.
STREAM_POSITION = 0
STREAM_DETUNING = 1
STREAM_STATE = 2


class Environment(str, Enum):
    HALF_WAVEGUIDE = "half_waveguide"
    FREE_SPACE_1D = "free_space_1d"
    FREE_SPACE_2D = "free_space_2d"
    FREE_SPACE_3D = "free_space_3d"


_EXPECTED_DIMS = {
    Environment.HALF_WAVEGUIDE: 1,
    Environment.FREE_SPACE_1D: 1,
    Environment.FREE_SPACE_2D: 2,
    Environment.FREE_SPACE_3D: 3,
}


@dataclass(frozen=True)
class LatticeSpec:
    """Ordered-lattice parameters: environment, per-axis extents, spacing."""

    environment: Environment
    extents: tuple[int, ...]
    a: float  # lattice constant in lambda0

    def __post_init__(self):
        env = Environment(self.environment)
        object.__setattr__(self, "environment", env)
        object.__setattr__(self, "extents", tuple(int(n) for n in self.extents))
        ndim = _EXPECTED_DIMS[env]
        if len(self.extents) != ndim:
            raise ValidationError(
                f"{env.value} expects {ndim} extent(s), got {len(self.extents)}")
        if any(n < 1 for n in self.extents):
            raise ValidationError(f"extents must be positive, got {self.extents}")
        if not (self.a > 0):
            raise ValidationError(f"lattice spacing must be > 0, got {self.a}")

    @property
    def n_atoms(self) -> int:
        return int(np.prod(self.extents))


@dataclass(frozen=True)
class DisorderSpec:
    """Disorder strengths and the RNG identity of one realization.

    r_d is the positional width as a fraction of the lattice constant;
    omega_d the detuning width in gamma0. A fixed (seed, realization_index)
    pair always reproduces the same realization.
    """

    r_d: float = 0.0
    omega_d: float = 0.0
    seed: int = 0
    realization_index: int = 0

    def __post_init__(self):
        if self.r_d < 0:
            raise ValidationError(f"r_d must be >= 0, got {self.r_d}")
        if not (0.0 <= self.omega_d <= 1.0):
            raise ValidationError(
                f"omega_d must lie in [0, 1] gamma0, got {self.omega_d}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.realization_index < 0:
            raise ValidationError("realization_index must be >= 0")

    def rng(self, stream: int) -> np.random.Generator:
        """Independent generator for one draw category of this realization."""
        return np.random.default_rng(
            [int(self.seed), int(self.realization_index), int(stream)])


def realization_specs(dis: DisorderSpec, count: int) -> list[DisorderSpec]:
    """The first `count` realizations of a disorder ensemble."""
    return [replace(dis, realization_index=k) for k in range(count)]


@dataclass(frozen=True)
class ArrayGeometry:
    """One concrete array realization: positions, detunings, dipole axis."""

    environment: Environment
    positions: np.ndarray   # (N, 3), lambda0 units
    detunings: np.ndarray   # (N,), gamma0 units
    dipole: np.ndarray      # (3,), unit vector

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        det = np.array(self.detunings, dtype=float)
        dip = np.array(self.dipole, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError(f"positions must be (N, 3), got {pos.shape}")
        if det.shape != (pos.shape[0],):
            raise ValidationError("detunings length must match positions")
        if abs(np.linalg.norm(dip) - 1.0) > 1e-12:
            raise ValidationError("dipole must be a unit vector (|d| = 1 +/- 1e-12)")
        env = Environment(self.environment)
        if env is Environment.HALF_WAVEGUIDE and np.any(pos[:, 2] <= 0):
            raise ValidationError("half-waveguide atoms must sit strictly at z > 0")
        if pos.shape[0] > 1:
            if _min_pair_distance(pos) < EPS_MIN:
                raise ValidationError(
                    f"atom pair closer than eps_min = {EPS_MIN} lambda0")
        for arr in (pos, det, dip):
            arr.setflags(write=False)
        object.__setattr__(self, "environment", env)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "dipole", dip)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


def _min_pair_distance(pos: np.ndarray) -> float:
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def build_ordered(spec: LatticeSpec) -> ArrayGeometry:
    """Ordered array with zero detunings.

    Half waveguide: z_i = i*a for i = 1..N (nearest atom one spacing from
    the mirror). Free space: chain along x, square lattice in the xy plane,
    or cube; the dipole points along z, a lattice axis in 3D and
    perpendicular to the array otherwise.
    """
    env = spec.environment
    a = spec.a
    n = spec.n_atoms
    positions = np.zeros((n, 3))
    if env is Environment.HALF_WAVEGUIDE:
        positions[:, 2] = a * np.arange(1, n + 1)
    elif env is Environment.FREE_SPACE_1D:
        positions[:, 0] = a * np.arange(1, n + 1)
    else:
        axes = [a * np.arange(1, m + 1) for m in spec.extents]
        grid = np.array(list(product(*axes)))  # last axis fastest
        positions[:, :len(spec.extents)] = grid
    return ArrayGeometry(
        environment=env,
        positions=positions,
        detunings=np.zeros(n),
        dipole=np.array([0.0, 0.0, 1.0]),
    )


def _disorder_axes(env: Environment) -> list[int]:
    # Offsets stay within the lattice's own axes: no out-of-plane kicks.
    if env is Environment.HALF_WAVEGUIDE:
        return [2]
    if env is Environment.FREE_SPACE_1D:
        return [0]
    if env is Environment.FREE_SPACE_2D:
        return [0, 1]
    return [0, 1, 2]


def apply_positional_disorder(geom: ArrayGeometry, spec: LatticeSpec,
                              dis: DisorderSpec) -> ArrayGeometry:
    """Offset every atom by independent uniform draws of width r_d * a.

    One draw per lattice axis per atom. An offset that pushes a
    half-waveguide atom to z <= 0 or any pair closer than eps_min is
    redrawn for the offending atom.
    """
    if dis.r_d == 0.0:
        return geom
    rng = dis.rng(STREAM_POSITION)
    half = dis.r_d * spec.a / 2.0
    axes = _disorder_axes(geom.environment)
    base = geom.positions
    out = base.copy()
    hwg = geom.environment is Environment.HALF_WAVEGUIDE
    for i in range(geom.n_atoms):
        for attempt in range(_MAX_RESAMPLE):
            trial = base[i].copy()
            trial[axes] += rng.uniform(-half, half, size=len(axes))
            if hwg and trial[2] <= 0:
                continue
            if i > 0:
                d = np.linalg.norm(out[:i] - trial, axis=1)
                if d.min() < EPS_MIN:
                    continue
            out[i] = trial
            break
        else:
            raise DegenerateConfigurationError(
                f"atom {i}: no admissible offset after {_MAX_RESAMPLE} draws "
                f"(seed={dis.seed}, realization={dis.realization_index})")
    return ArrayGeometry(geom.environment, out, geom.detunings.copy(), geom.dipole)


def apply_detuning_disorder(geom: ArrayGeometry, dis: DisorderSpec) -> ArrayGeometry:
    """Draw each detuning uniformly from [-omega_d/2, +omega_d/2] gamma0."""
    if dis.omega_d == 0.0:
        return geom
    rng = dis.rng(STREAM_DETUNING)
    det = rng.uniform(-dis.omega_d / 2.0, dis.omega_d / 2.0, size=geom.n_atoms)
    return ArrayGeometry(geom.environment, geom.positions.copy(), det, geom.dipole)


def build_realization(spec: LatticeSpec, dis: DisorderSpec) -> ArrayGeometry:
    """Ordered lattice with both disorder channels of one realization applied."""
    geom = build_ordered(spec)
    geom = apply_positional_disorder(geom, spec, dis)
    return apply_detuning_disorder(geom, dis)


def geometry_to_dict(geom: ArrayGeometry, spec: LatticeSpec | None = None) -> dict:
    out = {
        "environment": geom.environment.value,
        "dipole": geom.dipole.tolist(),
        "positions": geom.positions.tolist(),
        "detunings": geom.detunings.tolist(),
    }
    if spec is not None:
        out["a"] = spec.a
        out["extents"] = list(spec.extents)
    return out


def save_geometry(geom: ArrayGeometry, path: str | Path,
                  spec: LatticeSpec | None = None) -> None:
    Path(path).write_text(json.dumps(geometry_to_dict(geom, spec), indent=1))


def load_geometry(path: str | Path) -> ArrayGeometry:
    data = json.loads(Path(path).read_text())
    return ArrayGeometry(
        environment=Environment(data["environment"]),
        positions=np.array(data["positions"], dtype=float),
        detunings=np.array(data["detunings"], dtype=float),
        dipole=np.array(data["dipole"], dtype=float),
    )
