"""Pairwise photon-mediated couplings and the effective Hamiltonian.

Two radiative environments are supported. In the mirror-terminated
waveguide the complex pair coupling is

    M = -(i*gamma0/2) * [exp(-i*k0*|z_i - z_j|) - exp(-i*k0*(z_i + z_j))],

the image term carrying the mirror at z = 0. In free space it is the
projected vacuum field propagator of a point dipole,

    M = -(3*pi*gamma0/k0) * d^T G(r, k0) d,

with the delta-function contact term excluded (self-energies are absorbed
into the transition frequency). Either way J = Re M is the coherent
exchange and Gamma = -2 Im M the dissipative coupling, and the
single-excitation generator is

    H = diag(Delta) + J - (i/2) Gamma

in the frame rotating at the bare transition frequency. In free space the
diagonal is J_ii = 0, Gamma_ii = gamma0: the (infinite, uniform) Lamb
shift is absorbed into the transition frequency. In the half waveguide
both diagonal parts come from the kernel at z_i = z_j, which leaves the
position-dependent mirror terms Gamma_ii = gamma0*(1 - cos(2 k0 z_i)) and
J_ii = (gamma0/2) sin(2 k0 z_i); the latter acts as a quasi-periodic
on-site potential and cannot be absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SingularSeparationError, ValidationError
from .geometry import EPS_MIN, GAMMA0, K0, ArrayGeometry, Environment

# Below this value of x = k0*r the 1/x^2 pieces of the free-space
# dissipative coefficients cancel to ~eps/x^2 relative accuracy, so the
# evaluation switches to a Laurent/Taylor expansion.
SERIES_SWITCH_X = 1e-3


@dataclass(frozen=True)
class InteractionMatrices:
    """Coherent (J) and dissipative (Gamma) coupling matrices, gamma0 units."""

    J: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        for arr in (self.J, self.Gamma):
            arr.setflags(write=False)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Non-Hermitian single-excitation generator H = diag(Delta) + J - i*Gamma/2."""

    H: np.ndarray
    interactions: InteractionMatrices
    geometry: ArrayGeometry

    def __post_init__(self):
        self.H.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return self.H.shape[0]


def hwg_couplings(z_i: float, z_j: float) -> tuple[float, float]:
    """(J, Gamma) for two atoms at z_i, z_j > 0 in the half waveguide."""
    if z_i <= 0 or z_j <= 0:
        raise ValidationError(
            f"half-waveguide positions must be > 0, got ({z_i}, {z_j})")
    delta = K0 * abs(z_i - z_j)
    sigma = K0 * (z_i + z_j)
    j = -(GAMMA0 / 2.0) * (np.sin(delta) - np.sin(sigma))
    gamma = GAMMA0 * (np.cos(delta) - np.cos(sigma))
    return float(j), float(gamma)


def _dissipative_coeffs(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radial profiles p, r with Gamma/gamma0 = (3/2) * (p + u*r), u = (d.rhat)^2."""
    x = np.asarray(x, dtype=float)
    small = x < SERIES_SWITCH_X
    xs = np.where(small, 1.0, x)  # keep the direct branch finite everywhere
    sin, cos = np.sin(xs), np.cos(xs)
    p_dir = sin / xs + cos / xs**2 - sin / xs**3
    r_dir = 3.0 * (sin / xs**3 - cos / xs**2) - sin / xs
    x2 = x * x
    p_ser = 2.0 / 3.0 - (2.0 / 15.0) * x2 + (1.0 / 140.0) * x2**2 - (1.0 / 5670.0) * x2**3
    r_ser = x2 / 15.0 - x2**2 / 210.0 + x2**3 / 7560.0
    return np.where(small, p_ser, p_dir), np.where(small, r_ser, r_dir)


def _coherent_coeffs(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radial profiles pj, rj with J/gamma0 = -(3/4) * (pj + u*rj)."""
    x = np.asarray(x, dtype=float)
    small = x < SERIES_SWITCH_X
    xs = np.where(small, 1.0, x)
    sin, cos = np.sin(xs), np.cos(xs)
    pj_dir = cos / xs - cos / xs**3 - sin / xs**2
    rj_dir = -cos / xs + 3.0 * cos / xs**3 + 3.0 * sin / xs**2
    xsafe = np.where(x > 0, x, 1.0)
    x2 = x * x
    pj_ser = -1.0 / xsafe**3 + 1.0 / (2.0 * xsafe) - (3.0 / 8.0) * xsafe + (5.0 / 144.0) * xsafe**3
    rj_ser = 3.0 / xsafe**3 + 1.0 / (2.0 * xsafe) + xsafe / 8.0 - xsafe**3 / 48.0
    return np.where(small, pj_ser, pj_dir), np.where(small, rj_ser, rj_dir)


def green_coupling(r_vec: np.ndarray, dipole: np.ndarray) -> tuple[float, float]:
    """(J, Gamma) for a free-space pair separated by r_vec, shared real dipole."""
    r_vec = np.asarray(r_vec, dtype=float)
    dist = float(np.linalg.norm(r_vec))
    if dist < EPS_MIN:
        raise SingularSeparationError(
            f"pair separation {dist:.3e} below eps_min = {EPS_MIN}")
    u = float(np.dot(dipole, r_vec) / dist) ** 2
    x = K0 * dist
    p, r = _dissipative_coeffs(x)
    pj, rj = _coherent_coeffs(x)
    gamma = GAMMA0 * 1.5 * (p + u * r)
    j = -GAMMA0 * 0.75 * (pj + u * rj)
    return float(j), float(gamma)


def _hwg_matrices(geom: ArrayGeometry) -> InteractionMatrices:
    z = geom.positions[:, 2]
    delta = K0 * np.abs(z[:, None] - z[None, :])
    sigma = K0 * (z[:, None] + z[None, :])
    j = -(GAMMA0 / 2.0) * (np.sin(delta) - np.sin(sigma))
    gamma = GAMMA0 * (np.cos(delta) - np.cos(sigma))
    return InteractionMatrices(J=j, Gamma=gamma)


def _free_space_matrices(geom: ArrayGeometry) -> InteractionMatrices:
    pos = geom.positions
    n = geom.n_atoms
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    off = ~np.eye(n, dtype=bool)
    if n > 1 and dist[off].min() < EPS_MIN:
        raise SingularSeparationError(
            f"pair separation {dist[off].min():.3e} below eps_min = {EPS_MIN}")
    dsafe = np.where(off, dist, 1.0)
    u = (diff @ geom.dipole / dsafe) ** 2
    x = K0 * dsafe
    p, r = _dissipative_coeffs(x)
    pj, rj = _coherent_coeffs(x)
    gamma = np.where(off, GAMMA0 * 1.5 * (p + u * r), GAMMA0)
    j = np.where(off, -GAMMA0 * 0.75 * (pj + u * rj), 0.0)
    return InteractionMatrices(J=j, Gamma=gamma)


def build_hamiltonian(geom: ArrayGeometry) -> EffectiveHamiltonian:
    """Assemble H for one array realization from the environment's kernel."""
    if geom.environment is Environment.HALF_WAVEGUIDE:
        mats = _hwg_matrices(geom)
    else:
        mats = _free_space_matrices(geom)
    h = mats.J - 0.5j * mats.Gamma + np.diag(geom.detunings).astype(complex)
    return EffectiveHamiltonian(H=h, interactions=mats, geometry=geom)


def noninteracting_hamiltonian(geom: ArrayGeometry) -> EffectiveHamiltonian:
    """Reference generator with all photon-mediated couplings switched off."""
    n = geom.n_atoms
    mats = InteractionMatrices(J=np.zeros((n, n)), Gamma=GAMMA0 * np.eye(n))
    h = np.diag(geom.detunings - 0.5j * GAMMA0 * np.ones(n))
    return EffectiveHamiltonian(H=h, interactions=mats, geometry=geom)


def matrices_to_dict(ham: EffectiveHamiltonian) -> dict:
    return {
        "J": ham.interactions.J.tolist(),
        "Gamma": ham.interactions.Gamma.tolist(),
        "H_re": ham.H.real.tolist(),
        "H_im": ham.H.imag.tolist(),
    }


def write_complex_matrix_csv(matrix: np.ndarray, path: str | Path) -> None:
    """Row-major dump with real/imag parts interleaved per entry."""
    m = np.asarray(matrix, dtype=complex)
    inter = np.empty((m.shape[0], 2 * m.shape[1]))
    inter[:, 0::2] = m.real
    inter[:, 1::2] = m.imag
    with open(path, "w", newline="") as fh:
        for row in inter:
            fh.write(",".join(f"{v:.16e}" for v in row) + "\n")
