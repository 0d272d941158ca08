"""Eigenmodes of the effective Hamiltonian and localization measures.

Modes are sorted by decreasing decay rate -2 Im E_n, so index N-1 (the
last column) is the slowest decaying mode. Rates below 1e-14 gamma0 are
flagged as sitting at machine epsilon but reported as computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DecompositionError, ValidationError
from .interactions import EffectiveHamiltonian
from .csvio import write_csv

# Eigenvector-matrix condition number above which the decomposition is
# unreliable for propagation and a matrix-exponential fallback is used.
CONDITION_LIMIT = 1e8

RATE_FLOOR = 1e-14


@dataclass(frozen=True)
class ModeDecomposition:
    """Right eigendecomposition of H, decay-rate ordered."""

    eigenvalues: np.ndarray      # (N,), complex, sorted
    eigenvectors: np.ndarray     # (N, N), columns are unit-norm modes
    decay_rates: np.ndarray      # (N,), -2 Im E, non-increasing
    iprs: np.ndarray             # (N,)
    order: np.ndarray            # permutation from solver order to sorted order
    residuals: np.ndarray        # (N,), ||H psi - E psi||_2
    eigvec_condition: float
    vinv: np.ndarray             # inverse of the eigenvector matrix
    hamiltonian: EffectiveHamiltonian
    at_rate_floor: np.ndarray    # (N,), bool: |rate| below machine-noise floor

    def __post_init__(self):
        for arr in (self.eigenvalues, self.eigenvectors, self.decay_rates,
                    self.iprs, self.order, self.residuals, self.vinv,
                    self.at_rate_floor):
            arr.setflags(write=False)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def ill_conditioned(self) -> bool:
        return self.eigvec_condition >= CONDITION_LIMIT


def ipr(psi: np.ndarray) -> float:
    """Inverse participation ratio sum_j |psi_j|^4 of a unit-norm vector."""
    psi = np.asarray(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"ipr expects a unit-norm vector, got ||psi|| = {norm}")
    return float(np.sum(np.abs(psi) ** 4))


def decompose(ham: EffectiveHamiltonian) -> ModeDecomposition:
    """Full complex eigendecomposition, sorted fastest to slowest decay."""
    h = ham.H
    if not np.all(np.isfinite(h)):
        raise DecompositionError("Hamiltonian contains non-finite entries")
    try:
        evals, vecs = np.linalg.eig(h)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigensolver failed to converge: {exc}") from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    rates = -2.0 * evals.imag
    # Fastest decay first; ties resolved by Re E then solver index so runs diff cleanly.
    order = np.lexsort((np.arange(evals.size), evals.real, -rates))
    evals = evals[order]
    vecs = vecs[:, order]
    rates = rates[order]
    residuals = np.linalg.norm(h @ vecs - vecs * evals[None, :], axis=0)
    cond = float(np.linalg.cond(vecs))
    try:
        vinv = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        # numerically defective basis: propagation will use the exponential
        vinv = np.linalg.pinv(vecs)
        cond = np.inf
    return ModeDecomposition(
        eigenvalues=evals,
        eigenvectors=vecs,
        decay_rates=rates,
        iprs=np.sum(np.abs(vecs) ** 4, axis=0),
        order=order,
        residuals=residuals,
        eigvec_condition=cond,
        vinv=vinv,
        hamiltonian=ham,
        at_rate_floor=np.abs(rates) < RATE_FLOOR,
    )


def slowest_rate(dec: ModeDecomposition) -> float:
    """|  -2 Im E_N |, the magnitude of the slowest mode's decay rate."""
    return float(abs(dec.decay_rates[-1]))


def mode_profile_table(dec: ModeDecomposition) -> np.ndarray:
    """|psi_n(j)| with row n the n-th fastest mode and column j the site."""
    return np.abs(dec.eigenvectors).T


def write_modes_csv(dec: ModeDecomposition, path: str | Path) -> None:
    rows = [
        (n, e.real, e.imag, r, p, res)
        for n, (e, r, p, res) in enumerate(
            zip(dec.eigenvalues, dec.decay_rates, dec.iprs, dec.residuals))
    ]
    write_csv(path, ["n_sorted", "re_E", "im_E", "decay_rate", "ipr", "residual"], rows)


def write_profiles_csv(dec: ModeDecomposition, path: str | Path) -> None:
    table = mode_profile_table(dec)
    rows = [
        (n, j, table[n, j])
        for n in range(table.shape[0])
        for j in range(table.shape[1])
    ]
    write_csv(path, ["n_sorted", "j", "abs_psi"], rows)
