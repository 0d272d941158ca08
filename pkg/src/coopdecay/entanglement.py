"""Entropies and half-chain mutual information during decay.

Conditional evolution under the non-Hermitian generator leaks population
to the global ground state, so the physical state at time t is the mixture
rho = |psi><psi| + (1 - ||c||^2)|G><G| with |psi> the unnormalized
single-excitation component. Every reduced state of rho then has at most
two nonzero eigenvalues, p and 1 - p with p the excitation weight inside
the subsystem, which collapses all entropies to the binary entropy
h(p) = -p ln p - (1-p) ln(1-p). Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .dynamics import SingleExcitationState, _amplitudes_at
from .spectral import ModeDecomposition


@dataclass(frozen=True)
class BipartiteCut:
    """Index sets of the two halves (0-based, disjoint, covering)."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        if set(self.a) & set(self.b):
            raise ValidationError("cut halves must be disjoint")


def half_chain_cut(n: int) -> BipartiteCut:
    """A = first ceil(N/2) atoms in construction order, B = the rest."""
    split = (n + 1) // 2
    return BipartiteCut(a=tuple(range(split)), b=tuple(range(split, n)))


def binary_entropy(p: float) -> float:
    p = min(max(float(p), 0.0), 1.0)
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log(p) - (1.0 - p) * np.log(1.0 - p))


def _check_norm(c: np.ndarray) -> float:
    total = float(np.sum(np.abs(c) ** 2))
    if total > 1.0 + 1e-9:
        raise ValidationError(f"amplitude norm^2 = {total} exceeds 1")
    return total


def subsystem_entropy(c: np.ndarray, subset) -> float:
    """Von Neumann entropy (nats) of the atoms in `subset`."""
    c = np.asarray(c, dtype=complex)
    _check_norm(c)
    idx = np.asarray(tuple(subset), dtype=int)
    p_sub = float(np.sum(np.abs(c[idx]) ** 2)) if idx.size else 0.0
    return binary_entropy(p_sub)


def mutual_information(c: np.ndarray, cut: BipartiteCut) -> float:
    """I(A,B) = S(A) + S(B) - S(A,B) of the decaying mixed state."""
    c = np.asarray(c, dtype=complex)
    _check_norm(c)
    p_a = float(np.sum(np.abs(c[list(cut.a)]) ** 2)) if cut.a else 0.0
    p_b = float(np.sum(np.abs(c[list(cut.b)]) ** 2)) if cut.b else 0.0
    return binary_entropy(p_a) + binary_entropy(p_b) - binary_entropy(p_a + p_b)


def mutual_information_curve(state0: SingleExcitationState, dec: ModeDecomposition,
                             cut: BipartiteCut, times) -> list[tuple[float, float]]:
    """I(A,B) along the trajectory started from state0."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValidationError("times must be sorted ascending")
    amps = _amplitudes_at(dec, state0.c, times)
    weights = np.abs(amps) ** 2
    p_a = weights[list(cut.a), :].sum(axis=0) if cut.a else np.zeros(times.size)
    p_b = weights[list(cut.b), :].sum(axis=0) if cut.b else np.zeros(times.size)
    out = []
    for t, pa, pb in zip(times.tolist(), p_a.tolist(), p_b.tolist()):
        out.append((t, binary_entropy(pa) + binary_entropy(pb)
                    - binary_entropy(pa + pb)))
    return out
