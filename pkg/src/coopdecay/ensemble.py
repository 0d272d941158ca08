"""Disorder ensembles and parameter sweeps.

Realization k of a sweep point draws from RNG streams derived from
(master seed, k), so ensembles are reproducible, order-independent under
parallel execution, and growing the realization count re-produces the
earlier records verbatim. Populations are averaged geometrically (robust
when trajectories span many decades); every other observable uses the
arithmetic mean, with the minimum retained to expose rare dark outliers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .geometry import (STREAM_STATE, ArrayGeometry, DisorderSpec, LatticeSpec,
                       build_realization, realization_specs)
from .interactions import build_hamiltonian, noninteracting_hamiltonian
from .spectral import decompose, slowest_rate
from .dynamics import (SingleExcitationState, fluorescence_spectrum,
                       population_curve, propagate, random_phase_state,
                       site_excitation_state)
from .entanglement import BipartiteCut, half_chain_cut, mutual_information_curve
from .csvio import write_csv

SWEEP_AXES = ("lattice_spacing", "disorder_strength", "detuning_width", "system_size")
OBSERVABLES = ("slowest_rate", "decay_spectrum", "ipr")

# Exact zeros (mirror resonances, machine-epsilon rates) are floored here
# inside the log; the aggregate is flagged when the floor engaged.
GEOM_FLOOR = 1e-300


@dataclass(frozen=True)
class SweepSpec:
    """A 1-D parameter sweep with one curve per disorder strength."""

    base: LatticeSpec
    axis: str
    values: tuple[float, ...]
    strengths: tuple[tuple[float, float], ...] = ((0.0, 0.0),)  # (r_d, omega_d)
    realizations: int = 100
    seed: int = 0
    observables: tuple[str, ...] = ("slowest_rate",)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValidationError(f"unknown sweep axis {self.axis!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValidationError("sweep needs at least one axis value")
        diffs = np.diff(vals)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValidationError("sweep values must be strictly monotone")
        if self.realizations < 1:
            raise ValidationError("realizations must be >= 1")
        object.__setattr__(self, "values", vals)
        object.__setattr__(
            self, "strengths",
            tuple((float(r), float(w)) for r, w in self.strengths))


@dataclass(frozen=True)
class SummaryPoint:
    axis_value: float
    r_d: float
    omega_d: float
    mean_arith: float
    mean_geom: float
    minimum: float
    maximum: float
    stderr: float
    n_realizations: int
    n_atoms: int
    geom_floored: bool = False
    raw: np.ndarray | None = None


@dataclass(frozen=True)
class EnsembleSummary:
    axis: str
    points: tuple[SummaryPoint, ...]


def aggregate(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    n = v.size
    floored = bool(np.any(v < GEOM_FLOOR))
    geom = float(np.exp(np.mean(np.log(np.maximum(v, GEOM_FLOOR)))))
    return {
        "mean_arith": float(np.mean(v)),
        "mean_geom": geom,
        "minimum": float(np.min(v)),
        "maximum": float(np.max(v)),
        "stderr": float(np.std(v, ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        "n_realizations": int(n),
        "geom_floored": floored,
    }


def run_realization(spec: LatticeSpec, dis: DisorderSpec,
                    observables=("slowest_rate",)) -> dict:
    """Geometry -> disorder -> Hamiltonian -> spectrum -> observables."""
    unknown = set(observables) - set(OBSERVABLES)
    if unknown:
        raise ValidationError(f"unknown observables {sorted(unknown)}")
    geom = build_realization(spec, dis)
    dec = decompose(build_hamiltonian(geom))
    record: dict = {"realization_index": dis.realization_index}
    if "slowest_rate" in observables:
        record["slowest_rate"] = slowest_rate(dec)
    if "decay_spectrum" in observables:
        record["decay_spectrum"] = dec.decay_rates.copy()
    if "ipr" in observables:
        record["ipr"] = dec.iprs.copy()
    return record


def _apply_axis(base: LatticeSpec, axis: str, value: float,
                strength: tuple[float, float]) -> tuple[LatticeSpec, float, float]:
    r_d, omega_d = strength
    if axis == "lattice_spacing":
        return replace(base, a=value), r_d, omega_d
    if axis == "system_size":
        extents = tuple(int(round(value)) for _ in base.extents)
        return replace(base, extents=extents), r_d, omega_d
    if axis == "disorder_strength":
        return base, value, omega_d
    return base, r_d, value  # detuning_width


def _pool_map(fn, items, threads: int | None):
    width = threads if threads else (os.cpu_count() or 1)
    if width <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(fn, items))  # index order, not completion order


def sweep_slowest_rate(sweep: SweepSpec, threads: int | None = None,
                       keep_raw: bool = False) -> EnsembleSummary:
    """Slowest-mode decay rate statistics over the sweep grid."""
    points = []
    for value in sweep.values:
        for strength in sweep.strengths:
            spec, r_d, omega_d = _apply_axis(sweep.base, sweep.axis, value, strength)
            dis_list = realization_specs(
                DisorderSpec(r_d=r_d, omega_d=omega_d, seed=sweep.seed),
                sweep.realizations)

            def one(dis, spec=spec):
                return run_realization(spec, dis, ("slowest_rate",))["slowest_rate"]

            rates = np.array(_pool_map(one, dis_list, threads))
            stats = aggregate(rates)
            points.append(SummaryPoint(
                axis_value=value, r_d=r_d, omega_d=omega_d,
                n_atoms=spec.n_atoms,
                raw=rates if keep_raw else None, **stats))
    return EnsembleSummary(axis=sweep.axis, points=tuple(points))


def size_scaling_sweep(base: LatticeSpec, extents_values, a_values,
                       threads: int | None = None) -> EnsembleSummary:
    """Ordered slowest rate vs spacing for a family of array sizes."""
    points = []
    for extent in extents_values:
        spec_n = replace(base, extents=tuple(int(extent) for _ in base.extents))

        def one(a, spec_n=spec_n):
            return run_realization(replace(spec_n, a=float(a)), DisorderSpec(),
                                   ("slowest_rate",))["slowest_rate"]

        rates = _pool_map(one, list(a_values), threads)
        for a, rate in zip(a_values, rates):
            points.append(SummaryPoint(
                axis_value=float(a), r_d=0.0, omega_d=0.0,
                mean_arith=rate, mean_geom=rate, minimum=rate, maximum=rate,
                stderr=0.0, n_realizations=1, n_atoms=spec_n.n_atoms))
    return EnsembleSummary(axis="lattice_spacing", points=tuple(points))


def _initial_state(init, n: int, dis: DisorderSpec) -> SingleExcitationState:
    if init == "random_phase":
        return random_phase_state(n, dis.rng(STREAM_STATE))
    if isinstance(init, tuple) and len(init) == 2 and init[0] == "site":
        return site_excitation_state(n, int(init[1]))
    raise ValidationError(f"unknown initial state {init!r}")


def _trajectory(spec: LatticeSpec, dis: DisorderSpec, init,
                interactions: bool) -> tuple[ArrayGeometry, object, SingleExcitationState]:
    geom = build_realization(spec, dis)
    ham = build_hamiltonian(geom) if interactions else noninteracting_hamiltonian(geom)
    dec = decompose(ham)
    return geom, dec, _initial_state(init, geom.n_atoms, dis)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Per-trajectory curves of one scalar observable plus ensemble means."""

    times: np.ndarray
    curves: np.ndarray       # (R, T)
    mean_geom: np.ndarray
    mean_arith: np.ndarray
    stderr: np.ndarray
    geom_floored: bool


def _curve_ensemble(spec, dis_list, times, init, interactions, threads,
                    evaluate) -> TrajectoryEnsemble:
    times = np.asarray(times, dtype=float)

    def one(dis):
        geom, dec, state0 = _trajectory(spec, dis, init, interactions)
        return evaluate(geom, dec, state0, times)

    curves = np.array(_pool_map(one, list(dis_list), threads))
    floored = bool(np.any(curves < GEOM_FLOOR))
    return TrajectoryEnsemble(
        times=times,
        curves=curves,
        mean_geom=np.exp(np.mean(np.log(np.maximum(curves, GEOM_FLOOR)), axis=0)),
        mean_arith=np.mean(curves, axis=0),
        stderr=(np.std(curves, axis=0, ddof=1) / np.sqrt(curves.shape[0])
                if curves.shape[0] > 1 else np.zeros(times.size)),
        geom_floored=floored,
    )


def population_ensemble(spec: LatticeSpec, dis_list, times,
                        init="random_phase", interactions: bool = True,
                        threads: int | None = None) -> TrajectoryEnsemble:
    """Excited-population trajectories; disorder and initial phases are
    resampled per trajectory."""

    def evaluate(geom, dec, state0, ts):
        return np.array([p for _, p in population_curve(state0, dec, ts)])

    return _curve_ensemble(spec, dis_list, times, init, interactions, threads,
                           evaluate)


def mutual_information_ensemble(spec: LatticeSpec, dis_list, times,
                                cut: BipartiteCut | None = None,
                                init="random_phase", interactions: bool = True,
                                threads: int | None = None) -> TrajectoryEnsemble:
    """Half-chain mutual information trajectories (arithmetic mean applies)."""

    def evaluate(geom, dec, state0, ts):
        use_cut = cut if cut is not None else half_chain_cut(geom.n_atoms)
        return np.array([v for _, v in
                         mutual_information_curve(state0, dec, use_cut, ts)])

    return _curve_ensemble(spec, dis_list, times, init, interactions, threads,
                           evaluate)


def spectrum_ensemble(spec: LatticeSpec, dis_list, t_prime: float, omega_grid,
                      init="random_phase", interactions: bool = True,
                      threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Arithmetic-mean fluorescence spectrum at observation time t_prime."""
    omega = np.asarray(omega_grid, dtype=float)

    def one(dis):
        geom, dec, state0 = _trajectory(spec, dis, init, interactions)
        state = propagate(state0, dec, float(t_prime))
        return fluorescence_spectrum(state, dec, geom, omega).s

    spectra = np.array(_pool_map(one, list(dis_list), threads))
    return omega, np.mean(spectra, axis=0)


def write_sweep_csv(summary: EnsembleSummary, path: str | Path,
                    include_n_atoms: bool = False) -> None:
    header = ["axis_value", "r_d_over_a", "omega_d", "mean_arith", "mean_geom",
              "minimum", "maximum", "stderr", "n_realizations"]
    if include_n_atoms:
        header = ["n_atoms"] + header
    rows = []
    for p in summary.points:
        row = [p.axis_value, p.r_d, p.omega_d, p.mean_arith, p.mean_geom,
               p.minimum, p.maximum, p.stderr, p.n_realizations]
        if include_n_atoms:
            row = [p.n_atoms] + row
        rows.append(row)
    write_csv(path, header, rows, comments=[f"axis = {summary.axis}"])
