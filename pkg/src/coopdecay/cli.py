"""Command-line front end: plain-text configs in, CSV artifacts out.

Configs are flat ``key = value`` lines ('#' comments, comma-separated
lists). Every physical key carries its unit in its name. Unknown keys are
hard errors. One experiment per invocation; outputs land in a directory
together with a manifest.json recording the config echo, its hash, the
seed and the package version, so each artifact is reproducible from
(config, seed, version).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CoopDecayError
from .geometry import (DisorderSpec, Environment, LatticeSpec,
                       build_realization, realization_specs, save_geometry)
from .interactions import build_hamiltonian, noninteracting_hamiltonian
from .spectral import decompose, write_modes_csv, write_profiles_csv
from .dynamics import default_omega_grid
from .entanglement import half_chain_cut
from .ensemble import (SweepSpec, mutual_information_ensemble,
                       population_ensemble, size_scaling_sweep,
                       spectrum_ensemble, sweep_slowest_rate, write_sweep_csv)
from .csvio import write_csv

EXPERIMENTS = ("modes", "sweep", "evolve", "spectrum", "mutualinfo", "scaling")

_ENV_BY_DIMS = {1: Environment.FREE_SPACE_1D, 2: Environment.FREE_SPACE_2D,
                3: Environment.FREE_SPACE_3D}

# key -> (element type, is_list). Values are normalized to scalars or lists.
_KEY_SCHEMA = {
    "experiment": (str, False),
    "environment": (str, False),
    "n": (int, False),
    "extents": (int, True),
    "a_over_lambda0": (float, False),
    "rd_over_a": (float, True),
    "omega_d_over_gamma0": (float, True),
    "realizations": (int, False),
    "seed": (int, False),
    "threads": (int, False),
    "initial_state": (str, False),
    "interactions": (str, False),
    "sweep_axis": (str, False),
    "axis_values": (float, True),
    "a_values_over_lambda0": (float, True),
    "a_min_over_lambda0": (float, False),
    "a_max_over_lambda0": (float, False),
    "a_points": (int, False),
    "a_scale": (str, False),
    "t_min_over_gamma0": (float, False),
    "t_max_over_gamma0": (float, False),
    "t_points": (int, False),
    "t_scale": (str, False),
    "t_prime_over_gamma0": (float, False),
    "omega_min_over_gamma0": (float, False),
    "omega_max_over_gamma0": (float, False),
    "omega_points": (int, False),
    "dims": (int, False),
    "n_values": (int, True),
    "out_dir": (str, False),
}

_REQUIRED = {
    "modes": ["experiment", "environment", "a_over_lambda0"],
    "sweep": ["experiment", "environment"],
    "evolve": ["experiment", "environment", "a_over_lambda0", "t_max_over_gamma0"],
    "spectrum": ["experiment", "environment", "a_over_lambda0",
                 "t_prime_over_gamma0"],
    "mutualinfo": ["experiment", "environment", "a_over_lambda0",
                   "t_max_over_gamma0"],
    "scaling": ["experiment", "dims", "n_values"],
}


@dataclass
class RunConfig:
    """Validated experiment description; `echo` is the normalized key map."""

    experiment: str
    echo: dict = field(default_factory=dict)
    lattice: LatticeSpec | None = None
    rd_list: list = field(default_factory=lambda: [0.0])
    omegad_list: list = field(default_factory=lambda: [0.0])
    realizations: int = 100
    seed: int = 0
    threads: int | None = None
    initial_state: object = "random_phase"
    interactions: bool = True
    sweep_axis: str = "lattice_spacing"
    axis_values: list = field(default_factory=list)
    times: np.ndarray | None = None
    t_prime: float = 0.0
    omega: np.ndarray | None = None
    dims: int = 1
    n_values: list = field(default_factory=list)
    out_dir: str = "coopdecay_out"


def _tokenize(text: str) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEY_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not val:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values[key] = (val, lineno)
    return values


def _convert(key: str, val: str, lineno: int | None):
    where = f"line {lineno}: " if lineno is not None else ""
    typ, is_list = _KEY_SCHEMA[key]
    parts = [p.strip() for p in val.split(",")] if is_list else [val]
    try:
        parsed = [typ(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{where}{key} expects {typ.__name__} value(s): {exc}")
    return parsed if is_list else parsed[0]


def _normalize(raw: dict) -> dict:
    return {k: _convert(k, v, lineno) for k, (v, lineno) in raw.items()}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    return config_from_dict(_normalize(_tokenize(text)))


def config_from_dict(norm: dict) -> RunConfig:
    """Build a RunConfig from normalized key/value pairs (manifest echo)."""
    unknown = set(norm) - set(_KEY_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    experiment = norm.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    missing = [k for k in _REQUIRED[experiment] if k not in norm]
    if experiment != "scaling" and not ("n" in norm or "extents" in norm):
        missing.append("n (or extents)")
    if missing:
        raise ConfigError(f"missing required keys for {experiment}: {missing}")

    cfg = RunConfig(experiment=experiment, echo=dict(norm))

    if experiment != "scaling":
        env = _parse_environment(norm["environment"])
        extents = norm.get("extents")
        if extents is None:
            extents = _default_extents(env, int(norm["n"]))
        cfg.lattice = LatticeSpec(environment=env, extents=tuple(extents),
                                  a=float(norm.get("a_over_lambda0", 1.0)))

    cfg.rd_list = [_check_nonneg("rd_over_a", v)
                   for v in norm.get("rd_over_a", [0.0])]
    cfg.omegad_list = [_check_unit_interval("omega_d_over_gamma0", v)
                       for v in norm.get("omega_d_over_gamma0", [0.0])]
    cfg.realizations = _check_pos("realizations", norm.get("realizations", 100))
    cfg.seed = int(norm.get("seed", 0))
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if "threads" in norm:
        cfg.threads = _check_pos("threads", norm["threads"])
    cfg.interactions = _parse_switch("interactions", norm.get("interactions", "on"))
    cfg.out_dir = str(norm.get("out_dir", cfg.out_dir))

    if experiment in ("evolve", "mutualinfo"):
        cfg.times = _time_grid(norm)
    if experiment == "spectrum":
        cfg.t_prime = _check_nonneg("t_prime_over_gamma0",
                                    norm["t_prime_over_gamma0"])
        cfg.omega = np.linspace(float(norm.get("omega_min_over_gamma0", -3.0)),
                                float(norm.get("omega_max_over_gamma0", 3.0)),
                                _check_pos("omega_points",
                                           norm.get("omega_points", 400)))
        if cfg.omega.size > 1 and cfg.omega[0] >= cfg.omega[-1]:
            raise ConfigError("omega grid bounds must be increasing")
    if experiment == "sweep":
        cfg.sweep_axis = norm.get("sweep_axis", "lattice_spacing")
        cfg.axis_values = _sweep_values(cfg.sweep_axis, norm)
        if len(cfg.rd_list) > 1 and cfg.sweep_axis == "disorder_strength":
            raise ConfigError("rd_over_a list conflicts with sweep over it")
    else:
        _reject_lists(experiment, cfg)
    if experiment == "scaling":
        cfg.dims = int(norm["dims"])
        if cfg.dims not in (1, 2, 3):
            raise ConfigError("dims must be 1, 2 or 3")
        cfg.n_values = [_check_pos("n_values", v) for v in norm["n_values"]]
        cfg.axis_values = _sweep_values("lattice_spacing", norm)
        env = (_parse_environment(norm["environment"])
               if "environment" in norm else _ENV_BY_DIMS[cfg.dims])
        cfg.lattice = LatticeSpec(environment=env,
                                  extents=(cfg.n_values[0],) * cfg.dims, a=1.0)
    cfg.initial_state = _parse_initial_state(
        norm.get("initial_state",
                 _default_initial_state(experiment, cfg)))
    return cfg


def _parse_environment(name: str) -> Environment:
    try:
        return Environment(name)
    except ValueError:
        raise ConfigError(
            f"environment must be one of "
            f"{[e.value for e in Environment]}, got {name!r}")


def _default_extents(env: Environment, n: int) -> tuple:
    if env in (Environment.HALF_WAVEGUIDE, Environment.FREE_SPACE_1D):
        return (n,)
    side = round(n ** (1 / 2) if env is Environment.FREE_SPACE_2D else n ** (1 / 3))
    dims = 2 if env is Environment.FREE_SPACE_2D else 3
    if side ** dims != n:
        raise ConfigError(
            f"n = {n} is not a perfect {'square' if dims == 2 else 'cube'}; "
            f"give explicit extents")
    return (side,) * dims


def _check_pos(key: str, v) -> int:
    v = int(v)
    if v < 1:
        raise ConfigError(f"{key} must be >= 1, got {v}")
    return v


def _check_nonneg(key: str, v) -> float:
    v = float(v)
    if v < 0:
        raise ConfigError(f"{key} must be >= 0, got {v}")
    return v


def _check_unit_interval(key: str, v) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ConfigError(f"{key} must lie in [0, 1], got {v}")
    return v


def _parse_switch(key: str, v: str) -> bool:
    if v not in ("on", "off"):
        raise ConfigError(f"{key} must be 'on' or 'off', got {v!r}")
    return v == "on"


def _parse_initial_state(text: str):
    if text == "random_phase":
        return "random_phase"
    if text.startswith("site:"):
        try:
            return ("site", int(text.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"initial_state site index not an integer: {text!r}")
    raise ConfigError(
        f"initial_state must be 'random_phase' or 'site:<j>', got {text!r}")


def _default_initial_state(experiment: str, cfg: RunConfig) -> str:
    if experiment == "mutualinfo" and cfg.lattice is not None:
        return f"site:{cfg.lattice.n_atoms // 2 + 1}"
    return "random_phase"


def _time_grid(norm: dict) -> np.ndarray:
    t_max = float(norm["t_max_over_gamma0"])
    if t_max <= 0:
        raise ConfigError("t_max_over_gamma0 must be > 0")
    points = _check_pos("t_points", norm.get("t_points", 200))
    scale = norm.get("t_scale", "linear")
    if scale == "linear":
        t_min = float(norm.get("t_min_over_gamma0", 0.0))
        return np.linspace(t_min, t_max, points)
    if scale == "log":
        t_min = float(norm.get("t_min_over_gamma0", 0.0))
        if t_min <= 0:
            raise ConfigError("log time grid needs t_min_over_gamma0 > 0")
        return np.geomspace(t_min, t_max, points)
    raise ConfigError(f"t_scale must be 'linear' or 'log', got {scale!r}")


def _sweep_values(axis: str, norm: dict) -> list:
    if axis not in ("lattice_spacing", "disorder_strength", "detuning_width",
                    "system_size"):
        raise ConfigError(f"unknown sweep_axis {axis!r}")
    if axis != "lattice_spacing":
        if "axis_values" not in norm:
            raise ConfigError(f"sweep_axis = {axis} requires axis_values")
        return [float(v) for v in norm["axis_values"]]
    if "a_values_over_lambda0" in norm:
        return [float(v) for v in norm["a_values_over_lambda0"]]
    lo = float(norm.get("a_min_over_lambda0", 0.1))
    hi = float(norm.get("a_max_over_lambda0", 10.0))
    pts = _check_pos("a_points", norm.get("a_points", 60))
    if not 0 < lo < hi:
        raise ConfigError("need 0 < a_min_over_lambda0 < a_max_over_lambda0")
    scale = norm.get("a_scale", "log")
    if scale == "log":
        return list(np.geomspace(lo, hi, pts))
    if scale == "linear":
        return list(np.linspace(lo, hi, pts))
    raise ConfigError(f"a_scale must be 'log' or 'linear', got {scale!r}")


def _reject_lists(experiment: str, cfg: RunConfig) -> None:
    if len(cfg.rd_list) > 1 or len(cfg.omegad_list) > 1:
        raise ConfigError(
            f"{experiment} takes a single rd_over_a / omega_d_over_gamma0 value; "
            f"lists are for sweep")


def config_hash(echo: dict) -> str:
    return hashlib.sha256(
        json.dumps(echo, sort_keys=True).encode()).hexdigest()


def config_from_manifest(path: str | Path) -> RunConfig:
    data = json.loads(Path(path).read_text())
    return config_from_dict(data["config"])


# ---------------------------------------------------------------------------
# experiment execution


def _single_disorder(cfg: RunConfig) -> DisorderSpec:
    return DisorderSpec(r_d=cfg.rd_list[0], omega_d=cfg.omegad_list[0],
                        seed=cfg.seed)


def _run_modes(cfg: RunConfig, out: Path) -> list[str]:
    dis = _single_disorder(cfg)
    geom = build_realization(cfg.lattice, dis)
    ham = (build_hamiltonian(geom) if cfg.interactions
           else noninteracting_hamiltonian(geom))
    dec = decompose(ham)
    write_modes_csv(dec, out / "modes.csv")
    write_profiles_csv(dec, out / "profiles.csv")
    slow = np.abs(dec.eigenvectors[:, -1])
    write_csv(out / "mode_support.csv", ["j", "x", "y", "z", "abs_psi"],
              [(j, *geom.positions[j], slow[j]) for j in range(geom.n_atoms)])
    save_geometry(geom, out / "geometry.json", cfg.lattice)
    outputs = ["modes.csv", "profiles.csv", "mode_support.csv", "geometry.json"]
    if cfg.realizations > 1:
        rates, iprs = [], []
        for d in realization_specs(dis, cfg.realizations):
            g = build_realization(cfg.lattice, d)
            dd = decompose(build_hamiltonian(g) if cfg.interactions
                           else noninteracting_hamiltonian(g))
            rates.append(dd.decay_rates)
            iprs.append(dd.iprs)
        rates, iprs = np.array(rates), np.array(iprs)
        nreal = cfg.realizations
        rows = [
            (n,
             rates[:, n].mean(), rates[:, n].std(ddof=1) / np.sqrt(nreal),
             rates[:, n].min(), rates[:, n].max(),
             iprs[:, n].mean(), iprs[:, n].std(ddof=1) / np.sqrt(nreal),
             nreal)
            for n in range(rates.shape[1])
        ]
        write_csv(out / "decay_spectrum.csv",
                  ["n_sorted", "mean_rate", "stderr_rate", "min_rate",
                   "max_rate", "mean_ipr", "stderr_ipr", "n_realizations"],
                  rows)
        outputs.append("decay_spectrum.csv")
    return outputs


def _run_sweep(cfg: RunConfig, out: Path) -> list[str]:
    strengths = tuple(product(cfg.rd_list, cfg.omegad_list))
    sweep = SweepSpec(base=cfg.lattice, axis=cfg.sweep_axis,
                      values=tuple(cfg.axis_values), strengths=strengths,
                      realizations=cfg.realizations, seed=cfg.seed)
    summary = sweep_slowest_rate(sweep, threads=cfg.threads)
    write_sweep_csv(summary, out / "sweep.csv")
    return ["sweep.csv"]


def _run_evolve(cfg: RunConfig, out: Path) -> list[str]:
    dis_list = realization_specs(_single_disorder(cfg), cfg.realizations)
    ens = population_ensemble(cfg.lattice, dis_list, cfg.times,
                              init=cfg.initial_state,
                              interactions=cfg.interactions,
                              threads=cfg.threads)
    rows = [
        (t, p, k)
        for k, curve in enumerate(ens.curves)
        for t, p in zip(ens.times, curve)
    ]
    write_csv(out / "population.csv", ["t", "p_exc", "trajectory_id"], rows)
    write_csv(out / "population_summary.csv",
              ["t", "mean_geom", "mean_arith", "stderr"],
              list(zip(ens.times, ens.mean_geom, ens.mean_arith, ens.stderr)))
    return ["population.csv", "population_summary.csv"]


def _run_spectrum(cfg: RunConfig, out: Path) -> list[str]:
    dis_list = realization_specs(_single_disorder(cfg), cfg.realizations)
    omega = cfg.omega if cfg.omega is not None else default_omega_grid()
    omega, s_mean = spectrum_ensemble(cfg.lattice, dis_list, cfg.t_prime, omega,
                                      init=cfg.initial_state,
                                      interactions=cfg.interactions,
                                      threads=cfg.threads)
    write_csv(out / "spectrum.csv", ["omega", "S", "t_prime"],
              [(w, s, cfg.t_prime) for w, s in zip(omega, s_mean)])
    return ["spectrum.csv"]


def _run_mutualinfo(cfg: RunConfig, out: Path) -> list[str]:
    dis_list = realization_specs(_single_disorder(cfg), cfg.realizations)
    cut = half_chain_cut(cfg.lattice.n_atoms)
    ens = mutual_information_ensemble(cfg.lattice, dis_list, cfg.times, cut=cut,
                                      init=cfg.initial_state,
                                      interactions=cfg.interactions,
                                      threads=cfg.threads)
    comments = [
        "entropy log base: e (nats)",
        f"cut: A = atoms 1..{len(cut.a)}, B = atoms {len(cut.a) + 1}.."
        f"{cfg.lattice.n_atoms} (construction order)",
    ]
    rows = [
        (t, v, k)
        for k, curve in enumerate(ens.curves)
        for t, v in zip(ens.times, curve)
    ]
    write_csv(out / "mutualinfo.csv", ["t", "I", "trajectory_id"], rows,
              comments=comments)
    write_csv(out / "mutualinfo_summary.csv", ["t", "mean_arith", "stderr"],
              list(zip(ens.times, ens.mean_arith, ens.stderr)),
              comments=comments)
    return ["mutualinfo.csv", "mutualinfo_summary.csv"]


def _run_scaling(cfg: RunConfig, out: Path) -> list[str]:
    summary = size_scaling_sweep(cfg.lattice, cfg.n_values, cfg.axis_values,
                                 threads=cfg.threads)
    write_sweep_csv(summary, out / "scaling.csv", include_n_atoms=True)
    return ["scaling.csv"]


_RUNNERS = {
    "modes": _run_modes,
    "sweep": _run_sweep,
    "evolve": _run_evolve,
    "spectrum": _run_spectrum,
    "mutualinfo": _run_mutualinfo,
    "scaling": _run_scaling,
}


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """Execute one experiment; write its CSVs and manifest. Returns 0."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    outputs = _RUNNERS[cfg.experiment](cfg, out)
    manifest = {
        "version": __version__,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg.echo,
        "config_hash": config_hash(cfg.echo),
        "outputs": sorted(outputs),
        "wall_time_s": time.monotonic() - started,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coopdecay",
        description="Collective-decay experiments from a plain-text config.")
    parser.add_argument("config", help="path to the configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker pool width (default: machine parallelism)")
    args = parser.parse_args(argv)
    out_dir = args.out
    try:
        cfg = parse_config(Path(args.config).read_text())
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.echo["seed"] = args.seed
        threads = args.threads
        if threads is None and os.environ.get("COOPDECAY_THREADS"):
            threads = int(os.environ["COOPDECAY_THREADS"])
        if threads is not None:
            cfg.threads = threads
        return run(cfg, out_dir)
    except (CoopDecayError, OSError) as exc:
        record = {"error_type": type(exc).__name__, "message": str(exc)}
        print(f"coopdecay: {record['error_type']}: {record['message']}",
              file=sys.stderr)
        target = Path(out_dir) if out_dir else None
        if target is not None:
            target.mkdir(parents=True, exist_ok=True)
            (target / "error.json").write_text(json.dumps(record, indent=1))
        return 1


if __name__ == "__main__":
    sys.exit(main())
