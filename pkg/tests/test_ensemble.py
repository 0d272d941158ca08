import numpy as np
import pytest

from coopdecay.errors import ValidationError
from coopdecay.geometry import (DisorderSpec, Environment, LatticeSpec,
                                build_ordered, realization_specs)
from coopdecay.interactions import build_hamiltonian
from coopdecay.spectral import decompose, slowest_rate
from coopdecay.ensemble import (GEOM_FLOOR, SweepSpec, aggregate,
                                mutual_information_ensemble,
                                population_ensemble, run_realization,
                                size_scaling_sweep, spectrum_ensemble,
                                sweep_slowest_rate, write_sweep_csv)


def test_run_realization_deterministic():
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (12,), 0.3)
    dis = DisorderSpec(r_d=1.0, omega_d=0.4, seed=17, realization_index=3)
    one = run_realization(spec, dis, ("slowest_rate", "decay_spectrum", "ipr"))
    two = run_realization(spec, dis, ("slowest_rate", "decay_spectrum", "ipr"))
    assert one["slowest_rate"] == two["slowest_rate"]
    assert np.array_equal(one["decay_spectrum"], two["decay_spectrum"])
    assert np.array_equal(one["ipr"], two["ipr"])


def test_run_realization_without_randomness():
    spec = LatticeSpec(Environment.FREE_SPACE_1D, (6,), 0.4)
    a = run_realization(spec, DisorderSpec(seed=1), ("slowest_rate",))
    b = run_realization(spec, DisorderSpec(seed=999), ("slowest_rate",))
    assert a["slowest_rate"] == b["slowest_rate"]  # ordered: seed is inert


def test_run_realization_rejects_unknown_observable():
    spec = LatticeSpec(Environment.FREE_SPACE_1D, (4,), 0.4)
    with pytest.raises(ValidationError):
        run_realization(spec, DisorderSpec(), ("entropy_rate",))


def test_sweep_values_must_be_monotone():
    base = LatticeSpec(Environment.FREE_SPACE_1D, (5,), 1.0)
    with pytest.raises(ValidationError):
        SweepSpec(base=base, axis="lattice_spacing", values=(0.3, 0.2, 0.4))
    with pytest.raises(ValidationError):
        SweepSpec(base=base, axis="spacing", values=(0.3, 0.4))


def test_sweep_hwg_mirror_resonances():
    base = LatticeSpec(Environment.HALF_WAVEGUIDE, (50,), 1.0)
    sweep = SweepSpec(base=base, axis="lattice_spacing", values=(0.5, 1.0),
                      realizations=1)
    summary = sweep_slowest_rate(sweep, threads=1)
    for point in summary.points:
        assert point.mean_arith < 1e-12


def test_sweep_1d_transition_sharpness_n50():
    base = LatticeSpec(Environment.FREE_SPACE_1D, (50,), 1.0)
    sweep = SweepSpec(base=base, axis="lattice_spacing", values=(0.45, 0.55),
                      realizations=1)
    summary = sweep_slowest_rate(sweep, threads=1)
    r45, r55 = summary.points[0].mean_arith, summary.points[1].mean_arith
    assert r45 / r55 < 1e-2


def test_sweep_dense_disorder_accelerates():
    base = LatticeSpec(Environment.FREE_SPACE_1D, (50,), 0.15)
    ordered = slowest_rate(decompose(build_hamiltonian(build_ordered(base))))
    sweep = SweepSpec(base=base, axis="lattice_spacing", values=(0.15,),
                      strengths=((0.1, 0.0), (0.5, 0.0), (1.0, 0.0)),
                      realizations=10, seed=5)
    summary = sweep_slowest_rate(sweep, threads=2)
    for point in summary.points:
        assert point.mean_arith > ordered


def test_sweep_detuning_axis():
    base = LatticeSpec(Environment.FREE_SPACE_1D, (8,), 0.3)
    sweep = SweepSpec(base=base, axis="detuning_width", values=(0.0, 0.5, 1.0),
                      realizations=4, seed=2)
    summary = sweep_slowest_rate(sweep, threads=1)
    assert [p.omega_d for p in summary.points] == [0.0, 0.5, 1.0]
    assert all(p.r_d == 0.0 for p in summary.points)


def test_aggregate_two_point_example():
    stats = aggregate(np.array([1e-2, 1e-6]))
    assert stats["mean_geom"] == pytest.approx(1e-4, rel=1e-12)
    assert stats["mean_arith"] == pytest.approx(5.0005e-3, rel=1e-12)
    assert stats["minimum"] == 1e-6
    assert stats["maximum"] == 1e-2


def test_aggregate_ordering_and_floor():
    stats = aggregate(np.array([0.0, 1e-3, 5e-2]))
    assert stats["geom_floored"]
    assert (stats["minimum"] <= stats["mean_geom"]
            <= stats["mean_arith"] <= stats["maximum"])
    clean = aggregate(np.array([2.0, 3.0, 4.0]))
    assert not clean["geom_floored"]
    assert clean["mean_geom"] == pytest.approx((24.0) ** (1 / 3))


def test_stderr_shrinks_like_sqrt_r():
    rng = np.random.default_rng(0)
    base = 1.0 + 0.1 * rng.normal(size=400)
    small = aggregate(base[:100])["stderr"]
    large = aggregate(base)["stderr"]
    assert small / large == pytest.approx(2.0, rel=0.25)


def test_ensemble_prefix_reproducibility():
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (10,), 0.3)
    base_dis = DisorderSpec(r_d=1.0, seed=40)

    def rates(count):
        return [run_realization(spec, d, ("slowest_rate",))["slowest_rate"]
                for d in realization_specs(base_dis, count)]

    assert rates(8)[:4] == rates(4)


def test_sweep_threads_do_not_change_results():
    base = LatticeSpec(Environment.HALF_WAVEGUIDE, (8,), 0.4)
    sweep = SweepSpec(base=base, axis="lattice_spacing", values=(0.3, 0.4),
                      strengths=((1.0, 0.0),), realizations=6, seed=9)
    serial = sweep_slowest_rate(sweep, threads=1, keep_raw=True)
    threaded = sweep_slowest_rate(sweep, threads=4, keep_raw=True)
    for p1, p2 in zip(serial.points, threaded.points):
        assert np.array_equal(p1.raw, p2.raw)
        assert p1.mean_arith == p2.mean_arith


def test_population_ensemble_noninteracting_geometric_mean():
    # with couplings off every trajectory is exactly exp(-t)
    spec = LatticeSpec(Environment.FREE_SPACE_1D, (10,), 0.3)
    times = np.linspace(0.0, 5.0, 11)
    ens = population_ensemble(spec, realization_specs(DisorderSpec(r_d=1.0,
                                                                   seed=3), 5),
                              times, init="random_phase", interactions=False,
                              threads=1)
    assert np.abs(ens.mean_geom - np.exp(-times)).max() < 1e-12
    assert np.abs(ens.mean_arith - np.exp(-times)).max() < 1e-12
    assert ens.curves.shape == (5, 11)


def test_population_ensemble_monotone_and_ordered_stats():
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (20,), 0.15)
    times = np.linspace(0.0, 40.0, 30)
    ens = population_ensemble(spec, realization_specs(DisorderSpec(r_d=0.5,
                                                                   seed=8), 6),
                              times, threads=2)
    assert np.all(np.diff(ens.curves, axis=1) <= 1e-12)
    assert np.all(ens.mean_geom <= ens.mean_arith + 1e-15)


def test_population_ensemble_trajectories_differ():
    spec = LatticeSpec(Environment.FREE_SPACE_1D, (10,), 0.25)
    times = np.linspace(0.0, 10.0, 5)
    ens = population_ensemble(spec, realization_specs(DisorderSpec(r_d=1.0,
                                                                   seed=4), 3),
                              times, threads=1)
    assert not np.allclose(ens.curves[0], ens.curves[1])


def test_mutual_information_ensemble_runs():
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (12,), 0.2)
    times = np.linspace(0.0, 10.0, 8)
    ens = mutual_information_ensemble(
        spec, realization_specs(DisorderSpec(r_d=1.0, seed=6), 4), times,
        init=("site", 6), threads=1)
    assert ens.curves.shape == (4, 8)
    assert np.abs(ens.curves[:, 0]).max() < 1e-12
    assert np.all(ens.curves >= -1e-12)


def test_spectrum_ensemble_mean():
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (6,), 0.23)
    omega = np.linspace(-2, 2, 31)
    _, s_mean = spectrum_ensemble(
        spec, realization_specs(DisorderSpec(r_d=0.5, seed=7), 4), 3.0, omega,
        threads=1)
    assert s_mean.shape == omega.shape
    assert np.all(np.isfinite(s_mean))


def test_size_scaling_1d_pinned_and_2d_drifting():
    # the subradiance onset stays at a = 0.5 in 1D but moves with N in 2D
    def crossing(points, n, level_frac=0.5):
        pts = [p for p in points if p.n_atoms == n]
        a = np.array([p.axis_value for p in pts])
        r = np.array([p.mean_arith for p in pts])
        level = level_frac * r[-1]
        idx = np.nonzero(r < level)[0][-1]  # largest a still below the plateau
        lo, hi = r[idx], r[idx + 1]
        f = (np.log(level) - np.log(lo)) / (np.log(hi) - np.log(lo))
        return a[idx] + f * (a[idx + 1] - a[idx])

    step = 0.06
    grid_1d = np.round(np.arange(0.38, 0.6201, step), 10)
    base_1d = LatticeSpec(Environment.FREE_SPACE_1D, (10,), 1.0)
    sum_1d = size_scaling_sweep(base_1d, [10, 20, 40], grid_1d, threads=2)
    mids = [crossing(sum_1d.points, n) for n in (10, 20, 40)]
    assert all(abs(m - 0.5) <= step for m in mids)

    grid_2d = np.round(np.arange(0.60, 1.2001, step), 10)
    base_2d = LatticeSpec(Environment.FREE_SPACE_2D, (4, 4), 1.0)
    sum_2d = size_scaling_sweep(base_2d, [4, 8], grid_2d, threads=2)
    mid4 = crossing(sum_2d.points, 16)
    mid8 = crossing(sum_2d.points, 64)
    assert abs(mid4 - mid8) > step


def test_size_scaling_single_atom():
    base = LatticeSpec(Environment.FREE_SPACE_1D, (1,), 1.0)
    summary = size_scaling_sweep(base, [1], [0.2, 0.9, 3.0])
    for p in summary.points:
        assert p.mean_arith == pytest.approx(1.0, abs=1e-12)


def test_write_sweep_csv(tmp_path):
    base = LatticeSpec(Environment.HALF_WAVEGUIDE, (5,), 0.4)
    sweep = SweepSpec(base=base, axis="lattice_spacing", values=(0.4, 0.5),
                      strengths=((0.0, 0.0), (1.0, 0.0)), realizations=3,
                      seed=1)
    summary = sweep_slowest_rate(sweep, threads=1)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(summary, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# axis = lattice_spacing"
    assert lines[1].split(",") == ["axis_value", "r_d_over_a", "omega_d",
                                   "mean_arith", "mean_geom", "minimum",
                                   "maximum", "stderr", "n_realizations"]
    assert len(lines) == 2 + 4
    for row in lines[2:]:
        vals = row.split(",")
        mn, gm, am, mx = float(vals[5]), float(vals[4]), float(vals[3]), float(vals[6])
        assert mn <= gm + 1e-15 and gm <= am + 1e-15 and am <= mx + 1e-15


def test_population_curve_ordering_dense_hwg():
    # disordered slower than ordered, ordered slower than non-interacting
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (20,), 0.15)
    times = np.array([0.0, 50.0, 200.0])
    dis_list = realization_specs(DisorderSpec(r_d=1.0, seed=14), 10)
    ordered = population_ensemble(spec, realization_specs(DisorderSpec(seed=0), 10),
                                  times, threads=2)
    disordered = population_ensemble(spec, dis_list, times, threads=2)
    free = np.exp(-times[-1])
    assert disordered.mean_geom[-1] > ordered.mean_geom[-1] > free


def test_long_horizon_arithmetic_mean_follows_dark_outliers():
    # rare dark realizations dominate the arithmetic mean at late times
    spec = LatticeSpec(Environment.HALF_WAVEGUIDE, (30,), 0.15)
    times = np.geomspace(1.0, 1e11, 12)
    ens = population_ensemble(spec,
                              realization_specs(DisorderSpec(r_d=0.5, seed=3), 10),
                              times, threads=2)
    early = ens.mean_arith[0] / ens.mean_geom[0]
    late = ens.mean_arith[-1] / max(ens.mean_geom[-1], GEOM_FLOOR)
    assert early < 10.0
    assert late > 1e3
    assert ens.mean_arith[-1] > 1e-4  # darkest realizations barely decay


def test_geometric_floor_constant():
    assert GEOM_FLOOR == 1e-300
