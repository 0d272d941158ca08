"""Figure-regeneration tests, including the secondary acceptance criterion:
CSVs produced by the simulator CLI feed the population, sweep, and
mutual-information figures, which must render and embed the config hash."""

import json
import subprocess
import sys
from pathlib import Path

import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))
from render import RecipeError, render  # noqa: E402

DENSE_SWEEP_CFG = """
experiment = sweep
environment = free_space_1d
n = 12
a_values_over_lambda0 = 0.15, 0.5, 1.35
rd_over_a = 0.0, 0.5, 1.0
realizations = 4
seed = 7
"""

EVOLVE_CFG = """
experiment = evolve
environment = free_space_1d
n = 8
a_over_lambda0 = 0.15
rd_over_a = 1.0
realizations = 4
t_max_over_gamma0 = 20
t_points = 30
seed = 7
"""

MUTUALINFO_CFG = """
experiment = mutualinfo
environment = half_waveguide
n = 8
a_over_lambda0 = 0.15
rd_over_a = 1.0
realizations = 3
t_max_over_gamma0 = 10
t_points = 12
seed = 7
"""


def _simulate(cfg_text, out_dir):
    cfg = out_dir.parent / f"{out_dir.name}.cfg"
    cfg.write_text(cfg_text)
    proc = subprocess.run(
        [sys.executable, "-m", "coopdecay", str(cfg), "--out", str(out_dir)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    return {
        "sweep": _simulate(DENSE_SWEEP_CFG, base / "sweep"),
        "evolve": _simulate(EVOLVE_CFG, base / "evolve"),
        "mutualinfo": _simulate(MUTUALINFO_CFG, base / "mi"),
    }


def _recipe(kind, run_dir, csv_name, out_path, **extra):
    recipe = {
        "figure": kind,
        "inputs": [{"path": str(run_dir / csv_name), "label": "run"}],
        "manifest": str(run_dir / "manifest.json"),
        "output": str(out_path),
    }
    recipe.update(extra)
    return recipe


def _config_hash(run_dir):
    return json.loads((run_dir / "manifest.json").read_text())["config_hash"]


def test_secondary_acceptance_figure_regeneration(artifacts, tmp_path):
    # [SECONDARY] criterion: population, sweep and mutual-information figures
    # render from primary CSVs and carry the config hash
    targets = [
        ("population", artifacts["evolve"], "population_summary.csv"),
        ("sweep", artifacts["sweep"], "sweep.csv"),
        ("mutualinfo", artifacts["mutualinfo"], "mutualinfo_summary.csv"),
    ]
    for kind, run_dir, csv_name in targets:
        out = tmp_path / f"{kind}.png"
        path = render(_recipe(kind, run_dir, csv_name, out))
        assert path.exists() and path.stat().st_size > 0
        meta = Image.open(path).info
        assert _config_hash(run_dir) in meta.get("Description", "")
    print("ACCEPTANCE 12 secondary figure regeneration: PASS")


def test_population_trajectories_figure(artifacts, tmp_path):
    out = render(_recipe("population", artifacts["evolve"], "population.csv",
                         tmp_path / "pop_traj.png"))
    assert out.stat().st_size > 0


def test_mutualinfo_trajectories_figure(artifacts, tmp_path):
    out = render(_recipe("mutualinfo", artifacts["mutualinfo"],
                         "mutualinfo.csv", tmp_path / "mi_traj.png"))
    assert out.stat().st_size > 0


def test_rendering_is_deterministic_and_nonmutating(artifacts, tmp_path):
    csv_path = artifacts["sweep"] / "sweep.csv"
    before = csv_path.read_bytes()
    one = render(_recipe("sweep", artifacts["sweep"], "sweep.csv",
                         tmp_path / "one.png"))
    two = render(_recipe("sweep", artifacts["sweep"], "sweep.csv",
                         tmp_path / "two.png"))
    assert one.read_bytes() == two.read_bytes()
    assert csv_path.read_bytes() == before


def test_missing_column_names_column_and_file(artifacts, tmp_path):
    broken = tmp_path / "broken.csv"
    broken.write_text("axis_value,mean_arith\n1.0,0.5\n")
    recipe = {
        "figure": "sweep",
        "inputs": [{"path": str(broken)}],
        "manifest": str(artifacts["sweep"] / "manifest.json"),
        "output": str(tmp_path / "broken.png"),
    }
    with pytest.raises(RecipeError, match="r_d_over_a"):
        render(recipe)
    with pytest.raises(RecipeError, match="broken.csv"):
        render(recipe)


def test_unknown_figure_kind(artifacts, tmp_path):
    with pytest.raises(RecipeError, match="figure must be one of"):
        render({"figure": "pie", "inputs": ["x.csv"],
                "manifest": str(artifacts["sweep"] / "manifest.json"),
                "output": str(tmp_path / "x.png")})


def test_cli_entry_point(artifacts, tmp_path):
    recipe = _recipe("sweep", artifacts["sweep"], "sweep.csv",
                     tmp_path / "cli.png")
    recipe_path = tmp_path / "recipe.json"
    recipe_path.write_text(json.dumps(recipe))
    script = Path(__file__).parent / "render.py"
    proc = subprocess.run([sys.executable, str(script), str(recipe_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "cli.png").exists()


@pytest.mark.parametrize("kind,csv_name,run", [
    ("spectrum", "spectrum.csv", "spectrum"),
    ("mode_profiles", "profiles.csv", "modes"),
    ("decay_spectrum", "decay_spectrum.csv", "modes"),
    ("ipr", "decay_spectrum.csv", "modes"),
    ("mode3d", "mode_support.csv", "modes"),
    ("scaling", "scaling.csv", "scaling"),
])
def test_remaining_figure_kinds(tmp_path, kind, csv_name, run):
    configs = {
        "spectrum": ("experiment = spectrum\nenvironment = half_waveguide\n"
                     "n = 4\na_over_lambda0 = 0.23\nrd_over_a = 0.5\n"
                     "realizations = 2\nt_prime_over_gamma0 = 2\n"
                     "omega_points = 30\nseed = 3\n"),
        "modes": ("experiment = modes\nenvironment = free_space_3d\n"
                  "extents = 3, 3, 3\na_over_lambda0 = 0.2\nrd_over_a = 1.0\n"
                  "realizations = 3\nseed = 3\n"),
        "scaling": ("experiment = scaling\ndims = 2\nn_values = 3, 4\n"
                    "a_values_over_lambda0 = 0.3, 0.8\n"),
    }
    run_dir = _simulate(configs[run], tmp_path / run)
    out = render(_recipe(kind, run_dir, csv_name, tmp_path / f"{kind}.png"))
    assert out.stat().st_size > 0
    meta = Image.open(out).info
    assert "config_hash=" in meta.get("Description", "")
