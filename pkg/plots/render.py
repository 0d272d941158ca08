#!/usr/bin/env python3
"""Regenerate publication-style figures from simulator CSV output.

Usage: render.py <recipe.json>

A recipe names one figure kind, the input CSVs (with optional labels), the
manifest of the run that produced them, and the output image path:

    {
      "figure": "sweep",
      "inputs": [{"path": "out/sweep.csv", "label": "half waveguide"}],
      "manifest": "out/manifest.json",
      "output": "figs/sweep.png"
    }

The plotting layer only reads documented columns and never recomputes
physics; every figure carries the producing run's seed and config hash in
its caption and PNG metadata, so images trace back to their data.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

FIGURE_KINDS = ("population", "spectrum", "mode_profiles", "decay_spectrum",
                "sweep", "ipr", "mode3d", "mutualinfo", "scaling")

STYLE_VERSION = "coopdecay-plots 0.1"
DPI = 150


class RecipeError(ValueError):
    pass


def _require_columns(frame: pd.DataFrame, columns, path) -> None:
    for col in columns:
        if col not in frame.columns:
            raise RecipeError(f"column '{col}' missing in {path}")


def _load_inputs(recipe: dict) -> list[tuple[pd.DataFrame, str, Path]]:
    inputs = recipe.get("inputs")
    if not inputs:
        raise RecipeError("recipe needs a non-empty 'inputs' list")
    loaded = []
    for entry in inputs:
        if isinstance(entry, str):
            entry = {"path": entry}
        path = Path(entry["path"])
        if not path.exists():
            raise RecipeError(f"input file not found: {path}")
        frame = pd.read_csv(path, comment="#")
        loaded.append((frame, entry.get("label", path.stem), path))
    return loaded


def _provenance(recipe: dict) -> tuple[str, str]:
    manifest_path = recipe.get("manifest")
    if manifest_path is None:
        raise RecipeError("recipe needs a 'manifest' entry for provenance")
    manifest = json.loads(Path(manifest_path).read_text())
    return str(manifest.get("seed")), str(manifest.get("config_hash"))


def _scales(recipe: dict, default_x: str, default_y: str) -> tuple[str, str]:
    return recipe.get("x_scale", default_x), recipe.get("y_scale", default_y)


def _plot_population(ax, loaded):
    for frame, label, path in loaded:
        if {"mean_geom", "mean_arith"} <= set(frame.columns):
            _require_columns(frame, ["t", "mean_geom", "mean_arith"], path)
            ax.plot(frame["t"], frame["mean_geom"], lw=2,
                    label=f"{label} (geometric mean)")
            ax.plot(frame["t"], frame["mean_arith"], lw=2, ls="--",
                    label=f"{label} (arithmetic mean)")
        else:
            _require_columns(frame, ["t", "p_exc", "trajectory_id"], path)
            for _, group in frame.groupby("trajectory_id"):
                ax.plot(group["t"], group["p_exc"], lw=0.5, alpha=0.35,
                        color="gray")
            ax.plot([], [], lw=0.5, color="gray", label=f"{label} trajectories")
    ax.set_xlabel(r"$\gamma_0 t$")
    ax.set_ylabel(r"$p_\mathrm{exc}$")


def _plot_spectrum(ax, loaded):
    for frame, label, path in loaded:
        _require_columns(frame, ["omega", "S", "t_prime"], path)
        tp = frame["t_prime"].iloc[0]
        ax.plot(frame["omega"], frame["S"], lw=1.5,
                label=f"{label} ($\\gamma_0 t' = {tp:g}$)")
    ax.set_xlabel(r"$(\omega - \omega_0)/\gamma_0$")
    ax.set_ylabel(r"$S(\omega, t')$")


def _plot_mode_profiles(ax, loaded):
    frame, label, path = loaded[0]
    _require_columns(frame, ["n_sorted", "j", "abs_psi"], path)
    table = frame.pivot(index="j", columns="n_sorted", values="abs_psi")
    im = ax.imshow(table.to_numpy(), aspect="auto", origin="lower",
                   interpolation="nearest", cmap="magma")
    ax.figure.colorbar(im, ax=ax, label=r"$|\psi_n(j)|$")
    ax.set_xlabel("mode $n$ (fastest to slowest)")
    ax.set_ylabel("site $j$")
    ax.set_title(label)


def _plot_decay_spectrum(ax, loaded):
    for frame, label, path in loaded:
        _require_columns(frame, ["n_sorted", "mean_rate"], path)
        n = frame["n_sorted"]
        ax.plot(n, frame["mean_rate"], lw=1.5, label=label)
        if "stderr_rate" in frame.columns:
            lo = np.maximum(frame["mean_rate"] - frame["stderr_rate"], 1e-300)
            hi = frame["mean_rate"] + frame["stderr_rate"]
            ax.fill_between(n, lo, hi, alpha=0.3)
    ax.axhline(1.0, color="k", lw=0.8, ls=":", label="single atom")
    ax.set_xlabel("mode $n$ (fastest to slowest)")
    ax.set_ylabel(r"$-2\,\mathrm{Im}\,E_n\ /\ \gamma_0$")


def _plot_sweep(ax, loaded):
    for frame, label, path in loaded:
        _require_columns(frame, ["axis_value", "r_d_over_a", "omega_d",
                                 "mean_arith", "minimum"], path)
        for (r_d, w_d), group in frame.groupby(["r_d_over_a", "omega_d"]):
            tag = f"$r_d/a={r_d:g}$" if w_d == 0 else f"$\\omega_d={w_d:g}$"
            line, = ax.plot(group["axis_value"], group["mean_arith"], lw=2,
                            label=f"{label} {tag}")
            ax.plot(group["axis_value"], group["minimum"], lw=0.7,
                    color=line.get_color())
    ax.set_xlabel(r"$a/\lambda_0$")
    ax.set_ylabel(r"slowest decay rate $/\ \gamma_0$")


def _plot_ipr(ax, loaded):
    for frame, label, path in loaded:
        if "mean_ipr" in frame.columns:
            _require_columns(frame, ["n_sorted", "mean_ipr"], path)
            ax.plot(frame["n_sorted"], frame["mean_ipr"], ".", ms=4, label=label)
        else:
            _require_columns(frame, ["n_sorted", "ipr"], path)
            ax.plot(frame["n_sorted"], frame["ipr"], ".", ms=4, label=label)
    ax.set_xlabel("mode $n$ (fastest to slowest)")
    ax.set_ylabel("IPR")


def _plot_mutualinfo(ax, loaded):
    for frame, label, path in loaded:
        if "mean_arith" in frame.columns:
            _require_columns(frame, ["t", "mean_arith"], path)
            ax.plot(frame["t"], frame["mean_arith"], lw=2, label=label)
        else:
            _require_columns(frame, ["t", "I", "trajectory_id"], path)
            for _, group in frame.groupby("trajectory_id"):
                ax.plot(group["t"], group["I"], lw=0.5, alpha=0.35, color="gray")
            ax.plot([], [], lw=0.5, color="gray", label=f"{label} trajectories")
    ax.set_xlabel(r"$\gamma_0 t$")
    ax.set_ylabel(r"$I(A,B)$ [nats]")


def _plot_scaling(ax, loaded):
    for frame, label, path in loaded:
        _require_columns(frame, ["n_atoms", "axis_value", "mean_arith"], path)
        for n, group in frame.groupby("n_atoms"):
            ax.plot(group["axis_value"], group["mean_arith"], lw=1.5,
                    label=f"{label} $N={n}$")
    ax.set_xlabel(r"$a/\lambda_0$")
    ax.set_ylabel(r"slowest decay rate $/\ \gamma_0$")


_DEFAULT_SCALES = {
    "population": ("linear", "log"),
    "spectrum": ("linear", "linear"),
    "decay_spectrum": ("linear", "log"),
    "sweep": ("log", "log"),
    "ipr": ("linear", "linear"),
    "mutualinfo": ("linear", "linear"),
    "scaling": ("log", "log"),
}

_PLOTTERS = {
    "population": _plot_population,
    "spectrum": _plot_spectrum,
    "mode_profiles": _plot_mode_profiles,
    "decay_spectrum": _plot_decay_spectrum,
    "sweep": _plot_sweep,
    "ipr": _plot_ipr,
    "mutualinfo": _plot_mutualinfo,
    "scaling": _plot_scaling,
}


def _plot_mode3d(fig, loaded):
    frame, label, path = loaded[0]
    _require_columns(frame, ["j", "x", "y", "z", "abs_psi"], path)
    ax = fig.add_subplot(projection="3d")
    weight = frame["abs_psi"].to_numpy()
    size = 5 + 200 * (weight / max(weight.max(), 1e-300)) ** 2
    sc = ax.scatter(frame["x"], frame["y"], frame["z"], c=weight, s=size,
                    cmap="viridis", depthshade=False)
    fig.colorbar(sc, ax=ax, label=r"$|\psi_N(j)|$", shrink=0.7)
    ax.set_xlabel(r"$x/\lambda_0$")
    ax.set_ylabel(r"$y/\lambda_0$")
    ax.set_zlabel(r"$z/\lambda_0$")
    ax.set_title(label)


def render(recipe: dict) -> Path:
    """Render one figure; returns the written image path."""
    kind = recipe.get("figure")
    if kind not in FIGURE_KINDS:
        raise RecipeError(f"figure must be one of {FIGURE_KINDS}, got {kind!r}")
    loaded = _load_inputs(recipe)
    seed, cfg_hash = _provenance(recipe)
    output = Path(recipe.get("output", f"{kind}.png"))
    output.parent.mkdir(parents=True, exist_ok=True)

    fig = plt.figure(figsize=(6.4, 4.2))
    if kind == "mode3d":
        _plot_mode3d(fig, loaded)
    else:
        ax = fig.add_subplot()
        _PLOTTERS[kind](ax, loaded)
        xs, ys = _scales(recipe, *_DEFAULT_SCALES.get(kind, ("linear", "linear")))
        ax.set_xscale(xs)
        ax.set_yscale(ys)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7)
    caption = f"seed={seed}  config={cfg_hash[:16]}"
    fig.text(0.01, 0.005, caption, fontsize=6, color="0.4")
    fig.tight_layout(rect=(0, 0.02, 1, 1))
    fig.savefig(output, dpi=DPI, metadata={
        "Software": STYLE_VERSION,
        "Description": f"seed={seed} config_hash={cfg_hash}",
    })
    plt.close(fig)
    return output


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: render.py <recipe.json>", file=sys.stderr)
        return 2
    try:
        recipe = json.loads(Path(argv[0]).read_text())
        out = render(recipe)
    except (RecipeError, OSError, json.JSONDecodeError) as exc:
        print(f"render: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
