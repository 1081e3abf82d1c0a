#!/usr/bin/env python3
"""Render publication-style figures from floqef CSV outputs.

Standalone plotting layer: reads only the CSV files written by the
simulation CLI, embeds no physics, and renders deterministically.

    render.py --kind heatmap_orbit --in friction_map.csv --in trajectories.csv --out fig.png
    render.py --kind ke_vs_bias    --in iv_sweep.csv [--in more.csv ...]    --out fig.png
    render.py --kind iv            --in iv_sweep.csv [--in more.csv ...]    --out fig.png
    render.py --kind i_vs_omega    --in freq_sweep.csv [--in more.csv ...]  --out fig.png

Exit codes: 0 ok, 2 bad arguments or schema mismatch.
"""

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("heatmap_orbit", "ke_vs_bias", "iv", "i_vs_omega")

REQUIRED = {
    "heatmap_orbit": (("x", "y", "antisym"), ("traj", "t", "x", "y")),
    "ke_vs_bias": (("mu_left", "kinetic_mean", "kinetic_stderr"),),
    "iv": (("mu_left", "current_mean", "current_stderr", "coupling_sq"),),
    "i_vs_omega": (("omega", "current_mean", "current_stderr"),),
}


@dataclass(frozen=True)
class FigureRecipe:
    kind: str
    inputs: tuple
    output: str


class SchemaError(Exception):
    pass


def read_table(path: str):
    """Parse a floqef CSV: '#' metadata lines, header row, float columns."""
    fingerprint = ""
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                if "config_fingerprint" in line:
                    fingerprint = line.split("=", 1)[1].strip()
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append(cells)
    if header is None:
        raise SchemaError(f"{path}: no header row")
    cols = {}
    for i, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[i]) for r in rows])
        except ValueError:
            cols[name] = np.array([r[i] for r in rows])
    return cols, fingerprint


def check_columns(path, cols, required):
    missing = [c for c in required if c not in cols]
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")


def _footer(fig, fingerprints):
    tags = [fp[:16] for fp in fingerprints if fp]
    if tags:
        fig.text(0.99, 0.01, "config " + " / ".join(tags),
                 ha="right", va="bottom", fontsize=6, color="0.4")


def render_heatmap_orbit(recipe: FigureRecipe):
    map_cols, fp1 = read_table(recipe.inputs[0])
    check_columns(recipe.inputs[0], map_cols, REQUIRED["heatmap_orbit"][0])
    traj_cols, fp2 = read_table(recipe.inputs[1])
    check_columns(recipe.inputs[1], traj_cols, REQUIRED["heatmap_orbit"][1])

    xs = np.unique(map_cols["x"])
    ys = np.unique(map_cols["y"])
    grid = np.full((len(ys), len(xs)), np.nan)
    ix = np.searchsorted(xs, map_cols["x"])
    iy = np.searchsorted(ys, map_cols["y"])
    grid[iy, ix] = map_cols["antisym"]

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    vmax = np.nanmax(np.abs(grid)) or 1.0
    mesh = ax.pcolormesh(xs, ys, grid, cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label="antisym")

    for tid in np.unique(traj_cols["traj"]):
        sel = traj_cols["traj"] == tid
        t = traj_cols["t"][sel]
        tail = t >= 0.6 * t.max()
        ax.plot(traj_cols["x"][sel][tail], traj_cols["y"][sel][tail],
                lw=0.9, color="k", alpha=0.8)
    tail_all = traj_cols["t"] >= 0.6 * traj_cols["t"].max()
    cx = traj_cols["x"][tail_all].mean()
    cy = traj_cols["y"][tail_all].mean()
    ax.plot([cx], [cy], marker="+", ms=12, color="lime", mew=2)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("antisymmetric friction with deterministic orbit")
    _footer(fig, (fp1, fp2))
    return fig


def _curves(recipe: FigureRecipe, kind: str):
    out = []
    for path in recipe.inputs:
        cols, fp = read_table(path)
        check_columns(path, cols, REQUIRED[kind][0])
        out.append((Path(path).stem, cols, fp))
    return out


def render_ke_vs_bias(recipe: FigureRecipe):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    fps = []
    for label, cols, fp in _curves(recipe, "ke_vs_bias"):
        order = np.argsort(cols["mu_left"])
        ax.errorbar(cols["mu_left"][order], cols["kinetic_mean"][order],
                    yerr=cols["kinetic_stderr"][order], marker="o",
                    capsize=3, label=label)
        fps.append(fp)
    ax.set_xlabel("mu_left")
    ax.set_ylabel("kinetic_mean")
    ax.set_title("cycle-limit kinetic energy vs bias")
    if len(recipe.inputs) > 1:
        ax.legend(fontsize=8)
    _footer(fig, fps)
    return fig


def render_iv(recipe: FigureRecipe):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.4), sharex=True)
    fps = []
    for label, cols, fp in _curves(recipe, "iv"):
        order = np.argsort(cols["mu_left"])
        ax1.errorbar(cols["mu_left"][order], cols["current_mean"][order],
                     yerr=cols["current_stderr"][order], marker="o",
                     capsize=3, label=label)
        ax2.plot(cols["mu_left"][order], cols["coupling_sq"][order],
                 marker="s", label=label)
        fps.append(fp)
    ax1.set_ylabel("current_mean")
    ax2.set_ylabel("coupling_sq")
    ax2.set_xlabel("mu_left")
    ax1.set_title("ensemble current and level coupling vs bias")
    if len(recipe.inputs) > 1:
        ax1.legend(fontsize=8)
    _footer(fig, fps)
    return fig


def render_i_vs_omega(recipe: FigureRecipe):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    fps = []
    for label, cols, fp in _curves(recipe, "i_vs_omega"):
        order = np.argsort(cols["omega"])
        ax.errorbar(cols["omega"][order], cols["current_mean"][order],
                    yerr=cols["current_stderr"][order], marker="o",
                    capsize=3, label=label)
        fps.append(fp)
    ax.set_xlabel("omega")
    ax.set_ylabel("current_mean")
    ax.set_title("ensemble current vs driving frequency")
    if len(recipe.inputs) > 1:
        ax.legend(fontsize=8)
    _footer(fig, fps)
    return fig


RENDERERS = {
    "heatmap_orbit": render_heatmap_orbit,
    "ke_vs_bias": render_ke_vs_bias,
    "iv": render_iv,
    "i_vs_omega": render_i_vs_omega,
}


def render(recipe: FigureRecipe) -> None:
    if recipe.kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind {recipe.kind!r}")
    n_inputs = 2 if recipe.kind == "heatmap_orbit" else None
    if n_inputs is not None and len(recipe.inputs) != n_inputs:
        raise SchemaError(
            f"{recipe.kind} needs exactly {n_inputs} --in files "
            f"(map, trajectories), got {len(recipe.inputs)}")
    if not recipe.inputs:
        raise SchemaError("at least one --in file required")
    fig = RENDERERS[recipe.kind](recipe)
    fig.savefig(recipe.output, dpi=150, metadata={"Software": "floqef-plots"})
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", default=[],
                        metavar="CSV", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    recipe = FigureRecipe(kind=args.kind, inputs=tuple(args.inputs),
                          output=args.out)
    try:
        render(recipe)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
