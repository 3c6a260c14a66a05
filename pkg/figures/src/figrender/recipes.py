"""The four figure recipes and their renderer.

Each recipe turns one family of CSV artifacts into a static image:

- ``bn_panel``: coefficient sequences b_n against n, with a vertical line
  marking the startup cutoff.
- ``variance_sweep``: disorder-averaged variance against the swept model
  parameter, one curve per input file, y always logarithmic.
- ``overlap_panel``: per-step orthogonality error epsilon_n against n.
- ``kt_panel``: autocorrelation and mean chain position against time.

Rendering is deterministic: identical inputs yield byte-identical PNG
output, so re-rendering is idempotent and safe to run in a batch loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import EmptyInputError, expand_inputs, floats, load_sidecar, load_table

KINDS = ("bn_panel", "variance_sweep", "overlap_panel", "kt_panel")

# pinned so the output does not depend on ambient matplotlib configuration
_RC = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "svg.hashsalt": "figrender",
    "axes.prop_cycle": plt.cycler(
        color=["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]),
}


@dataclass
class FigureRecipe:
    """What to draw: artifact kind, input globs, axis scales, annotations."""

    kind: str
    inputs: tuple[str, ...]
    cutoff: int | None = 50
    logx: bool | None = None
    logy: bool | None = None
    title: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown recipe kind {self.kind!r}; use one of {KINDS}")
        if not self.inputs:
            raise EmptyInputError("recipe lists no input patterns")


def render(recipe: FigureRecipe, out_path) -> None:
    """Draw the recipe and write the image to ``out_path``.

    The file is written only after the figure builds successfully, so a
    schema or empty-input error never leaves a broken image behind.
    """
    fig = build_figure(recipe)
    try:
        fig.savefig(out_path, metadata=_metadata_for(str(out_path)))
    finally:
        plt.close(fig)


def _metadata_for(out_path: str) -> dict | None:
    # strip savefig's volatile metadata (PNG date-less already; SVG embeds
    # a Software string we pin for reproducible bytes)
    if out_path.endswith(".png"):
        return {"Software": "figrender"}
    if out_path.endswith(".svg"):
        return {"Date": None}
    return None


def build_figure(recipe: FigureRecipe):
    files = expand_inputs(recipe.inputs)
    with plt.rc_context(_RC):
        builder = {
            "bn_panel": _bn_panel,
            "variance_sweep": _variance_sweep,
            "overlap_panel": _overlap_panel,
            "kt_panel": _kt_panel,
        }[recipe.kind]
        return builder(recipe, files)


def _series_label(side: dict, fallback: str) -> str:
    config = side.get("config", {})
    model = config.get("model")
    size = config.get("size")
    if model == "east" and size is not None:
        return f"L={size}"
    if model == "syk" and size is not None:
        return f"N={size}"
    if model is not None:
        return str(model)
    return fallback


def _grouped_curves(table, value_column):
    """Split one bn-schema table into (label, n, values) curves, one per
    (param_value, realization) pair, in first-appearance order."""
    names = table["param_name"]
    pvals = table["param_value"]
    reals = table["realization"]
    ns = floats(table, "n")
    ys = floats(table, value_column)
    many_realizations = len(set(reals)) > 1
    curves: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for name, pv, r, n, y in zip(names, pvals, reals, ns, ys):
        curves.setdefault((f"{name}={pv}", r), []).append((n, y))
    out = []
    for (label, r), pts in curves.items():
        if many_realizations:
            label = f"{label} r{r}"
        pts.sort()
        arr = np.asarray(pts)
        out.append((label, arr[:, 0], arr[:, 1]))
    return out


def _bn_panel(recipe, files):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for path in files:
        table = load_table(path, ("n", "b_raw", "param_name", "param_value",
                                  "realization"))
        for label, n, b in _grouped_curves(table, "b_raw"):
            ax.plot(n, b, lw=0.9, label=label)
    if recipe.cutoff is not None:
        ax.axvline(recipe.cutoff, color="k", lw=1.0, ls="--",
                   label=f"cutoff n={recipe.cutoff}")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$b_n$")
    if recipe.logy:
        ax.set_yscale("log")
    ax.set_title(recipe.title or "Lanczos coefficients")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig


def _variance_sweep(recipe, files):
    fig, ax = plt.subplots(figsize=(4.6, 3.5))
    positive_x = True
    spans_decades = False
    for path in files:
        table = load_table(path, ("param_value", "sigma_bar_sq"))
        x = np.asarray(floats(table, "param_value"))
        y = np.asarray(floats(table, "sigma_bar_sq"))
        order = np.argsort(x)
        x, y = x[order], y[order]
        label = _series_label(load_sidecar(path), path.stem)
        ax.plot(x, y, marker="o", ms=3.5, lw=1.0, label=label)
        positive_x = positive_x and bool(np.all(x > 0))
        if x.size > 1 and x.min() > 0:
            spans_decades = spans_decades or x.max() / x.min() >= 100
    # variance sweeps are always read on a log ordinate
    ax.set_yscale("log")
    logx = recipe.logx if recipe.logx is not None else (positive_x and spans_decades)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel("swept parameter")
    ax.set_ylabel(r"$(\bar\sigma)^2$")
    ax.set_title(recipe.title or "Krylov variance across the sweep")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _overlap_panel(recipe, files):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for path in files:
        table = load_table(path, ("n", "epsilon_n", "param_name",
                                  "param_value", "realization"))
        for label, n, eps in _grouped_curves(table, "epsilon_n"):
            eps = np.where(np.asarray(eps) > 0, eps, np.nan)  # log axis
            ax.plot(n, eps, lw=0.9, label=label)
    ax.axhline(1e-8, color="k", lw=1.0, ls=":", label="tolerance 1e-8")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\epsilon_n$")
    ax.set_title(recipe.title or "orthogonality error")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig


def _kt_panel(recipe, files):
    fig, (ax_phi, ax_k) = plt.subplots(2, 1, figsize=(5.2, 4.6), sharex=True)
    for path in files:
        table = load_table(path, ("t", "phi0", "k_complexity",
                                  "param_name", "param_value"))
        t = np.asarray(floats(table, "t"))
        label = f"{table['param_name'][0]}={table['param_value'][0]}"
        side = load_sidecar(path)
        if side:
            label = f"{_series_label(side, path.stem)} {label}"
        ax_phi.plot(t, floats(table, "phi0"), lw=1.0, label=label)
        ax_k.plot(t, floats(table, "k_complexity"), lw=1.0, label=label)
    ax_phi.set_ylabel(r"$\varphi_0(t)$")
    ax_k.set_ylabel(r"$K(t)$")
    ax_k.set_xlabel("t")
    if recipe.logy:
        ax_k.set_yscale("log")
    ax_phi.set_title(recipe.title or "chain evolution")
    ax_phi.legend(fontsize=7)
    fig.tight_layout()
    return fig
