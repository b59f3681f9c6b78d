"""Figures for the report paths of the CLI (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _density(A: np.ndarray, bins: int = 300) -> np.ndarray:
    """Fraction of nonzeros in each cell of a coarse grid over A."""
    nz = A != 0
    rb = min(bins, A.shape[0])
    cb = min(bins, A.shape[1])
    ri = np.linspace(0, A.shape[0], rb + 1).astype(int)
    ci = np.linspace(0, A.shape[1], cb + 1).astype(int)
    rows = np.add.reduceat(nz, ri[:-1], axis=0)
    cells = np.add.reduceat(rows, ci[:-1], axis=1).astype(float)
    area = np.outer(np.diff(ri), np.diff(ci))
    return cells / np.maximum(area, 1)


def macaulay_figure(inst, strategy, path, title: str | None = None) -> None:
    """Sparsity of the assembled Macaulay matrix next to its pivots per degree level.

    The matrix is rebuilt here because elimination works in place.
    """
    from .solve import assemble

    system = assemble(inst, strategy)
    cmap = system.colmap
    A = system.matrix
    dens = _density(A)
    shape = A.shape
    ech = system.eliminate()
    piv_levels = cmap.level[ech.pivots]
    levels = sorted(cmap.degrees)
    piv = [int(np.sum(piv_levels == d)) for d in levels]
    size = [cmap.block_size(d) for d in levels]
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.8), gridspec_kw={"width_ratios": [3, 2]})
        ax0.imshow(dens, aspect="auto", cmap="Greys", interpolation="nearest",
                   extent=(0, shape[1], shape[0], 0), vmin=0, vmax=max(dens.max(), 1e-9))
        for d in cmap.degrees[1:]:
            ax0.axvline(cmap.offset[d], color="tab:red", lw=0.6)
        ax0.set_xlabel("column (degree blocks, highest first)")
        ax0.set_ylabel("row")
        ax0.set_title(f"{shape[0]} x {shape[1]}, rank {system.rank}")
        x = np.arange(len(levels))
        ax1.bar(x - 0.2, size, width=0.4, label="columns", color="0.75")
        ax1.bar(x + 0.2, piv, width=0.4, label="pivots", color="tab:blue")
        ax1.set_xticks(x)
        ax1.set_xticklabels([str(d) for d in levels])
        ax1.set_xlabel("degree level d")
        ax1.legend(frameon=False)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def table_figure(rows: list[dict], path, title: str) -> None:
    """Grouped bars of matrix rows and columns per configuration (log scale)."""
    labels = [f"r={r['r']} n={r['n']}\nd={r['d_lo']}..{r['d_hi']}" if "d_lo" in r else str(i)
              for i, r in enumerate(rows)]
    nrow = np.array([r["rows"] for r in rows], dtype=float)
    ncol = np.array([r["cols"] for r in rows], dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(5, 0.9 * len(rows)), 3.6))
        x = np.arange(len(rows))
        ax.bar(x - 0.2, nrow, width=0.4, label="rows", color="tab:blue")
        ax.bar(x + 0.2, ncol, width=0.4, label="columns", color="tab:orange")
        if "rank" in rows[0]:
            ax.plot(x, [r["rank"] if r["rank"] != "" else np.nan for r in rows], "k.", label="rank")
        ax.set_yscale("log")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, fontsize=7)
        ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def dags_blocks_figure(reports: list[dict], path) -> None:
    """Measured rank of each block E(d) against the closed-form prediction, per level."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(reports), figsize=(3.2 * len(reports), 3.2), squeeze=False)
        for ax, rep in zip(axes[0], reports):
            blocks = rep["block_ranks"]
            d = np.array([b["d"] for b in blocks])
            ax.bar(d - 0.25, [b["rows"] for b in blocks], width=0.25, color="0.8", label="rows")
            ax.bar(d, [b["measured"] for b in blocks], width=0.25, color="tab:blue", label="measured")
            ax.bar(d + 0.25, [b["predicted"] for b in blocks], width=0.25, color="tab:green",
                   label="predicted")
            ax.set_xticks(d)
            ax.set_xlabel("d")
            ax.set_title(rep.get("label", ""))
        axes[0][0].set_ylabel("rank of E(d)")
        axes[0][0].legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
