"""Figure rendering for the CLI report paths (written next to the exports)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_simulated_path(path, t_star, out_path) -> str:
    """Returns and true variance panels, shock window shaded."""
    fig, axes = plt.subplots(2, 1, figsize=(9, 5.5), sharex=True)
    t = np.arange(len(path))
    axes[0].plot(t, path.returns, lw=0.5, color="0.3")
    axes[0].set_ylabel("return")
    axes[1].plot(t, path.sigma2, lw=0.8, color="tab:blue", label="sigma2")
    shocked = np.flatnonzero(path.omega_star_path != 0.0)
    for ax in axes:
        for idx in shocked:
            ax.axvspan(idx - 0.5, idx + 0.5, color="tab:red", alpha=0.25, lw=0)
    if t_star is not None:
        axes[1].axvline(t_star - 0.5, color="tab:red", ls="--", lw=0.8, label="shock arrival")
    axes[1].set_ylabel("variance")
    axes[1].set_xlabel("t")
    axes[1].legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)


def plot_forecast_report(report, out_path) -> str:
    """Donor weights, donor shock estimates, and the forecast comparison."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))

    names = list(report.profile.donor_names)
    axes[0].bar(names, report.weights.weights, color="tab:blue")
    axes[0].set_title("donor weights")
    axes[0].set_ylim(0, 1)
    axes[0].tick_params(axis="x", rotation=30)

    axes[1].bar(list(report.donor_names), report.donor_effects, color="tab:orange")
    axes[1].axhline(0, color="0.4", lw=0.8)
    axes[1].set_title("donor shock estimates")
    axes[1].tick_params(axis="x", rotation=30)

    labels = ["unadjusted", "adjusted", "mean-adjusted"]
    values = [report.unadjusted[0], report.adjusted[0], report.mean_adjusted[0]]
    colors = ["tab:red", "tab:blue", "tab:orange"]
    if report.ground_truth is not None:
        labels.append("ground truth")
        values.append(report.ground_truth)
        colors.append("black")
    axes[2].scatter(range(len(values)), values, c=colors, s=60, zorder=3)
    axes[2].set_xticks(range(len(labels)))
    axes[2].set_xticklabels(labels, rotation=30, ha="right")
    axes[2].set_title("one-step variance forecasts")
    axes[2].grid(True, axis="y", alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)


def plot_win_fraction_heatmap(result, out_path) -> str:
    """Win-fraction heatmap over the two swept parameters."""
    name1, vals1 = result.axis1
    name2, vals2 = result.axis2
    grid = np.array(
        [[cell.win_fraction for cell in row] for row in result.cells], dtype=float
    )
    fig, ax = plt.subplots(figsize=(1.2 * len(vals2) + 3, 1.0 * len(vals1) + 2.5))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="RdYlGn", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(vals2)))
    ax.set_xticklabels([f"{v:g}" for v in vals2])
    ax.set_yticks(range(len(vals1)))
    ax.set_yticklabels([f"{v:g}" for v in vals1])
    ax.set_xlabel(name2)
    ax.set_ylabel(name1)
    for i in range(len(vals1)):
        for j in range(len(vals2)):
            if np.isfinite(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax, label="fraction of wins for the adjusted forecast")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)


def plot_multiverse_losses(result, out_path, max_rows: int = 60) -> str:
    """Ranked losses for every leave-one-out configuration."""
    rows = result.rows[:max_rows]
    losses = [row.loss for row in rows]
    labels = [
        f"{row.omitted_covariate or 'None'} | {row.omitted_donor or 'None'}" for row in rows
    ]
    colors = ["tab:blue" if row.kind == "config" else "tab:red" for row in rows]
    fig, ax = plt.subplots(figsize=(8, 0.22 * len(rows) + 2))
    y = np.arange(len(rows))
    ax.barh(y, losses, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=6)
    ax.invert_yaxis()
    ax.set_xlabel("loss of the adjusted forecast")
    ax.set_title("leave-one-out configurations ranked by loss")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return str(out_path)
