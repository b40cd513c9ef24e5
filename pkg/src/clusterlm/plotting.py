"""Figures for experiment reports (rendered off-screen)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
})

# PNG metadata otherwise embeds the matplotlib version string
_SAVE_META = {"Software": None}


def _by_order(report, key):
    out = {}
    for m in sorted(report.means, key=lambda m: (m["order"], m["k"])):
        out.setdefault(m["order"], []).append((m["k"], m[key]))
    return out


def accuracy_figure(report, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for order, pts in _by_order(report, "mean_accuracy").items():
        ks, acc = zip(*pts)
        line, = ax.plot(ks, acc, marker="o", label=f"N={order}")
        runs = [(r.k, r.accuracy) for r in report.runs if r.order == order]
        ax.scatter(*zip(*runs), s=8, alpha=0.35, color=line.get_color())
        ax.axhline(report.baselines[order], ls=":", lw=0.8, color=line.get_color())
    ax.set_xscale("log")
    ax.set_xlabel("clusters K")
    ax.set_ylabel("selection accuracy (%)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_SAVE_META)
    plt.close(fig)


def entropy_figure(report, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for order, pts in _by_order(report, "mean_per_item_entropy").items():
        ks, h = zip(*pts)
        ax.plot(ks, h, marker="s", label=f"N={order}")
    ax.set_xscale("log")
    ax.set_xlabel("clusters K")
    ax.set_ylabel("per-item training entropy (bits)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_SAVE_META)
    plt.close(fig)


def write_figures(report, outdir):
    paths = [outdir / "accuracy_vs_k.png", outdir / "entropy_vs_k.png"]
    accuracy_figure(report, paths[0])
    entropy_figure(report, paths[1])
    return paths
