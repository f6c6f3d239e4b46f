"""Figures for benchmark reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def get_plot(width=6, height=None):
    if not height:
        height = width * 0.62
    fig, ax = plt.subplots(figsize=(width, height), facecolor="w")
    ax.tick_params(labelsize=10)
    return fig, ax


def cactus(times_by_engine, path, title="solved instances"):
    """Cactus plot: per engine, sorted solve times of definitive answers (seconds)."""
    fig, ax = get_plot()
    for engine, times in sorted(times_by_engine.items()):
        ts = sorted(times)
        ax.plot(range(1, len(ts) + 1), ts, marker="o", markersize=3, label=engine)
    ax.set_xlabel("instances solved")
    ax.set_ylabel("time (s)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if times_by_engine:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
