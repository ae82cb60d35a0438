"""Figure rendering for CLI reports (PNG files written next to the CSVs)."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path):
    tmp = f"{path}.tmp.png"
    fig.savefig(tmp, dpi=120, metadata=_META)
    plt.close(fig)
    os.replace(tmp, path)
    return path


def plot_mif(path, mif, mask=None, title=None):
    """Heatmap of MIF (nats) over frequency pairs; significant pairs boxed."""
    grid = np.asarray(mif.grid)
    freqs = grid / mif.n_f
    vals = np.ma.masked_invalid(mif.values)
    half = 0.5 / mif.n_f
    lo, hi = freqs[0] - half, freqs[-1] + half
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(vals, origin="lower", cmap="viridis", aspect="auto", extent=(lo, hi, lo, hi))
    fig.colorbar(im, ax=ax, label="MIF (nats)")
    if mask is not None:
        a, b = np.nonzero(mask.significant)
        ax.scatter(freqs[b], freqs[a], marker="s", s=40,
                   facecolors="none", edgecolors="red", label="significant")
        if a.size:
            ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("Y frequency (cycles/sample)")
    ax.set_ylabel("X frequency (cycles/sample)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_curve(path, x, mean, std=None, oracle=None, xlabel="parameter", title=None):
    """Mean MI curve over a swept parameter, with optional spread and oracle."""
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(x, mean, "o-", label="estimate")
    if std is not None:
        std = np.asarray(std, dtype=float)
        ax.fill_between(x, mean - std, mean + std, alpha=0.25)
    if oracle is not None:
        ax.plot(x, oracle, "k--", label="Gaussian oracle")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("MI (nats/sample)")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
