"""Figure rendering for histograms, tomography matrices, and sweeps.

Everything goes through the Agg backend straight to files, sized and
styled with fixed parameters so a rerun writes byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import Histogram
from .tomography import TomographyResult

_DPI = 150
_BAR_COLOR = "#4878cf"
_META = {"Software": "qsdc"}


def render_histogram(hist: Histogram, path, title: str = "") -> None:
    keys = sorted(hist.counts)
    values = [hist.counts[k] for k in keys]
    width = max(4.0, 0.55 * len(keys) + 1.5)
    fig, ax = plt.subplots(figsize=(width, 3.2))
    ax.bar(range(len(keys)), values, color=_BAR_COLOR)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=90 if len(keys) > 8 else 0, fontsize=8)
    ax.set_ylabel("counts")
    ax.set_xlabel("readout")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)


def _matrix_panel(ax, mat: np.ndarray, title: str):
    span = max(1.0, float(np.max(np.abs(mat))))
    im = ax.imshow(mat, cmap="RdBu_r", vmin=-span, vmax=span)
    ax.set_title(title, fontsize=10)
    ax.set_xticks(range(mat.shape[1]))
    ax.set_yticks(range(mat.shape[0]))
    ax.tick_params(labelsize=6)
    return im


def render_tomography(result: TomographyResult, path, title: str = "") -> None:
    mat = result.rho.matrix
    fig, axes = plt.subplots(1, 2, figsize=(7.2, 3.4))
    im = _matrix_panel(axes[0], mat.real, "Re rho")
    _matrix_panel(axes[1], mat.imag, "Im rho")
    fig.colorbar(im, ax=axes, shrink=0.85)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)


def render_sweep(case_rates: dict, path, title: str = "") -> None:
    """Bar chart of per-error-case success rates (case label -> rate)."""
    labels = list(case_rates)
    rates = [case_rates[k] for k in labels]
    width = max(5.0, 0.4 * len(labels) + 1.5)
    fig, ax = plt.subplots(figsize=(width, 3.6))
    ax.bar(range(len(labels)), rates, color=_BAR_COLOR)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("success rate")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)
