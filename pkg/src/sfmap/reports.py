"""Figure rendering for the report path of each CLI command.

Everything goes through the Agg backend and writes to files; no display is
ever opened. SVG output is made byte-reproducible by pinning the hash salt
and dropping the date metadata, which the pipeline idempotence guarantee
relies on.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .embedding import spherical_angles  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "sfmap"

_CLASS_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red",
                 "tab:purple", "tab:brown", "tab:pink", "tab:gray",
                 "tab:olive", "tab:cyan")


def _save(fig, path):
    if str(path).endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path, dpi=150)
    plt.close(fig)


def signature_figure(sm, path):
    """Gray-valued image of one signature matrix."""
    fig, ax = plt.subplots(figsize=(4, 4))
    im = ax.imshow(sm.matrix, cmap="gray", vmin=-1.0, vmax=1.0)
    ax.set_title(sm.mesh_id or "signature")
    ax.set_xlabel("regular basis")
    ax.set_ylabel("scale-invariant basis")
    fig.colorbar(im, ax=ax, fraction=0.046)
    _save(fig, path)


def distance_figure(D, path):
    """Heatmap of the pairwise distance matrix with shape-id ticks."""
    n = D.values.shape[0]
    fig, ax = plt.subplots(figsize=(max(4, 0.4 * n), max(4, 0.4 * n)))
    im = ax.imshow(D.values, cmap="viridis")
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.set_xticklabels(D.shape_ids, rotation=90, fontsize=7)
    ax.set_yticklabels(D.shape_ids, fontsize=7)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def confusion_figure(confusion, class_names, path):
    """Annotated class-vs-cluster fractions in [0, 1]."""
    k = confusion.shape[0]
    fig, ax = plt.subplots(figsize=(1.2 * k + 2, 1.2 * k + 1.5))
    im = ax.imshow(confusion, cmap="Blues", vmin=0.0, vmax=1.0)
    names = list(class_names) if class_names else [str(i) for i in range(k)]
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_yticklabels(names)
    ax.set_xlabel("assigned cluster")
    ax.set_ylabel("true class")
    for i in range(k):
        for j in range(k):
            color = "white" if confusion[i, j] > 0.5 else "black"
            ax.text(j, i, f"{confusion[i, j]:.2f}", ha="center",
                    va="center", color=color, fontsize=9)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def embedding_figure(emb, labels, shape_ids, path):
    """Scatter of the embedding, one color per class.

    Two-dimensional embeddings are drawn directly; three-dimensional ones
    as the angular view (azimuth against inclination) so cluster structure
    on a sphere-like cloud stays visible in a flat figure.
    """
    if emb.d == 2:
        coords = emb.points
        xlab, ylab = "x1", "x2"
    elif emb.d == 3:
        coords = spherical_angles(emb.points)
        xlab, ylab = "azimuth", "inclination"
    else:
        coords = emb.points[:, :2]
        xlab, ylab = "x1", "x2"
    fig, ax = plt.subplots(figsize=(6, 5))
    names = sorted(set(labels))
    for c, name in enumerate(names):
        mask = np.array([lab == name for lab in labels])
        ax.scatter(coords[mask, 0], coords[mask, 1],
                   color=_CLASS_COLORS[c % len(_CLASS_COLORS)],
                   label=str(name), s=36)
    for (x, y), sid in zip(coords, shape_ids):
        ax.annotate(str(sid), (x, y), fontsize=6, alpha=0.7,
                    textcoords="offset points", xytext=(3, 3))
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(f"stress {emb.stress:.4g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def confusion_text(confusion, class_names):
    """Aligned plain-text table of the confusion matrix."""
    names = [str(nm) for nm in class_names] or \
        [str(i) for i in range(confusion.shape[0])]
    width = max(8, max(len(nm) for nm in names) + 1)
    head = " " * width + "".join(f"{nm:>{width}}" for nm in names)
    lines = [head]
    for nm, row in zip(names, confusion):
        cells = "".join(f"{v:>{width}.3f}" for v in row)
        lines.append(f"{nm:>{width}}" + cells)
    return "\n".join(lines) + "\n"
