"""Static SVG plots of a diagnostics CSV."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import read_csv  # noqa: E402

PANELS = [
    ("energy", ["E_S", "E_P", "E"]),
    ("multiplier", ["lambda"]),
    ("mass", ["mass_deficit", "mass_bound"]),
    ("discrepancy", ["sup_xi", "xi_pos_l1", "xi_l1"]),
    ("geometry", ["mu_total", "volume"]),
    ("dissipation", ["dissipation", "int_lambda_sq"]),
    ("willmore", ["willmore_proxy"]),
]


def plot_csv(path, outdir=None):
    rows = read_csv(path)
    if not rows:
        raise ValueError(f"{path}: no records")
    outdir = outdir or os.path.splitext(path)[0] + "_plots"
    os.makedirs(outdir, exist_ok=True)
    t = [r["t"] for r in rows]
    written = []
    for name, cols in PANELS:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for c in cols:
            ax.plot(t, [r[c] for r in rows], label=c)
        ax.set_xlabel("t")
        ax.set_title(name)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        f = os.path.join(outdir, f"{name}.svg")
        fig.savefig(f, format="svg")
        plt.close(fig)
        written.append(f)
    return written
