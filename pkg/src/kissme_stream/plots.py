"""Static SVG figures rendered from an experiment report."""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ACCURACY_FILENAME = "accuracy.svg"
QSTAT_FILENAME = "qstat.svg"


def emit_plots(report, out_dir: Path, created: List[Path] | None = None) -> List[Path]:
    """Write the accuracy overlay and, for paired runs, the Q-statistic curve.

    Paths are appended to `created` before each write so a failing write
    can be cleaned up by the caller.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    positions = report.sampled_positions()
    x = report.index[positions]
    paths: List[Path] = []

    accuracy_path = out_dir / ACCURACY_FILENAME
    if created is not None:
        created.append(accuracy_path)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(x, report.acc_a[positions], label="learned metric", color="tab:blue")
    if report.has_baseline:
        ax.plot(x, report.acc_b[positions], label="identity baseline", color="tab:orange")
    ax.set_xlabel("instances")
    ax.set_ylabel("prequential accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(accuracy_path, format="svg")
    plt.close(fig)
    paths.append(accuracy_path)

    if report.has_baseline:
        qstat_path = out_dir / QSTAT_FILENAME
        if created is not None:
            created.append(qstat_path)
        fig, ax = plt.subplots(figsize=(8.0, 4.5))
        q = report.q[positions]
        ax.plot(x, q, color="tab:green", label="Q statistic")
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_xlabel("instances")
        ax.set_ylabel("Q (learned vs baseline)")
        ax.grid(True, alpha=0.3)
        finite = q[np.isfinite(q)]
        if finite.size:
            ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(qstat_path, format="svg")
        plt.close(fig)
        paths.append(qstat_path)

    return paths
