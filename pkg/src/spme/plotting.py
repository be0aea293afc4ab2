"""SVG line charts of diagnostics columns.

Output is byte-for-byte reproducible: the SVG id salt is fixed and the date
metadata is dropped.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class MissingColumnError(KeyError):
    pass


def line_chart(data: dict, x: str, columns: Sequence[str], out_path, loglog: bool = False,
               title: str | None = None) -> Path:
    """Plot ``columns`` against column ``x`` from a dict of arrays."""
    missing = [c for c in [x, *columns] if c not in data]
    if missing:
        raise MissingColumnError(f"no such column(s): {', '.join(missing)}")
    if not columns:
        raise ValueError("nothing to plot")
    out_path = Path(out_path)
    with plt.rc_context({"svg.hashsalt": "spme", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        xs = np.asarray(data[x], dtype=float)
        for col in columns:
            ys = np.asarray(data[col], dtype=float)
            if loglog:
                keep = (xs > 0) & (ys > 0)
                ax.loglog(xs[keep], ys[keep], marker="o", ms=3, label=col)
            else:
                ax.plot(xs, ys, marker="o", ms=3, label=col)
        ax.set_xlabel(x)
        if len(columns) == 1:
            ax.set_ylabel(columns[0])
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
