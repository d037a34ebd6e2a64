"""Figure rendering for the CLI report path (opt-in via ``--figures``)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render(records: list[dict], command: str, directory) -> list[Path]:
    """One PNG per quantity that has at least two grid points.

    Rows without a grid coordinate (tables, fitted constants) are skipped.
    Returns the written paths in a deterministic order.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    series = defaultdict(list)
    for rec in records:
        if rec["eta_or_tau"] is None or rec["value"] is None:
            continue
        series[(rec["metric"], rec["quantity"], rec["branch"])].append((rec["eta_or_tau"], rec["value"]))
    written = []
    for (metric, quantity, branch), pts in sorted(series.items()):
        if len(pts) < 2:
            continue
        x, y = zip(*pts)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(x, y, lw=1.2)
        ax.set_xlabel("tau" if quantity.startswith(("C_", "S_")) else "eta")
        ax.set_ylabel(quantity)
        ax.set_title(f"{metric} {quantity} ({branch})", fontsize=9)
        fig.tight_layout()
        path = out / f"{command}_{metric}_{quantity}_{branch}.png"
        fig.savefig(path, dpi=110, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
