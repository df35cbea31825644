"""Report figures rendered alongside the JSON report.

Uses the object-oriented matplotlib API (no pyplot, no global backend state)
so rendering works headless and never fights the host process.
"""

from __future__ import annotations

from typing import Sequence, TYPE_CHECKING

from matplotlib.figure import Figure

if TYPE_CHECKING:
    from .encoding import Cover

__all__ = ["render_report_figure"]


def render_report_figure(
    q_trace: Sequence[float],
    cover: "Cover",
    path: str,
    title: str | None = None,
) -> None:
    """Write a two-panel PNG: fitness trace and community size profile.

    The left panel shows the best modularity per generation; the right panel
    the sizes of the final cover's communities, with overlap nodes counted in
    every community they belong to.
    """
    fig = Figure(figsize=(9.0, 3.6), dpi=150)
    ax_trace, ax_sizes = fig.subplots(1, 2)

    ax_trace.plot(range(len(q_trace)), q_trace, color="#1f6f8b", linewidth=1.6)
    ax_trace.set_xlabel("generation")
    ax_trace.set_ylabel("best modularity")
    ax_trace.set_title("convergence")
    ax_trace.grid(True, alpha=0.3)

    sizes = sorted((len(c) for c in cover.communities), reverse=True)
    ax_sizes.bar(range(1, len(sizes) + 1), sizes, color="#e3867d", edgecolor="#9a4942")
    ax_sizes.set_xlabel("community (by size rank)")
    ax_sizes.set_ylabel("members")
    n_overlap = len(cover.overlap_nodes())
    ax_sizes.set_title(f"{len(sizes)} communities, {n_overlap} overlap nodes")
    ax_sizes.set_xticks(range(1, len(sizes) + 1))

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
